#ifndef JTSIM_VERSION_HPP
#define JTSIM_VERSION_HPP

#include <array>
#include <string_view>
#include <utility>

namespace jtsim {

inline constexpr std::string_view version = "1.0.0";

/// Per-module versions recorded in run manifests. Bump a module's entry when its
/// numerical output changes.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 8> module_versions{{
    {"fockspace", "1.0.0"},
    {"hamiltonians", "1.0.0"},
    {"dynamics", "1.0.0"},
    {"pulsecompiler", "1.0.0"},
    {"protocol", "1.0.0"},
    {"tomography", "1.0.0"},
    {"adiabatic_oracle", "1.0.0"},
    {"cli", "1.0.0"},
}};

}  // namespace jtsim

#endif  // JTSIM_VERSION_HPP
