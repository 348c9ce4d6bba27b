#ifndef JTSIM_ADIABATIC_ORACLE_HPP
#define JTSIM_ADIABATIC_ORACLE_HPP

#include <string>
#include <vector>

#include "jtsim/hamiltonians.hpp"
#include "jtsim/tomography.hpp"

namespace jtsim {

/// Wavefunction on the lower adiabatic surface, sampled on a periodic square grid.
/// psi(i, j) is the value at (q1_axis[i], q2_axis[j]); Σ|ψ|² dq² = 1.
struct GridWavepacket {
    std::vector<double> q1_axis;
    std::vector<double> q2_axis;
    Eigen::MatrixXcd psi;

    double spacing() const { return q1_axis[1] - q1_axis[0]; }
    double norm() const;
};

struct OracleGrid {
    int points = 256;
    /// The grid covers [lo, hi) with periodic wrap.
    double lo = -5.0;
    double hi = 5.0;
};

/// Harmonic ground state displaced to the surface minimum at (−κ/ω, 0).
GridWavepacket initial_wavepacket(const ModelParams& model, const OracleGrid& grid = {});

/// Default step (2π/ω)/400.
double default_oracle_step(const ModelParams& model);

struct OracleReport {
    int steps = 0;
    double dt = 0.0;
    /// Set when dt exceeds 2π/(50ω); the message says by how much.
    bool cfl_warning = false;
    std::string warning;
};

/// Strang split-operator propagation under ω(P₁² + P₂²)/2 + E₋(Q₁, Q₂) for time t.
///
/// The electronic basis is single valued and no vector potential is added, so the
/// geometric phase is absent. The step is shortened so that an integer number of
/// steps lands on t. Steps are unitary, so a large dt degrades accuracy but never
/// stability; it raises report.cfl_warning instead of throwing.
GridWavepacket propagate_adiabatic(const GridWavepacket& wp, const ModelParams& model, double t, double dt,
                                   OracleReport* report = nullptr);

/// ⟨ω(P₁² + P₂²)/2 + E₋⟩ in rad/s.
double adiabatic_energy(const GridWavepacket& wp, const ModelParams& model);

/// |ψ|² at arbitrary points by trigonometric interpolation of the periodic grid.
DensityGrid wavepacket_density(const GridWavepacket& wp, const std::vector<double>& q1_axis,
                               const std::vector<double>& q2_axis);

struct GpComparison {
    /// Exact two-surface evolution, which contains the geometric phase.
    DensityGrid full;
    /// Single-surface adiabatic evolution without it.
    DensityGrid oracle;
    double full_contrast = 0.0;
    double oracle_contrast = 0.0;
    OracleReport oracle_report;
};

struct GpComparisonOptions {
    int n_max = 26;
    OracleGrid grid;
    /// 0 selects default_oracle_step.
    double dt = 0.0;
    std::vector<double> q_axis = default_q_axis();
};

/// Both densities at time t on a common Q grid, with node_contrast of each.
GpComparison compare_gp_vs_nogp(const ModelParams& model, double t, const GpComparisonOptions& options = {});

}  // namespace jtsim

#endif  // JTSIM_ADIABATIC_ORACLE_HPP
