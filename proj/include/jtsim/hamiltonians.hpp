#ifndef JTSIM_HAMILTONIANS_HPP
#define JTSIM_HAMILTONIANS_HPP

#include <functional>
#include <numbers>
#include <vector>

#include "jtsim/fockspace.hpp"

namespace jtsim {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// E⊗e Jahn-Teller couplings. Angular frequencies in rad/s, ħ = 1.
struct ModelParams {
    double kappa = two_pi * 1000.0;
    double omega = two_pi * 667.0;

    /// Radius of the E₋ minimum, κ/ω.
    double minimum_radius() const { return kappa / omega; }
    void validate() const;
};

/// Spin basis of a state-dependent force. `Z` realizes σz-type forces by
/// conjugating the equatorial operator with Rx(π/2).
enum class SpinBasis { Equatorial, Z };

/// (Ω/2) σ_φs (a† e^{i(φm+δt)} + a e^{−i(φm+δt)}) on mode 1 or 2.
struct SdfParams {
    int mode = 1;
    double spin_phase = 0.0;
    double detuning = 0.0;
    double rabi = 0.0;
    double motional_phase = 0.0;
    SpinBasis basis = SpinBasis::Equatorial;
};

/// Red/blue sideband pair with explicit center-line and motional detunings.
/// `rabi` already includes the Lamb-Dicke factor.
struct SidebandParams {
    int mode = 1;
    double center_detuning = 0.0;
    double motional_detuning = 0.0;
    double rabi = 0.0;
    double spin_phase = 0.0;
    double motional_phase = 0.0;
};

/// H(t) = Σₖ cₖ(t) Oₖ with sparse composite operators Oₖ.
class TimeDependentOperator {
public:
    using Coefficient = std::function<cplx(double)>;
    struct Term {
        Coefficient coefficient;
        Operator op;
    };

    TimeDependentOperator() = default;
    explicit TimeDependentOperator(const HilbertConfig& cfg) : cfg_(cfg) {}

    void add(Operator op, Coefficient coefficient);
    void add_constant(Operator op);
    TimeDependentOperator& operator+=(const TimeDependentOperator& other);

    Operator at(double t) const;
    /// out = H(t)·in.
    void apply(double t, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
    void apply(double t, const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const;
    /// out = −i[H(t), ρ].
    void commutator(double t, const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const;

    bool empty() const { return terms_.empty(); }
    const HilbertConfig& cfg() const { return cfg_; }
    const std::vector<Term>& terms() const { return terms_; }

private:
    HilbertConfig cfg_;
    std::vector<Term> terms_;
};

TimeDependentOperator operator+(TimeDependentOperator a, const TimeDependentOperator& b);

struct Surfaces {
    double lower;
    double upper;
};

/// Adiabatic surfaces E± = ω(Q₁² + Q₂²)/2 ± κ√(Q₁² + Q₂²).
Surfaces jt_surfaces(double q1, double q2, const ModelParams& p);

/// Electronic coupling matrix κ(σz Q₁ + σx Q₂) at a fixed nuclear geometry.
Eigen::Matrix2d vibronic_coupling(double q1, double q2, const ModelParams& p);

/// σ_φs, or Rx(π/2) σ_φs Rx(−π/2) for SpinBasis::Z.
Eigen::Matrix2cd sdf_spin_operator(const SdfParams& s);

TimeDependentOperator sdf_drive(const HilbertConfig& cfg, const SdfParams& s);
Operator sdf_hamiltonian(const HilbertConfig& cfg, const SdfParams& s, double t);

/// Interaction-picture Jahn-Teller Hamiltonian as two simultaneous forces:
/// σz-basis on B₁ and σx-basis on B₂, each with δ = ω, Ω = √2κ, φm = 0.
TimeDependentOperator jt_interaction_hamiltonian(const HilbertConfig& cfg, const ModelParams& p);
/// The same Hamiltonian written term by term, (κ/√2)[σz(a₁†e^{iωt} + h.c.) + σx(a₂†e^{iωt} + h.c.)].
TimeDependentOperator jt_interaction_hamiltonian_direct(const HilbertConfig& cfg, const ModelParams& p);

/// Time-independent H = ω(n₁ + n₂ + 1) + κ(σz Q₁ + σx Q₂).
Operator jt_hamiltonian(const HilbertConfig& cfg, const ModelParams& p);

/// (Ω/2) σ⁺ e^{i(δω₀t + φs)} [a e^{−i(δωm t + φm)} + a† e^{i(δωm t + φm)}] + h.c.
TimeDependentOperator sideband_sdf_drive(const HilbertConfig& cfg, const SidebandParams& s);
Operator sideband_sdf_hamiltonian(const HilbertConfig& cfg, const SidebandParams& s, double t);

}  // namespace jtsim

#endif  // JTSIM_HAMILTONIANS_HPP
