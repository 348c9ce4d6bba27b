#ifndef JTSIM_DYNAMICS_HPP
#define JTSIM_DYNAMICS_HPP

#include <limits>
#include <vector>

#include "jtsim/fockspace.hpp"
#include "jtsim/hamiltonians.hpp"
#include "jtsim/integrator.hpp"

namespace jtsim {

/// Motional decoherence and readout imperfections, identical for both modes.
struct NoiseParams {
    /// Heating rate ṅ̄ in quanta/s.
    double heating_rate = 0.2;
    /// Motional coherence time T₂* in s. Infinity disables dephasing.
    double dephasing_t2 = 0.035;
    double initial_n_bar = 0.04;
    /// Symmetric bit-flip probability of every qubit readout.
    double spam_error = 0.005;

    static NoiseParams off()
    {
        return {0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0};
    }
    void validate() const;
};

/// Default step bound for Jahn-Teller dynamics: (2π/ω)/200.
IntegratorConfig jt_integrator_config(const ModelParams& p);

/// Solve i∂ₜψ = H(t)ψ from t0 to t1.
///
/// Throws IntegratorFailure if the norm drifts by more than 1e−7. The drift is
/// reported, never renormalized away.
PureState evolve_unitary(const PureState& psi, const TimeDependentOperator& h, double t0, double t1,
                         const IntegratorConfig& cfg = {}, EvolutionReport* report = nullptr);

/// Collapse operators for symmetric heating (√ṅ̄ a, √ṅ̄ a†) and dephasing
/// (√(2/T₂*) a†a) on each mode.
std::vector<Operator> lindblad_operators(const HilbertConfig& cfg, const NoiseParams& noise);

/// Σₖ (LₖρLₖ† − ½{Lₖ†Lₖ, ρ}) for the operators of lindblad_operators, applied
/// elementwise and by one-quantum shifts instead of sparse products.
class Dissipator {
public:
    Dissipator(const HilbertConfig& cfg, const NoiseParams& noise);

    bool empty() const { return empty_; }
    /// out += D[ρ].
    void add_to(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const;

private:
    HilbertConfig cfg_;
    bool empty_ = true;
    double heating_ = 0.0;
    /// Dephasing and anticommutator terms: D[ρ]ᵢⱼ ∋ factor(i, j)·ρᵢⱼ.
    Eigen::MatrixXd factor_;
    // Per basis index and mode: √(n+1) (0 on the top level) and √n.
    std::vector<double> up_[2], down_[2];
};

/// ρ̇ = −i[H, ρ] + Σₖ (LₖρLₖ† − ½{Lₖ†Lₖ, ρ}).
///
/// Throws IntegratorFailure if the trace drifts by more than 1e−6.
MixedState evolve_lindblad(const MixedState& rho, const TimeDependentOperator& h, const NoiseParams& noise,
                           double t0, double t1, const IntegratorConfig& cfg = {},
                           EvolutionReport* report = nullptr);

/// Exact propagation under a time-independent Hermitian operator by diagonalization.
class SpectralPropagator {
public:
    explicit SpectralPropagator(const Operator& h);

    PureState propagate(const PureState& psi, double t) const;
    const Eigen::VectorXd& energies() const { return energies_; }

private:
    HilbertConfig cfg_;
    Eigen::VectorXd energies_;
    Eigen::MatrixXcd vectors_;
};

/// Interaction picture → Schrödinger picture for H₀ = ω(n₁ + n₂): applies e^{−iωt(n₁+n₂)}.
PureState to_schrodinger_frame(PureState psi, const ModelParams& p, double t);
MixedState to_schrodinger_frame(MixedState rho, const ModelParams& p, double t);

}  // namespace jtsim

#endif  // JTSIM_DYNAMICS_HPP
