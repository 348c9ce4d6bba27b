#ifndef JTSIM_PROTOCOL_HPP
#define JTSIM_PROTOCOL_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jtsim/dynamics.hpp"
#include "jtsim/pulsecompiler.hpp"

namespace jtsim {

/// Which mid-circuit outcomes are reconstructed. `Both` combines them as p↓χ↓ + p↑χ↑;
/// a single branch yields the conditional χ of that branch.
enum class BranchSelection { Down, Up, Both };

struct ExperimentConfig {
    ModelParams model;
    Calibration cal;
    /// Lindblad noise during evolution, thermal preparation and SPAM. Empty means ideal.
    std::optional<NoiseParams> noise;
    /// 26 rather than 24: at t = T the converged population of levels 22–23 is 2.3e−6,
    /// above the 1e−6 edge guard.
    int n_max = 26;
    /// Heralded shots per branch and part. Empty means exact expectations.
    std::optional<int> shots_per_point;
    double evolution_time = 0.0;
    std::vector<double> beta1_axis;
    std::vector<double> beta2_axis;
    /// Omit the D₁ displacement; beta1_axis must then be {0}.
    bool one_mode = false;
    bool measure_imaginary = true;
    BranchSelection branches = BranchSelection::Both;
    std::uint64_t rng_seed = 1;
    /// Shuffle the execution order of the points. Results do not depend on it.
    bool randomize_order = true;
    /// Worker threads; 0 uses the hardware concurrency.
    int workers = 0;
    /// Applied to the experiment; default is jt_integrator_config(model).
    std::optional<IntegratorConfig> integrator;

    void validate() const;
};

/// 26 points over [0, 5].
std::vector<double> default_axis_1d();
/// 11 points over [0, 4].
std::vector<double> default_axis_2d();
/// One-mode χ(iβ₂) on the default 1D axis.
ExperimentConfig default_1d_experiment(double t);
/// Two-mode χ(iβ₁, iβ₂) on the default 11×11 grid.
ExperimentConfig default_2d_experiment(double t);

/// Sampled characteristic function, row-major over (beta1_axis, beta2_axis).
struct CharGrid {
    std::vector<double> beta1_axis;
    std::vector<double> beta2_axis;
    std::vector<cplx> values;
    std::vector<double> p_down;
    std::vector<double> p_up;
    /// Heralded shots behind each value; 0 for exact expectations.
    std::vector<int> shots;
    /// Only β₁, β₂ ≥ 0 is present.
    bool sampled_quadrant = true;

    std::size_t size() const { return values.size(); }
    std::size_t index(std::size_t i1, std::size_t i2) const { return i1 * beta2_axis.size() + i2; }
    cplx at(std::size_t i1, std::size_t i2) const { return values[index(i1, i2)]; }

    /// Header `beta1,beta2,re,im,p_down,p_up,shots`, one row per point.
    void write_csv(std::ostream& out) const;
    static CharGrid read_csv(std::istream& in);
};

// Stages -------------------------------------------------------------------------

/// |↓⟩|0⟩|0⟩.
PureState prepare(const HilbertConfig& cfg);
/// |↓⟩⟨↓| ⊗ thermal(n̄) ⊗ thermal(n̄).
MixedState prepare_thermal(const HilbertConfig& cfg, double n_bar);

/// Run the compiled initialisation sequence: D₁(−κ/√2ω) with the qubit back in |↓⟩.
PureState initialise(const PureState& psi, const ModelParams& model, const Calibration& cal = {});
MixedState initialise(const MixedState& rho, const ModelParams& model, const Calibration& cal = {});

/// Evolve under the two simultaneous SDFs of the interaction-picture Hamiltonian for
/// time t and return the state in the frame of H^JT, i.e. e^{−iωt(n₁+n₂)}ψ_I(t).
PureState evolve_jt(const PureState& psi, const ModelParams& model, double t, const IntegratorConfig& cfg);
PureState evolve_jt(const PureState& psi, const ModelParams& model, double t);
MixedState evolve_jt(const MixedState& rho, const ModelParams& model, double t, const NoiseParams& noise,
                     const IntegratorConfig& cfg);

// Reconstruction -----------------------------------------------------------------

struct CharPoint {
    double beta1 = 0.0;
    double beta2 = 0.0;
    bool imaginary = false;
    Branch branch = Branch::Down;
    bool one_mode = false;
};

/// Exact outcome of one reconstruction circuit.
struct BranchOutcome {
    /// Probability that the mid-circuit measurement heralds the selected branch.
    double kept_probability = 0.0;
    /// ⟨σz⟩ at readout given the herald: Re χ_b for the real part, −Im χ_b for the imaginary part.
    double sigma_z = 0.0;
};

/// Emulate the reconstruction stage on `psi`: optional Rx(π), mid-circuit measurement
/// keeping |↓⟩, optional Rx(π/2), σx-basis SDFs for βⱼ/Ω₂ with motional phase
/// `phase_offset`, then ⟨σz⟩. The state is zero-padded until the displaced
/// wavepacket stays clear of the truncation edge.
BranchOutcome measure_char_point(const PureState& psi, const CharPoint& point, double phase_offset = 0.0,
                                 const Calibration& cal = {});
/// Mixed states are decomposed into eigenvectors and measured component-wise.
BranchOutcome measure_char_point(const MixedState& rho, const CharPoint& point, double phase_offset = 0.0,
                                 const Calibration& cal = {});

/// Finite-shot estimate for one branch and part.
struct SampledPoint {
    /// Estimate of ⟨σz⟩ from the heralded shots.
    double sigma_z = 0.0;
    /// Herald-rate estimate of the branch probability, corrected for the readout error.
    double kept_probability = 0.0;
    long heralded = 0;
    long attempts = 0;
};

/// Draw `shots` heralded shots. A shot is heralded with probability p_b(1−e) + p_b̄e;
/// a mis-heralded shot carries the other branch into the kept arm, where it reads
/// −x_b̄. The final readout flips with probability e. At most 1000·shots attempts are
/// made; a branch too rare to fill its shots in that budget reports what it got.
SampledPoint sample_char_point(const BranchOutcome& kept, const BranchOutcome& other, int shots, double spam_error,
                               std::mt19937_64& rng);

/// ⟨Ψ|D₁(iβ₁)D₂(iβ₂)|Ψ⟩ from exact displacement matrix elements.
/// Throws TruncationOverflow if the state's top two Fock levels hold more than 1e−6.
cplx exact_char_function(const PureState& psi, double beta1, double beta2);
/// Tr[ρ D₁(iβ₁)D₂(iβ₂)].
cplx exact_char_function(const MixedState& rho, double beta1, double beta2);

/// Exact outcomes of the four reconstruction circuits at one grid point.
struct PointOutcomes {
    BranchOutcome down_real, up_real, down_imag, up_imag;
};

/// Exact outcomes on the whole grid, row-major like CharGrid.
struct OutcomeGrid {
    std::vector<double> beta1_axis;
    std::vector<double> beta2_axis;
    std::vector<PointOutcomes> points;
};

/// Combine exact outcomes into χ: shot-sampled with per-point streams seeded by
/// (cfg.rng_seed, point index) when cfg.shots_per_point is set, otherwise the
/// infinite-shot limit of the same model.
CharGrid assemble_char_grid(const OutcomeGrid& outcomes, const ExperimentConfig& cfg);

/// Full four-stage experiment over the configured grid.
CharGrid run_reconstruction_experiment(const ExperimentConfig& cfg);
/// The device-simulation part of run_reconstruction_experiment.
OutcomeGrid run_reconstruction_outcomes(const ExperimentConfig& cfg);

/// Reconstruct χ of a given device state. `phase_offset` is the reconstruction
/// phase offset of the compiled schedule that produced it.
CharGrid reconstruct_state(const PureState& device, double phase_offset, const ExperimentConfig& cfg);
CharGrid reconstruct_state(const MixedState& device, double phase_offset, const ExperimentConfig& cfg);
OutcomeGrid measure_outcomes(const PureState& device, double phase_offset, const ExperimentConfig& cfg);
OutcomeGrid measure_outcomes(const MixedState& device, double phase_offset, const ExperimentConfig& cfg);

/// Exact χ of `psi` on the configured grid (no measurement emulation).
CharGrid exact_char_grid(const PureState& psi, const std::vector<double>& beta1_axis,
                         const std::vector<double>& beta2_axis);

/// Run f(0) … f(n−1) on `workers` threads (0 = hardware concurrency). Rethrows the first exception.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f);

}  // namespace jtsim

#endif  // JTSIM_PROTOCOL_HPP
