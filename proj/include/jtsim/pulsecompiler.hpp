#ifndef JTSIM_PULSECOMPILER_HPP
#define JTSIM_PULSECOMPILER_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jtsim/dynamics.hpp"
#include "jtsim/hamiltonians.hpp"

namespace jtsim {

/// Calibrated frequencies and Rabi rates. Everything is rad/s.
///
/// The compiler works in the frame of ω̄₀ and ω̄ₘ, so the absolute values only
/// enter `sideband_tones`.
struct Calibration {
    /// ¹⁷¹Yb⁺ ground-state hyperfine splitting.
    double qubit_freq = two_pi * 12.642812118e9;
    double mode_freq1 = two_pi * 1.34e6;
    double mode_freq2 = two_pi * 1.47e6;
    /// Initialisation SDF.
    double rabi_init = two_pi * 2.23e3;
    /// Measured evolution SDF rate √2κ. Informational; compile() uses the model's κ.
    double rabi_evolution = two_pi * 1.42e3;
    /// Reconstruction SDF, βⱼ = Ω₂τⱼ.
    double rabi_reconstruction = two_pi * 2.31e3;
    /// Carrier Rabi rate for qubit rotations. Infinity makes rotations instantaneous.
    double carrier_rabi = std::numeric_limits<double>::infinity();

    void validate() const;
};

// Abstract circuit ---------------------------------------------------------

enum class StageKind { Prepare, Initialise, Evolve, Reconstruct };

enum class Branch { Down, Up };

struct Stage {
    StageKind kind = StageKind::Prepare;
    /// Initialise: target displacement of B₁. Defaults to −κ/√2ω.
    std::optional<cplx> alpha_target;
    /// Evolve: duration t in s.
    double duration = 0.0;
    /// Reconstruct: displacement amplitudes βⱼ ≥ 0 and readout options.
    double beta1 = 0.0;
    double beta2 = 0.0;
    bool imaginary = false;
    Branch branch = Branch::Down;
    /// Omit the D₁ displacement (one-mode reconstruction).
    bool one_mode = false;
};

/// Ordered prefix of prepare → initialise → evolve → reconstruct.
struct Circuit {
    std::vector<Stage> stages;

    /// Throws InvalidArgument unless the stages form a prefix of the four-stage sequence.
    void validate() const;
};

/// Full four-stage circuit for one characteristic-function point.
Circuit jt_circuit(double t, double beta1 = 0.0, double beta2 = 0.0, bool imaginary = false,
                   Branch branch = Branch::Down);

/// Parse one stage per line: `prepare`, `initialise [alpha_re=X] [alpha_im=Y]`,
/// `evolve t=SECONDS`, `reconstruct beta1=X beta2=Y [part=real|imag] [branch=down|up] [one_mode]`.
/// `#` starts a comment. Unknown stage names throw InvalidArgument.
Circuit parse_circuit(std::string_view text);

// Compiled schedule ----------------------------------------------------------

enum class PulseKind { QubitRotation, Sdf, MidCircuitMeasure, Measure, Idle };

struct Pulse {
    PulseKind kind = PulseKind::Idle;
    double start_time = 0.0;
    double duration = 0.0;
    /// QubitRotation: exp(−iθσ_φ/2).
    double axis_phase = 0.0;
    double angle = 0.0;
    /// Sdf: always equatorial; σz-type forces appear as Rx-wrapped σy forces.
    SdfParams sdf;
    /// Sdf pulses sharing a group id are driven simultaneously.
    int group = -1;
    /// Circuit stage the pulse was compiled from.
    StageKind stage = StageKind::Prepare;
};

struct PhaseOffsets {
    double initialisation = 0.0;
    double reconstruction = 0.0;
};

/// τ₁δ for the initialisation SDF and (t + τ₁)δ for the reconstruction SDFs.
PhaseOffsets phase_tracking_offsets(double tau1, double t, double delta);

struct Schedule {
    std::vector<Pulse> pulses;
    /// Start time of the evolution SDFs on the sequence clock (the initialisation length).
    double tau1 = 0.0;
    double evolution_time = 0.0;
    /// Motional detuning of the evolution SDFs; 0 when the circuit has no evolution.
    double delta = 0.0;
    PhaseOffsets offsets;

    double end_time() const;
    /// The pulses of one circuit stage, with the schedule metadata kept. A rotation
    /// merged across a stage boundary belongs to the earlier stage.
    Schedule select(StageKind stage) const;
    /// Tab-separated lines: kind, start_time_s, duration_s, phases_rad, rabi_rad_s, detuning_rad_s.
    std::string to_text() const;
    static Schedule from_text(std::string_view text);
};

struct CompileOptions {
    bool phase_tracking = true;
    /// Fuse back-to-back rotations about the same axis.
    bool merge_rotations = true;
};

Schedule compile(const Circuit& circuit, const Calibration& cal, const ModelParams& model,
                 const CompileOptions& options = {});

/// Pulses of a reconstruction stage alone, starting at `start_time`, with the
/// reconstruction SDFs carrying motional phase `phase_offset`.
Schedule reconstruction_schedule(const Stage& stage, const Calibration& cal, double phase_offset = 0.0,
                                 double start_time = 0.0);

/// τ = 2|α|/Ω for an SDF acting on a spin eigenstate.
double displacement_calibration(cplx alpha_target, double rabi);

struct LaserTones {
    double blue = 0.0;
    double red = 0.0;
};

/// Raman beat frequencies realizing a pulse: (ω_b + ω_r)/2 = ω̄₀ for every pulse and
/// (ω_b − ω_r)/2 = ω̄ₘ + δ for SDFs. Carriers return ω_b = ω_r = ω̄₀.
LaserTones sideband_tones(const Pulse& pulse, const Calibration& cal);

std::string format_phase(double phase);
/// Wrap into [0, 2π).
double wrap_phase(double phase);

// Execution --------------------------------------------------------------------

/// Deviation of the real device from the calibration, in rad/s.
/// A mode error ε shifts every SDF on that mode to motional detuning δ + ε.
struct TrueSystem {
    double qubit_detuning = 0.0;
    double mode_detuning1 = 0.0;
    double mode_detuning2 = 0.0;
};

struct ExecutionResult {
    PureState state;
    /// Probability of the kept outcome of each mid-circuit measurement, multiplied.
    double kept_probability = 1.0;
    /// ⟨σz⟩ at the final Measure pulse, if one was executed.
    std::optional<double> sigma_z;
};

/// Run a schedule on a pure state. Resonant single SDFs are applied as exact
/// conditional displacements; detuned or simultaneous SDFs are integrated.
/// Mid-circuit measurements project onto |↓⟩ and renormalize.
ExecutionResult execute(const Schedule& schedule, PureState psi, const TrueSystem& truth = {},
                        const IntegratorConfig& cfg = {});

struct MixedExecutionResult {
    MixedState state;
    double kept_probability = 1.0;
    std::optional<double> sigma_z;
};

/// Density-matrix execution. When `evolution_noise` is given, the Lindblad terms act
/// during simultaneous SDF groups (the evolution stage) and nowhere else.
MixedExecutionResult execute(const Schedule& schedule, MixedState rho, const TrueSystem& truth = {},
                             const IntegratorConfig& cfg = {}, const NoiseParams* evolution_noise = nullptr);

// Mode-frequency calibration --------------------------------------------------

struct ModeCalibrationConfig {
    double rabi = two_pi * 2.23e3;
    /// Length of each of the two SDF pulses.
    double pulse_duration = 2.5e-4;
    int shots = 500;
    double spam_error = 0.005;
    int n_max = 20;
    std::uint64_t seed = 1;
    /// Half-width of the parabolic fit window, in scan points.
    int fit_half_width = 6;
};

struct ModeCalibrationResult {
    std::vector<double> scan;
    /// Noiseless P↑ at each scan frequency.
    std::vector<double> p_up_exact;
    /// Shot-sampled P↑ including readout error.
    std::vector<double> p_up_measured;
    double estimate = 0.0;
    double curvature = 0.0;
};

/// P↑ after the two-pulse sequence with the lasers set to `set_freq` on a mode whose
/// true frequency is `true_freq`, simulated by executing the pulse pair.
double calibration_p_up(double set_freq, double true_freq, const ModeCalibrationConfig& cfg);

/// Scan the set frequency, sample P↑ with shot noise and readout error, and fit a
/// parabola near the minimum. Throws FitFailure if the scan does not bracket a minimum.
ModeCalibrationResult calibrate_mode_frequency(double true_freq, const std::vector<double>& scan,
                                               const ModeCalibrationConfig& cfg = {});

/// `points` equally spaced frequencies in [center − half_width, center + half_width].
std::vector<double> frequency_scan(double center, double half_width, int points);

// Drift ---------------------------------------------------------------------------

/// Gaussian random walk of the two mode-frequency offsets.
struct DriftModel {
    /// Allan deviation (rad/s) reached at `recal_interval`.
    double allan_dev_at_interval = two_pi * 26.0;
    double recal_interval = 360.0;
    double sample_period = 10.0;
    bool common_mode = true;
    /// Correlation of the B₁ and B₂ random-walk increments when common_mode is on.
    double correlation = 0.99;
    std::uint64_t rng_seed = 2023;

    void validate() const;
};

struct DriftSeries {
    double sample_period = 0.0;
    std::vector<double> mode1;
    std::vector<double> mode2;
};

DriftSeries simulate_drift(const DriftModel& dm, double horizon);

/// Overlapping Allan deviation of samples y taken every `sample_period`, at τ = m·sample_period.
double allan_deviation(const std::vector<double>& y, double sample_period, double tau);

/// Longest candidate interval whose Allan deviation stays within `tolerance`.
/// Returns the shortest candidate if none qualifies.
double choose_recalibration_interval(const DriftSeries& series, double tolerance, std::vector<double> candidates);

/// Pearson correlation of two equally long series.
double correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace jtsim

#endif  // JTSIM_PULSECOMPILER_HPP
