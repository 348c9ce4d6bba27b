#include "jtsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "jtsim/errors.hpp"

namespace jtsim {

namespace {

constexpr double edge_limit = 1e-6;
// Top-four-level population allowed after the reconstruction displacements.
constexpr double padding_edge = 1e-18;
constexpr int padding_cap = 200;
// Eigencomponents of a mixed state below this weight are dropped.
constexpr double component_floor = 1e-10;
// Attempts allowed per requested heralded shot.
constexpr long attempt_budget = 1000;

std::vector<double> linspace(double lo, double hi, int n)
{
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
    return v;
}

Circuit evolution_prefix(double t)
{
    Circuit c = jt_circuit(t);
    c.stages.pop_back();
    return c;
}

void require_down(const Eigen::Matrix2cd& qubit)
{
    if (std::abs(qubit(1, 1)) > 1e-8) throw InvalidArgument("initialisation requires the qubit in |down>");
}

// Highest Fock level of either mode carrying more than `floor` population.
int occupied_levels(const PureState& psi, double floor)
{
    int top = 0;
    for (int mode = 1; mode <= 2; ++mode) {
        const Eigen::VectorXd pop = reduced_mode(psi, mode).diagonal().real();
        for (int k = int(pop.size()) - 1; k > top; --k)
            if (pop(k) > floor) {
                top = k;
                break;
            }
    }
    return top + 1;
}

Stage reconstruction_stage(const CharPoint& p)
{
    Stage s{StageKind::Reconstruct};
    s.beta1 = p.beta1;
    s.beta2 = p.beta2;
    s.imaginary = p.imaginary;
    s.branch = p.branch;
    s.one_mode = p.one_mode;
    return s;
}

struct Component {
    double weight;
    PureState state;
};

std::vector<Component> decompose(const MixedState& rho)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.rho);
    if (es.info() != Eigen::Success) throw IntegratorFailure("density matrix diagonalization failed");
    std::vector<Component> out;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double w = es.eigenvalues()(k);
        if (w > component_floor) out.push_back({w, PureState{rho.cfg, es.eigenvectors().col(k)}});
    }
    return out;
}

// Resonant, ungrouped SDFs are fixed conditional displacements, so their operators
// can be built once and shared by every component.
bool displacement_only(const Schedule& s)
{
    for (const Pulse& p : s.pulses)
        if (p.kind == PulseKind::Sdf && (p.group >= 0 || p.sdf.detuning != 0.0)) return false;
    return true;
}

struct Displacement {
    Eigen::Matrix2cd plus, minus;
    ModeMatrix d_plus, d_minus;
};

BranchOutcome measure_components(const std::vector<Component>& parts, const CharPoint& point, double phase_offset,
                                 const Calibration& cal)
{
    BranchOutcome total;
    double weighted = 0.0;
    const Schedule s = reconstruction_schedule(reconstruction_stage(point), cal, phase_offset);
    if (!displacement_only(s) || parts.empty()) {
        for (const Component& c : parts) {
            const BranchOutcome b = measure_char_point(c.state, point, phase_offset, cal);
            total.kept_probability += c.weight * b.kept_probability;
            weighted += c.weight * b.kept_probability * b.sigma_z;
        }
        total.sigma_z = total.kept_probability > 0.0 ? weighted / total.kept_probability : 0.0;
        return total;
    }

    const double shift = 0.5 * std::max(point.one_mode ? 0.0 : point.beta1, point.beta2);
    int occupied = 0;
    for (const Component& c : parts) occupied = std::max(occupied, occupied_levels(c.state, 1e-20));
    const double reach = std::sqrt(double(occupied)) + shift;
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    for (int n = std::max(parts.front().state.cfg.n_max, int(std::ceil(reach * reach)) + 12);; n += 8) {
        if (n > padding_cap) throw TruncationOverflow("reconstruction displacement needs more than 200 Fock levels", 1.0);
        std::vector<Displacement> ops;
        for (const Pulse& p : s.pulses) {
            if (p.kind != PulseKind::Sdf) continue;
            const Eigen::Matrix2cd sigma = sdf_spin_operator(p.sdf);
            const cplx alpha = cplx(0.0, -0.5) * p.sdf.rabi * p.duration * std::polar(1.0, p.sdf.motional_phase);
            ops.push_back({0.5 * (id + sigma), 0.5 * (id - sigma), displacement_op(alpha, n), displacement_op(-alpha, n)});
        }

        total = {};
        weighted = 0.0;
        bool fits = true;
        for (const Component& c : parts) {
            PureState psi = retruncate(c.state, n);
            double kept = 1.0, sigma_z = 0.0;
            auto op = ops.begin();
            for (const Pulse& p : s.pulses) {
                if (p.kind == PulseKind::QubitRotation) {
                    apply_qubit(psi, equatorial_rotation(p.axis_phase, p.angle));
                } else if (p.kind == PulseKind::Sdf) {
                    PureState other = psi;
                    apply_qubit(other, op->plus);
                    apply_mode(other, op->d_plus, p.sdf.mode);
                    apply_qubit(psi, op->minus);
                    apply_mode(psi, op->d_minus, p.sdf.mode);
                    psi.amplitudes += other.amplitudes;
                    ++op;
                } else if (p.kind == PulseKind::MidCircuitMeasure) {
                    const double k = psi.block(0).squaredNorm();
                    psi.block(1).setZero();
                    kept *= k;
                    if (k == 0.0) break;
                    psi.amplitudes /= std::sqrt(k);
                } else if (p.kind == PulseKind::Measure) {
                    sigma_z = psi.block(0).squaredNorm() - psi.block(1).squaredNorm();
                }
            }
            if (kept <= 1e-14) {
                total.kept_probability += c.weight * kept;
                continue;
            }
            if (edge_population(psi, 4) >= padding_edge) {
                fits = false;
                break;
            }
            total.kept_probability += c.weight * kept;
            weighted += c.weight * kept * sigma_z;
        }
        if (fits) break;
    }
    total.sigma_z = total.kept_probability > 0.0 ? weighted / total.kept_probability : 0.0;
    return total;
}

// Infinite-shot limit of the sampling model: p̂ → p_b, x̂ → (1 − 2e)x_eff.
double expected_sigma_z(const BranchOutcome& kept, const BranchOutcome& other, double e)
{
    const double rate = kept.kept_probability * (1 - e) + other.kept_probability * e;
    if (rate <= 0.0) return 0.0;
    const double x = (kept.kept_probability * (1 - e) * kept.sigma_z - other.kept_probability * e * other.sigma_z) / rate;
    return (1 - 2 * e) * x;
}

struct PointResult {
    cplx value;
    double p_down = 0.0;
    double p_up = 0.0;
    int shots = 0;
};

PointResult assemble_point(const PointOutcomes& o, const ExperimentConfig& cfg, std::size_t index)
{
    std::seed_seq seq{std::uint32_t(cfg.rng_seed & 0xffffffffu), std::uint32_t(cfg.rng_seed >> 32),
                      std::uint32_t(index)};
    std::mt19937_64 rng(seq);
    const double e = cfg.noise ? cfg.noise->spam_error : 0.0;

    PointResult r;
    double x[2] = {0.0, 0.0};
    double p_sum[2] = {0.0, 0.0};
    int passes = 0;
    for (bool imag : {false, true}) {
        if (imag && !cfg.measure_imaginary) continue;
        ++passes;
        const BranchOutcome& down = imag ? o.down_imag : o.down_real;
        const BranchOutcome& up = imag ? o.up_imag : o.up_real;
        double est_down, est_up, p_down, p_up;
        if (cfg.shots_per_point) {
            const int n = *cfg.shots_per_point;
            // An unselected branch is not run; it may never be heralded.
            const bool want_down = cfg.branches != BranchSelection::Up;
            const bool want_up = cfg.branches != BranchSelection::Down;
            const SampledPoint sd = want_down ? sample_char_point(down, up, n, e, rng) : SampledPoint{};
            const SampledPoint su = want_up ? sample_char_point(up, down, n, e, rng) : SampledPoint{};
            est_down = sd.sigma_z;
            est_up = su.sigma_z;
            p_down = want_down ? sd.kept_probability : 1.0 - su.kept_probability;
            p_up = want_up ? su.kept_probability : 1.0 - sd.kept_probability;
            r.shots = n;
        } else {
            est_down = expected_sigma_z(down, up, e);
            est_up = expected_sigma_z(up, down, e);
            p_down = down.kept_probability;
            p_up = up.kept_probability;
        }
        double value = 0.0;
        switch (cfg.branches) {
        case BranchSelection::Down:
            value = est_down;
            break;
        case BranchSelection::Up:
            value = est_up;
            break;
        case BranchSelection::Both:
            value = p_down * est_down + p_up * est_up;
            break;
        }
        // The imaginary pass reads −Im χ.
        x[imag ? 1 : 0] = imag ? -value : value;
        p_sum[0] += p_down;
        p_sum[1] += p_up;
    }
    r.value = cplx(x[0], x[1]);
    r.p_down = p_sum[0] / passes;
    r.p_up = p_sum[1] / passes;
    return r;
}

template <typename Measure>
OutcomeGrid measure_grid(const ExperimentConfig& cfg, Measure&& measure)
{
    OutcomeGrid g;
    g.beta1_axis = cfg.beta1_axis;
    g.beta2_axis = cfg.beta2_axis;
    const std::size_t n = g.beta1_axis.size() * g.beta2_axis.size();
    g.points.resize(n);

    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < n; ++k) order[k] = k;
    if (cfg.randomize_order) {
        std::mt19937_64 shuffle(cfg.rng_seed);
        std::shuffle(order.begin(), order.end(), shuffle);
    }
    parallel_for(n, cfg.workers, [&](std::size_t slot) {
        const std::size_t k = order[slot];
        const double b1 = g.beta1_axis[k / g.beta2_axis.size()], b2 = g.beta2_axis[k % g.beta2_axis.size()];
        PointOutcomes& o = g.points[k];
        o.down_real = measure(CharPoint{b1, b2, false, Branch::Down, cfg.one_mode});
        o.up_real = measure(CharPoint{b1, b2, false, Branch::Up, cfg.one_mode});
        if (cfg.measure_imaginary) {
            o.down_imag = measure(CharPoint{b1, b2, true, Branch::Down, cfg.one_mode});
            o.up_imag = measure(CharPoint{b1, b2, true, Branch::Up, cfg.one_mode});
        }
    });
    return g;
}

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void ExperimentConfig::validate() const
{
    model.validate();
    cal.validate();
    if (noise) noise->validate();
    HilbertConfig{n_max}.validate();
    if (shots_per_point && *shots_per_point < 1) throw InvalidArgument("shots_per_point must be >= 1");
    if (!(evolution_time >= 0.0) || !std::isfinite(evolution_time)) throw InvalidArgument("evolution time must be >= 0");
    if (beta1_axis.empty() || beta2_axis.empty()) throw InvalidArgument("beta axes must not be empty");
    for (const auto* axis : {&beta1_axis, &beta2_axis})
        for (double b : *axis)
            if (!(b >= 0.0) || !std::isfinite(b)) throw InvalidArgument("beta values must be finite and >= 0");
    if (one_mode && (beta1_axis.size() != 1 || beta1_axis[0] != 0.0))
        throw InvalidArgument("a one-mode reconstruction needs beta1_axis = {0}");
    if (workers < 0) throw InvalidArgument("workers must be >= 0");
    if (integrator) integrator->validate();
}

std::vector<double> default_axis_1d() { return linspace(0.0, 5.0, 26); }

std::vector<double> default_axis_2d() { return linspace(0.0, 4.0, 11); }

ExperimentConfig default_1d_experiment(double t)
{
    ExperimentConfig c;
    c.evolution_time = t;
    c.beta1_axis = {0.0};
    c.beta2_axis = default_axis_1d();
    c.one_mode = true;
    return c;
}

ExperimentConfig default_2d_experiment(double t)
{
    ExperimentConfig c;
    c.evolution_time = t;
    c.beta1_axis = default_axis_2d();
    c.beta2_axis = default_axis_2d();
    return c;
}

// Stages ---------------------------------------------------------------------------

PureState prepare(const HilbertConfig& cfg)
{
    cfg.validate();
    return product_state(Eigen::Vector2cd(1, 0), fock_state(0, cfg.n_max), fock_state(0, cfg.n_max));
}

MixedState prepare_thermal(const HilbertConfig& cfg, double n_bar)
{
    const ModeMatrix th = thermal_state(n_bar, cfg);
    Eigen::Matrix2cd down = Eigen::Matrix2cd::Zero();
    down(0, 0) = 1.0;
    return product_state(down, th, th);
}

PureState initialise(const PureState& psi, const ModelParams& model, const Calibration& cal)
{
    require_down(reduced_qubit(psi));
    const Schedule s = compile(parse_circuit("prepare\ninitialise\n"), cal, model);
    PureState out = execute(s, psi).state;
    if (edge_population(out) > edge_limit)
        throw TruncationOverflow("initialised state leaks into the top Fock levels", edge_population(out));
    return out;
}

MixedState initialise(const MixedState& rho, const ModelParams& model, const Calibration& cal)
{
    require_down(reduced_qubit(rho));
    const Schedule s = compile(parse_circuit("prepare\ninitialise\n"), cal, model);
    MixedState out = execute(s, rho).state;
    if (edge_population(out) > edge_limit)
        throw TruncationOverflow("initialised state leaks into the top Fock levels", edge_population(out));
    return out;
}

PureState evolve_jt(const PureState& psi, const ModelParams& model, double t, const IntegratorConfig& cfg)
{
    if (!(t >= 0.0)) throw InvalidArgument("evolution time must be >= 0");
    if (t == 0.0) return psi;
    const PureState out = evolve_unitary(psi, jt_interaction_hamiltonian(psi.cfg, model), 0.0, t, cfg);
    return to_schrodinger_frame(out, model, t);
}

PureState evolve_jt(const PureState& psi, const ModelParams& model, double t)
{
    return evolve_jt(psi, model, t, jt_integrator_config(model));
}

MixedState evolve_jt(const MixedState& rho, const ModelParams& model, double t, const NoiseParams& noise,
                     const IntegratorConfig& cfg)
{
    if (!(t >= 0.0)) throw InvalidArgument("evolution time must be >= 0");
    if (t == 0.0) return rho;
    // The heating and dephasing dissipators commute with e^{−iωt(n₁+n₂)}.
    const MixedState out = evolve_lindblad(rho, jt_interaction_hamiltonian(rho.cfg, model), noise, 0.0, t, cfg);
    return to_schrodinger_frame(out, model, t);
}

// Reconstruction -----------------------------------------------------------------

BranchOutcome measure_char_point(const PureState& psi, const CharPoint& point, double phase_offset,
                                 const Calibration& cal)
{
    const Schedule s = reconstruction_schedule(reconstruction_stage(point), cal, phase_offset);
    const double shift = 0.5 * std::max(point.one_mode ? 0.0 : point.beta1, point.beta2);
    const double reach = std::sqrt(double(occupied_levels(psi, 1e-20))) + shift;
    int n = std::max(psi.cfg.n_max, int(std::ceil(reach * reach)) + 12);
    for (;; n += 8) {
        if (n > padding_cap) throw TruncationOverflow("reconstruction displacement needs more than 200 Fock levels", 1.0);
        const ExecutionResult r = execute(s, retruncate(psi, n));
        if (r.kept_probability <= 1e-14) return {r.kept_probability, 0.0};
        if (edge_population(r.state, 4) < padding_edge) return {r.kept_probability, r.sigma_z.value()};
    }
}

BranchOutcome measure_char_point(const MixedState& rho, const CharPoint& point, double phase_offset,
                                 const Calibration& cal)
{
    return measure_components(decompose(rho), point, phase_offset, cal);
}

SampledPoint sample_char_point(const BranchOutcome& kept, const BranchOutcome& other, int shots, double e,
                               std::mt19937_64& rng)
{
    if (shots < 1) throw InvalidArgument("shots must be >= 1");
    if (!(e >= 0.0 && e < 0.5)) throw InvalidArgument("readout error must lie in [0, 0.5)");
    const double pk = kept.kept_probability, po = other.kept_probability;
    const double rate = pk * (1 - e) + po * e;

    SampledPoint out;
    const long budget = attempt_budget * long(shots);
    if (double(shots) / rate <= double(budget)) {
        out.heralded = shots;
        out.attempts = shots;
        if (rate < 1.0) out.attempts += std::negative_binomial_distribution<long>(shots, rate)(rng);
    } else {
        // A branch this rare exhausts the attempt budget first.
        out.attempts = budget;
        out.heralded = std::binomial_distribution<long>(budget, rate)(rng);
    }
    const double rate_hat = double(out.heralded) / double(out.attempts);
    out.kept_probability = std::clamp((rate_hat - e) / (1 - 2 * e), 0.0, 1.0);
    if (out.heralded == 0) return out;

    const double mean = expected_sigma_z(kept, other, e);
    const double p_up_reading = std::clamp(0.5 * (1 + mean), 0.0, 1.0);
    std::binomial_distribution<long> reads(out.heralded, p_up_reading);
    out.sigma_z = 2.0 * double(reads(rng)) / double(out.heralded) - 1.0;
    return out;
}

cplx exact_char_function(const PureState& psi, double beta1, double beta2)
{
    const double edge = edge_population(psi);
    if (edge > edge_limit) throw TruncationOverflow("state leaks into the top Fock levels", edge);
    const int n = psi.cfg.n_max;
    const ModeMatrix d1 = displacement_block(cplx(0.0, beta1), n);
    const ModeMatrix d2 = displacement_block(cplx(0.0, beta2), n);
    cplx total = 0.0;
    for (int s = 0; s < 2; ++s) {
        const ModeMatrix c = psi.block(s);
        total += (c.conjugate().cwiseProduct(d1 * c * d2.transpose())).sum();
    }
    return total;
}

cplx exact_char_function(const MixedState& rho, double beta1, double beta2)
{
    const double edge = edge_population(rho);
    if (edge > edge_limit) throw TruncationOverflow("state leaks into the top Fock levels", edge);
    const int n = rho.cfg.n_max;
    const ModeMatrix d1 = displacement_block(cplx(0.0, beta1), n);
    const ModeMatrix d2t = displacement_block(cplx(0.0, beta2), n).transpose();
    // Tr[ρ (D₁⊗D₂)] = Σ D₁(j₁,i₁) Σ ρ[(i₁,i₂),(j₁,j₂)] D₂(j₂,i₂).
    cplx total = 0.0;
    for (int s = 0; s < 2; ++s) {
        const Eigen::Index base = Eigen::Index(s) * rho.cfg.block_dim();
        ModeMatrix m(n, n);
        for (int i1 = 0; i1 < n; ++i1)
            for (int j1 = 0; j1 < n; ++j1)
                m(i1, j1) = rho.rho.block(base + i1 * n, base + j1 * n, n, n).cwiseProduct(d2t).sum();
        total += m.cwiseProduct(d1.transpose()).sum();
    }
    return total;
}

OutcomeGrid measure_outcomes(const PureState& device, double phase_offset, const ExperimentConfig& cfg)
{
    cfg.validate();
    return measure_grid(cfg, [&](const CharPoint& p) { return measure_char_point(device, p, phase_offset, cfg.cal); });
}

OutcomeGrid measure_outcomes(const MixedState& device, double phase_offset, const ExperimentConfig& cfg)
{
    cfg.validate();
    const std::vector<Component> parts = decompose(device);
    return measure_grid(cfg, [&](const CharPoint& p) { return measure_components(parts, p, phase_offset, cfg.cal); });
}

CharGrid assemble_char_grid(const OutcomeGrid& outcomes, const ExperimentConfig& cfg)
{
    cfg.validate();
    const std::size_t n = outcomes.beta1_axis.size() * outcomes.beta2_axis.size();
    if (outcomes.points.size() != n) throw InvalidArgument("outcome grid is incomplete");
    CharGrid g;
    g.beta1_axis = outcomes.beta1_axis;
    g.beta2_axis = outcomes.beta2_axis;
    g.sampled_quadrant = true;
    for (std::size_t k = 0; k < n; ++k) {
        const PointResult r = assemble_point(outcomes.points[k], cfg, k);
        g.values.push_back(r.value);
        g.p_down.push_back(r.p_down);
        g.p_up.push_back(r.p_up);
        g.shots.push_back(r.shots);
    }
    return g;
}

CharGrid reconstruct_state(const PureState& device, double phase_offset, const ExperimentConfig& cfg)
{
    return assemble_char_grid(measure_outcomes(device, phase_offset, cfg), cfg);
}

CharGrid reconstruct_state(const MixedState& device, double phase_offset, const ExperimentConfig& cfg)
{
    return assemble_char_grid(measure_outcomes(device, phase_offset, cfg), cfg);
}

OutcomeGrid run_reconstruction_outcomes(const ExperimentConfig& cfg)
{
    cfg.validate();
    const HilbertConfig hc{cfg.n_max};
    const Schedule schedule = compile(evolution_prefix(cfg.evolution_time), cfg.cal, cfg.model);
    const IntegratorConfig icfg = cfg.integrator.value_or(jt_integrator_config(cfg.model));

    if (cfg.noise) {
        const MixedState rho0 = prepare_thermal(hc, cfg.noise->initial_n_bar);
        const MixedState device = execute(schedule, rho0, {}, icfg, &*cfg.noise).state;
        if (edge_population(device) > edge_limit)
            throw TruncationOverflow("device state leaks into the top Fock levels", edge_population(device));
        return measure_outcomes(device, schedule.offsets.reconstruction, cfg);
    }
    const PureState device = execute(schedule, prepare(hc), {}, icfg).state;
    if (edge_population(device) > edge_limit)
        throw TruncationOverflow("device state leaks into the top Fock levels", edge_population(device));
    return measure_outcomes(device, schedule.offsets.reconstruction, cfg);
}

CharGrid run_reconstruction_experiment(const ExperimentConfig& cfg)
{
    return assemble_char_grid(run_reconstruction_outcomes(cfg), cfg);
}

CharGrid exact_char_grid(const PureState& psi, const std::vector<double>& beta1_axis,
                         const std::vector<double>& beta2_axis)
{
    CharGrid g;
    g.beta1_axis = beta1_axis;
    g.beta2_axis = beta2_axis;
    const Eigen::Matrix2cd q = reduced_qubit(psi);
    for (double b1 : beta1_axis)
        for (double b2 : beta2_axis) {
            g.values.push_back(exact_char_function(psi, b1, b2));
            g.p_down.push_back(q(0, 0).real());
            g.p_up.push_back(q(1, 1).real());
            g.shots.push_back(0);
        }
    g.sampled_quadrant = std::all_of(beta1_axis.begin(), beta1_axis.end(), [](double b) { return b >= 0.0; }) &&
                         std::all_of(beta2_axis.begin(), beta2_axis.end(), [](double b) { return b >= 0.0; });
    return g;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f)
{
    std::size_t threads = workers > 0 ? std::size_t(workers) : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t k = 0; k < n; ++k) f(k);
        return;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr failure;
    auto work = [&] {
        for (;;) {
            std::size_t k;
            {
                std::lock_guard lock(mu);
                if (failure || next >= n) return;
                k = next++;
            }
            try {
                f(k);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// CSV ------------------------------------------------------------------------------

void CharGrid::write_csv(std::ostream& out) const
{
    out << "beta1,beta2,re,im,p_down,p_up,shots\n";
    for (std::size_t i1 = 0; i1 < beta1_axis.size(); ++i1)
        for (std::size_t i2 = 0; i2 < beta2_axis.size(); ++i2) {
            const std::size_t k = index(i1, i2);
            out << fmt(beta1_axis[i1]) << ',' << fmt(beta2_axis[i2]) << ',' << fmt(values[k].real()) << ','
                << fmt(values[k].imag()) << ',' << fmt(p_down[k]) << ',' << fmt(p_up[k]) << ',' << shots[k] << '\n';
        }
}

CharGrid CharGrid::read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "beta1,beta2,re,im,p_down,p_up,shots")
        throw InvalidArgument("characteristic-function CSV must start with beta1,beta2,re,im,p_down,p_up,shots");
    struct Row {
        double b1, b2, re, im, pd, pu;
        int shots;
    };
    std::vector<Row> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Row r{};
        char tail = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%d%c", &r.b1, &r.b2, &r.re, &r.im, &r.pd, &r.pu, &r.shots,
                        &tail) != 7)
            throw InvalidArgument("malformed CSV row at line " + std::to_string(lineno));
        rows.push_back(r);
    }
    CharGrid g;
    for (const Row& r : rows) {
        if (std::find(g.beta1_axis.begin(), g.beta1_axis.end(), r.b1) == g.beta1_axis.end()) g.beta1_axis.push_back(r.b1);
        if (std::find(g.beta2_axis.begin(), g.beta2_axis.end(), r.b2) == g.beta2_axis.end()) g.beta2_axis.push_back(r.b2);
    }
    std::sort(g.beta1_axis.begin(), g.beta1_axis.end());
    std::sort(g.beta2_axis.begin(), g.beta2_axis.end());
    const std::size_t n = g.beta1_axis.size() * g.beta2_axis.size();
    if (rows.size() != n) throw InvalidArgument("CSV rows do not form a complete grid");
    g.values.assign(n, 0.0);
    g.p_down.assign(n, 0.0);
    g.p_up.assign(n, 0.0);
    g.shots.assign(n, 0);
    std::vector<bool> seen(n, false);
    for (const Row& r : rows) {
        const std::size_t i1 = std::lower_bound(g.beta1_axis.begin(), g.beta1_axis.end(), r.b1) - g.beta1_axis.begin();
        const std::size_t i2 = std::lower_bound(g.beta2_axis.begin(), g.beta2_axis.end(), r.b2) - g.beta2_axis.begin();
        const std::size_t k = g.index(i1, i2);
        if (seen[k]) throw InvalidArgument("duplicate grid point in CSV");
        seen[k] = true;
        g.values[k] = cplx(r.re, r.im);
        g.p_down[k] = r.pd;
        g.p_up[k] = r.pu;
        g.shots[k] = r.shots;
    }
    g.sampled_quadrant = g.beta1_axis.front() >= 0.0 && g.beta2_axis.front() >= 0.0;
    return g;
}

}  // namespace jtsim
