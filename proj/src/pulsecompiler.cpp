#include "jtsim/pulsecompiler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "jtsim/errors.hpp"

namespace jtsim {

namespace {

constexpr double pi = std::numbers::pi;

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& s, const std::string& what)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw InvalidArgument("cannot parse " + what + " from '" + s + "'");
    }
    if (pos != s.size()) throw InvalidArgument("trailing characters in " + what + " '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(s);
    while (std::getline(in, field, sep)) out.push_back(field);
    return out;
}

int stage_order(StageKind k) { return static_cast<int>(k); }

// Conditional displacement exp(−iτ(Ω/2)σ_φs ⊗ (a†e^{iφm} + h.c.)) for a resonant pulse.
void apply_resonant_sdf(PureState& psi, const SdfParams& s, double tau)
{
    const Eigen::Matrix2cd sigma = sdf_spin_operator(s);
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    const cplx alpha = cplx(0.0, -0.5) * s.rabi * tau * std::polar(1.0, s.motional_phase);

    PureState plus = psi;
    apply_qubit(plus, 0.5 * (id + sigma));
    apply_mode(plus, displacement_op(alpha, psi.cfg.n_max), s.mode);
    apply_qubit(psi, 0.5 * (id - sigma));
    apply_mode(psi, displacement_op(-alpha, psi.cfg.n_max), s.mode);
    psi.amplitudes += plus.amplitudes;
}

Operator conditional_displacement(const HilbertConfig& cfg, const SdfParams& s, double tau)
{
    const Eigen::Matrix2cd sigma = sdf_spin_operator(s);
    const Eigen::Matrix2cd id2 = Eigen::Matrix2cd::Identity();
    const cplx alpha = cplx(0.0, -0.5) * s.rabi * tau * std::polar(1.0, s.motional_phase);
    const ModeMatrix id = ModeMatrix::Identity(cfg.n_max, cfg.n_max);
    const ModeMatrix plus = displacement_op(alpha, cfg.n_max), minus = displacement_op(-alpha, cfg.n_max);
    if (s.mode == 1) return embed(0.5 * (id2 + sigma), plus, id) + embed(0.5 * (id2 - sigma), minus, id);
    return embed(0.5 * (id2 + sigma), id, plus) + embed(0.5 * (id2 - sigma), id, minus);
}

struct Builder {
    const Calibration& cal;
    const CompileOptions& options;
    std::vector<Pulse> pulses;
    double clock = 0.0;
    int next_group = 0;
    StageKind stage = StageKind::Prepare;

    void rotation(double phi, double theta)
    {
        const double duration = std::isfinite(cal.carrier_rabi) ? std::abs(theta) / cal.carrier_rabi : 0.0;
        if (options.merge_rotations && !pulses.empty()) {
            Pulse& last = pulses.back();
            if (last.kind == PulseKind::QubitRotation && last.axis_phase == phi &&
                last.start_time + last.duration == clock) {
                last.angle += theta;
                last.duration += duration;
                clock += duration;
                if (last.angle == 0.0) pulses.pop_back();
                return;
            }
        }
        Pulse p;
        p.kind = PulseKind::QubitRotation;
        p.start_time = clock;
        p.duration = duration;
        p.axis_phase = phi;
        p.angle = theta;
        p.stage = stage;
        pulses.push_back(p);
        clock += duration;
    }

    void sdf(const SdfParams& s, double tau, bool advance = true, int group = -1)
    {
        Pulse p;
        p.kind = PulseKind::Sdf;
        p.start_time = clock;
        p.duration = tau;
        p.sdf = s;
        p.group = group;
        p.stage = stage;
        pulses.push_back(p);
        if (advance) clock += tau;
    }

    void marker(PulseKind kind)
    {
        Pulse p;
        p.kind = kind;
        p.start_time = clock;
        p.stage = stage;
        pulses.push_back(p);
    }

    // Returns the indices of the reconstruction SDFs.
    std::vector<std::size_t> reconstruct(const Stage& s)
    {
        std::vector<std::size_t> sdfs;
        if (s.branch == Branch::Up) rotation(0.0, pi);
        marker(PulseKind::MidCircuitMeasure);
        if (s.imaginary) rotation(0.0, pi / 2);
        const double rabi = cal.rabi_reconstruction;
        if (!s.one_mode && s.beta1 > 0.0) {
            sdfs.push_back(pulses.size());
            sdf(SdfParams{1, 0.0, 0.0, rabi, 0.0}, s.beta1 / rabi);
        }
        if (s.beta2 > 0.0) {
            sdfs.push_back(pulses.size());
            sdf(SdfParams{2, 0.0, 0.0, rabi, 0.0}, s.beta2 / rabi);
        }
        marker(PulseKind::Measure);
        return sdfs;
    }
};

void finalize_phases(std::vector<Pulse>& pulses)
{
    for (Pulse& p : pulses) {
        if (p.kind == PulseKind::Sdf) {
            p.sdf.motional_phase = wrap_phase(p.sdf.motional_phase);
            p.sdf.spin_phase = wrap_phase(p.sdf.spin_phase);
        }
    }
}

}  // namespace

void Calibration::validate() const
{
    if (!(mode_freq1 > 0.0) || !(mode_freq2 > 0.0)) throw InvalidArgument("mode frequencies must be positive");
    if (!(qubit_freq > 0.0)) throw InvalidArgument("qubit frequency must be positive");
    if (!(rabi_init > 0.0) || !(rabi_evolution > 0.0) || !(rabi_reconstruction > 0.0))
        throw InvalidArgument("SDF Rabi frequencies must be positive");
    if (!(carrier_rabi > 0.0)) throw InvalidArgument("carrier Rabi frequency must be positive");
}

void Circuit::validate() const
{
    int expected = 0;
    for (const Stage& s : stages) {
        if (stage_order(s.kind) != expected)
            throw InvalidArgument("circuit stages must be a prefix of prepare, initialise, evolve, reconstruct");
        ++expected;
        if (s.kind == StageKind::Evolve && !(s.duration >= 0.0)) throw InvalidArgument("evolution time must be >= 0");
        if (s.kind == StageKind::Reconstruct) {
            if (!(s.beta1 >= 0.0) || !(s.beta2 >= 0.0) || !std::isfinite(s.beta1) || !std::isfinite(s.beta2))
                throw InvalidArgument("reconstruction displacements must be finite and >= 0");
        }
    }
}

Circuit jt_circuit(double t, double beta1, double beta2, bool imaginary, Branch branch)
{
    Circuit c;
    c.stages.push_back({StageKind::Prepare});
    c.stages.push_back({StageKind::Initialise});
    Stage evolve{StageKind::Evolve};
    evolve.duration = t;
    c.stages.push_back(evolve);
    Stage rec{StageKind::Reconstruct};
    rec.beta1 = beta1;
    rec.beta2 = beta2;
    rec.imaginary = imaginary;
    rec.branch = branch;
    c.stages.push_back(rec);
    return c;
}

Circuit parse_circuit(std::string_view text)
{
    Circuit c;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream words(line);
        std::string name;
        if (!(words >> name)) continue;

        Stage s;
        std::map<std::string, std::string> kv;
        std::vector<std::string> flags;
        for (std::string w; words >> w;) {
            const auto eq = w.find('=');
            if (eq == std::string::npos)
                flags.push_back(w);
            else
                kv[w.substr(0, eq)] = w.substr(eq + 1);
        }
        const std::string where = " (line " + std::to_string(lineno) + ")";
        auto take = [&](const std::string& key) -> std::optional<double> {
            auto it = kv.find(key);
            if (it == kv.end()) return std::nullopt;
            const double v = parse_double(it->second, key + where);
            kv.erase(it);
            return v;
        };

        if (name == "prepare") {
            s.kind = StageKind::Prepare;
        } else if (name == "initialise" || name == "initialize") {
            s.kind = StageKind::Initialise;
            const auto re = take("alpha_re"), im = take("alpha_im");
            if (re || im) s.alpha_target = cplx(re.value_or(0.0), im.value_or(0.0));
        } else if (name == "evolve") {
            s.kind = StageKind::Evolve;
            const auto t = take("t");
            if (!t) throw InvalidArgument("evolve needs t=SECONDS" + where);
            s.duration = *t;
        } else if (name == "reconstruct") {
            s.kind = StageKind::Reconstruct;
            s.beta1 = take("beta1").value_or(0.0);
            s.beta2 = take("beta2").value_or(0.0);
            if (auto it = kv.find("part"); it != kv.end()) {
                if (it->second != "real" && it->second != "imag")
                    throw InvalidArgument("part must be real or imag" + where);
                s.imaginary = it->second == "imag";
                kv.erase(it);
            }
            if (auto it = kv.find("branch"); it != kv.end()) {
                if (it->second != "down" && it->second != "up")
                    throw InvalidArgument("branch must be down or up" + where);
                s.branch = it->second == "up" ? Branch::Up : Branch::Down;
                kv.erase(it);
            }
            for (const std::string& f : flags) {
                if (f != "one_mode") throw InvalidArgument("unknown flag '" + f + "'" + where);
                s.one_mode = true;
            }
            flags.clear();
        } else {
            throw InvalidArgument("unknown stage type '" + name + "'" + where);
        }
        if (!kv.empty()) throw InvalidArgument("unknown key '" + kv.begin()->first + "'" + where);
        if (!flags.empty()) throw InvalidArgument("unknown flag '" + flags.front() + "'" + where);
        c.stages.push_back(s);
    }
    c.validate();
    return c;
}

PhaseOffsets phase_tracking_offsets(double tau1, double t, double delta)
{
    return {tau1 * delta, (t + tau1) * delta};
}

double displacement_calibration(cplx alpha_target, double rabi)
{
    if (!(rabi > 0.0)) throw InvalidArgument("Rabi frequency must be positive");
    return 2.0 * std::abs(alpha_target) / rabi;
}

double wrap_phase(double phase)
{
    double w = std::fmod(phase, 2.0 * pi);
    if (w < 0.0) w += 2.0 * pi;
    if (w >= 2.0 * pi) w = 0.0;
    return w;
}

std::string format_phase(double phase) { return fmt(wrap_phase(phase)); }

Schedule compile(const Circuit& circuit, const Calibration& cal, const ModelParams& model, const CompileOptions& options)
{
    circuit.validate();
    cal.validate();
    model.validate();

    Builder b{cal, options};
    Schedule sched;
    std::optional<std::size_t> init_sdf;
    std::vector<std::size_t> recon_sdfs;
    std::optional<double> evolution_start;

    for (const Stage& stage : circuit.stages) {
        b.stage = stage.kind;
        switch (stage.kind) {
        case StageKind::Prepare:
            break;
        case StageKind::Initialise: {
            const cplx alpha = stage.alpha_target.value_or(cplx(-model.minimum_radius() / std::numbers::sqrt2, 0.0));
            const double tau = displacement_calibration(alpha, cal.rabi_init);
            // The σy force acts on Rx(π/2)|↓⟩, its −1 eigenstate, which is displaced by −α_SDF.
            const double phi_m = alpha == cplx(0.0) ? 0.0 : std::arg(alpha) - pi / 2;
            b.rotation(0.0, pi / 2);
            init_sdf = b.pulses.size();
            b.sdf(SdfParams{1, pi / 2, 0.0, cal.rabi_init, phi_m}, tau);
            b.rotation(0.0, -pi / 2);
            break;
        }
        case StageKind::Evolve: {
            sched.evolution_time = stage.duration;
            // Only a detuned evolution leaves a phase lag to track.
            sched.delta = stage.duration > 0.0 ? model.omega : 0.0;
            if (stage.duration == 0.0) {
                evolution_start = b.clock;
                break;
            }
            const double rabi = std::numbers::sqrt2 * model.kappa;
            b.rotation(0.0, -pi / 2);
            evolution_start = b.clock;
            const int group = b.next_group++;
            b.sdf(SdfParams{1, pi / 2, model.omega, rabi, 0.0}, stage.duration, false, group);
            b.sdf(SdfParams{2, 0.0, model.omega, rabi, 0.0}, stage.duration, true, group);
            b.rotation(0.0, pi / 2);
            break;
        }
        case StageKind::Reconstruct:
            recon_sdfs = b.reconstruct(stage);
            break;
        }
    }

    sched.tau1 = evolution_start.value_or(b.clock);
    sched.offsets = options.phase_tracking ? phase_tracking_offsets(sched.tau1, sched.evolution_time, sched.delta)
                                           : PhaseOffsets{};
    if (init_sdf) b.pulses[*init_sdf].sdf.motional_phase += sched.offsets.initialisation;
    for (std::size_t k : recon_sdfs) b.pulses[k].sdf.motional_phase += sched.offsets.reconstruction;
    finalize_phases(b.pulses);
    sched.pulses = std::move(b.pulses);
    return sched;
}

Schedule reconstruction_schedule(const Stage& stage, const Calibration& cal, double phase_offset, double start_time)
{
    if (stage.kind != StageKind::Reconstruct) throw InvalidArgument("expected a reconstruction stage");
    Circuit{{Stage{StageKind::Prepare}, Stage{StageKind::Initialise}, Stage{StageKind::Evolve}, stage}}.validate();
    cal.validate();
    const CompileOptions options;
    Builder b{cal, options};
    b.clock = start_time;
    b.stage = StageKind::Reconstruct;
    for (std::size_t k : b.reconstruct(stage)) b.pulses[k].sdf.motional_phase += phase_offset;
    finalize_phases(b.pulses);
    Schedule s;
    s.pulses = std::move(b.pulses);
    s.offsets.reconstruction = phase_offset;
    return s;
}

Schedule Schedule::select(StageKind stage) const
{
    Schedule s = *this;
    s.pulses.clear();
    for (const Pulse& p : pulses)
        if (p.stage == stage) s.pulses.push_back(p);
    return s;
}

double Schedule::end_time() const
{
    double end = 0.0;
    for (const Pulse& p : pulses) end = std::max(end, p.start_time + p.duration);
    return end;
}

std::string Schedule::to_text() const
{
    std::ostringstream out;
    out << "# tau1_s=" << fmt(tau1) << " evolution_time_s=" << fmt(evolution_time) << " delta_rad_s=" << fmt(delta)
        << " offset_init_rad=" << fmt(offsets.initialisation) << " offset_recon_rad=" << fmt(offsets.reconstruction)
        << "\n";
    out << "# kind\tstart_time_s\tduration_s\tphases_rad\trabi_rad_s\tdetuning_rad_s\n";
    for (const Pulse& p : pulses) {
        std::string kind, phases = "-", rabi = "0", detuning = "0";
        switch (p.kind) {
        case PulseKind::QubitRotation: {
            kind = "RX";
            phases = format_phase(p.axis_phase) + "," + fmt(p.angle);
            rabi = fmt(p.duration > 0.0 ? std::abs(p.angle) / p.duration : std::numeric_limits<double>::infinity());
            break;
        }
        case PulseKind::Sdf:
            kind = "SDF" + std::to_string(p.sdf.mode) + (p.group >= 0 ? "*" : "");
            phases = format_phase(p.sdf.spin_phase) + "," + format_phase(p.sdf.motional_phase);
            rabi = fmt(p.sdf.rabi);
            detuning = fmt(p.sdf.detuning);
            break;
        case PulseKind::MidCircuitMeasure:
            kind = "MEASURE_DOWN";
            break;
        case PulseKind::Measure:
            kind = "MEASURE";
            break;
        case PulseKind::Idle:
            kind = "IDLE";
            break;
        }
        out << kind << '\t' << fmt(p.start_time) << '\t' << fmt(p.duration) << '\t' << phases << '\t' << rabi << '\t'
            << detuning << '\n';
    }
    return out.str();
}

Schedule Schedule::from_text(std::string_view text)
{
    Schedule s;
    std::istringstream in{std::string(text)};
    std::string line;
    int group = -1;
    double group_start = std::numeric_limits<double>::quiet_NaN();
    int next_group = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream words(line.substr(1));
            for (std::string w; words >> w;) {
                const auto eq = w.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = w.substr(0, eq);
                const std::string value = w.substr(eq + 1);
                if (key == "tau1_s") s.tau1 = parse_double(value, key);
                else if (key == "evolution_time_s") s.evolution_time = parse_double(value, key);
                else if (key == "delta_rad_s") s.delta = parse_double(value, key);
                else if (key == "offset_init_rad") s.offsets.initialisation = parse_double(value, key);
                else if (key == "offset_recon_rad") s.offsets.reconstruction = parse_double(value, key);
            }
            continue;
        }
        const std::vector<std::string> f = split(line, '\t');
        if (f.size() != 6) throw InvalidArgument("schedule line needs 6 tab-separated fields: '" + line + "'");
        Pulse p;
        p.start_time = parse_double(f[1], "start time");
        p.duration = parse_double(f[2], "duration");
        const std::string& kind = f[0];
        if (kind == "RX") {
            p.kind = PulseKind::QubitRotation;
            const auto ph = split(f[3], ',');
            if (ph.size() != 2) throw InvalidArgument("RX phases must be 'phi,theta'");
            p.axis_phase = parse_double(ph[0], "axis phase");
            p.angle = parse_double(ph[1], "angle");
        } else if (kind.rfind("SDF", 0) == 0) {
            p.kind = PulseKind::Sdf;
            const bool simultaneous = kind.back() == '*';
            const std::string mode = kind.substr(3, kind.size() - 3 - (simultaneous ? 1 : 0));
            if (mode != "1" && mode != "2") throw InvalidArgument("unknown SDF mode in '" + kind + "'");
            p.sdf.mode = mode == "1" ? 1 : 2;
            const auto ph = split(f[3], ',');
            if (ph.size() != 2) throw InvalidArgument("SDF phases must be 'phi_s,phi_m'");
            p.sdf.spin_phase = parse_double(ph[0], "spin phase");
            p.sdf.motional_phase = parse_double(ph[1], "motional phase");
            p.sdf.rabi = parse_double(f[4], "rabi");
            p.sdf.detuning = parse_double(f[5], "detuning");
            if (simultaneous) {
                if (group < 0 || p.start_time != group_start) {
                    group = next_group++;
                    group_start = p.start_time;
                }
                p.group = group;
            } else {
                group = -1;
            }
        } else if (kind == "MEASURE_DOWN") {
            p.kind = PulseKind::MidCircuitMeasure;
        } else if (kind == "MEASURE") {
            p.kind = PulseKind::Measure;
        } else if (kind == "IDLE") {
            p.kind = PulseKind::Idle;
        } else {
            throw InvalidArgument("unknown pulse kind '" + kind + "'");
        }
        if (p.kind != PulseKind::Sdf) group = -1;
        s.pulses.push_back(p);
    }
    return s;
}

LaserTones sideband_tones(const Pulse& pulse, const Calibration& cal)
{
    switch (pulse.kind) {
    case PulseKind::QubitRotation:
        return {cal.qubit_freq, cal.qubit_freq};
    case PulseKind::Sdf: {
        const double half = (pulse.sdf.mode == 1 ? cal.mode_freq1 : cal.mode_freq2) + pulse.sdf.detuning;
        return {cal.qubit_freq + half, cal.qubit_freq - half};
    }
    default:
        throw InvalidArgument("pulse kind has no laser tones");
    }
}

ExecutionResult execute(const Schedule& schedule, PureState psi, const TrueSystem& truth, const IntegratorConfig& cfg)
{
    ExecutionResult result{std::move(psi)};
    PureState& state = result.state;
    const auto& pulses = schedule.pulses;

    for (std::size_t k = 0; k < pulses.size();) {
        const Pulse& p = pulses[k];
        switch (p.kind) {
        case PulseKind::QubitRotation:
            apply_qubit(state, equatorial_rotation(p.axis_phase, p.angle));
            ++k;
            break;
        case PulseKind::MidCircuitMeasure: {
            const double kept = state.block(0).squaredNorm();
            state.block(1).setZero();
            result.kept_probability *= kept;
            if (kept == 0.0) return result;
            state.amplitudes /= std::sqrt(kept);
            ++k;
            break;
        }
        case PulseKind::Measure:
            result.sigma_z = state.block(0).squaredNorm() - state.block(1).squaredNorm();
            ++k;
            break;
        case PulseKind::Idle:
            ++k;
            break;
        case PulseKind::Sdf: {
            std::size_t end = k + 1;
            if (p.group >= 0)
                while (end < pulses.size() && pulses[end].kind == PulseKind::Sdf && pulses[end].group == p.group) ++end;
            auto detuning_of = [&](const Pulse& q) {
                return q.sdf.detuning + (q.sdf.mode == 1 ? truth.mode_detuning1 : truth.mode_detuning2);
            };
            if (end == k + 1 && detuning_of(p) == 0.0 && truth.qubit_detuning == 0.0) {
                apply_resonant_sdf(state, p.sdf, p.duration);
            } else {
                TimeDependentOperator h(state.cfg);
                for (std::size_t j = k; j < end; ++j) {
                    const Pulse& q = pulses[j];
                    if (q.duration != p.duration || q.start_time != p.start_time)
                        throw InvalidArgument("simultaneous SDFs must share start time and duration");
                    SidebandParams sb{q.sdf.mode, truth.qubit_detuning, detuning_of(q), q.sdf.rabi, q.sdf.spin_phase,
                                      q.sdf.motional_phase};
                    h += sideband_sdf_drive(state.cfg, sb);
                }
                state = evolve_unitary(state, h, p.start_time, p.start_time + p.duration, cfg);
            }
            k = end;
            break;
        }
        }
    }
    return result;
}

MixedExecutionResult execute(const Schedule& schedule, MixedState rho, const TrueSystem& truth,
                             const IntegratorConfig& cfg, const NoiseParams* evolution_noise)
{
    MixedExecutionResult result{std::move(rho)};
    MixedState& state = result.state;
    const auto& pulses = schedule.pulses;
    const Eigen::Index half = state.cfg.block_dim();

    for (std::size_t k = 0; k < pulses.size();) {
        const Pulse& p = pulses[k];
        switch (p.kind) {
        case PulseKind::QubitRotation:
            apply_qubit(state, equatorial_rotation(p.axis_phase, p.angle));
            ++k;
            break;
        case PulseKind::MidCircuitMeasure: {
            const Eigen::MatrixXcd kept_block = state.rho.topLeftCorner(half, half);
            const double kept = kept_block.trace().real();
            result.kept_probability *= kept;
            state.rho.setZero();
            if (kept <= 0.0) return result;
            state.rho.topLeftCorner(half, half) = kept_block / kept;
            ++k;
            break;
        }
        case PulseKind::Measure:
            result.sigma_z = (state.rho.topLeftCorner(half, half).trace() - state.rho.bottomRightCorner(half, half).trace()).real();
            ++k;
            break;
        case PulseKind::Idle:
            ++k;
            break;
        case PulseKind::Sdf: {
            std::size_t end = k + 1;
            if (p.group >= 0)
                while (end < pulses.size() && pulses[end].kind == PulseKind::Sdf && pulses[end].group == p.group) ++end;
            auto detuning_of = [&](const Pulse& q) {
                return q.sdf.detuning + (q.sdf.mode == 1 ? truth.mode_detuning1 : truth.mode_detuning2);
            };
            const bool noisy = evolution_noise && p.group >= 0;
            if (!noisy && end == k + 1 && detuning_of(p) == 0.0 && truth.qubit_detuning == 0.0) {
                const Operator u = conditional_displacement(state.cfg, p.sdf, p.duration);
                const Eigen::MatrixXcd left = u * state.rho;
                state.rho = left * Operator(u.adjoint());
            } else {
                TimeDependentOperator h(state.cfg);
                for (std::size_t j = k; j < end; ++j) {
                    const Pulse& q = pulses[j];
                    if (q.duration != p.duration || q.start_time != p.start_time)
                        throw InvalidArgument("simultaneous SDFs must share start time and duration");
                    SidebandParams sb{q.sdf.mode, truth.qubit_detuning, detuning_of(q), q.sdf.rabi, q.sdf.spin_phase,
                                      q.sdf.motional_phase};
                    h += sideband_sdf_drive(state.cfg, sb);
                }
                state = evolve_lindblad(state, h, noisy ? *evolution_noise : NoiseParams::off(), p.start_time,
                                        p.start_time + p.duration, cfg);
            }
            k = end;
            break;
        }
        }
    }
    return result;
}

std::vector<double> frequency_scan(double center, double half_width, int points)
{
    if (points < 3) throw InvalidArgument("a frequency scan needs at least 3 points");
    if (!(half_width > 0.0)) throw InvalidArgument("scan half-width must be positive");
    std::vector<double> scan(points);
    for (int i = 0; i < points; ++i) scan[i] = center - half_width + 2.0 * half_width * i / (points - 1);
    return scan;
}

double calibration_p_up(double set_freq, double true_freq, const ModeCalibrationConfig& cfg)
{
    Schedule s;
    Pulse first;
    first.kind = PulseKind::Sdf;
    first.duration = cfg.pulse_duration;
    first.sdf = SdfParams{1, 0.0, 0.0, cfg.rabi, 0.0};
    Pulse second = first;
    second.start_time = cfg.pulse_duration;
    second.sdf.motional_phase = pi;
    Pulse readout;
    readout.kind = PulseKind::Measure;
    readout.start_time = 2 * cfg.pulse_duration;
    s.pulses = {first, second, readout};

    HilbertConfig hc{cfg.n_max};
    const PureState ground = product_state(Eigen::Vector2cd(1, 0), fock_state(0, hc.n_max), fock_state(0, hc.n_max));
    TrueSystem truth;
    truth.mode_detuning1 = set_freq - true_freq;
    const ExecutionResult r = execute(s, ground, truth);
    return 0.5 * (1.0 - *r.sigma_z);
}

ModeCalibrationResult calibrate_mode_frequency(double true_freq, const std::vector<double>& scan,
                                               const ModeCalibrationConfig& cfg)
{
    if (scan.size() < 3) throw InvalidArgument("a frequency scan needs at least 3 points");
    if (cfg.shots < 1) throw InvalidArgument("shots must be >= 1");
    if (cfg.fit_half_width < 1) throw InvalidArgument("fit window must hold at least 3 points");
    if (!std::is_sorted(scan.begin(), scan.end())) throw InvalidArgument("scan must be sorted");

    ModeCalibrationResult r;
    r.scan = scan;
    const int n = int(scan.size());
    for (int i = 0; i < n; ++i) {
        const double p = calibration_p_up(scan[i], true_freq, cfg);
        r.p_up_exact.push_back(p);
        std::seed_seq seq{std::uint32_t(cfg.seed), std::uint32_t(cfg.seed >> 32), std::uint32_t(i)};
        std::mt19937_64 rng(seq);
        const double observed = cfg.spam_error + (1.0 - 2.0 * cfg.spam_error) * std::clamp(p, 0.0, 1.0);
        std::binomial_distribution<int> shots(cfg.shots, observed);
        r.p_up_measured.push_back(double(shots(rng)) / cfg.shots);
    }

    const int i0 = int(std::min_element(r.p_up_measured.begin(), r.p_up_measured.end()) - r.p_up_measured.begin());
    if (i0 == 0 || i0 == n - 1) throw FitFailure("P(up) minimum at the scan edge; scan does not bracket the mode");
    const int lo = std::max(0, i0 - cfg.fit_half_width), hi = std::min(n - 1, i0 + cfg.fit_half_width);

    // Least squares p ≈ c₀ + c₁x + c₂x² in x = (f − f_i0)/scale.
    const double scale = std::max(std::abs(scan[hi] - scan[i0]), std::abs(scan[lo] - scan[i0]));
    Eigen::MatrixXd a(hi - lo + 1, 3);
    Eigen::VectorXd y(hi - lo + 1);
    for (int i = lo; i <= hi; ++i) {
        const double x = (scan[i] - scan[i0]) / scale;
        a.row(i - lo) << 1.0, x, x * x;
        y(i - lo) = r.p_up_measured[i];
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
    if (!(c(2) > 0.0)) throw FitFailure("parabolic fit has non-positive curvature");
    const double vertex = -c(1) / (2.0 * c(2));
    if (std::abs(vertex) > 1.0) throw FitFailure("fitted minimum lies outside the fit window");
    r.estimate = scan[i0] + vertex * scale;
    r.curvature = c(2) / (scale * scale);
    return r;
}

void DriftModel::validate() const
{
    if (!(allan_dev_at_interval >= 0.0)) throw InvalidArgument("Allan deviation must be non-negative");
    if (!(recal_interval > 0.0) || !(sample_period > 0.0)) throw InvalidArgument("drift intervals must be positive");
    if (recal_interval < sample_period) throw InvalidArgument("recalibration interval shorter than sample period");
    if (!(correlation >= -1.0 && correlation <= 1.0)) throw InvalidArgument("correlation must lie in [-1, 1]");
}

DriftSeries simulate_drift(const DriftModel& dm, double horizon)
{
    dm.validate();
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    const std::size_t n = std::size_t(horizon / dm.sample_period) + 1;
    const double m = std::round(dm.recal_interval / dm.sample_period);
    // Overlapping Allan variance of a random walk with step σ is σ²(2m² + 1)/(6m).
    const double step = dm.allan_dev_at_interval * std::sqrt(6.0 * m / (2.0 * m * m + 1.0));

    std::mt19937_64 rng(dm.rng_seed);
    std::normal_distribution<double> g;
    DriftSeries s{dm.sample_period, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    const double rho = dm.common_mode ? dm.correlation : 0.0;
    const double rest = std::sqrt(1.0 - rho * rho);
    for (std::size_t k = 1; k < n; ++k) {
        const double x1 = g(rng), x2 = g(rng);
        s.mode1[k] = s.mode1[k - 1] + step * x1;
        s.mode2[k] = s.mode2[k - 1] + step * (rho * x1 + rest * x2);
    }
    return s;
}

double allan_deviation(const std::vector<double>& y, double sample_period, double tau)
{
    if (!(sample_period > 0.0) || !(tau > 0.0)) throw InvalidArgument("Allan deviation needs positive times");
    const std::size_t m = std::size_t(std::llround(tau / sample_period));
    if (m < 1) throw InvalidArgument("tau shorter than the sample period");
    if (y.size() < 2 * m + 1) throw InvalidArgument("series too short for the requested tau");

    std::vector<double> prefix(y.size() + 1, 0.0);
    for (std::size_t k = 0; k < y.size(); ++k) prefix[k + 1] = prefix[k] + y[k];
    auto mean = [&](std::size_t k) { return (prefix[k + m] - prefix[k]) / double(m); };
    double acc = 0.0;
    const std::size_t count = y.size() - 2 * m + 1;
    for (std::size_t k = 0; k < count; ++k) {
        const double d = mean(k + m) - mean(k);
        acc += d * d;
    }
    return std::sqrt(0.5 * acc / double(count));
}

double choose_recalibration_interval(const DriftSeries& series, double tolerance, std::vector<double> candidates)
{
    if (candidates.empty()) throw InvalidArgument("no candidate intervals");
    std::sort(candidates.begin(), candidates.end());
    double best = candidates.front();
    for (double tau : candidates)
        if (allan_deviation(series.mode1, series.sample_period, tau) <= tolerance) best = tau;
    return best;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("correlation needs equal series of length >= 2");
    const Eigen::Map<const Eigen::VectorXd> x(a.data(), Eigen::Index(a.size())), y(b.data(), Eigen::Index(b.size()));
    const Eigen::VectorXd dx = x.array() - x.mean(), dy = y.array() - y.mean();
    const double denom = dx.norm() * dy.norm();
    if (denom == 0.0) return 0.0;
    return dx.dot(dy) / denom;
}

}  // namespace jtsim
