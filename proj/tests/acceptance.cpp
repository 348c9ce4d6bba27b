// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
//
//   jtsim_acceptance [--known-red NAME[,NAME...]]
//
// Exit status is 0 when every criterion passes, except those named with --known-red,
// which must still fail (a known-red criterion that starts passing is reported too).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jtsim/adiabatic_oracle.hpp"
#include "jtsim/dynamics.hpp"
#include "jtsim/protocol.hpp"
#include "jtsim/pulsecompiler.hpp"
#include "jtsim/tomography.hpp"

using namespace jtsim;

namespace {

// Tolerances.
constexpr double tail_target = 0.017, tail_tol = 0.002, tail_runtime = 1.0;
constexpr double T_paper = 1.59e-3, T_tol = 0.1e-3, T_runtime = 300.0;
constexpr double node_full_min = 0.8, node_oracle_max = 0.3, node_gap_min = 0.4, node_runtime = 600.0;
constexpr double revival_min = 0.8;
constexpr double roundtrip_paper_grid = 0.1, roundtrip_fine_grid = 0.05;
constexpr double path_tol = 1e-6;
constexpr double heating_rate = 0.2, noise_rel_tol = 0.01, t2_star = 35e-3;
constexpr int shot_count = 1000, shot_seeds = 100;
constexpr double shot_se_max = 0.032;
constexpr double baseline_injected = 0.02, baseline_tol = 0.002;
constexpr double cal_injected_hz = 100.0, cal_tol_hz = 66.7;
constexpr int cal_shots = 500, cal_seeds = 20;
constexpr double tracked_infidelity_max = 1e-4, untracked_drop_min = 1e-2;

// Truncation for the noiseless reference states.
constexpr int n_ref = 26;

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    std::string name;
    std::function<Outcome()> check;
};

std::string fmt(const char* f, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PureState initial_state() { return initialise(prepare(HilbertConfig{n_ref}), ModelParams{}); }

// Shared across criteria; set by the interference-time criterion.
double T_found = 0.0;

double T_or_search()
{
    if (T_found == 0.0) T_found = find_interference_time(ModelParams{}).T;
    return T_found;
}

std::vector<double> fig3_times()
{
    const double T = T_or_search();
    return {0.0, 0.9 * T, T, 2.0 * T};
}

Outcome initial_tail()
{
    const auto t0 = std::chrono::steady_clock::now();
    const double p = probability_q1_nonnegative(initial_state());
    const double dt = seconds_since(t0);
    return {std::abs(p - tail_target) <= tail_tol && dt < tail_runtime,
            fmt("P(Q1 >= 0) = %.5f (target %.3f +- %.3f), %.2f s (limit %.0f s)", p, tail_target, tail_tol, dt,
                tail_runtime)};
}

Outcome interference_time()
{
    const auto t0 = std::chrono::steady_clock::now();
    const InterferenceTime r = find_interference_time(ModelParams{});
    const double dt = seconds_since(t0);
    T_found = r.T;
    return {std::abs(r.T - T_paper) <= T_tol && dt < T_runtime,
            fmt("T = %.4f ms (target %.2f +- %.1f ms), %.1f s (limit %.0f s)", r.T * 1e3, T_paper * 1e3, T_tol * 1e3, dt,
                T_runtime)};
}

Outcome node_existence()
{
    const double T = T_or_search();
    const auto t0 = std::chrono::steady_clock::now();
    const GpComparison c = compare_gp_vs_nogp(ModelParams{}, T);
    const double dt = seconds_since(t0);
    const double gap = c.full_contrast - c.oracle_contrast;
    return {c.full_contrast > node_full_min && c.oracle_contrast < node_oracle_max && gap >= node_gap_min &&
                dt < node_runtime,
            fmt("contrast full %.3f (> %.1f), no-GP %.3f (< %.1f), gap %.3f (>= %.1f), %.1f s", c.full_contrast,
                node_full_min, c.oracle_contrast, node_oracle_max, gap, node_gap_min, dt)};
}

Outcome revival()
{
    const double T = T_or_search();
    const PureState psi0 = initial_state();
    const SpectralPropagator prop(jt_hamiltonian(HilbertConfig{n_ref}, ModelParams{}));
    const double overlap = fidelity(psi0, prop.propagate(psi0, 2.0 * T));
    return {overlap > revival_min, fmt("|<psi(0)|psi(2T)>|^2 = %.4f (> %.1f)", overlap, revival_min)};
}

Outcome tomography_round_trip()
{
    const PureState psi0 = initial_state();
    const SpectralPropagator prop(jt_hamiltonian(HilbertConfig{n_ref}, ModelParams{}));
    const std::vector<double> q = default_q_axis();
    const std::vector<double> paper_axis = linspace(0.0, 4.0, 11), fine_axis = linspace(0.0, 5.0, 21);
    double worst_paper = 0.0, worst_fine = 0.0;
    for (double t : fig3_times()) {
        const PureState psi = prop.propagate(psi0, t);
        const DensityGrid direct = position_density(psi, q, q);
        auto l1 = [&](const std::vector<double>& ax) {
            return l1_distance(direct, density_2d(extend_hermitian(exact_char_grid(psi, ax, ax)), q, q));
        };
        worst_paper = std::max(worst_paper, l1(paper_axis));
        worst_fine = std::max(worst_fine, l1(fine_axis));
    }
    return {worst_paper < roundtrip_paper_grid && worst_fine < roundtrip_fine_grid,
            fmt("worst L1 %.5f on 11x11 over [0,4]^2 (< %.2f), %.5f on 21x21 over [0,5]^2 (< %.2f)", worst_paper,
                roundtrip_paper_grid, worst_fine, roundtrip_fine_grid)};
}

Outcome measurement_path()
{
    const ModelParams model;
    double worst = 0.0;
    for (double t : fig3_times()) {
        const ExperimentConfig cfg = default_2d_experiment(t);
        const CharGrid measured = run_reconstruction_experiment(cfg);
        // The same evolution path without the measurement emulation.
        const PureState direct =
            evolve_jt(initialise(prepare(HilbertConfig{cfg.n_max}), model), model, t, jt_integrator_config(model));
        const CharGrid exact = exact_char_grid(direct, cfg.beta1_axis, cfg.beta2_axis);
        for (std::size_t k = 0; k < exact.size(); ++k) worst = std::max(worst, std::abs(measured.values[k] - exact.values[k]));
    }
    return {worst <= path_tol, fmt("max |chi_measured - chi_exact| = %.2e over 4 times x 121 points (<= %.0e)", worst, path_tol)};
}

Outcome noise_rates()
{
    double heat_err = 0.0, deph_err = 0.0;
    {
        HilbertConfig cfg{8};
        NoiseParams noise = NoiseParams::off();
        noise.heating_rate = heating_rate;
        const MixedState rho0 =
            MixedState::from_pure(product_state(Eigen::Vector2cd(1, 0), fock_state(0, 8), fock_state(0, 8)));
        const LadderOps l1 = ladder_ops(cfg, 1), l2 = ladder_ops(cfg, 2);
        for (double t : {0.01, 0.02, 0.05, 0.1}) {
            const MixedState rho = evolve_lindblad(rho0, TimeDependentOperator(cfg), noise, 0.0, t);
            const double analytic = heating_rate * t;
            for (const LadderOps* l : {&l1, &l2})
                heat_err = std::max(heat_err, std::abs(expectation(rho, l->a_dag * l->a).real() - analytic) / analytic);
        }
    }
    {
        HilbertConfig cfg{4};
        NoiseParams noise = NoiseParams::off();
        noise.dephasing_t2 = t2_star;
        const ModeVector superposition = (fock_state(0, 4) + fock_state(1, 4)) / std::numbers::sqrt2;
        const MixedState rho0 =
            MixedState::from_pure(product_state(Eigen::Vector2cd(1, 0), superposition, fock_state(0, 4)));
        const Operator a1 = ladder_ops(cfg, 1).a;
        for (double t : {0.01, 0.035, 0.07, 0.1}) {
            const MixedState rho = evolve_lindblad(rho0, TimeDependentOperator(cfg), noise, 0.0, t);
            const double analytic = 0.5 * std::exp(-t / t2_star);
            deph_err = std::max(deph_err, std::abs(std::abs(expectation(rho, a1)) - analytic) / analytic);
        }
    }
    return {heat_err < noise_rel_tol && deph_err < noise_rel_tol,
            fmt("heating <n> rel. error %.2e, 0-1 coherence rel. error %.2e (< %.0e)", heat_err, deph_err, noise_rel_tol)};
}

Outcome shot_noise()
{
    ExperimentConfig cfg = default_2d_experiment(T_or_search());
    cfg.shots_per_point = shot_count;
    const OutcomeGrid outcomes = run_reconstruction_outcomes(cfg);
    const std::size_t n = outcomes.points.size();
    std::vector<double> s_re(n), s2_re(n), s_im(n), s2_im(n);
    for (int seed = 1; seed <= shot_seeds; ++seed) {
        cfg.rng_seed = std::uint64_t(seed);
        const CharGrid g = assemble_char_grid(outcomes, cfg);
        for (std::size_t k = 0; k < n; ++k) {
            s_re[k] += g.values[k].real();
            s2_re[k] += g.values[k].real() * g.values[k].real();
            s_im[k] += g.values[k].imag();
            s2_im[k] += g.values[k].imag() * g.values[k].imag();
        }
    }
    double worst = 0.0;
    auto sd = [](double s, double s2) {
        const double m = s / shot_seeds;
        return std::sqrt(std::max(0.0, (s2 - shot_seeds * m * m) / (shot_seeds - 1)));
    };
    for (std::size_t k = 0; k < n; ++k) worst = std::max({worst, sd(s_re[k], s2_re[k]), sd(s_im[k], s2_im[k])});
    return {worst <= shot_se_max,
            fmt("worst per-point standard error %.4f at t = T, %d shots, %d seeds (<= %.3f)", worst, shot_count,
                shot_seeds, shot_se_max)};
}

Outcome baseline()
{
    const std::vector<double> ax = linspace(0.0, 4.0, 11);
    const double a1 = -ModelParams{}.minimum_radius() / std::numbers::sqrt2;
    CharGrid clean;
    clean.beta1_axis = clean.beta2_axis = ax;
    for (double b1 : ax)
        for (double b2 : ax) {
            // Coherent state |a1, 0⟩ with real a1.
            clean.values.push_back(std::exp(-(b1 * b1 + b2 * b2) / 2) * std::exp(cplx(0, 2 * a1 * b1)));
            clean.p_down.push_back(1.0);
            clean.p_up.push_back(0.0);
            clean.shots.push_back(0);
        }
    CharGrid dirty = clean;
    for (cplx& v : dirty.values) v += baseline_injected;
    const BaselineCorrection r = baseline_correct(dirty);
    double worst = 0.0;
    for (std::size_t k = 0; k < clean.size(); ++k) worst = std::max(worst, std::abs(r.grid.values[k] - clean.values[k]));
    return {worst <= baseline_tol, fmt("offset estimate %.5f from %zu tail points, max residual %.2e (<= %.3f)",
                                       r.offset.real(), r.tail_points, worst, baseline_tol)};
}

Outcome calibration()
{
    const double f_true = Calibration{}.mode_freq1;
    const std::vector<double> scan = frequency_scan(f_true + two_pi * cal_injected_hz, two_pi * 400.0, 41);
    ModeCalibrationConfig cfg;
    cfg.shots = cal_shots;
    double worst = 0.0;
    for (int seed = 1; seed <= cal_seeds; ++seed) {
        cfg.seed = std::uint64_t(seed);
        worst = std::max(worst, std::abs(calibrate_mode_frequency(f_true, scan, cfg).estimate - f_true) / two_pi);
    }
    return {worst < cal_tol_hz, fmt("injected %.0f Hz, worst residual %.1f Hz over %d seeds at %d shots (< %.1f Hz)",
                                    cal_injected_hz, worst, cal_seeds, cal_shots, cal_tol_hz)};
}

Outcome phase_tracking()
{
    const ModelParams model;
    const double T = T_or_search();
    const HilbertConfig hc{n_ref};
    Circuit circuit = jt_circuit(T);
    circuit.stages.pop_back();
    const PureState exact = SpectralPropagator(jt_hamiltonian(hc, model)).propagate(initial_state(), T);

    auto effective_fidelity = [&](bool tracking) {
        CompileOptions o;
        o.phase_tracking = tracking;
        const Schedule s = compile(circuit, Calibration{}, model, o);
        PureState device = execute(s, prepare(hc)).state;
        // What the reconstruction pulses see: the device state in the frame of their phase offset.
        rotate_modes(device, s.offsets.reconstruction, s.offsets.reconstruction);
        return fidelity(device, exact);
    };
    const double tracked = effective_fidelity(true), untracked = effective_fidelity(false);
    return {1.0 - tracked < tracked_infidelity_max && tracked - untracked > untracked_drop_min,
            fmt("fidelity with offsets 1 - %.1e (< %.0e), without %.4f (drop > %.0e)", 1.0 - tracked,
                tracked_infidelity_max, untracked, untracked_drop_min)};
}

}  // namespace

int main(int argc, char** argv)
{
    std::set<std::string> known_red;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--known-red" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string name; std::getline(ss, name, ',');) known_red.insert(name);
        } else {
            std::fprintf(stderr, "usage: %s [--known-red NAME[,NAME...]]\n", argv[0]);
            return 2;
        }
    }

    const std::vector<Criterion> criteria{
        {"initial-tail", initial_tail},       {"interference-time", interference_time},
        {"node-existence", node_existence},   {"revival", revival},
        {"tomography-round-trip", tomography_round_trip}, {"measurement-path", measurement_path},
        {"noise-rates", noise_rates},         {"shot-noise", shot_noise},
        {"baseline-correction", baseline},    {"calibration", calibration},
        {"phase-tracking", phase_tracking},
    };
    for (const std::string& name : known_red)
        if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.name == name; })) {
            std::fprintf(stderr, "unknown criterion '%s'\n", name.c_str());
            return 2;
        }

    int passed = 0, unexpected = 0;
    for (const Criterion& c : criteria) {
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const bool red = known_red.count(c.name) > 0;
        std::printf("%s  %-22s %s%s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(),
                    red ? (o.pass ? "  [known red, now passing]" : "  [known red]") : "");
        std::fflush(stdout);
        passed += o.pass;
        if (o.pass == red) ++unexpected;
    }
    std::printf("%d/%zu criteria pass\n", passed, criteria.size());
    return unexpected == 0 ? 0 : 1;
}
