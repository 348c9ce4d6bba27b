#include "jtsim/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "jtsim/adiabatic_oracle.hpp"
#include "jtsim/dynamics.hpp"
#include "jtsim/errors.hpp"
#include "jtsim/protocol.hpp"
#include "jtsim/pulsecompiler.hpp"
#include "jtsim/tomography.hpp"
#include "jtsim/version.hpp"

namespace jtsim::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& text)
{
    const char* begin = text.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        throw ConfigError(key + ": '" + text + "' is not a finite number");
    return v;
}

// Resolved parameters of one run, gathered for the manifest.
struct Context {
    const RunConfig& cfg;
    fs::path out_dir;
    std::ostream& out;
    json params = json::object();
    json results = json::object();
    std::vector<std::string> outputs;

    double num(const std::string& key, double fallback)
    {
        const double v = cfg.get_double(key, fallback);
        params[key] = v;
        return v;
    }
    int integer(const std::string& key, int fallback)
    {
        const int v = cfg.get_int(key, fallback);
        params[key] = v;
        return v;
    }
    bool flag(const std::string& key, bool fallback)
    {
        const bool v = cfg.get_bool(key, fallback);
        params[key] = v;
        return v;
    }
    std::string text(const std::string& key, const std::string& fallback)
    {
        std::string v = cfg.get_string(key, fallback);
        params[key] = v;
        return v;
    }

    template <typename Writer>
    void write(const std::string& name, Writer&& writer)
    {
        const fs::path path = out_dir / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ConfigError("cannot open " + path.string() + " for writing");
        writer(f);
        f.close();
        if (!f) throw ConfigError("failed writing " + path.string());
        outputs.push_back(name);
    }
};

ModelParams model_from(Context& c)
{
    ModelParams m;
    m.kappa = two_pi * c.num("kappa_hz", 1000.0);
    m.omega = two_pi * c.num("omega_hz", 667.0);
    m.validate();
    return m;
}

std::vector<double> q_axis_from(Context& c)
{
    const double lo = c.num("q_min", -4.0), hi = c.num("q_max", 4.0);
    const int n = c.integer("q_points", 81);
    if (!(hi > lo) || n < 2) throw ConfigError("q axis needs q_max > q_min and q_points >= 2");
    return linspace(lo, hi, n);
}

// Dephasing spreads the phonon distribution, so noisy runs default to a larger truncation.
constexpr int noisy_n_max = 32;

std::optional<NoiseParams> noise_from(Context& c)
{
    const bool on = c.text("noise", "off") == "on";
    if (c.params["noise"] != "on" && c.params["noise"] != "off") throw ConfigError("noise must be on or off");
    if (!on) return std::nullopt;
    NoiseParams n;
    n.heating_rate = c.num("heating_rate", n.heating_rate);
    n.dephasing_t2 = c.num("dephasing_t2", n.dephasing_t2);
    n.initial_n_bar = c.num("initial_n_bar", n.initial_n_bar);
    n.spam_error = c.num("spam_error", n.spam_error);
    n.validate();
    return n;
}

// Resolves the time list, running the width search only if some entry is in units of T.
std::vector<std::pair<TimeSpec, double>> times_from(Context& c, const ModelParams& model, const std::string& fallback)
{
    const std::vector<TimeSpec> specs = parse_times(c.text("times", fallback));
    const bool need_T = std::any_of(specs.begin(), specs.end(), [](const TimeSpec& s) { return s.in_units_of_T; });
    std::vector<std::pair<TimeSpec, double>> out;
    double T = 0.0;
    if (need_T) {
        if (c.cfg.has("T")) {
            T = c.num("T", 0.0);
            if (!(T > 0.0)) throw ConfigError("T must be positive");
            c.results["T_source"] = "config";
        } else {
            InterferenceSearch s;
            s.window_lo = c.num("window_lo", s.window_lo);
            s.window_hi = c.num("window_hi", s.window_hi);
            s.samples = c.integer("window_samples", s.samples);
            s.n_max = c.integer("find_t_n_max", s.n_max);
            T = find_interference_time(model, s).T;
            c.results["T_source"] = "find_interference_time";
        }
        c.results["T"] = T;
    }
    for (const TimeSpec& s : specs) {
        const double t = s.resolve(T);
        if (!(t >= 0.0)) throw ConfigError("time '" + s.label + "' is negative");
        out.emplace_back(s, t);
    }
    return out;
}

void write_manifest(Context& c, const std::string& command)
{
    json m;
    m["command"] = command;
    m["version"] = std::string(version);
    m["config_sha1"] = git_blob_sha1(c.cfg.source());
    json overrides = json::object();
    for (const auto& [k, v] : c.cfg.values()) overrides[k] = v;
    m["config_values"] = overrides;
    m["parameters"] = c.params;
    json mods = json::object();
    for (const auto& [name, ver] : module_versions) mods[std::string(name)] = std::string(ver);
    m["module_versions"] = mods;
    m["results"] = c.results;
    m["outputs"] = c.outputs;
    const fs::path path = c.out_dir / "manifest.json";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path.string() + " for writing");
    f << m.dump(2) << '\n';
    if (!f) throw ConfigError("failed writing " + path.string());
}

// Commands --------------------------------------------------------------------------

void cmd_simulate(Context& c)
{
    const ModelParams model = model_from(c);
    const std::string mode = c.text("mode", "2d");
    if (mode != "1d" && mode != "2d") throw ConfigError("mode must be 1d or 2d");
    const std::vector<double> q = q_axis_from(c);
    const std::optional<NoiseParams> noise = noise_from(c);
    const int n_max = c.integer("n_max", noise ? noisy_n_max : 26);
    const auto times = times_from(c, model, "0, 0.9T, T, 2T");
    const HilbertConfig hc{n_max};
    auto emit = [&](const std::string& label, const auto& state) {
        const DensityGrid d = mode == "2d" ? position_density(state, q, q) : position_density_1d(state, q);
        c.write("density" + mode + "_" + label + ".csv", [&](std::ostream& f) { d.write_csv(f); });
        return d;
    };
    json per_time = json::array();

    if (!noise) {
        const PureState psi0 = initialise(prepare(hc), model);
        const SpectralPropagator prop(jt_hamiltonian(hc, model));
        for (const auto& [spec, t] : times) {
            const PureState psi = prop.propagate(psi0, t);
            if (edge_population(psi) > 1e-6)
                throw TruncationOverflow("state at t = " + spec.label + " reaches the Fock truncation", edge_population(psi));
            const DensityGrid d = emit(spec.label, psi);
            json rec = {{"label", spec.label}, {"t", t}, {"norm", d.norm}, {"rms_radius", rms_radius(psi)}};
            if (!d.is_1d()) rec["node_contrast"] = node_contrast(d);
            per_time.push_back(rec);
            c.out << spec.label << "  t = " << t * 1e3 << " ms  norm " << d.norm << '\n';
        }
    } else {
        const MixedState rho0 = initialise(prepare_thermal(hc, noise->initial_n_bar), model);
        for (const auto& [spec, t] : times) {
            const MixedState rho = evolve_jt(rho0, model, t, *noise, jt_integrator_config(model));
            if (edge_population(rho) > 1e-6)
                throw TruncationOverflow("state at t = " + spec.label + " reaches the Fock truncation", edge_population(rho));
            const DensityGrid d = emit(spec.label, rho);
            json rec = {{"label", spec.label}, {"t", t}, {"norm", d.norm}};
            if (!d.is_1d()) rec["node_contrast"] = node_contrast(d);
            per_time.push_back(rec);
            c.out << spec.label << "  t = " << t * 1e3 << " ms  norm " << d.norm << '\n';
        }
    }
    c.results["times"] = per_time;
}

void cmd_reconstruct(Context& c)
{
    const ModelParams model = model_from(c);
    const std::string mode = c.text("mode", "2d");
    if (mode != "1d" && mode != "2d") throw ConfigError("mode must be 1d or 2d");
    const bool two_d = mode == "2d";
    const std::vector<double> q = q_axis_from(c);
    const std::optional<NoiseParams> noise = noise_from(c);

    ExperimentConfig base = two_d ? default_2d_experiment(0.0) : default_1d_experiment(0.0);
    base.model = model;
    base.noise = noise;
    base.n_max = c.integer("n_max", noise ? noisy_n_max : base.n_max);
    const double beta_max = c.num("beta_max", two_d ? 4.0 : 5.0);
    const int beta_points = c.integer("beta_points", two_d ? 11 : 26);
    if (!(beta_max > 0.0) || beta_points < 2) throw ConfigError("beta axis needs beta_max > 0 and beta_points >= 2");
    base.beta2_axis = linspace(0.0, beta_max, beta_points);
    if (two_d) base.beta1_axis = base.beta2_axis;
    base.measure_imaginary = c.flag("measure_imaginary", true);
    base.workers = c.integer("workers", 0);

    const std::string shots = c.text("shots", "exact");
    if (shots != "exact") {
        base.shots_per_point = c.cfg.get_int("shots", 0);
        if (!c.cfg.has("seed")) throw ConfigError("shot-mode runs need a seed (--seed or seed = N)");
    }
    if (c.cfg.has("seed")) {
        const double s = c.num("seed", 0.0);
        if (s < 0 || s != std::floor(s)) throw ConfigError("seed must be a non-negative integer");
        base.rng_seed = std::uint64_t(s);
    }
    const bool baseline = c.flag("baseline", true);
    const double radius = c.num("baseline_radius", 3.6);
    const std::string fill_name = c.text("quadrant_fill", "q2parity");
    if (fill_name != "q2parity" && fill_name != "separable") throw ConfigError("quadrant_fill must be q2parity or separable");
    const QuadrantFill fill = fill_name == "q2parity" ? QuadrantFill::Q2Parity : QuadrantFill::Separable;

    const auto times = times_from(c, model, "0, 0.9T, T, 2T");
    json per_time = json::array();
    for (const auto& [spec, t] : times) {
        ExperimentConfig cfg = base;
        cfg.evolution_time = t;
        const CharGrid chi = run_reconstruction_experiment(cfg);
        c.write("chi" + mode + "_" + spec.label + ".csv", [&](std::ostream& f) { chi.write_csv(f); });

        json rec = {{"label", spec.label}, {"t", t}, {"p_down", chi.p_down[0]}, {"p_up", chi.p_up[0]}};
        CharGrid corrected = chi;
        if (baseline) {
            const BaselineCorrection bc = baseline_correct(chi, radius);
            corrected = bc.grid;
            rec["baseline_offset"] = {bc.offset.real(), bc.offset.imag()};
            rec["baseline_tail_points"] = bc.tail_points;
        }
        const CharGrid ext = extend_hermitian(corrected, fill);
        const DensityGrid d = two_d ? density_2d(ext, q, q) : density_1d(ext, q);
        c.write("density" + mode + "_" + spec.label + ".csv", [&](std::ostream& f) { d.write_csv(f); });
        rec["norm"] = d.norm;
        rec["imag_residue"] = d.imag_residue;
        if (two_d) rec["node_contrast"] = node_contrast(d);
        c.out << spec.label << "  t = " << t * 1e3 << " ms  p_down " << chi.p_down[0] << "  p_up " << chi.p_up[0];
        if (baseline) c.out << "  baseline " << rec["baseline_offset"][0].get<double>();
        c.out << '\n';
        per_time.push_back(rec);
    }
    c.results["times"] = per_time;
}

void cmd_find_t(Context& c)
{
    const ModelParams model = model_from(c);
    InterferenceSearch s;
    s.window_lo = c.num("window_lo", s.window_lo);
    s.window_hi = c.num("window_hi", s.window_hi);
    s.samples = c.integer("window_samples", s.samples);
    s.n_max = c.integer("find_t_n_max", s.n_max);
    const InterferenceTime r = find_interference_time(model, s);
    c.write("width_vs_time.csv", [&](std::ostream& f) {
        f << "t,rms_radius\n";
        char buf[96];
        for (std::size_t k = 0; k < r.times.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r.times[k], r.widths[k]);
            f << buf;
        }
    });
    c.results["T"] = r.T;
    c.results["width_at_min"] = r.width_at_min;
    c.out << "T = " << r.T * 1e3 << " ms (width minimum " << r.width_at_min << " at 2T)\n";
}

void cmd_calibrate_demo(Context& c)
{
    ModeCalibrationConfig mc;
    mc.shots = c.integer("calibration_shots", mc.shots);
    mc.n_max = c.integer("calibration_n_max", mc.n_max);
    mc.spam_error = c.num("spam_error", mc.spam_error);
    mc.seed = std::uint64_t(c.integer("seed", 1));
    if (mc.shots < 1) throw ConfigError("calibration_shots must be >= 1");
    const double f_true = two_pi * c.num("mode_freq_hz", Calibration{}.mode_freq1 / two_pi);
    const double error = two_pi * c.num("injected_error_hz", 100.0);
    const double half = two_pi * c.num("scan_half_width_hz", 400.0);
    const int points = c.integer("scan_points", 41);
    if (!(f_true > 0.0)) throw ConfigError("mode_freq_hz must be positive");

    const std::vector<double> scan = frequency_scan(f_true + error, half, points);
    const ModeCalibrationResult r = calibrate_mode_frequency(f_true, scan, mc);
    c.write("calibration_scan.csv", [&](std::ostream& f) {
        f << "offset_hz,p_up_exact,p_up_measured\n";
        char buf[128];
        for (std::size_t k = 0; k < r.scan.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", (r.scan[k] - f_true) / two_pi, r.p_up_exact[k],
                          r.p_up_measured[k]);
            f << buf;
        }
    });
    const double residual = (r.estimate - f_true) / two_pi;
    c.results["estimate_hz"] = r.estimate / two_pi;
    c.results["residual_hz"] = residual;
    c.results["within_tolerance"] = std::abs(residual) < 0.1 * ModelParams{}.omega / two_pi;
    c.out << "injected " << error / two_pi << " Hz, residual after calibration " << residual << " Hz\n";
}

void cmd_compare_gp(Context& c)
{
    const ModelParams model = model_from(c);
    GpComparisonOptions o;
    o.n_max = c.integer("n_max", o.n_max);
    o.q_axis = q_axis_from(c);
    o.grid.points = c.integer("grid_points", o.grid.points);
    const double extent = c.num("grid_extent", 5.0);
    o.grid.lo = -extent;
    o.grid.hi = extent;
    o.dt = c.num("oracle_dt", 0.0);
    const auto times = times_from(c, model, "T");
    json per_time = json::array();
    for (const auto& [spec, t] : times) {
        const GpComparison r = compare_gp_vs_nogp(model, t, o);
        c.write("density2d_full_" + spec.label + ".csv", [&](std::ostream& f) { r.full.write_csv(f); });
        c.write("density2d_oracle_" + spec.label + ".csv", [&](std::ostream& f) { r.oracle.write_csv(f); });
        per_time.push_back({{"label", spec.label},
                            {"t", t},
                            {"full_contrast", r.full_contrast},
                            {"oracle_contrast", r.oracle_contrast},
                            {"cfl_warning", r.oracle_report.cfl_warning}});
        if (r.oracle_report.cfl_warning) c.out << "warning: " << r.oracle_report.warning << '\n';
        c.out << spec.label << "  contrast with geometric phase " << r.full_contrast << ", without "
              << r.oracle_contrast << '\n';
    }
    c.results["times"] = per_time;
}

}  // namespace

// RunConfig ---------------------------------------------------------------------------

const std::vector<std::string>& known_keys()
{
    static const std::vector<std::string> keys{
        "kappa_hz",        "omega_hz",         "n_max",        "times",          "T",
        "window_lo",       "window_hi",        "window_samples", "find_t_n_max", "q_min",
        "q_max",           "q_points",         "mode",         "beta_max",       "beta_points",
        "shots",           "seed",             "noise",        "heating_rate",   "dephasing_t2",
        "initial_n_bar",   "spam_error",       "workers",      "measure_imaginary", "baseline",
        "baseline_radius", "quadrant_fill",    "calibration_shots", "calibration_n_max", "mode_freq_hz",
        "injected_error_hz", "scan_half_width_hz", "scan_points", "grid_points", "grid_extent",
        "oracle_dt",
    };
    return keys;
}

RunConfig RunConfig::parse(std::string_view text)
{
    RunConfig c;
    c.source_ = std::string(text);
    std::istringstream in(c.source_);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        c.set(key, value);
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

void RunConfig::set(const std::string& key, const std::string& value)
{
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const
{
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const
{
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(key, it->second);
}

int RunConfig::get_int(const std::string& key, int fallback) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const double v = parse_double(key, it->second);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError(key + ": '" + it->second + "' is not an integer");
    return int(v);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": '" + v + "' is not a boolean");
}

std::string git_blob_sha1(std::string_view content)
{
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) &&
                    EVP_DigestUpdate(ctx, header.data(), header.size()) &&
                    EVP_DigestUpdate(ctx, content.data(), content.size()) && EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("SHA-1 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        const unsigned char b = digest[k];
        out += hex[b >> 4];
        out += hex[b & 15];
    }
    return out;
}

std::vector<TimeSpec> parse_times(std::string_view list)
{
    std::vector<TimeSpec> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t comma = std::min(list.find(',', start), list.size());
        const std::string token = trim(list.substr(start, comma - start));
        if (token.empty()) throw ConfigError("empty entry in time list");
        TimeSpec s;
        s.label = token;
        if (token.back() == 'T') {
            s.in_units_of_T = true;
            const std::string factor = token.substr(0, token.size() - 1);
            s.value = factor.empty() ? 1.0 : parse_double("times", factor);
        } else {
            s.value = parse_double("times", token);
        }
        if (s.value < 0.0) throw ConfigError("times must be non-negative");
        out.push_back(s);
        start = comma + 1;
    }
    return out;
}

// Entry point -------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Jahn-Teller wavepacket simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version));

    std::string config_path, out_dir = "out", seed, shots, noise, times;
    auto common = [&](CLI::App* sub, bool stochastic) {
        sub->add_option("--config", config_path, "key = value configuration file");
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--times", times, "comma-separated times; a T suffix scales by the interference time");
        sub->add_option("--noise", noise, "Lindblad noise and SPAM")->check(CLI::IsMember({"on", "off"}));
        if (stochastic) {
            sub->add_option("--seed", seed, "RNG seed");
            sub->add_option("--shots", shots, "shots per point, or exact");
        }
    };
    CLI::App* simulate = app.add_subcommand("simulate", "exact densities at a list of times");
    CLI::App* reconstruct = app.add_subcommand("reconstruct", "emulated tomography at a list of times");
    CLI::App* find_t = app.add_subcommand("find-t", "time of greatest geometric-phase interference");
    CLI::App* calibrate = app.add_subcommand("calibrate-demo", "mode-frequency calibration with an injected error");
    CLI::App* compare = app.add_subcommand("compare-gp", "densities with and without the geometric phase");
    common(simulate, false);
    common(reconstruct, true);
    common(find_t, false);
    common(calibrate, true);
    common(compare, false);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
        if (!seed.empty()) cfg.set("seed", seed);
        if (!times.empty()) cfg.set("times", times);
        if (!noise.empty()) cfg.set("noise", noise);
        if (!shots.empty()) {
            if (shots != "exact") {
                const double v = parse_double("shots", shots);
                if (v < 1 || v != std::floor(v)) throw ConfigError("--shots takes a positive integer or exact");
            }
            cfg.set("shots", shots);
        }
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());

        Context c{cfg, fs::path(out_dir), out};
        std::string command;
        if (simulate->parsed()) {
            command = "simulate";
            cmd_simulate(c);
        } else if (reconstruct->parsed()) {
            command = "reconstruct";
            cmd_reconstruct(c);
        } else if (find_t->parsed()) {
            command = "find-t";
            cmd_find_t(c);
        } else if (calibrate->parsed()) {
            command = "calibrate-demo";
            cmd_calibrate_demo(c);
        } else {
            command = "compare-gp";
            cmd_compare_gp(c);
        }
        write_manifest(c, command);
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidArgument& e) {
        err << "invalid parameter: " << e.what() << '\n';
        return 2;
    } catch (const WindowTooNarrow& e) {
        err << "invalid search window: " << e.what() << '\n';
        return 2;
    } catch (const NoTailPoints& e) {
        err << "baseline: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        err << "manifest error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "I/O error: " << e.what() << '\n';
        return 2;
    } catch (const TruncationOverflow& e) {
        err << "numerical failure: " << e.what() << " (population " << e.leaked()
            << " in the top two levels; raise n_max)\n";
        return 3;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}

int run(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace jtsim::cli
