#include "jtsim/adiabatic_oracle.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "jtsim/dynamics.hpp"
#include "jtsim/errors.hpp"
#include "jtsim/protocol.hpp"

namespace jtsim {

namespace {

// FFT wavenumbers of an n-point periodic grid with spacing h, in FFT order.
Eigen::VectorXd wavenumbers(int n, double h)
{
    Eigen::VectorXd k(n);
    const double base = 2.0 * std::numbers::pi / (n * h);
    for (int j = 0; j < n; ++j) k(j) = base * (j < (n + 1) / 2 ? j : j - n);
    return k;
}

// In-place 1D transforms along each column.
void transform_columns(Eigen::FFT<double>& fft, Eigen::MatrixXcd& m, bool inverse)
{
    Eigen::VectorXcd buf(m.rows());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (inverse)
            fft.inv(buf.data(), m.col(c).data(), m.rows());
        else
            fft.fwd(buf.data(), m.col(c).data(), m.rows());
        m.col(c) = buf;
    }
}

// Forward 2D transform; the result is indexed (k2, k1).
Eigen::MatrixXcd forward_2d(Eigen::FFT<double>& fft, const Eigen::MatrixXcd& psi)
{
    Eigen::MatrixXcd m = psi;
    transform_columns(fft, m, false);
    m.transposeInPlace();
    transform_columns(fft, m, false);
    return m;
}

Eigen::MatrixXcd inverse_2d(Eigen::FFT<double>& fft, Eigen::MatrixXcd m)
{
    transform_columns(fft, m, true);
    m.transposeInPlace();
    transform_columns(fft, m, true);
    return m;
}

Eigen::MatrixXd lower_surface(const GridWavepacket& wp, const ModelParams& model)
{
    Eigen::MatrixXd v(wp.q1_axis.size(), wp.q2_axis.size());
    for (std::size_t i = 0; i < wp.q1_axis.size(); ++i)
        for (std::size_t j = 0; j < wp.q2_axis.size(); ++j) v(i, j) = jt_surfaces(wp.q1_axis[i], wp.q2_axis[j], model).lower;
    return v;
}

// ω(k₁² + k₂²)/2 on the (k2, k1) layout of forward_2d.
Eigen::MatrixXd kinetic(const GridWavepacket& wp, const ModelParams& model)
{
    const Eigen::VectorXd k = wavenumbers(int(wp.q1_axis.size()), wp.spacing());
    Eigen::MatrixXd t(k.size(), k.size());
    for (Eigen::Index a = 0; a < k.size(); ++a)
        for (Eigen::Index b = 0; b < k.size(); ++b) t(a, b) = 0.5 * model.omega * (k(a) * k(a) + k(b) * k(b));
    return t;
}

// κ = 0 is allowed here: the oracle is also used on the bare harmonic trap.
void check(const ModelParams& m)
{
    if (!(m.omega > 0.0) || !std::isfinite(m.omega)) throw InvalidArgument("omega must be positive");
    if (!(m.kappa >= 0.0) || !std::isfinite(m.kappa)) throw InvalidArgument("kappa must be non-negative");
}

void check(const GridWavepacket& wp)
{
    const std::size_t n = wp.q1_axis.size();
    if (n < 4 || wp.q2_axis != wp.q1_axis || wp.psi.rows() != Eigen::Index(n) || wp.psi.cols() != Eigen::Index(n))
        throw InvalidArgument("wavepacket grid must be square with matching axes");
}

}  // namespace

double GridWavepacket::norm() const { return std::sqrt(psi.squaredNorm() * spacing() * spacing()); }

GridWavepacket initial_wavepacket(const ModelParams& model, const OracleGrid& grid)
{
    check(model);
    if (grid.points < 4) throw InvalidArgument("oracle grid needs at least 4 points");
    if (!(grid.hi > grid.lo)) throw InvalidArgument("oracle grid must have hi > lo");
    GridWavepacket wp;
    const double h = (grid.hi - grid.lo) / grid.points;
    for (int k = 0; k < grid.points; ++k) wp.q1_axis.push_back(grid.lo + k * h);
    wp.q2_axis = wp.q1_axis;
    const double q0 = -model.kappa / model.omega;
    wp.psi.resize(grid.points, grid.points);
    for (int i = 0; i < grid.points; ++i)
        for (int j = 0; j < grid.points; ++j) {
            const double d1 = wp.q1_axis[i] - q0, d2 = wp.q2_axis[j];
            wp.psi(i, j) = std::exp(-0.5 * (d1 * d1 + d2 * d2));
        }
    wp.psi /= wp.norm();
    return wp;
}

double default_oracle_step(const ModelParams& model) { return 2.0 * std::numbers::pi / model.omega / 400.0; }

GridWavepacket propagate_adiabatic(const GridWavepacket& wp, const ModelParams& model, double t, double dt,
                                   OracleReport* report)
{
    check(model);
    check(wp);
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("propagation time must be non-negative");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");

    OracleReport rep;
    rep.steps = int(std::ceil(t / dt - 1e-9));
    rep.dt = rep.steps > 0 ? t / rep.steps : 0.0;
    const double limit = 2.0 * std::numbers::pi / (50.0 * model.omega);
    if (dt > limit) {
        rep.cfl_warning = true;
        rep.warning = "time step " + std::to_string(dt) + " s exceeds 2pi/(50 omega) = " + std::to_string(limit) + " s";
    }

    GridWavepacket out = wp;
    if (rep.steps > 0) {
        const Eigen::MatrixXcd half_v = (lower_surface(wp, model).cast<cplx>() * cplx(0.0, -0.5 * rep.dt)).array().exp();
        const Eigen::MatrixXcd full_t = (kinetic(wp, model).cast<cplx>() * cplx(0.0, -rep.dt)).array().exp();
        Eigen::FFT<double> fft;
        Eigen::MatrixXcd psi = wp.psi;
        for (int s = 0; s < rep.steps; ++s) {
            psi.array() *= half_v.array();
            Eigen::MatrixXcd k = forward_2d(fft, psi);
            k.array() *= full_t.array();
            psi = inverse_2d(fft, std::move(k));
            psi.array() *= half_v.array();
        }
        out.psi = std::move(psi);
    }
    if (report) *report = rep;
    return out;
}

double adiabatic_energy(const GridWavepacket& wp, const ModelParams& model)
{
    check(wp);
    const double h2 = wp.spacing() * wp.spacing();
    const double potential = (wp.psi.cwiseAbs2().array() * lower_surface(wp, model).array()).sum() * h2;
    Eigen::FFT<double> fft;
    const Eigen::MatrixXcd k = forward_2d(fft, wp.psi);
    // Parseval: Σ|ψ|² = Σ|ψ̂|²/N².
    const double n2 = double(k.size());
    const double kin = (k.cwiseAbs2().array() * kinetic(wp, model).array()).sum() / n2 * h2;
    return (potential + kin) / (wp.norm() * wp.norm());
}

DensityGrid wavepacket_density(const GridWavepacket& wp, const std::vector<double>& q1_axis,
                               const std::vector<double>& q2_axis)
{
    check(wp);
    const int n = int(wp.q1_axis.size());
    const Eigen::VectorXd k = wavenumbers(n, wp.spacing());
    const double origin = wp.q1_axis.front();
    auto basis = [&](const std::vector<double>& q) {
        Eigen::MatrixXcd a(q.size(), n);
        for (std::size_t i = 0; i < q.size(); ++i)
            for (int j = 0; j < n; ++j) {
                const double x = q[i] - origin;
                // The Nyquist term is split evenly between ±k so real data interpolates to real values.
                a(i, j) = n % 2 == 0 && j == n / 2 ? cplx(std::cos(k(j) * x) / n) : std::polar(1.0 / n, k(j) * x);
            }
        return a;
    };
    Eigen::FFT<double> fft;
    // forward_2d is indexed (k2, k1).
    const Eigen::MatrixXcd spec = forward_2d(fft, wp.psi);
    const Eigen::MatrixXcd values = basis(q1_axis) * spec.transpose() * basis(q2_axis).transpose();

    DensityGrid d;
    d.q1_axis = q1_axis;
    d.q2_axis = q2_axis;
    d.values.resize(q1_axis.size() * q2_axis.size());
    for (std::size_t i = 0; i < q1_axis.size(); ++i)
        for (std::size_t j = 0; j < q2_axis.size(); ++j) d.values[d.index(i, j)] = std::norm(values(i, j));
    d.norm = d.integral();
    return d;
}

GpComparison compare_gp_vs_nogp(const ModelParams& model, double t, const GpComparisonOptions& options)
{
    model.validate();
    if (!(t >= 0.0)) throw InvalidArgument("comparison time must be non-negative");
    GpComparison r;

    const HilbertConfig cfg{options.n_max};
    const PureState psi0 = initialise(prepare(cfg), model);
    const PureState psi = t > 0.0 ? SpectralPropagator(jt_hamiltonian(cfg, model)).propagate(psi0, t) : psi0;
    r.full = position_density(psi, options.q_axis, options.q_axis);

    const double dt = options.dt > 0.0 ? options.dt : default_oracle_step(model);
    const GridWavepacket wp = propagate_adiabatic(initial_wavepacket(model, options.grid), model, t, dt, &r.oracle_report);
    r.oracle = wavepacket_density(wp, options.q_axis, options.q_axis);

    r.full_contrast = node_contrast(r.full);
    r.oracle_contrast = node_contrast(r.oracle);
    return r;
}

}  // namespace jtsim
