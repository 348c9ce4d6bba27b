#include "jtsim/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "jtsim/dynamics.hpp"
#include "jtsim/errors.hpp"

namespace jtsim {

namespace {

constexpr double axis_tol = 1e-12;
constexpr double component_floor = 1e-12;

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

void require_axis(const std::vector<double>& axis, const char* name)
{
    if (axis.empty()) throw InvalidArgument(std::string(name) + " axis is empty");
    for (std::size_t k = 0; k < axis.size(); ++k) {
        if (!std::isfinite(axis[k])) throw InvalidArgument(std::string(name) + " axis holds a non-finite value");
        if (k > 0 && !(axis[k] > axis[k - 1])) throw InvalidArgument(std::string(name) + " axis must be increasing");
    }
}

// Trapezoid weights on a possibly non-uniform axis; a single point gets weight 1.
Eigen::VectorXd trapezoid_weights(const std::vector<double>& axis)
{
    const std::size_t n = axis.size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    if (n == 1) {
        w(0) = 1.0;
        return w;
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double h = 0.5 * (axis[k + 1] - axis[k]);
        w(k) += h;
        w(k + 1) += h;
    }
    return w;
}

std::size_t zero_index(const std::vector<double>& axis, const char* name)
{
    for (std::size_t k = 0; k < axis.size(); ++k)
        if (std::abs(axis[k]) <= axis_tol) return k;
    throw InvalidArgument(std::string(name) + " axis must contain 0");
}

std::vector<double> mirror(const std::vector<double>& nonneg)
{
    std::vector<double> out;
    for (std::size_t k = nonneg.size(); k-- > 1;) out.push_back(-nonneg[k]);
    out.insert(out.end(), nonneg.begin(), nonneg.end());
    out[nonneg.size() - 1] = 0.0;
    return out;
}

// Position of −axis[k] in a symmetric axis.
std::size_t reflected(const std::vector<double>& axis, std::size_t k) { return axis.size() - 1 - k; }

bool symmetric(const std::vector<double>& axis)
{
    const std::size_t n = axis.size();
    for (std::size_t k = 0; k < n; ++k)
        if (std::abs(axis[k] + axis[n - 1 - k]) > 1e-9 * std::max(1.0, std::abs(axis[k]))) return false;
    return true;
}

void finish(DensityGrid& d) { d.norm = d.integral(); }

// E(q, β) = w_β e^{−i√2 qβ}.
Eigen::MatrixXcd fourier_kernel(const std::vector<double>& q, const std::vector<double>& beta)
{
    const Eigen::VectorXd w = trapezoid_weights(beta);
    Eigen::MatrixXcd e(q.size(), beta.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t j = 0; j < beta.size(); ++j)
            e(i, j) = w(j) * std::polar(1.0, -std::numbers::sqrt2 * q[i] * beta[j]);
    return e;
}

template <typename F>
void for_each_component(const MixedState& rho, F&& f)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.rho);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double lambda = es.eigenvalues()(k);
        if (lambda <= component_floor) continue;
        f(lambda, PureState{rho.cfg, es.eigenvectors().col(k)});
    }
}

DensityGrid accumulate(const MixedState& rho, const std::function<DensityGrid(const PureState&)>& single)
{
    DensityGrid total;
    for_each_component(rho, [&](double lambda, const PureState& psi) {
        DensityGrid d = single(psi);
        if (total.values.empty()) {
            total = d;
            for (double& v : total.values) v *= lambda;
        } else {
            for (std::size_t k = 0; k < d.values.size(); ++k) total.values[k] += lambda * d.values[k];
        }
    });
    finish(total);
    return total;
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int points)
{
    if (points < 2) throw InvalidArgument("linspace needs at least 2 points");
    std::vector<double> v(points);
    for (int k = 0; k < points; ++k) v[k] = lo + (hi - lo) * k / (points - 1);
    v.back() = hi;
    return v;
}

std::vector<double> default_q_axis() { return linspace(-4.0, 4.0, 81); }

double DensityGrid::integral() const
{
    const Eigen::VectorXd w2 = trapezoid_weights(q2_axis);
    if (is_1d()) return w2.dot(to_vector(values));
    const Eigen::VectorXd w1 = trapezoid_weights(q1_axis);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> v(
        values.data(), q1_axis.size(), q2_axis.size());
    return w1.dot(v * w2);
}

// CSV ------------------------------------------------------------------------------

void DensityGrid::write_csv(std::ostream& out) const
{
    if (is_1d()) {
        out << "q2,density\n";
        for (std::size_t k = 0; k < q2_axis.size(); ++k) out << fmt(q2_axis[k]) << ',' << fmt(values[k]) << '\n';
        return;
    }
    out << "q1,q2,density\n";
    for (std::size_t i = 0; i < q1_axis.size(); ++i)
        for (std::size_t j = 0; j < q2_axis.size(); ++j)
            out << fmt(q1_axis[i]) << ',' << fmt(q2_axis[j]) << ',' << fmt(at(i, j)) << '\n';
}

DensityGrid DensityGrid::read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("empty density CSV");
    const bool two_d = line == "q1,q2,density";
    if (!two_d && line != "q2,density") throw InvalidArgument("density CSV must start with q1,q2,density or q2,density");

    DensityGrid d;
    std::vector<double> q1s;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        double a = 0, b = 0, c = 0;
        char tail = 0;
        const int want = two_d ? 3 : 2;
        const int got = two_d ? std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &a, &b, &c, &tail)
                              : std::sscanf(line.c_str(), "%lf,%lf%c", &b, &c, &tail);
        if (got != want) throw InvalidArgument("malformed density CSV row at line " + std::to_string(lineno));
        if (two_d) {
            if (q1s.empty() || q1s.back() != a) q1s.push_back(a);
            if (q1s.size() == 1) d.q2_axis.push_back(b);
        } else {
            d.q2_axis.push_back(b);
        }
        d.values.push_back(c);
    }
    if (two_d) d.q1_axis = q1s;
    const std::size_t rows = two_d ? d.q1_axis.size() : 1;
    if (d.values.empty() || d.values.size() != rows * d.q2_axis.size())
        throw InvalidArgument("density CSV rows do not form a complete grid");
    if (two_d) require_axis(d.q1_axis, "q1");
    require_axis(d.q2_axis, "q2");
    finish(d);
    return d;
}

// Characteristic-function processing ------------------------------------------------

CharGrid extend_hermitian(const CharGrid& grid, QuadrantFill fill)
{
    require_axis(grid.beta1_axis, "beta1");
    require_axis(grid.beta2_axis, "beta2");
    if (grid.values.size() != grid.beta1_axis.size() * grid.beta2_axis.size())
        throw InvalidArgument("characteristic-function grid is incomplete");
    if (grid.beta1_axis.front() < -axis_tol) throw InvalidArgument("grid already holds negative beta1 data");
    const std::size_t z1 = zero_index(grid.beta1_axis, "beta1");
    const std::size_t z2 = zero_index(grid.beta2_axis, "beta2");
    const bool one_mode = grid.beta1_axis.size() == 1;
    const bool half_plane = grid.beta2_axis.front() < -axis_tol;
    if (one_mode && half_plane) throw InvalidArgument("grid already holds negative beta2 data");
    if (half_plane && !symmetric(grid.beta2_axis)) throw InvalidArgument("half-plane grid needs a symmetric beta2 axis");

    CharGrid out;
    out.sampled_quadrant = false;
    out.beta1_axis = one_mode ? std::vector<double>{0.0} : mirror(grid.beta1_axis);
    out.beta2_axis = half_plane ? grid.beta2_axis : mirror(grid.beta2_axis);
    const std::size_t n1 = out.beta1_axis.size(), n2 = out.beta2_axis.size();
    const std::size_t off1 = out.beta1_axis.size() - grid.beta1_axis.size();
    const std::size_t off2 = half_plane ? 0 : n2 - grid.beta2_axis.size();
    const std::size_t total = n1 * n2;
    out.values.resize(total);
    out.p_down.resize(total);
    out.p_up.resize(total);
    out.shots.resize(total);

    auto src = [&](std::size_t i1, std::size_t i2) { return grid.index(i1, i2); };
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            // One-mode grids have no β₁ to reflect; χ(−β₂) = χ(β₂)*.
            const bool neg1 = one_mode ? j < off2 : i < off1;
            // Reduce to β₁ ≥ 0 by χ(−β)* = χ(β).
            const std::size_t ii = neg1 ? reflected(out.beta1_axis, i) : i;
            const std::size_t jj = neg1 ? reflected(out.beta2_axis, j) : j;
            const std::size_t s1 = ii - off1;
            cplx v;
            std::size_t k;
            if (jj >= off2) {
                k = src(s1, jj - off2);
                v = grid.values[k];
            } else {
                // (+, −) quadrant of a quadrant scan.
                const std::size_t s2 = reflected(out.beta2_axis, jj) - off2;
                k = src(s1, s2);
                if (s1 == z1)
                    v = std::conj(grid.values[k]);  // on the β₁ = 0 line Hermiticity decides
                else if (fill == QuadrantFill::Q2Parity)
                    v = grid.values[k];
                else
                    v = grid.values[src(s1, z2)] * std::conj(grid.values[src(z1, s2)]);
            }
            const std::size_t o = out.index(i, j);
            out.values[o] = neg1 ? std::conj(v) : v;
            out.p_down[o] = grid.p_down.empty() ? 0.0 : grid.p_down[k];
            out.p_up[o] = grid.p_up.empty() ? 0.0 : grid.p_up[k];
            out.shots[o] = grid.shots.empty() ? 0 : grid.shots[k];
        }
    return out;
}

BaselineCorrection baseline_correct(const CharGrid& grid, double radius)
{
    if (!(radius > 0.0)) throw InvalidArgument("baseline radius must be positive");
    cplx sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < grid.beta1_axis.size(); ++i)
        for (std::size_t j = 0; j < grid.beta2_axis.size(); ++j)
            if (std::hypot(grid.beta1_axis[i], grid.beta2_axis[j]) >= radius - axis_tol) {
                sum += grid.at(i, j);
                ++count;
            }
    if (count == 0) throw NoTailPoints("no grid points at |beta| >= " + fmt(radius));
    BaselineCorrection r{grid, sum / double(count), count};
    for (cplx& v : r.grid.values) v -= r.offset;
    return r;
}

DensityGrid density_2d(const CharGrid& extended, const std::vector<double>& q1_axis,
                       const std::vector<double>& q2_axis)
{
    if (extended.sampled_quadrant || extended.beta1_axis.size() < 2)
        throw InvalidArgument("density_2d needs a Hermitian-extended two-mode grid");
    require_axis(q1_axis, "q1");
    require_axis(q2_axis, "q2");
    const Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> chi(
        extended.values.data(), extended.beta1_axis.size(), extended.beta2_axis.size());
    const Eigen::MatrixXcd raw = fourier_kernel(q1_axis, extended.beta1_axis) * chi *
                                 fourier_kernel(q2_axis, extended.beta2_axis).transpose() /
                                 (2.0 * std::numbers::pi * std::numbers::pi);

    DensityGrid d;
    d.q1_axis = q1_axis;
    d.q2_axis = q2_axis;
    d.values.resize(q1_axis.size() * q2_axis.size());
    for (std::size_t i = 0; i < q1_axis.size(); ++i)
        for (std::size_t j = 0; j < q2_axis.size(); ++j) d.values[d.index(i, j)] = raw(i, j).real();
    const double peak = raw.real().maxCoeff();
    d.imag_residue = peak > 0.0 ? raw.imag().cwiseAbs().maxCoeff() / peak : 0.0;
    finish(d);
    return d;
}

DensityGrid density_1d(const CharGrid& extended, const std::vector<double>& q2_axis)
{
    if (extended.sampled_quadrant) throw InvalidArgument("density_1d needs a Hermitian-extended grid");
    require_axis(q2_axis, "q2");
    const std::size_t z1 = zero_index(extended.beta1_axis, "beta1");
    Eigen::VectorXcd chi(extended.beta2_axis.size());
    for (std::size_t j = 0; j < extended.beta2_axis.size(); ++j) chi(j) = extended.at(z1, j);
    const Eigen::VectorXcd raw =
        fourier_kernel(q2_axis, extended.beta2_axis) * chi / (std::numbers::sqrt2 * std::numbers::pi);

    DensityGrid d;
    d.q2_axis = q2_axis;
    d.values.resize(q2_axis.size());
    for (std::size_t j = 0; j < q2_axis.size(); ++j) d.values[j] = raw(j).real();
    const double peak = raw.real().maxCoeff();
    d.imag_residue = peak > 0.0 ? raw.imag().cwiseAbs().maxCoeff() / peak : 0.0;
    finish(d);
    return d;
}

// Direct densities --------------------------------------------------------------------

DensityGrid position_density(const PureState& psi, const std::vector<double>& q1_axis,
                             const std::vector<double>& q2_axis)
{
    require_axis(q1_axis, "q1");
    require_axis(q2_axis, "q2");
    const int n = psi.cfg.n_max;
    const Eigen::MatrixXd h1 = hermite_functions(to_vector(q1_axis), n);
    const Eigen::MatrixXd h2 = hermite_functions(to_vector(q2_axis), n);
    Eigen::MatrixXd dens = Eigen::MatrixXd::Zero(q1_axis.size(), q2_axis.size());
    for (int s = 0; s < 2; ++s) {
        const Eigen::MatrixXcd c = psi.block(s);
        dens += (h1.cast<cplx>() * c * h2.transpose().cast<cplx>()).cwiseAbs2();
    }
    DensityGrid d;
    d.q1_axis = q1_axis;
    d.q2_axis = q2_axis;
    d.values.resize(dens.size());
    for (std::size_t i = 0; i < q1_axis.size(); ++i)
        for (std::size_t j = 0; j < q2_axis.size(); ++j) d.values[d.index(i, j)] = dens(i, j);
    finish(d);
    return d;
}

DensityGrid position_density(const MixedState& rho, const std::vector<double>& q1_axis,
                             const std::vector<double>& q2_axis)
{
    return accumulate(rho, [&](const PureState& psi) { return position_density(psi, q1_axis, q2_axis); });
}

DensityGrid position_density_1d(const PureState& psi, const std::vector<double>& q2_axis)
{
    require_axis(q2_axis, "q2");
    const Eigen::MatrixXd h2 = hermite_functions(to_vector(q2_axis), psi.cfg.n_max);
    Eigen::VectorXd dens = Eigen::VectorXd::Zero(q2_axis.size());
    for (int s = 0; s < 2; ++s) {
        const Eigen::MatrixXcd c = psi.block(s);
        dens += (c * h2.transpose().cast<cplx>()).cwiseAbs2().colwise().sum().transpose();
    }
    DensityGrid d;
    d.q2_axis = q2_axis;
    d.values.assign(dens.data(), dens.data() + dens.size());
    finish(d);
    return d;
}

DensityGrid position_density_1d(const MixedState& rho, const std::vector<double>& q2_axis)
{
    return accumulate(rho, [&](const PureState& psi) { return position_density_1d(psi, q2_axis); });
}

double probability_q1_nonnegative(const PureState& psi)
{
    const int n = psi.cfg.n_max;
    // φₖ is negligible beyond the classical turning point √(2k+1) plus a few widths.
    const double q_max = std::sqrt(2.0 * n + 1.0) + 8.0;
    const int intervals = 4000;
    Eigen::VectorXd q(intervals + 1);
    for (int k = 0; k <= intervals; ++k) q(k) = q_max * k / intervals;
    const Eigen::MatrixXd h1 = hermite_functions(q, n);
    Eigen::VectorXd marginal = Eigen::VectorXd::Zero(q.size());
    for (int s = 0; s < 2; ++s) {
        const Eigen::MatrixXcd c = psi.block(s);
        marginal += (h1.cast<cplx>() * c).cwiseAbs2().rowwise().sum();
    }
    // Composite Simpson.
    double sum = marginal(0) + marginal(intervals);
    for (int k = 1; k < intervals; ++k) sum += (k % 2 ? 4.0 : 2.0) * marginal(k);
    return sum * (q_max / intervals) / 3.0 / psi.amplitudes.squaredNorm();
}

double rms_radius(const PureState& psi)
{
    double var = 0.0;
    for (int mode = 1; mode <= 2; ++mode) {
        const QuadratureOps ops = position_momentum_ops(psi.cfg, mode);
        const Eigen::VectorXcd qpsi = ops.q * psi.amplitudes;
        const double mean = psi.amplitudes.dot(qpsi).real();
        var += qpsi.squaredNorm() - mean * mean;
    }
    return std::sqrt(var / psi.amplitudes.squaredNorm());
}

// Metrics -------------------------------------------------------------------------------

InterferenceTime find_interference_time(const ModelParams& model, const InterferenceSearch& search)
{
    model.validate();
    if (!(search.window_lo >= 0.0) || !(search.window_hi > search.window_lo) || !std::isfinite(search.window_hi))
        throw WindowTooNarrow("search window must satisfy 0 <= lo < hi");
    if (search.samples < 5) throw WindowTooNarrow("search window needs at least 5 samples");

    const HilbertConfig cfg{search.n_max};
    const PureState psi0 = initialise(prepare(cfg), model);
    const SpectralPropagator prop(jt_hamiltonian(cfg, model));

    InterferenceTime r;
    r.times = linspace(search.window_lo, search.window_hi, search.samples);
    r.widths.reserve(r.times.size());
    for (double t : r.times) r.widths.push_back(rms_radius(prop.propagate(psi0, t)));

    const std::size_t k = std::min_element(r.widths.begin(), r.widths.end()) - r.widths.begin();
    if (k == 0 || k + 1 == r.widths.size())
        throw WindowTooNarrow("width minimum lies on the edge of the search window");
    const double h = r.times[1] - r.times[0];
    const double a = r.widths[k - 1], b = r.widths[k], c = r.widths[k + 1];
    const double curvature = a - 2.0 * b + c;
    const double shift = curvature > 0.0 ? 0.5 * (a - c) / curvature : 0.0;
    r.T = 0.5 * (r.times[k] + shift * h);
    r.width_at_min = b - 0.125 * (a - c) * (a - c) / std::max(curvature, 1e-300);
    if (!(curvature > 0.0)) r.width_at_min = b;
    return r;
}

double node_contrast(const DensityGrid& density)
{
    if (density.is_1d()) throw InvalidArgument("node_contrast needs a 2D density");
    const std::vector<double>& q1 = density.q1_axis;
    const std::vector<double>& q2 = density.q2_axis;
    if (!(q2.front() <= 0.0 && q2.back() >= 0.0)) throw InvalidArgument("Q2 axis does not span 0");

    std::size_t j = 0;
    while (j + 1 < q2.size() && q2[j + 1] <= 0.0) ++j;
    const double frac = j + 1 < q2.size() && q2[j] < 0.0 ? -q2[j] / (q2[j + 1] - q2[j]) : 0.0;

    double line = 0.0, peak = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < q1.size(); ++i) {
        if (q1[i] <= 0.0) continue;
        for (std::size_t jj = 0; jj < q2.size(); ++jj) peak = std::max(peak, density.at(i, jj));
        if (q1[i] < 0.5 - axis_tol || q1[i] > 2.5 + axis_tol) continue;
        const double v = frac > 0.0 ? (1 - frac) * density.at(i, j) + frac * density.at(i, j + 1) : density.at(i, j);
        line += v;
        ++count;
    }
    if (count == 0) throw InvalidArgument("Q1 axis has no points in [0.5, 2.5]");
    if (!(peak > 0.0)) return 0.0;
    return std::clamp(1.0 - line / double(count) / peak, 0.0, 1.0);
}

double l1_distance(const DensityGrid& a, const DensityGrid& b)
{
    if (a.q1_axis != b.q1_axis || a.q2_axis != b.q2_axis) throw InvalidArgument("densities are on different axes");
    DensityGrid diff = a;
    for (std::size_t k = 0; k < diff.values.size(); ++k) diff.values[k] = std::abs(a.values[k] - b.values[k]);
    finish(diff);
    return diff.norm;
}

}  // namespace jtsim
