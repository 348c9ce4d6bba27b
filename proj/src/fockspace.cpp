#include "jtsim/fockspace.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "jtsim/errors.hpp"

namespace jtsim {

namespace {

using SparseC = Eigen::SparseMatrix<cplx>;

SparseC identity_sparse(int n)
{
    SparseC id(n, n);
    id.setIdentity();
    return id;
}

void check_mode(int mode)
{
    if (mode != 1 && mode != 2) throw InvalidArgument("mode index must be 1 or 2, got " + std::to_string(mode));
}

}  // namespace

void HilbertConfig::validate() const
{
    if (n_max < 2) throw InvalidArgument("n_max must be at least 2, got " + std::to_string(n_max));
}

MixedState MixedState::from_pure(const PureState& psi)
{
    return {psi.cfg, psi.amplitudes * psi.amplitudes.adjoint()};
}

double MixedState::purity() const { return (rho * rho).trace().real(); }

double MixedState::hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

double MixedState::min_eigenvalue() const
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Single mode ----------------------------------------------------------------

Eigen::MatrixXd position_op(int n)
{
    Eigen::SparseMatrix<double> a = annihilation<double>(n);
    Eigen::MatrixXd ad = Eigen::MatrixXd(a);
    return (ad + ad.transpose()) / std::numbers::sqrt2;
}

ModeMatrix momentum_op(int n)
{
    Eigen::MatrixXd a = Eigen::MatrixXd(annihilation<double>(n));
    return cplx(0.0, 1.0) * (a.transpose() - a).cast<cplx>() / std::numbers::sqrt2;
}

ModeVector fock_state(int k, int n)
{
    if (k < 0 || k >= n) throw InvalidArgument("Fock index out of range");
    ModeVector v = ModeVector::Zero(n);
    v(k) = 1.0;
    return v;
}

ModeMatrix displacement_op(cplx alpha, int n)
{
    Eigen::MatrixXd a = Eigen::MatrixXd(annihilation<double>(n));
    ModeMatrix gen = alpha * a.transpose().cast<cplx>() - std::conj(alpha) * a.cast<cplx>();
    return gen.exp();
}

ModeVector coherent_amplitudes(cplx alpha, int n)
{
    ModeVector c(n);
    c(0) = std::exp(-0.5 * std::norm(alpha));
    for (int k = 1; k < n; ++k) c(k) = c(k - 1) * alpha / std::sqrt(double(k));
    return c;
}

ModeMatrix displacement_block(cplx alpha, int n)
{
    ModeMatrix d(n, n);
    d.col(0) = coherent_amplitudes(alpha, n);
    const cplx ac = std::conj(alpha);
    for (int k = 0; k + 1 < n; ++k) {
        const double inv = 1.0 / std::sqrt(double(k + 1));
        d(0, k + 1) = -ac * d(0, k) * inv;
        for (int m = 1; m < n; ++m) d(m, k + 1) = (std::sqrt(double(m)) * d(m - 1, k) - ac * d(m, k)) * inv;
    }
    return d;
}

double edge_population(const ModeVector& v, int levels)
{
    const int n = int(v.size());
    levels = std::min(levels, n);
    return v.tail(levels).squaredNorm();
}

ModeVector coherent_state(cplx alpha, const HilbertConfig& cfg)
{
    cfg.validate();
    const int n = cfg.n_max;
    if (std::norm(alpha) > n / 4.0)
        throw InvalidArgument("|alpha|^2 = " + std::to_string(std::norm(alpha)) + " exceeds n_max/4 = " +
                              std::to_string(n / 4.0));
    ModeVector v = displacement_op(alpha, n).col(0);
    const double edge = edge_population(v, 2);
    if (edge > 1e-6)
        throw TruncationOverflow("coherent state leaks into the top Fock levels (population " +
                                     std::to_string(edge) + ")",
                                 edge);
    return v / v.norm();
}

ModeMatrix thermal_state(double n_bar, const HilbertConfig& cfg)
{
    cfg.validate();
    if (!(n_bar >= 0.0)) throw InvalidArgument("thermal occupation must be non-negative");
    const int n = cfg.n_max;
    ModeMatrix rho = ModeMatrix::Zero(n, n);
    const double ratio = n_bar / (n_bar + 1.0);
    double p = 1.0, total = 0.0;
    for (int k = 0; k < n; ++k) {
        rho(k, k) = p;
        total += p;
        p *= ratio;
    }
    return rho / total;
}

Eigen::MatrixXd hermite_functions(const Eigen::VectorXd& q, int n)
{
    Eigen::MatrixXd phi(q.size(), n);
    const double norm0 = std::pow(std::numbers::pi, -0.25);
    phi.col(0) = norm0 * (-0.5 * q.array().square()).exp();
    if (n > 1) phi.col(1) = std::numbers::sqrt2 * q.array() * phi.col(0).array();
    for (int k = 1; k + 1 < n; ++k) {
        phi.col(k + 1) = std::sqrt(2.0 / (k + 1)) * q.array() * phi.col(k).array() -
                         std::sqrt(double(k) / (k + 1)) * phi.col(k - 1).array();
    }
    return phi;
}

// Qubit ------------------------------------------------------------------------

const Eigen::Matrix2cd& pauli_x()
{
    static const Eigen::Matrix2cd m = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
    return m;
}

const Eigen::Matrix2cd& pauli_y()
{
    static const Eigen::Matrix2cd m = (Eigen::Matrix2cd() << 0, cplx(0, -1), cplx(0, 1), 0).finished();
    return m;
}

const Eigen::Matrix2cd& pauli_z()
{
    static const Eigen::Matrix2cd m = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
    return m;
}

Eigen::Matrix2cd equatorial_rotation(double phi, double theta)
{
    const Eigen::Matrix2cd axis = std::cos(phi) * pauli_x() + std::sin(phi) * pauli_y();
    return std::cos(theta / 2) * Eigen::Matrix2cd::Identity() - cplx(0, std::sin(theta / 2)) * axis;
}

Eigen::Matrix2cd rx(double theta) { return equatorial_rotation(0.0, theta); }

// Composite --------------------------------------------------------------------

Operator embed(const Eigen::Matrix2cd& qubit, const SparseC& m1, const SparseC& m2)
{
    SparseC q = qubit.sparseView(0.0, 0.0);
    SparseC modes = Eigen::kroneckerProduct(m1, m2);
    Operator out = Eigen::kroneckerProduct(q, modes);
    out.makeCompressed();
    return out;
}

Operator embed(const Eigen::Matrix2cd& qubit, const ModeMatrix& m1, const ModeMatrix& m2)
{
    return embed(qubit, SparseC(m1.sparseView(0.0, 0.0)), SparseC(m2.sparseView(0.0, 0.0)));
}

Operator embed_mode(const SparseC& op, int mode, const HilbertConfig& cfg)
{
    check_mode(mode);
    const SparseC id = identity_sparse(cfg.n_max);
    return mode == 1 ? embed(Eigen::Matrix2cd::Identity(), op, id) : embed(Eigen::Matrix2cd::Identity(), id, op);
}

Operator embed_qubit(const Eigen::Matrix2cd& q, const HilbertConfig& cfg)
{
    const SparseC id = identity_sparse(cfg.n_max);
    return embed(q, id, id);
}

LadderOps ladder_ops(const HilbertConfig& cfg, int mode)
{
    cfg.validate();
    const SparseC a = annihilation<cplx>(cfg.n_max);
    const SparseC ad = creation<cplx>(cfg.n_max);
    return {embed_mode(a, mode, cfg), embed_mode(ad, mode, cfg)};
}

QuadratureOps position_momentum_ops(const HilbertConfig& cfg, int mode)
{
    const LadderOps l = ladder_ops(cfg, mode);
    Operator q = (l.a_dag + l.a) * cplx(1.0 / std::numbers::sqrt2);
    Operator p = (l.a_dag - l.a) * cplx(0.0, 1.0 / std::numbers::sqrt2);
    return {q, p};
}

PureState product_state(const Eigen::Vector2cd& qubit, const ModeVector& m1, const ModeVector& m2)
{
    if (m1.size() != m2.size()) throw InvalidArgument("mode vectors must share a truncation");
    HilbertConfig cfg{int(m1.size())};
    cfg.validate();
    PureState psi{cfg, Eigen::VectorXcd::Zero(cfg.dim())};
    const RowMatrixXcd modes = m1 * m2.transpose();
    for (int s = 0; s < 2; ++s) psi.block(s) = qubit(s) * modes;
    return psi;
}

MixedState product_state(const Eigen::Matrix2cd& qubit, const ModeMatrix& m1, const ModeMatrix& m2)
{
    if (m1.rows() != m2.rows()) throw InvalidArgument("mode matrices must share a truncation");
    HilbertConfig cfg{int(m1.rows())};
    cfg.validate();
    Eigen::MatrixXcd modes = Eigen::kroneckerProduct(m1, m2);
    return {cfg, Eigen::kroneckerProduct(qubit, modes)};
}

void apply_mode(PureState& psi, const ModeMatrix& op, int mode)
{
    check_mode(mode);
    for (int s = 0; s < 2; ++s) {
        auto c = psi.block(s);
        if (mode == 1)
            c = (op * c).eval();
        else
            c = (c * op.transpose()).eval();
    }
}

void apply_qubit(PureState& psi, const Eigen::Matrix2cd& q)
{
    const RowMatrixXcd c0 = psi.block(0);
    const RowMatrixXcd c1 = psi.block(1);
    psi.block(0) = q(0, 0) * c0 + q(0, 1) * c1;
    psi.block(1) = q(1, 0) * c0 + q(1, 1) * c1;
}

void apply_mode(MixedState& rho, const ModeMatrix& op, int mode)
{
    check_mode(mode);
    const Operator m = embed_mode(SparseC(op.sparseView(0.0, 0.0)), mode, rho.cfg);
    Eigen::MatrixXcd tmp = m * rho.rho;
    rho.rho = tmp * Operator(m.adjoint());
}

void apply_qubit(MixedState& rho, const Eigen::Matrix2cd& q)
{
    const Operator m = embed_qubit(q, rho.cfg);
    Eigen::MatrixXcd tmp = m * rho.rho;
    rho.rho = tmp * Operator(m.adjoint());
}

namespace {

Eigen::VectorXcd rotation_phases(const HilbertConfig& cfg, double theta1, double theta2)
{
    Eigen::VectorXcd ph(cfg.dim());
    for (int s = 0; s < 2; ++s)
        for (int n1 = 0; n1 < cfg.n_max; ++n1)
            for (int n2 = 0; n2 < cfg.n_max; ++n2)
                ph(cfg.index(s, n1, n2)) = std::polar(1.0, -(theta1 * n1 + theta2 * n2));
    return ph;
}

}  // namespace

void rotate_modes(PureState& psi, double theta1, double theta2)
{
    psi.amplitudes = psi.amplitudes.cwiseProduct(rotation_phases(psi.cfg, theta1, theta2));
}

void rotate_modes(MixedState& rho, double theta1, double theta2)
{
    const Eigen::VectorXcd ph = rotation_phases(rho.cfg, theta1, theta2);
    rho.rho = ph.asDiagonal() * rho.rho * ph.conjugate().asDiagonal();
}

PureState retruncate(const PureState& psi, int n_max)
{
    HilbertConfig cfg{n_max};
    cfg.validate();
    PureState out{cfg, Eigen::VectorXcd::Zero(cfg.dim())};
    const int keep = std::min(n_max, psi.cfg.n_max);
    for (int s = 0; s < 2; ++s) out.block(s).topLeftCorner(keep, keep) = psi.block(s).topLeftCorner(keep, keep);
    return out;
}

MixedState retruncate(const MixedState& rho, int n_max)
{
    HilbertConfig cfg{n_max};
    cfg.validate();
    MixedState out{cfg, Eigen::MatrixXcd::Zero(cfg.dim(), cfg.dim())};
    const int keep = std::min(n_max, rho.cfg.n_max);
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < keep; ++a)
            for (int b = 0; b < keep; ++b)
                for (int t = 0; t < 2; ++t)
                    for (int c = 0; c < keep; ++c)
                        for (int d = 0; d < keep; ++d)
                            out.rho(cfg.index(s, a, b), cfg.index(t, c, d)) =
                                rho.rho(rho.cfg.index(s, a, b), rho.cfg.index(t, c, d));
    return out;
}

Eigen::Matrix2cd reduced_qubit(const PureState& psi)
{
    Eigen::Matrix2cd r;
    const int b = psi.cfg.block_dim();
    for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) r(s, t) = psi.amplitudes.segment(t * b, b).dot(psi.amplitudes.segment(s * b, b));
    return r;
}

Eigen::Matrix2cd reduced_qubit(const MixedState& rho)
{
    Eigen::Matrix2cd r;
    const int b = rho.cfg.block_dim();
    for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) r(s, t) = rho.rho.block(s * b, t * b, b, b).trace();
    return r;
}

ModeMatrix reduced_mode(const PureState& psi, int mode)
{
    check_mode(mode);
    const int n = psi.cfg.n_max;
    ModeMatrix r = ModeMatrix::Zero(n, n);
    for (int s = 0; s < 2; ++s) {
        const RowMatrixXcd c = psi.block(s);
        if (mode == 1)
            r += c * c.adjoint();
        else
            r += c.transpose() * c.conjugate();
    }
    return r;
}

ModeMatrix reduced_mode(const MixedState& rho, int mode)
{
    check_mode(mode);
    const HilbertConfig& cfg = rho.cfg;
    const int n = cfg.n_max;
    ModeMatrix r = ModeMatrix::Zero(n, n);
    for (int s = 0; s < 2; ++s)
        for (int m = 0; m < n; ++m)
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j) {
                    if (mode == 1)
                        r(m, k) += rho.rho(cfg.index(s, m, j), cfg.index(s, k, j));
                    else
                        r(m, k) += rho.rho(cfg.index(s, j, m), cfg.index(s, j, k));
                }
    return r;
}

double edge_population(const PureState& psi, int levels)
{
    double worst = 0.0;
    for (int mode = 1; mode <= 2; ++mode) {
        const ModeMatrix r = reduced_mode(psi, mode);
        const int n = int(r.rows());
        worst = std::max(worst, r.diagonal().real().tail(std::min(levels, n)).sum());
    }
    return worst;
}

double edge_population(const MixedState& rho, int levels)
{
    double worst = 0.0;
    for (int mode = 1; mode <= 2; ++mode) {
        const ModeMatrix r = reduced_mode(rho, mode);
        const int n = int(r.rows());
        worst = std::max(worst, r.diagonal().real().tail(std::min(levels, n)).sum());
    }
    return worst;
}

cplx expectation(const PureState& psi, const Operator& op)
{
    return psi.amplitudes.dot(op * psi.amplitudes);
}

cplx expectation(const MixedState& rho, const Operator& op)
{
    Eigen::MatrixXcd prod = op * rho.rho;
    return prod.trace();
}

double fidelity(const PureState& a, const PureState& b) { return std::norm(a.amplitudes.dot(b.amplitudes)); }

double fidelity(const MixedState& rho, const PureState& psi)
{
    return psi.amplitudes.dot(rho.rho * psi.amplitudes).real();
}

double trace_distance(const MixedState& a, const MixedState& b)
{
    Eigen::MatrixXcd diff = a.rho - b.rho;
    diff = 0.5 * (diff + diff.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace jtsim
