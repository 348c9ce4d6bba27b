#include "jtsim/hamiltonians.hpp"

#include <cmath>
#include <map>

#include "jtsim/errors.hpp"

namespace jtsim {

namespace {

using SparseC = Eigen::SparseMatrix<cplx>;

// |↑⟩⟨↓| with |↓⟩ at index 0.
const Eigen::Matrix2cd& sigma_plus()
{
    static const Eigen::Matrix2cd m = (Eigen::Matrix2cd() << 0, 0, 1, 0).finished();
    return m;
}

Operator spin_mode_product(const Eigen::Matrix2cd& spin, const SparseC& mode_op, int mode, const HilbertConfig& cfg)
{
    SparseC id(cfg.n_max, cfg.n_max);
    id.setIdentity();
    return mode == 1 ? embed(spin, mode_op, id) : embed(spin, id, mode_op);
}

}  // namespace

void ModelParams::validate() const
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be positive");
    if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidArgument("omega must be positive");
}

void TimeDependentOperator::add(Operator op, Coefficient coefficient)
{
    if (op.rows() != cfg_.dim() || op.cols() != cfg_.dim())
        throw InvalidArgument("operator dimension does not match the Hilbert space");
    terms_.push_back({std::move(coefficient), std::move(op)});
}

void TimeDependentOperator::add_constant(Operator op)
{
    add(std::move(op), [](double) { return cplx(1.0); });
}

TimeDependentOperator& TimeDependentOperator::operator+=(const TimeDependentOperator& other)
{
    if (!(other.cfg_ == cfg_)) throw InvalidArgument("cannot add operators on different Hilbert spaces");
    terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
    return *this;
}

TimeDependentOperator operator+(TimeDependentOperator a, const TimeDependentOperator& b)
{
    a += b;
    return a;
}

Operator TimeDependentOperator::at(double t) const
{
    Operator h(cfg_.dim(), cfg_.dim());
    for (const Term& term : terms_) h += term.coefficient(t) * term.op;
    return h;
}

void TimeDependentOperator::apply(double t, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const
{
    out.setZero(in.size());
    for (const Term& term : terms_) out.noalias() += term.coefficient(t) * (term.op * in);
}

void TimeDependentOperator::apply(double t, const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const
{
    const Operator h = at(t);
    // Spin-motion couplings sit on a few fixed diagonals of the basis index. Stored by
    // diagonal, the product streams over contiguous column segments.
    std::map<Eigen::Index, Eigen::VectorXcd> diagonals;
    const Eigen::Index dim = h.rows();
    for (Eigen::Index k = 0; k < h.outerSize(); ++k)
        for (Operator::InnerIterator it(h, k); it; ++it) {
            auto [pos, fresh] = diagonals.try_emplace(it.col() - it.row());
            if (fresh) {
                if (diagonals.size() > 32) {
                    out.noalias() = h * in;
                    return;
                }
                pos->second = Eigen::VectorXcd::Zero(dim);
            }
            pos->second(it.row()) = it.value();
        }
    out.setZero(in.rows(), in.cols());
    for (const auto& [offset, values] : diagonals) {
        // out(i, j) += values(i)·in(i + offset, j) over the rows where i + offset is in range.
        const Eigen::Index lo = std::max<Eigen::Index>(0, -offset);
        const Eigen::Index len = dim - std::abs(offset);
        const auto v = values.segment(lo, len).array();
        for (Eigen::Index j = 0; j < in.cols(); ++j)
            out.col(j).segment(lo, len).array() += v * in.col(j).segment(lo + offset, len).array();
    }
}

void TimeDependentOperator::commutator(double t, const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const
{
    out.setZero(rho.rows(), rho.cols());
    const cplx minus_i(0.0, -1.0);
    for (const Term& term : terms_) {
        const cplx c = minus_i * term.coefficient(t);
        out.noalias() += c * (term.op * rho);
        out.noalias() -= c * (rho * term.op);
    }
}

Surfaces jt_surfaces(double q1, double q2, const ModelParams& p)
{
    const double r = std::hypot(q1, q2);
    const double harmonic = 0.5 * p.omega * r * r;
    return {harmonic - p.kappa * r, harmonic + p.kappa * r};
}

Eigen::Matrix2d vibronic_coupling(double q1, double q2, const ModelParams& p)
{
    Eigen::Matrix2d m;
    m << q1, q2, q2, -q1;
    return p.kappa * m;
}

Eigen::Matrix2cd sdf_spin_operator(const SdfParams& s)
{
    const Eigen::Matrix2cd eq = std::cos(s.spin_phase) * pauli_x() + std::sin(s.spin_phase) * pauli_y();
    if (s.basis == SpinBasis::Equatorial) return eq;
    return rx(std::numbers::pi / 2) * eq * rx(-std::numbers::pi / 2);
}

TimeDependentOperator sdf_drive(const HilbertConfig& cfg, const SdfParams& s)
{
    cfg.validate();
    if (s.mode != 1 && s.mode != 2) throw InvalidArgument("SDF mode must be 1 or 2");
    const Eigen::Matrix2cd spin = 0.5 * s.rabi * sdf_spin_operator(s);
    TimeDependentOperator h(cfg);
    const double phase0 = s.motional_phase, delta = s.detuning;
    h.add(spin_mode_product(spin, creation<cplx>(cfg.n_max), s.mode, cfg),
          [=](double t) { return std::polar(1.0, phase0 + delta * t); });
    h.add(spin_mode_product(spin, annihilation<cplx>(cfg.n_max), s.mode, cfg),
          [=](double t) { return std::polar(1.0, -(phase0 + delta * t)); });
    return h;
}

Operator sdf_hamiltonian(const HilbertConfig& cfg, const SdfParams& s, double t) { return sdf_drive(cfg, s).at(t); }

TimeDependentOperator jt_interaction_hamiltonian(const HilbertConfig& cfg, const ModelParams& p)
{
    p.validate();
    const double rabi = std::numbers::sqrt2 * p.kappa;
    SdfParams first{1, std::numbers::pi / 2, p.omega, rabi, 0.0, SpinBasis::Z};
    SdfParams second{2, 0.0, p.omega, rabi, 0.0, SpinBasis::Equatorial};
    return sdf_drive(cfg, first) + sdf_drive(cfg, second);
}

TimeDependentOperator jt_interaction_hamiltonian_direct(const HilbertConfig& cfg, const ModelParams& p)
{
    p.validate();
    cfg.validate();
    const double g = p.kappa / std::numbers::sqrt2;
    const double w = p.omega;
    TimeDependentOperator h(cfg);
    auto up = [w](double t) { return std::polar(1.0, w * t); };
    auto down = [w](double t) { return std::polar(1.0, -w * t); };
    const SparseC a = annihilation<cplx>(cfg.n_max);
    const SparseC ad = creation<cplx>(cfg.n_max);
    h.add(spin_mode_product(g * pauli_z(), ad, 1, cfg), up);
    h.add(spin_mode_product(g * pauli_z(), a, 1, cfg), down);
    h.add(spin_mode_product(g * pauli_x(), ad, 2, cfg), up);
    h.add(spin_mode_product(g * pauli_x(), a, 2, cfg), down);
    return h;
}

Operator jt_hamiltonian(const HilbertConfig& cfg, const ModelParams& p)
{
    p.validate();
    cfg.validate();
    const int n = cfg.n_max;
    SparseC id(n, n);
    id.setIdentity();
    const SparseC num = number_op<cplx>(n);
    const SparseC q = (creation<cplx>(n) + annihilation<cplx>(n)) * cplx(1.0 / std::numbers::sqrt2);
    const Eigen::Matrix2cd id2 = Eigen::Matrix2cd::Identity();

    Operator h = p.omega * (embed(id2, num, id) + embed(id2, id, num));
    Operator zero_point(cfg.dim(), cfg.dim());
    zero_point.setIdentity();
    h += p.omega * zero_point;
    h += p.kappa * (embed(pauli_z(), q, id) + embed(pauli_x(), id, q));
    h.makeCompressed();
    return h;
}

TimeDependentOperator sideband_sdf_drive(const HilbertConfig& cfg, const SidebandParams& s)
{
    cfg.validate();
    if (s.mode != 1 && s.mode != 2) throw InvalidArgument("SDF mode must be 1 or 2");
    const double half = 0.5 * s.rabi;
    const double d0 = s.center_detuning, dm = s.motional_detuning, ps = s.spin_phase, pm = s.motional_phase;
    const SparseC a = annihilation<cplx>(cfg.n_max);
    const SparseC ad = creation<cplx>(cfg.n_max);
    const Eigen::Matrix2cd sp = sigma_plus();
    const Eigen::Matrix2cd sm = sigma_plus().adjoint();

    TimeDependentOperator h(cfg);
    // σ⁺a, σ⁺a† and their conjugates σ⁻a†, σ⁻a.
    h.add(spin_mode_product(sp, a, s.mode, cfg),
          [=](double t) { return half * std::polar(1.0, (d0 * t + ps) - (dm * t + pm)); });
    h.add(spin_mode_product(sp, ad, s.mode, cfg),
          [=](double t) { return half * std::polar(1.0, (d0 * t + ps) + (dm * t + pm)); });
    h.add(spin_mode_product(sm, ad, s.mode, cfg),
          [=](double t) { return half * std::polar(1.0, -(d0 * t + ps) + (dm * t + pm)); });
    h.add(spin_mode_product(sm, a, s.mode, cfg),
          [=](double t) { return half * std::polar(1.0, -(d0 * t + ps) - (dm * t + pm)); });
    return h;
}

Operator sideband_sdf_hamiltonian(const HilbertConfig& cfg, const SidebandParams& s, double t)
{
    return sideband_sdf_drive(cfg, s).at(t);
}

}  // namespace jtsim
