#include "jtsim/dynamics.hpp"

#include <cmath>
#include <string>

#include "jtsim/errors.hpp"

namespace jtsim {

void NoiseParams::validate() const
{
    if (!(heating_rate >= 0.0)) throw InvalidArgument("heating rate must be non-negative");
    if (!(dephasing_t2 > 0.0)) throw InvalidArgument("dephasing time must be positive");
    if (!(initial_n_bar >= 0.0)) throw InvalidArgument("initial occupation must be non-negative");
    if (!(spam_error >= 0.0 && spam_error <= 0.5)) throw InvalidArgument("SPAM error must lie in [0, 0.5]");
}

IntegratorConfig jt_integrator_config(const ModelParams& p)
{
    IntegratorConfig cfg;
    cfg.max_step = (two_pi / p.omega) / 200.0;
    return cfg;
}

PureState evolve_unitary(const PureState& psi, const TimeDependentOperator& h, double t0, double t1,
                         const IntegratorConfig& cfg, EvolutionReport* report)
{
    if (psi.amplitudes.size() != psi.cfg.dim()) throw InvalidArgument("state dimension mismatch");
    if (!h.empty() && !(h.cfg() == psi.cfg)) throw InvalidArgument("Hamiltonian and state truncations differ");
    if (std::abs(psi.norm() - 1.0) > 1e-9) throw InvalidArgument("evolve_unitary requires a normalized state");

    EvolutionReport local;
    EvolutionReport& rep = report ? *report : local;
    const cplx minus_i(0.0, -1.0);
    auto rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        h.apply(t, y, dy);
        dy *= minus_i;
    };
    PureState out{psi.cfg, dormand_prince(rhs, psi.amplitudes, t0, t1, cfg, rep)};
    rep.norm_drift = std::abs(out.norm() - 1.0);
    if (rep.norm_drift > 1e-7)
        throw IntegratorFailure("norm drift " + std::to_string(rep.norm_drift) + " exceeds 1e-7");
    return out;
}

std::vector<Operator> lindblad_operators(const HilbertConfig& cfg, const NoiseParams& noise)
{
    noise.validate();
    std::vector<Operator> ops;
    for (int mode = 1; mode <= 2; ++mode) {
        const LadderOps l = ladder_ops(cfg, mode);
        if (noise.heating_rate > 0.0) {
            const double g = std::sqrt(noise.heating_rate);
            ops.push_back(g * l.a);
            ops.push_back(g * l.a_dag);
        }
        if (std::isfinite(noise.dephasing_t2)) {
            Operator n = l.a_dag * l.a;
            ops.push_back(std::sqrt(2.0 / noise.dephasing_t2) * n);
        }
    }
    return ops;
}

Dissipator::Dissipator(const HilbertConfig& cfg, const NoiseParams& noise) : cfg_(cfg)
{
    noise.validate();
    const int n = cfg.n_max, dim = cfg.dim();
    heating_ = noise.heating_rate;
    const double gamma = std::isfinite(noise.dephasing_t2) ? 2.0 / noise.dephasing_t2 : 0.0;
    empty_ = heating_ == 0.0 && gamma == 0.0;

    std::vector<double> level[2], decay(dim, 0.0);
    for (int m = 0; m < 2; ++m) {
        level[m].resize(dim);
        up_[m].resize(dim);
        down_[m].resize(dim);
    }
    for (int i = 0; i < dim; ++i) {
        const int r = i % cfg.block_dim();
        const int occ[2] = {r / n, r % n};
        for (int m = 0; m < 2; ++m) {
            level[m][i] = occ[m];
            up_[m][i] = occ[m] + 1 < n ? std::sqrt(occ[m] + 1.0) : 0.0;
            down_[m][i] = std::sqrt(double(occ[m]));
            // ½(a†a + aa†) with the truncated aa†, whose top entry is 0.
            decay[i] += 0.5 * heating_ * (occ[m] + up_[m][i] * up_[m][i]);
        }
    }
    factor_.resize(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) {
            double f = -decay[i] - decay[j];
            for (int m = 0; m < 2; ++m) {
                const double d = level[m][i] - level[m][j];
                f -= 0.5 * gamma * d * d;
            }
            factor_(i, j) = f;
        }
}

void Dissipator::add_to(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const
{
    if (empty_) return;
    const Eigen::Index dim = rho.rows();
    out.array() += factor_.array() * rho.array();
    if (heating_ == 0.0) return;
    const Eigen::Index stride[2] = {cfg_.n_max, 1};
    for (int m = 0; m < 2; ++m) {
        const Eigen::Index s = stride[m];
        const std::vector<double>& up = up_[m];
        const std::vector<double>& down = down_[m];
        for (Eigen::Index j = 0; j < dim; ++j) {
            // a ρ a†: ρ(i+s, j+s)·√(nᵢ+1)(nⱼ+1).
            if (up[j] != 0.0) {
                const double wj = heating_ * up[j];
                for (Eigen::Index i = 0; i + s < dim; ++i)
                    if (up[i] != 0.0) out(i, j) += wj * up[i] * rho(i + s, j + s);
            }
            // a† ρ a: ρ(i−s, j−s)·√(nᵢnⱼ).
            if (down[j] != 0.0) {
                const double wj = heating_ * down[j];
                for (Eigen::Index i = s; i < dim; ++i)
                    if (down[i] != 0.0) out(i, j) += wj * down[i] * rho(i - s, j - s);
            }
        }
    }
}

MixedState evolve_lindblad(const MixedState& rho, const TimeDependentOperator& h, const NoiseParams& noise,
                           double t0, double t1, const IntegratorConfig& cfg, EvolutionReport* report)
{
    if (rho.rho.rows() != rho.cfg.dim() || rho.rho.cols() != rho.cfg.dim())
        throw InvalidArgument("density matrix dimension mismatch");
    if (!h.empty() && !(h.cfg() == rho.cfg)) throw InvalidArgument("Hamiltonian and state truncations differ");

    const Dissipator dissipator(rho.cfg, noise);
    EvolutionReport local;
    EvolutionReport& rep = report ? *report : local;
    // −i[H, ρ] = M + M† with M = −iHρ, so only one sparse·dense product is needed.
    Eigen::MatrixXcd m;
    const cplx minus_i(0.0, -1.0);
    auto rhs = [&](double t, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dy) {
        if (h.empty())
            dy.setZero(y.rows(), y.cols());
        else {
            h.apply(t, y, m);
            m *= minus_i;
            dy = m;
            dy += m.adjoint();
        }
        dissipator.add_to(y, dy);
    };
    MixedState out{rho.cfg, dormand_prince(rhs, rho.rho, t0, t1, cfg, rep)};
    rep.norm_drift = std::abs(out.trace().real() - rho.trace().real());
    if (rep.norm_drift > 1e-6)
        throw IntegratorFailure("trace drift " + std::to_string(rep.norm_drift) + " exceeds 1e-6");
    return out;
}

SpectralPropagator::SpectralPropagator(const Operator& h)
{
    const int dim = int(h.rows());
    int n = 2;
    while (2 * n * n < dim) ++n;
    if (2 * n * n != dim) throw InvalidArgument("operator is not on a qubit ⊗ mode ⊗ mode space");
    cfg_ = HilbertConfig{n};

    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(h);
    if (dense.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense.real());
        energies_ = es.eigenvalues();
        vectors_ = es.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
        energies_ = es.eigenvalues();
        vectors_ = es.eigenvectors();
    }
}

PureState SpectralPropagator::propagate(const PureState& psi, double t) const
{
    if (!(psi.cfg == cfg_)) throw InvalidArgument("state truncation differs from propagator");
    Eigen::VectorXcd c = vectors_.adjoint() * psi.amplitudes;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -energies_(k) * t);
    return {cfg_, vectors_ * c};
}

PureState to_schrodinger_frame(PureState psi, const ModelParams& p, double t)
{
    rotate_modes(psi, p.omega * t, p.omega * t);
    return psi;
}

MixedState to_schrodinger_frame(MixedState rho, const ModelParams& p, double t)
{
    rotate_modes(rho, p.omega * t, p.omega * t);
    return rho;
}

}  // namespace jtsim
