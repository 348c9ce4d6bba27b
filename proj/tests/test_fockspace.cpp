#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "jtsim/errors.hpp"
#include "jtsim/fockspace.hpp"

using namespace jtsim;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// ⟨m|D(α)|n⟩ from the generalized Laguerre closed form.
cplx laguerre_displacement_element(cplx alpha, int m, int n)
{
    const double x = std::norm(alpha);
    const double env = std::exp(-0.5 * x);
    if (m >= n)
        return std::sqrt(factorial(n) / factorial(m)) * std::pow(alpha, m - n) * env *
               std::assoc_laguerre(unsigned(n), unsigned(m - n), x);
    return std::sqrt(factorial(m) / factorial(n)) * std::pow(-std::conj(alpha), n - m) * env *
           std::assoc_laguerre(unsigned(m), unsigned(n - m), x);
}

PureState random_state(const HilbertConfig& cfg, std::mt19937& rng, int support)
{
    std::normal_distribution<double> g;
    PureState psi{cfg, Eigen::VectorXcd::Zero(cfg.dim())};
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < support; ++a)
            for (int b = 0; b < support; ++b) psi.amplitudes(cfg.index(s, a, b)) = cplx(g(rng), g(rng));
    psi.amplitudes.normalize();
    return psi;
}

}  // namespace

TEST_CASE("ladder operators act as textbook raising and lowering")
{
    const int n = 8;
    const Eigen::MatrixXd a = Eigen::MatrixXd(annihilation<double>(n));
    const Eigen::MatrixXd ad = Eigen::MatrixXd(creation<double>(n));

    const Eigen::VectorXd one = fock_state(1, n).real();
    CHECK((a * one - fock_state(0, n).real()).norm() == doctest::Approx(0.0));

    const Eigen::MatrixXd num = ad * a;
    for (int k = 0; k < n; ++k) CHECK(num(k, k) == doctest::Approx(k));

    // Truncation: a† annihilates the top level.
    CHECK((ad * fock_state(n - 1, n).real()).norm() == 0.0);

    const Eigen::MatrixXd comm = a * ad - ad * a;
    for (int k = 0; k < n - 1; ++k) CHECK(comm(k, k) == doctest::Approx(1.0));
}

TEST_CASE("quadratures are Hermitian with vacuum moments")
{
    const int n = 16;
    const Eigen::MatrixXd q = position_op(n);
    const ModeMatrix p = momentum_op(n);
    CHECK((q - q.transpose()).norm() == 0.0);
    CHECK((p - p.adjoint()).norm() == doctest::Approx(0.0));

    const Eigen::VectorXd vac = fock_state(0, n).real();
    CHECK(vac.dot(q * vac) == doctest::Approx(0.0));
    CHECK(vac.dot(q * q * vac) == doctest::Approx(0.5));

    for (int k = 0; k < n; ++k) CHECK(q(k, k) == 0.0);

    HilbertConfig cfg{n};
    const QuadratureOps ops = position_momentum_ops(cfg, 2);
    CHECK(Eigen::MatrixXcd(ops.q - Operator(ops.q.adjoint())).norm() == doctest::Approx(0.0));
}

TEST_CASE("coherent state position mean")
{
    HilbertConfig cfg{24};
    const double alpha = 0.7;
    const ModeVector v = coherent_state(alpha, cfg);
    const Eigen::MatrixXd q = position_op(cfg.n_max);
    CHECK((v.adjoint() * q.cast<cplx>() * v)(0).real() == doctest::Approx(std::numbers::sqrt2 * alpha).epsilon(1e-10));

    const ModeVector vac = coherent_state(0.0, cfg);
    CHECK((vac - fock_state(0, cfg.n_max)).norm() == doctest::Approx(0.0));

    const double init = -1.5 / std::numbers::sqrt2;
    const ModeVector w = coherent_state(init, cfg);
    CHECK((w.adjoint() * q.cast<cplx>() * w)(0).real() == doctest::Approx(-1.5).epsilon(1e-10));
    CHECK((w - coherent_amplitudes(init, cfg.n_max)).norm() < 1e-10);
}

TEST_CASE("coherent state guards the truncation")
{
    CHECK_THROWS_AS(coherent_state(cplx(2.0, 0.0), HilbertConfig{12}), InvalidArgument);
    // |α|² = 1.5 ≤ 6/4 passes the precondition but fills the top levels of a 6-level mode.
    CHECK_THROWS_AS(coherent_state(cplx(std::sqrt(1.5), 0.0), HilbertConfig{6}), TruncationOverflow);
    CHECK_THROWS_AS(HilbertConfig{1}.validate(), InvalidArgument);
}

TEST_CASE("thermal populations")
{
    HilbertConfig cfg{24};
    const ModeMatrix vac = thermal_state(0.0, cfg);
    CHECK(vac(0, 0).real() == 1.0);
    CHECK(vac.trace().real() == doctest::Approx(1.0));

    const double n_bar = 0.04;
    const ModeMatrix th = thermal_state(n_bar, cfg);
    CHECK(th(0, 0).real() == doctest::Approx(1.0 / (1.0 + n_bar)).epsilon(1e-12));
    CHECK(th(0, 0).real() == doctest::Approx(0.9615).epsilon(1e-4));
    CHECK(th.trace().real() == doctest::Approx(1.0));
    const Eigen::VectorXd n = Eigen::VectorXd::LinSpaced(cfg.n_max, 0, cfg.n_max - 1);
    CHECK(n.dot(th.diagonal().real()) == doctest::Approx(n_bar).epsilon(1e-9));
    CHECK_THROWS_AS(thermal_state(-0.1, cfg), InvalidArgument);
}

TEST_CASE("displacement matrices agree with the Laguerre closed form")
{
    const cplx alpha(0.8, -0.3);
    const int n = 12;
    const ModeMatrix block = displacement_block(alpha, n);
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
            CHECK(std::abs(block(m, k) - laguerre_displacement_element(alpha, m, k)) < 1e-12);

    // The truncated exponential matches the exact elements far from the edge.
    const ModeMatrix expm = displacement_op(alpha, 48);
    CHECK((expm.topLeftCorner(n, n) - block).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("displacement unitarity")
{
    std::mt19937 rng(7);
    const int n = 24;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        cplx alpha(u(rng), u(rng));
        alpha *= std::sqrt(double(n)) / 4.0 / std::max(1.0, std::abs(alpha));
        const ModeMatrix prod = displacement_op(alpha, n) * displacement_op(-alpha, n);
        CHECK((prod - ModeMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("initial-state observables are converged in the truncation")
{
    const double alpha = -1.5 / std::numbers::sqrt2;
    auto observables = [&](int n) {
        HilbertConfig cfg{n};
        const PureState psi =
            product_state(Eigen::Vector2cd(1, 0), coherent_state(alpha, cfg), fock_state(0, n));
        const QuadratureOps q1 = position_momentum_ops(cfg, 1);
        const LadderOps l1 = ladder_ops(cfg, 1);
        return Eigen::Vector3d(expectation(psi, q1.q).real(), expectation(psi, q1.q * q1.q).real(),
                               expectation(psi, l1.a_dag * l1.a).real());
    };
    const Eigen::Vector3d base = observables(24);
    const Eigen::Vector3d wider = observables(29);
    CHECK((base - wider).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(base(2) == doctest::Approx(1.125).epsilon(1e-9));
}

TEST_CASE("composite ordering and single-mode application")
{
    HilbertConfig cfg{5};
    std::mt19937 rng(3);
    PureState psi = random_state(cfg, rng, 5);

    const ModeMatrix op = displacement_op(cplx(0.3, 0.2), 5);
    for (int mode = 1; mode <= 2; ++mode) {
        PureState fast = psi;
        apply_mode(fast, op, mode);
        const Operator full = embed_mode(Eigen::SparseMatrix<cplx>(op.sparseView()), mode, cfg);
        CHECK((fast.amplitudes - full * psi.amplitudes).norm() < 1e-12);

        MixedState rho = MixedState::from_pure(psi);
        apply_mode(rho, op, mode);
        CHECK((rho.rho - MixedState::from_pure(fast).rho).norm() < 1e-12);
    }

    const PureState basis = product_state(Eigen::Vector2cd(0, 1), fock_state(2, 5), fock_state(3, 5));
    CHECK(std::abs(basis.amplitudes(cfg.index(1, 2, 3)) - 1.0) < 1e-15);

    const Eigen::Matrix2cd q = reduced_qubit(basis);
    CHECK(std::abs(q(1, 1) - 1.0) < 1e-15);
    CHECK(reduced_mode(basis, 2)(3, 3).real() == doctest::Approx(1.0));
}

TEST_CASE("mixed-state reductions match pure-state reductions")
{
    HilbertConfig cfg{4};
    std::mt19937 rng(11);
    const PureState psi = random_state(cfg, rng, 4);
    const MixedState rho = MixedState::from_pure(psi);
    CHECK((reduced_qubit(rho) - reduced_qubit(psi)).norm() < 1e-12);
    for (int mode = 1; mode <= 2; ++mode) CHECK((reduced_mode(rho, mode) - reduced_mode(psi, mode)).norm() < 1e-12);
    CHECK(rho.purity() == doctest::Approx(1.0));
    CHECK(rho.min_eigenvalue() > -1e-12);
}

TEST_CASE("phase-space rotation of a coherent state")
{
    HilbertConfig cfg{30};
    const cplx alpha(1.1, 0.0);
    PureState psi = product_state(Eigen::Vector2cd(1, 0), coherent_amplitudes(alpha, 30), fock_state(0, 30));
    rotate_modes(psi, 0.6, 0.0);
    const PureState expect = product_state(Eigen::Vector2cd(1, 0), coherent_amplitudes(alpha * std::polar(1.0, -0.6), 30),
                                           fock_state(0, 30));
    CHECK(fidelity(psi, expect) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Hermite functions are orthonormal")
{
    const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(4001, -12.0, 12.0);
    const double dq = q(1) - q(0);
    const Eigen::MatrixXd phi = hermite_functions(q, 20);
    const Eigen::MatrixXd gram = phi.transpose() * phi * dq;
    CHECK((gram - Eigen::MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("retruncation pads without changing amplitudes")
{
    HilbertConfig cfg{6};
    std::mt19937 rng(5);
    const PureState psi = random_state(cfg, rng, 6);
    const PureState padded = retruncate(psi, 10);
    CHECK(padded.norm() == doctest::Approx(1.0));
    CHECK(padded.amplitudes(padded.cfg.index(1, 5, 4)) == psi.amplitudes(cfg.index(1, 5, 4)));
    const MixedState rp = retruncate(MixedState::from_pure(psi), 10);
    CHECK((rp.rho - MixedState::from_pure(padded).rho).norm() < 1e-14);
}
