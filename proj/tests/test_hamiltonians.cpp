#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "jtsim/errors.hpp"
#include "jtsim/hamiltonians.hpp"

using namespace jtsim;

namespace {

double max_abs(const Operator& a, const Operator& b) { return Eigen::MatrixXcd(a - b).cwiseAbs().maxCoeff(); }

double hermiticity(const Operator& h) { return max_abs(h, Operator(h.adjoint())); }

Operator spin_mode(const Eigen::Matrix2cd& s, const ModeMatrix& m, int mode, int n)
{
    const ModeMatrix id = ModeMatrix::Identity(n, n);
    return mode == 1 ? embed(s, m, id) : embed(s, id, m);
}

}  // namespace

TEST_CASE("adiabatic surfaces")
{
    const ModelParams p;
    const Surfaces origin = jt_surfaces(0.0, 0.0, p);
    CHECK(origin.lower == 0.0);
    CHECK(origin.upper == 0.0);

    const double r0 = p.minimum_radius();
    CHECK(jt_surfaces(r0, 0.0, p).lower == doctest::Approx(-p.kappa * p.kappa / (2 * p.omega)));

    // The minimum of E₋ along any ray sits at radius κ/ω.
    double best_r = 0.0, best_e = 1e300;
    for (int k = 0; k <= 30000; ++k) {
        const double r = 3.0 * k / 30000;
        const double e = jt_surfaces(r * std::cos(0.7), r * std::sin(0.7), p).lower;
        if (e < best_e) best_e = e, best_r = r;
    }
    CHECK(best_r == doctest::Approx(r0).epsilon(1e-3));

    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double q1 = u(rng), q2 = u(rng), th = u(rng);
        const Surfaces a = jt_surfaces(q1, q2, p);
        const Surfaces b = jt_surfaces(q1 * std::cos(th) - q2 * std::sin(th), q1 * std::sin(th) + q2 * std::cos(th), p);
        CHECK(a.lower == doctest::Approx(b.lower));
        CHECK(a.upper == doctest::Approx(b.upper));

        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(vibronic_coupling(q1, q2, p));
        CHECK(es.eigenvalues()(0) == doctest::Approx(-p.kappa * std::hypot(q1, q2)));
        CHECK(es.eigenvalues()(1) == doctest::Approx(p.kappa * std::hypot(q1, q2)));
    }
}

TEST_CASE("SDF Hamiltonian at zero phase is a σx-conditioned position coupling")
{
    const int n = 6;
    HilbertConfig cfg{n};
    const double rabi = 2.3;
    for (int mode = 1; mode <= 2; ++mode) {
        SdfParams s{mode, 0.0, 5.0, rabi, 0.0, SpinBasis::Equatorial};
        const Operator expect = spin_mode(rabi / std::numbers::sqrt2 * pauli_x(), position_op(n).cast<cplx>(), mode, n);
        CHECK(max_abs(sdf_hamiltonian(cfg, s, 0.0), expect) < 1e-12);
    }

    SdfParams y{1, std::numbers::pi / 2, 0.0, 1.0, 0.0, SpinBasis::Equatorial};
    CHECK((sdf_spin_operator(y) - pauli_y()).cwiseAbs().maxCoeff() < 1e-15);

    // σz basis via Rx conjugation.
    SdfParams z{1, std::numbers::pi / 2, 0.0, 1.0, 0.0, SpinBasis::Z};
    CHECK((sdf_spin_operator(z) - pauli_z()).cwiseAbs().maxCoeff() < 1e-15);

    CHECK_THROWS_AS(sdf_drive(cfg, SdfParams{3}), InvalidArgument);
}

TEST_CASE("SDF Hamiltonians are Hermitian for random parameters")
{
    HilbertConfig cfg{5};
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int trial = 0; trial < 10; ++trial) {
        SdfParams s{1 + trial % 2, u(rng), u(rng), u(rng), u(rng), trial % 3 ? SpinBasis::Equatorial : SpinBasis::Z};
        CHECK(hermiticity(sdf_hamiltonian(cfg, s, u(rng))) < 1e-12);
        SidebandParams b{1 + trial % 2, u(rng), u(rng), u(rng), u(rng), u(rng)};
        CHECK(hermiticity(sideband_sdf_hamiltonian(cfg, b, u(rng))) < 1e-12);
    }
}

TEST_CASE("two-SDF and term-by-term Jahn-Teller Hamiltonians coincide")
{
    HilbertConfig cfg{7};
    const ModelParams p;
    const TimeDependentOperator sdf = jt_interaction_hamiltonian(cfg, p);
    const TimeDependentOperator direct = jt_interaction_hamiltonian_direct(cfg, p);
    for (double t : {0.0, 0.1 / p.omega, 1.0 / p.omega, 0.37e-3}) {
        const Operator h = sdf.at(t);
        CHECK(max_abs(h, direct.at(t)) < 1e-12 * p.kappa);
        CHECK(std::abs(Eigen::MatrixXcd(h).trace()) < 1e-9);
        CHECK(max_abs(h, sdf.at(t + two_pi / p.omega)) < 1e-9 * p.kappa);
    }

    const Eigen::MatrixXcd q = position_op(cfg.n_max).cast<cplx>();
    const ModeMatrix id = ModeMatrix::Identity(cfg.n_max, cfg.n_max);
    const Operator coupling = p.kappa * (embed(pauli_z(), q, id) + embed(pauli_x(), id, q));
    CHECK(max_abs(sdf.at(0.0), coupling) < 1e-12 * p.kappa);
}

TEST_CASE("Schrödinger-picture Jahn-Teller Hamiltonian")
{
    HilbertConfig cfg{6};
    const ModelParams p;
    const Operator h = jt_hamiltonian(cfg, p);
    CHECK(hermiticity(h) == 0.0);
    // ⟨↓,0,0|H|↓,0,0⟩ is the zero-point energy ω.
    CHECK(std::real(Eigen::MatrixXcd(h)(0, 0)) == doctest::Approx(p.omega));
    CHECK_THROWS_AS(jt_hamiltonian(cfg, ModelParams{-1.0, 1.0}), InvalidArgument);
}

TEST_CASE("sideband form reduces to the SDF form")
{
    HilbertConfig cfg{6};
    const double phi_s = 0.4, phi_m = -1.1, delta = 2 * std::numbers::pi * 667.0, rabi = 9000.0;
    for (int mode = 1; mode <= 2; ++mode) {
        SidebandParams b{mode, 0.0, delta, rabi, phi_s, phi_m};
        SdfParams s{mode, phi_s, delta, rabi, phi_m, SpinBasis::Equatorial};
        for (double t : {0.0, 1e-4, 7.3e-4})
            CHECK(max_abs(sideband_sdf_hamiltonian(cfg, b, t), sdf_hamiltonian(cfg, s, t)) < 1e-12 * rabi);
    }
}

TEST_CASE("center-line detuning advances the spin phase")
{
    HilbertConfig cfg{5};
    const double d0 = 2 * std::numbers::pi * 300.0;
    SidebandParams b{1, d0, 0.0, 1000.0, 0.2, 0.5};
    SidebandParams shifted = b;
    shifted.center_detuning = 0.0;
    shifted.spin_phase += std::numbers::pi;
    CHECK(max_abs(sideband_sdf_hamiltonian(cfg, b, std::numbers::pi / d0), sideband_sdf_hamiltonian(cfg, shifted, 0.0)) <
          1e-9);
    CHECK(max_abs(sideband_sdf_hamiltonian(cfg, b, std::numbers::pi / d0), -sideband_sdf_hamiltonian(cfg, b, 0.0)) < 1e-9);
}
