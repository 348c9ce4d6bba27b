#ifndef JTSIM_INTEGRATOR_HPP
#define JTSIM_INTEGRATOR_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "jtsim/errors.hpp"

namespace jtsim {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    /// Upper bound on the step size in seconds. Infinity means unbounded.
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 50'000'000;

    void validate() const
    {
        if (!(rel_tol > 0.0 && rel_tol <= 1e-2) || !(abs_tol > 0.0 && abs_tol <= 1e-2))
            throw InvalidArgument("integrator tolerances must lie in (0, 1e-2]");
        if (!(max_step > 0.0)) throw InvalidArgument("max_step must be positive");
    }
};

struct EvolutionReport {
    long steps = 0;
    long rejected = 0;
    long rhs_evaluations = 0;
    /// |‖ψ‖ − 1| for pure states, |Tr ρ − 1| for mixed states.
    double norm_drift = 0.0;
};

namespace detail {

template <typename Derived>
double scaled_rms(const Eigen::MatrixBase<Derived>& err, const Eigen::MatrixBase<Derived>& y0,
                  const Eigen::MatrixBase<Derived>& y1, double atol, double rtol)
{
    // Squared magnitudes avoid a hypot per element.
    const auto scale = (atol + rtol * y0.cwiseAbs2().cwiseMax(y1.cwiseAbs2()).array().sqrt()).eval();
    return std::sqrt((err.cwiseAbs2().array() / scale.square()).mean());
}

}  // namespace detail

/// Adaptive Dormand–Prince 5(4) integration of y' = f(t, y) from t0 to t1.
///
/// `f(t, y, dydt)` writes the derivative into `dydt`. Works for any dense
/// Eigen matrix or vector type. Throws IntegratorFailure when the step size
/// collapses or the step budget runs out.
template <typename State, typename Rhs>
State dormand_prince(Rhs&& f, State y, double t0, double t1, const IntegratorConfig& cfg,
                     EvolutionReport& report)
{
    cfg.validate();
    if (t1 < t0) throw InvalidArgument("integration requires t1 >= t0");
    if (t1 == t0) return y;

    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, err;
    f(t0, y, k1);
    ++report.rhs_evaluations;

    const double span = t1 - t0;
    double h;
    {
        const double d0 = detail::scaled_rms(y, y, y, cfg.abs_tol, cfg.rel_tol);
        const double d1 = detail::scaled_rms(k1, y, y, cfg.abs_tol, cfg.rel_tol);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
        h = std::min({h, cfg.max_step, span});
    }

    double t = t0;
    while (t < t1) {
        if (report.steps + report.rejected >= cfg.max_steps)
            throw IntegratorFailure("step budget exhausted at t = " + std::to_string(t));
        const bool last = t + h >= t1;
        if (last) h = t1 - t;

        ytmp = y + h * a21 * k1;
        f(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + h, ynew, k7);
        report.rhs_evaluations += 6;

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = detail::scaled_rms(err, y, ynew, cfg.abs_tol, cfg.rel_tol);

        if (en <= 1.0) {
            t = last ? t1 : t + h;
            y.swap(ynew);
            k1.swap(k7);
            ++report.steps;
        } else {
            ++report.rejected;
        }
        if (!std::isfinite(en)) {
            h *= 0.2;
        } else {
            const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            h = std::min(h * factor, cfg.max_step);
        }
        if (t < t1 && h < 1e-14 * std::max(std::abs(t), span))
            throw IntegratorFailure("step size underflow at t = " + std::to_string(t));
    }
    return y;
}

}  // namespace jtsim

#endif  // JTSIM_INTEGRATOR_HPP
