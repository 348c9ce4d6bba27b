#ifndef JTSIM_TOMOGRAPHY_HPP
#define JTSIM_TOMOGRAPHY_HPP

#include <iosfwd>
#include <vector>

#include "jtsim/fockspace.hpp"
#include "jtsim/hamiltonians.hpp"
#include "jtsim/protocol.hpp"

namespace jtsim {

/// Position probability density. A 1D density has an empty q1_axis and
/// holds |Ψ(Q₂)|² over q2_axis; a 2D density is row-major over (q1, q2).
struct DensityGrid {
    std::vector<double> q1_axis;
    std::vector<double> q2_axis;
    std::vector<double> values;
    /// Trapezoidal integral of values over the axes.
    double norm = 0.0;
    /// max |Im| of the Fourier inversion relative to the peak; 0 for direct densities.
    double imag_residue = 0.0;

    bool is_1d() const { return q1_axis.empty(); }
    std::size_t index(std::size_t i1, std::size_t i2) const { return i1 * q2_axis.size() + i2; }
    double at(std::size_t i1, std::size_t i2) const { return values[index(i1, i2)]; }
    /// Trapezoidal integral of values over the axes.
    double integral() const;

    /// `q1,q2,density` or, for 1D, `q2,density`.
    void write_csv(std::ostream& out) const;
    static DensityGrid read_csv(std::istream& in);
};

/// `points` equally spaced values over [lo, hi].
std::vector<double> linspace(double lo, double hi, int points);
/// Default Q axis: 81 points over [−4, 4].
std::vector<double> default_q_axis();

// Characteristic-function processing ------------------------------------------------

/// How the (+, −) and (−, +) quadrants are filled from a β₁, β₂ ≥ 0 scan.
enum class QuadrantFill {
    /// χ(β₁, −β₂) = χ(β₁, β₂): the density is even in Q₂. Exact for the Jahn-Teller
    /// states here, since H commutes with σz·Π₂ and the initial state is an eigenstate.
    Q2Parity,
    /// χ(β₁, −β₂) = χ(β₁, 0)·χ(0, β₂)*: exact for product states of the two modes.
    Separable,
};

/// Fill all quadrants by χ(−β)* = χ(β).
///
/// Accepts a β₁, β₂ ≥ 0 quadrant (mixed quadrants filled per `fill`) or a
/// β₁ ≥ 0 half plane that already spans both signs of β₂. A one-mode grid
/// (β₁ axis {0}) is mirrored along β₂. Axes must contain 0. Throws
/// InvalidArgument if any β₁ is negative.
CharGrid extend_hermitian(const CharGrid& grid, QuadrantFill fill = QuadrantFill::Q2Parity);

struct BaselineCorrection {
    CharGrid grid;
    /// Tail mean subtracted from every value.
    cplx offset;
    std::size_t tail_points = 0;
};

/// Subtract the mean of χ over |β| ≥ radius. Throws NoTailPoints if none qualify.
BaselineCorrection baseline_correct(const CharGrid& grid, double radius = 3.6);

/// |Ψ(Q₁, Q₂)|² = ∬ dβ₁dβ₂/(2π²) e^{−i√2(Q₁β₁ + Q₂β₂)} χ(iβ₁, iβ₂), trapezoidal.
/// Expects an extended grid; the imaginary part of the sum is reported, not kept.
DensityGrid density_2d(const CharGrid& extended, const std::vector<double>& q1_axis,
                       const std::vector<double>& q2_axis);
/// |Ψ(Q₂)|² = ∫ dβ₂/(√2π) e^{−i√2Q₂β₂} χ(iβ₂) over the β₂ axis of a one-mode grid.
DensityGrid density_1d(const CharGrid& extended, const std::vector<double>& q2_axis);

// Direct densities --------------------------------------------------------------------

/// Σ_s |ψ_s(Q₁, Q₂)|² from Hermite-Gauss wavefunctions.
DensityGrid position_density(const PureState& psi, const std::vector<double>& q1_axis,
                             const std::vector<double>& q2_axis);
DensityGrid position_density(const MixedState& rho, const std::vector<double>& q1_axis,
                             const std::vector<double>& q2_axis);
/// Marginal Σ_s ∫ dQ₁ |ψ_s(Q₁, Q₂)|².
DensityGrid position_density_1d(const PureState& psi, const std::vector<double>& q2_axis);
DensityGrid position_density_1d(const MixedState& rho, const std::vector<double>& q2_axis);

/// P(Q₁ ≥ 0) by quadrature of the Q₁ marginal.
double probability_q1_nonnegative(const PureState& psi);

/// RMS radius of the density about its centroid, √(Var Q₁ + Var Q₂), from operator moments.
double rms_radius(const PureState& psi);

// Metrics -------------------------------------------------------------------------------

struct InterferenceSearch {
    /// Window over which the width is minimised (this is 2T, not T). Seconds.
    double window_lo = 2.4e-3;
    double window_hi = 4.0e-3;
    int samples = 161;
    int n_max = 24;
};

struct InterferenceTime {
    double T = 0.0;
    double width_at_min = 0.0;
    std::vector<double> times;
    std::vector<double> widths;
};

/// Half the time of minimal RMS radius under exact noiseless evolution.
///
/// The width is sampled on the window and the minimum refined by a parabola
/// through the three lowest samples. Throws WindowTooNarrow if the window is
/// empty, has fewer than 5 samples, or the minimum falls on its edge.
InterferenceTime find_interference_time(const ModelParams& model, const InterferenceSearch& search = {});

/// 1 − mean(density on Q₂ = 0, Q₁ ∈ [0.5, 2.5]) / max(density at Q₁ > 0), clamped to [0, 1].
/// The Q₂ = 0 line is linearly interpolated if the axis does not contain 0.
double node_contrast(const DensityGrid& density);

/// ∫|a − b|; both grids must share their axes.
double l1_distance(const DensityGrid& a, const DensityGrid& b);

}  // namespace jtsim

#endif  // JTSIM_TOMOGRAPHY_HPP
