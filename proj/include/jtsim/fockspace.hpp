#ifndef JTSIM_FOCKSPACE_HPP
#define JTSIM_FOCKSPACE_HPP

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace jtsim {

using cplx = std::complex<double>;

/// Sparse operator on the composite qubit ⊗ B₁ ⊗ B₂ space.
using Operator = Eigen::SparseMatrix<cplx>;
/// Dense operator on a single truncated bosonic mode.
using ModeMatrix = Eigen::MatrixXcd;
using ModeVector = Eigen::VectorXcd;
using RowMatrixXcd = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Truncation of the two bosonic modes. Each mode keeps |0⟩..|n_max−1⟩.
///
/// Composite basis ordering is qubit slowest, then B₁, then B₂:
/// index(s, n1, n2) = s·n_max² + n1·n_max + n2. Qubit index 0 is |↓⟩,
/// the +1 eigenstate of σz.
struct HilbertConfig {
    int n_max = 24;

    static constexpr int mode_count = 2;
    static constexpr int qubit_dim = 2;

    int mode_dim() const { return n_max; }
    int block_dim() const { return n_max * n_max; }
    int dim() const { return qubit_dim * n_max * n_max; }
    int index(int qubit, int n1, int n2) const { return qubit * block_dim() + n1 * n_max + n2; }

    /// Throws InvalidArgument unless n_max ≥ 2.
    void validate() const;

    friend bool operator==(const HilbertConfig&, const HilbertConfig&) = default;
};

struct PureState {
    HilbertConfig cfg;
    Eigen::VectorXcd amplitudes;

    double norm() const { return amplitudes.norm(); }
    /// Amplitudes of qubit component s viewed as an n_max × n_max matrix (rows n1, cols n2).
    Eigen::Map<const RowMatrixXcd> block(int s) const
    {
        return {amplitudes.data() + s * cfg.block_dim(), cfg.n_max, cfg.n_max};
    }
    Eigen::Map<RowMatrixXcd> block(int s)
    {
        return {amplitudes.data() + s * cfg.block_dim(), cfg.n_max, cfg.n_max};
    }
};

struct MixedState {
    HilbertConfig cfg;
    Eigen::MatrixXcd rho;

    static MixedState from_pure(const PureState& psi);

    cplx trace() const { return rho.trace(); }
    double purity() const;
    /// Largest deviation from Hermiticity, max |ρ − ρ†|.
    double hermiticity_error() const;
    double min_eigenvalue() const;
};

// Single-mode operators ----------------------------------------------------

template <typename Scalar = double>
Eigen::SparseMatrix<Scalar> annihilation(int n)
{
    Eigen::SparseMatrix<Scalar> a(n, n);
    a.reserve(Eigen::VectorXi::Constant(n, 1));
    for (int k = 1; k < n; ++k) a.insert(k - 1, k) = Scalar(std::sqrt(double(k)));
    a.makeCompressed();
    return a;
}

template <typename Scalar = double>
Eigen::SparseMatrix<Scalar> creation(int n)
{
    return Eigen::SparseMatrix<Scalar>(annihilation<Scalar>(n).transpose());
}

template <typename Scalar = double>
Eigen::SparseMatrix<Scalar> number_op(int n)
{
    Eigen::SparseMatrix<Scalar> num(n, n);
    num.reserve(Eigen::VectorXi::Constant(n, 1));
    for (int k = 0; k < n; ++k) num.insert(k, k) = Scalar(double(k));
    num.makeCompressed();
    return num;
}

/// Q = (a† + a)/√2 on one truncated mode.
Eigen::MatrixXd position_op(int n);
/// P = i(a† − a)/√2 on one truncated mode.
ModeMatrix momentum_op(int n);

ModeVector fock_state(int k, int n);

/// D(α) = exp(αa† − α*a) from the dense exponential of the truncated generator.
/// Unitary on the truncated space; accurate only away from the truncation edge.
ModeMatrix displacement_op(cplx alpha, int n);

/// Exact matrix elements ⟨m|D(α)|k⟩ of the untruncated displacement for m, k < n.
///
/// Columns come from D|k⟩ = (a† − α*)ᵏ|α⟩/√k!, which needs only the first n
/// coherent amplitudes. The block is not unitary; it is what you want for
/// expectation values of states that live inside the truncation.
ModeMatrix displacement_block(cplx alpha, int n);

/// Exact Poisson amplitudes e^{−|α|²/2} αᵏ/√k! for k < n.
ModeVector coherent_amplitudes(cplx alpha, int n);

/// D(α)|0⟩ in a truncated mode of dimension cfg.n_max.
///
/// Throws InvalidArgument if |α|² > n_max/4 and TruncationOverflow if the
/// population of the top two Fock levels exceeds 1e−6.
ModeVector coherent_state(cplx alpha, const HilbertConfig& cfg);

/// Truncated Boltzmann populations p(n) ∝ (n̄/(n̄+1))ⁿ, renormalized.
ModeMatrix thermal_state(double n_bar, const HilbertConfig& cfg);

/// Population in the top `levels` Fock states of a single-mode vector.
double edge_population(const ModeVector& v, int levels = 2);

/// Hermite-Gauss wavefunctions φₖ(q) for k < n, evaluated at each q. Result is q.size() × n.
Eigen::MatrixXd hermite_functions(const Eigen::VectorXd& q, int n);

// Composite space ----------------------------------------------------------

const Eigen::Matrix2cd& pauli_x();
const Eigen::Matrix2cd& pauli_y();
const Eigen::Matrix2cd& pauli_z();
/// Rx(θ) = exp(−iθσx/2).
Eigen::Matrix2cd rx(double theta);
/// Rotation exp(−iθσφ/2) about the equatorial axis at angle φ from x.
Eigen::Matrix2cd equatorial_rotation(double phi, double theta);

/// qubit ⊗ m1 ⊗ m2 as a sparse composite operator.
Operator embed(const Eigen::Matrix2cd& qubit, const ModeMatrix& m1, const ModeMatrix& m2);
Operator embed(const Eigen::Matrix2cd& qubit, const Eigen::SparseMatrix<cplx>& m1,
               const Eigen::SparseMatrix<cplx>& m2);
/// Identity everywhere except `op` on `mode` (1 or 2).
Operator embed_mode(const Eigen::SparseMatrix<cplx>& op, int mode, const HilbertConfig& cfg);
Operator embed_qubit(const Eigen::Matrix2cd& q, const HilbertConfig& cfg);

struct LadderOps {
    Operator a;
    Operator a_dag;
};
/// Composite a_j, a_j† for mode j ∈ {1, 2}.
LadderOps ladder_ops(const HilbertConfig& cfg, int mode);

struct QuadratureOps {
    Operator q;
    Operator p;
};
QuadratureOps position_momentum_ops(const HilbertConfig& cfg, int mode);

PureState product_state(const Eigen::Vector2cd& qubit, const ModeVector& m1, const ModeVector& m2);
MixedState product_state(const Eigen::Matrix2cd& qubit, const ModeMatrix& m1, const ModeMatrix& m2);

/// Apply a single-mode operator in place: C_s ← A·C_s (mode 1) or C_s·Aᵀ (mode 2).
void apply_mode(PureState& psi, const ModeMatrix& op, int mode);
void apply_qubit(PureState& psi, const Eigen::Matrix2cd& q);
void apply_mode(MixedState& rho, const ModeMatrix& op, int mode);
void apply_qubit(MixedState& rho, const Eigen::Matrix2cd& q);

/// e^{−i(θ₁n₁ + θ₂n₂)}: rigid phase-space rotation of both modes.
void rotate_modes(PureState& psi, double theta1, double theta2);
void rotate_modes(MixedState& rho, double theta1, double theta2);

/// Zero-pad (or crop) the Fock truncation. Cropping discards population.
PureState retruncate(const PureState& psi, int n_max);
MixedState retruncate(const MixedState& rho, int n_max);

Eigen::Matrix2cd reduced_qubit(const PureState& psi);
Eigen::Matrix2cd reduced_qubit(const MixedState& rho);
ModeMatrix reduced_mode(const PureState& psi, int mode);
ModeMatrix reduced_mode(const MixedState& rho, int mode);

/// Largest population in the top `levels` Fock states of either mode.
double edge_population(const PureState& psi, int levels = 2);
double edge_population(const MixedState& rho, int levels = 2);

cplx expectation(const PureState& psi, const Operator& op);
cplx expectation(const MixedState& rho, const Operator& op);

/// |⟨a|b⟩|².
double fidelity(const PureState& a, const PureState& b);
/// ⟨ψ|ρ|ψ⟩.
double fidelity(const MixedState& rho, const PureState& psi);
/// ½‖a − b‖₁.
double trace_distance(const MixedState& a, const MixedState& b);

}  // namespace jtsim

#endif  // JTSIM_FOCKSPACE_HPP
