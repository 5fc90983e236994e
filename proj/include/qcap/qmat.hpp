#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

// Dense complex linear algebra and elementary quantum-state operations.
//
// Register convention used throughout: a state on registers (r0, r1, ..., rn-1)
// with dimensions dims = (d0, d1, ..., dn-1) is flattened row-major with the
// leftmost register most significant, i.e. the basis vector |j0 j1 ... jn-1>
// sits at flat index ((j0*d1 + j1)*d2 + ...) + jn-1. Kronecker products follow
// the same rule: kron(a, b) puts `a` on the more significant factor.

namespace qcap {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;
using Dims = std::vector<Index>;

/// Absolute tolerance for state validation and spectral clamping.
/// Eigenvalues in [-atol, 0] are treated as zero; anything below -atol is an
/// error, not a warning.
struct Tolerance {
  double atol = 1e-7;
};

Index dims_product(const Dims& dims);

Matrix kron(const Matrix& a, const Matrix& b);
Vector kron_vec(const Vector& a, const Vector& b);

/// Unit complex vector with an ordered list of subsystem dimensions.
class PureState {
 public:
  PureState(Vector amplitudes, Dims dims, Tolerance tol = {});

  const Vector& amplitudes() const { return amplitudes_; }
  const Dims& dims() const { return dims_; }
  Index size() const { return amplitudes_.size(); }

 private:
  Vector amplitudes_;
  Dims dims_;
};

/// Hermitian, PSD, trace-one matrix with an ordered list of subsystem
/// dimensions. Hermiticity and trace are checked on every construction;
/// positivity is checked spectrally up to a side limit (larger matrices get a
/// diagonal screen here and a full spectral check wherever eigenvalues are
/// actually computed).
class DensityMatrix {
 public:
  DensityMatrix(Matrix matrix, Dims dims, Tolerance tol = {});

  const Matrix& matrix() const { return matrix_; }
  const Dims& dims() const { return dims_; }
  Index side() const { return matrix_.rows(); }

 private:
  Matrix matrix_;
  Dims dims_;
};

DensityMatrix to_density_matrix(const PureState& psi);

/// (1/sqrt(d)) sum_i |ii>, dims (d, d).
PureState max_entangled(Index d);

/// Maximally mixed state I/d on a single register.
DensityMatrix maximally_mixed(Index d);

/// Generalized Pauli W(x, z) = X(x) Z(z) with X(x)|j> = |(x+j) mod d> and
/// Z(z)|j> = w^{zj}|j>, w = exp(2 pi i / d).
Matrix weyl(Index d, Index x, Index z);

/// Haar-random unitary: QR of a complex Gaussian matrix with the phase fix
/// that makes the distribution Haar. Deterministic for a fixed seed.
Matrix haar_unitary(Index d, std::uint64_t seed);

/// Reorders subsystems. perm[k] names the input register that lands at slot k
/// of the output, so the output dims are (dims[perm[0]], dims[perm[1]], ...).
PureState permute_systems(const PureState& psi, const std::vector<int>& perm);
DensityMatrix permute_systems(const DensityMatrix& rho, const std::vector<int>& perm);

/// Reduced state on the listed subsystems, kept in their original relative
/// order. `keep` must be nonempty.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

/// Real eigenvalues of a Hermitian matrix, ascending. Throws if the matrix is
/// not Hermitian within tol.
RealVector hermitian_eigenvalues(const Matrix& m, Tolerance tol = {});

/// -sum l log2 l over a spectrum, clamping [-atol, 0] to zero and rejecting
/// anything below -atol.
double entropy_of_spectrum(const RealVector& spectrum, Tolerance tol = {});

/// Von Neumann entropy in bits.
double von_neumann_entropy(const DensityMatrix& rho, Tolerance tol = {});

/// Zeroes every matrix element whose row and column indices disagree on any
/// of the listed subsystems (complete dephasing of those registers in the
/// computational basis).
DensityMatrix dephase(const DensityMatrix& rho, const std::vector<int>& subsystems);

namespace detail {

/// Flat-index lookup table for a subsystem permutation: entry F holds the
/// input flat index that feeds output flat index F.
std::vector<Index> permutation_index_map(const Dims& dims, const std::vector<int>& perm);

/// Applies `op` (shape m_out x m_in) to the middle block of a vector laid out
/// as (left, m_in, right).
Vector apply_on_block(const Matrix& op, const Vector& v, Index left, Index right);

/// Derives an unrelated child seed from (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace detail

}  // namespace qcap
