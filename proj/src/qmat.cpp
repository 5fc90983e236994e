#include "qcap/qmat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace qcap {

namespace {

// Side length up to which DensityMatrix construction runs a full spectral
// positivity check. Larger states only get the cheap diagonal screen here;
// their spectra are validated wherever entropies are computed.
constexpr Index kEagerPsdLimit = 256;

void check_dims_match(const Dims& dims, Index size, const char* what) {
  if (dims.empty()) {
    throw std::invalid_argument(std::string(what) + ": dims must be nonempty");
  }
  for (Index d : dims) {
    if (d < 1) {
      throw std::invalid_argument(std::string(what) + ": dims must be >= 1");
    }
  }
  if (dims_product(dims) != size) {
    throw std::invalid_argument(std::string(what) + ": product of dims (" +
                                std::to_string(dims_product(dims)) +
                                ") does not match size " + std::to_string(size));
  }
}

void check_valid_permutation(const std::vector<int>& perm, std::size_t n) {
  if (perm.size() != n) {
    throw std::invalid_argument("permute_systems: permutation length mismatch");
  }
  std::vector<bool> seen(n, false);
  for (int p : perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= n || seen[p]) {
      throw std::invalid_argument("permute_systems: not a valid permutation");
    }
    seen[p] = true;
  }
}

std::vector<Index> strides_of(const Dims& dims) {
  std::vector<Index> strides(dims.size());
  Index acc = 1;
  for (std::size_t i = dims.size(); i-- > 0;) {
    strides[i] = acc;
    acc *= dims[i];
  }
  return strides;
}

// Flat offsets contributed by the registers at `positions` as their digits run
// through all combinations (odometer order, leftmost digit most significant).
std::vector<Index> subset_offsets(const Dims& dims, const std::vector<int>& positions) {
  const auto strides = strides_of(dims);
  Index count = 1;
  for (int p : positions) count *= dims[p];

  std::vector<Index> offsets(count);
  std::vector<Index> digits(positions.size(), 0);
  Index flat = 0;
  for (Index i = 0; i < count; ++i) {
    offsets[i] = flat;
    for (std::size_t k = positions.size(); k-- > 0;) {
      ++digits[k];
      flat += strides[positions[k]];
      if (digits[k] < dims[positions[k]]) break;
      flat -= dims[positions[k]] * strides[positions[k]];
      digits[k] = 0;
    }
  }
  return offsets;
}

}  // namespace

Index dims_product(const Dims& dims) {
  Index acc = 1;
  for (Index d : dims) acc *= d;
  return acc;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b);
}

Vector kron_vec(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

PureState::PureState(Vector amplitudes, Dims dims, Tolerance tol)
    : amplitudes_(std::move(amplitudes)), dims_(std::move(dims)) {
  check_dims_match(dims_, amplitudes_.size(), "PureState");
  const double norm2 = amplitudes_.squaredNorm();
  if (std::abs(norm2 - 1.0) > tol.atol) {
    throw std::invalid_argument("PureState: squared norm " + std::to_string(norm2) +
                                " is not 1 within tolerance");
  }
}

DensityMatrix::DensityMatrix(Matrix matrix, Dims dims, Tolerance tol)
    : matrix_(std::move(matrix)), dims_(std::move(dims)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw std::invalid_argument("DensityMatrix: matrix must be square");
  }
  check_dims_match(dims_, matrix_.rows(), "DensityMatrix");

  const double herm_dev = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > tol.atol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian (max deviation " +
                                std::to_string(herm_dev) + ")");
  }
  const Complex tr = matrix_.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > tol.atol) {
    throw std::invalid_argument("DensityMatrix: trace is not 1 within tolerance");
  }
  if (matrix_.rows() <= kEagerPsdLimit) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues()(0) < -tol.atol) {
      throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                  std::to_string(solver.eigenvalues()(0)));
    }
  } else {
    const double min_diag = matrix_.diagonal().real().minCoeff();
    if (min_diag < -tol.atol) {
      throw std::invalid_argument("DensityMatrix: negative diagonal entry " +
                                  std::to_string(min_diag));
    }
  }
}

DensityMatrix to_density_matrix(const PureState& psi) {
  const Vector& v = psi.amplitudes();
  return DensityMatrix(v * v.adjoint(), psi.dims());
}

PureState max_entangled(Index d) {
  if (d < 1) throw std::invalid_argument("max_entangled: d must be >= 1");
  Vector v = Vector::Zero(d * d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (Index i = 0; i < d; ++i) v(i * d + i) = amp;
  return PureState(std::move(v), {d, d});
}

DensityMatrix maximally_mixed(Index d) {
  if (d < 1) throw std::invalid_argument("maximally_mixed: d must be >= 1");
  return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d), {d});
}

Matrix weyl(Index d, Index x, Index z) {
  if (d < 1) throw std::invalid_argument("weyl: d must be >= 1");
  x = ((x % d) + d) % d;
  z = ((z % d) + d) % d;
  const double theta = 2.0 * std::numbers::pi / static_cast<double>(d);
  Matrix w = Matrix::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    w((x + j) % d, j) = std::polar(1.0, theta * static_cast<double>(z * j));
  }
  return w;
}

Matrix haar_unitary(Index d, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("haar_unitary: d must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      g(i, j) = Complex(gauss(rng), gauss(rng));
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  // Fix the column phases so the distribution is Haar, not merely unitary.
  for (Index j = 0; j < d; ++j) {
    const Complex rjj = r(j, j);
    if (std::abs(rjj) > 0) q.col(j) *= rjj / std::abs(rjj);
  }
  return q;
}

namespace detail {

std::vector<Index> permutation_index_map(const Dims& dims, const std::vector<int>& perm) {
  check_valid_permutation(perm, dims.size());
  const auto in_strides = strides_of(dims);
  const Index total = dims_product(dims);

  Dims out_dims(dims.size());
  for (std::size_t k = 0; k < perm.size(); ++k) out_dims[k] = dims[perm[k]];

  std::vector<Index> map(total);
  std::vector<Index> digits(dims.size(), 0);
  Index in_flat = 0;
  for (Index f = 0; f < total; ++f) {
    map[f] = in_flat;
    for (std::size_t k = dims.size(); k-- > 0;) {
      ++digits[k];
      in_flat += in_strides[perm[k]];
      if (digits[k] < out_dims[k]) break;
      in_flat -= out_dims[k] * in_strides[perm[k]];
      digits[k] = 0;
    }
  }
  return map;
}

Vector apply_on_block(const Matrix& op, const Vector& v, Index left, Index right) {
  const Index m_in = op.cols();
  const Index m_out = op.rows();
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Vector out(left * m_out * right);
  for (Index l = 0; l < left; ++l) {
    Eigen::Map<const RowMajor> block_in(v.data() + l * m_in * right, m_in, right);
    Eigen::Map<RowMajor> block_out(out.data() + l * m_out * right, m_out, right);
    block_out = op * block_in;
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 scramble of (seed, stream).
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

PureState permute_systems(const PureState& psi, const std::vector<int>& perm) {
  const auto map = detail::permutation_index_map(psi.dims(), perm);
  Vector out(psi.size());
  for (Index f = 0; f < psi.size(); ++f) out(f) = psi.amplitudes()(map[f]);
  Dims out_dims(psi.dims().size());
  for (std::size_t k = 0; k < perm.size(); ++k) out_dims[k] = psi.dims()[perm[k]];
  return PureState(std::move(out), std::move(out_dims));
}

DensityMatrix permute_systems(const DensityMatrix& rho, const std::vector<int>& perm) {
  const auto map = detail::permutation_index_map(rho.dims(), perm);
  const Index n = rho.side();
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) out(i, j) = rho.matrix()(map[i], map[j]);
  }
  Dims out_dims(rho.dims().size());
  for (std::size_t k = 0; k < perm.size(); ++k) out_dims[k] = rho.dims()[perm[k]];
  return DensityMatrix(std::move(out), std::move(out_dims));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  if (keep.empty()) {
    throw std::invalid_argument("partial_trace: keep set must be nonempty");
  }
  const int n = static_cast<int>(rho.dims().size());
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw std::invalid_argument("partial_trace: index out of range");
    if (kept[k]) throw std::invalid_argument("partial_trace: duplicate index");
    kept[k] = true;
  }

  std::vector<int> keep_sorted, traced;
  for (int i = 0; i < n; ++i) (kept[i] ? keep_sorted : traced).push_back(i);

  const auto keep_off = subset_offsets(rho.dims(), keep_sorted);
  const auto traced_off = subset_offsets(rho.dims(), traced);

  const Index nk = static_cast<Index>(keep_off.size());
  Matrix out = Matrix::Zero(nk, nk);
  for (Index r = 0; r < nk; ++r) {
    for (Index c = 0; c < nk; ++c) {
      Complex acc(0.0, 0.0);
      for (Index t : traced_off) {
        acc += rho.matrix()(keep_off[r] + t, keep_off[c] + t);
      }
      out(r, c) = acc;
    }
  }

  Dims out_dims;
  for (int i : keep_sorted) out_dims.push_back(rho.dims()[i]);
  return DensityMatrix(std::move(out), std::move(out_dims));
}

RealVector hermitian_eigenvalues(const Matrix& m, Tolerance tol) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("hermitian_eigenvalues: matrix must be square");
  }
  const double herm_dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > tol.atol) {
    throw std::invalid_argument("hermitian_eigenvalues: not Hermitian (max deviation " +
                                std::to_string(herm_dev) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double entropy_of_spectrum(const RealVector& spectrum, Tolerance tol) {
  double h = 0.0;
  for (Index i = 0; i < spectrum.size(); ++i) {
    const double lambda = spectrum(i);
    if (lambda < -tol.atol) {
      throw std::invalid_argument("entropy_of_spectrum: eigenvalue " +
                                  std::to_string(lambda) + " below -atol");
    }
    if (lambda > 0.0) h -= lambda * std::log2(lambda);
  }
  return h;
}

double von_neumann_entropy(const DensityMatrix& rho, Tolerance tol) {
  return entropy_of_spectrum(hermitian_eigenvalues(rho.matrix(), tol), tol);
}

DensityMatrix dephase(const DensityMatrix& rho, const std::vector<int>& subsystems) {
  const int n = static_cast<int>(rho.dims().size());
  std::vector<bool> marked(n, false);
  for (int s : subsystems) {
    if (s < 0 || s >= n) throw std::invalid_argument("dephase: index out of range");
    marked[s] = true;
  }
  std::vector<int> positions;
  for (int i = 0; i < n; ++i) {
    if (marked[i]) positions.push_back(i);
  }
  if (positions.empty()) return rho;

  // Signature of each flat index: its digits restricted to the dephased
  // registers. Entries survive only when row and column signatures agree.
  const auto strides = strides_of(rho.dims());
  const Index side = rho.side();
  std::vector<Index> signature(side);
  for (Index f = 0; f < side; ++f) {
    Index sig = 0;
    for (int p : positions) {
      sig = sig * rho.dims()[p] + (f / strides[p]) % rho.dims()[p];
    }
    signature[f] = sig;
  }

  Matrix out = Matrix::Zero(side, side);
  for (Index i = 0; i < side; ++i) {
    for (Index j = 0; j < side; ++j) {
      if (signature[i] == signature[j]) out(i, j) = rho.matrix()(i, j);
    }
  }
  return DensityMatrix(std::move(out), rho.dims());
}

}  // namespace qcap
