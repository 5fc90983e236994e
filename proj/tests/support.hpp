#pragma once

#include <random>

#include "qcap/channels.hpp"
#include "qcap/qmat.hpp"

// Seeded generators for random test instances. These are test-side oracles:
// they build states and channels by construction (Gaussian vectors, Wishart
// matrices, Stinespring slices of Haar isometries) rather than through the
// library paths they are used to check.

namespace qcap::testing {

inline Vector random_complex_vector(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  return v;
}

inline PureState random_pure_state(const Dims& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vector v = random_complex_vector(dims_product(dims), rng);
  return PureState(v / v.norm(), dims);
}

inline Matrix random_hermitian(Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix g(dim, dim);
  for (Index i = 0; i < dim; ++i) g.row(i) = random_complex_vector(dim, rng).transpose();
  return (g + g.adjoint()) / 2.0;
}

// Wishart state G G' / tr, full rank almost surely.
inline DensityMatrix random_density(const Dims& dims, std::uint64_t seed, Index rank = 0) {
  const Index dim = dims_product(dims);
  if (rank <= 0) rank = dim;
  std::mt19937_64 rng(seed);
  Matrix g(dim, rank);
  for (Index j = 0; j < rank; ++j) g.col(j) = random_complex_vector(dim, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho), dims);
}

// Random channel with `env` Kraus operators: slices of a Haar isometry
// dim_in -> dim_out * env.
inline KrausChannel random_channel(Index dim_in, Index dim_out, Index env,
                                   std::uint64_t seed) {
  const Matrix u = haar_unitary(dim_out * env, seed);
  std::vector<Matrix> kraus;
  for (Index e = 0; e < env; ++e) {
    Matrix k(dim_out, dim_in);
    for (Index o = 0; o < dim_out; ++o) {
      k.row(o) = u.row(o * env + e).head(dim_in);
    }
    kraus.push_back(std::move(k));
  }
  return KrausChannel(std::move(kraus));
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace qcap::testing
