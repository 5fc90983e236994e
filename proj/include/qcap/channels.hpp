#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "qcap/qmat.hpp"

// Kraus-operator channel algebra plus constructors for the named channels:
// erasure, conditional and sampled rocket channels, flagged mixtures, and the
// two environment-assisted helper isometries (controlled-Weyl and SWAP).

namespace qcap {

struct FlaggedBranch;

/// Completely positive trace-preserving map given by a finite Kraus family.
/// Channels built by flagged_mixture additionally carry their branch
/// decomposition; the flag is the direct-sum block index of the output space.
class KrausChannel {
 public:
  explicit KrausChannel(std::vector<Matrix> kraus, Tolerance tol = {});

  Index dim_in() const { return dim_in_; }
  Index dim_out() const { return dim_out_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }

  bool flagged() const { return !branches_.empty(); }
  std::size_t branch_count() const { return branches_.size(); }
  double branch_probability(std::size_t i) const { return branches_[i].probability; }
  const KrausChannel& branch_channel(std::size_t i) const { return *branches_[i].channel; }

 private:
  struct BranchRec {
    double probability;
    std::shared_ptr<const KrausChannel> channel;
  };

  friend KrausChannel flagged_mixture(const std::vector<FlaggedBranch>&, Tolerance);

  std::vector<Matrix> kraus_;
  std::vector<BranchRec> branches_;
  Index dim_in_ = 0;
  Index dim_out_ = 0;
};

/// One branch of a flagged mixture: a channel applied with some probability,
/// identified at the output by an orthogonal block (the flag).
struct FlaggedBranch {
  double probability;
  KrausChannel channel;
};

/// Validates completeness (sum K'K = I within tol) and returns the channel.
KrausChannel make_channel(std::vector<Matrix> kraus, Tolerance tol = {});

KrausChannel identity_channel(Index d);

/// Complete dephasing in the computational basis, Kraus {|j><j|}.
KrausChannel dephasing_channel(Index d);

/// sum_k K rho K' on a single-register input of dimension dim_in.
DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho);

/// Applies the channel to the listed registers (in the given order, whose
/// dimensions must multiply to dim_in). The channel output becomes a single
/// register placed where the first listed target sat; untouched registers
/// keep their relative order.
DensityMatrix apply_on_subsystems(const KrausChannel& ch, const DensityMatrix& rho,
                                  const std::vector<int>& targets);

/// Kraus family {K_i (x) L_j}. The result is a plain (unflagged) channel.
KrausChannel tensor(const KrausChannel& a, const KrausChannel& b);

/// after . before, with zero products pruned.
KrausChannel compose(const KrausChannel& after, const KrausChannel& before);

/// Channel to the environment of the Stinespring dilation V = sum_k K_k (x) |k>_E.
/// The environment dimension equals the number of Kraus operators.
KrausChannel complementary(const KrausChannel& ch);

/// Probabilistic combination whose output space is the direct sum of the
/// branch output spaces; branch i acts inside block i with weight sqrt(p_i)
/// on every Kraus operator. Branch output dimensions may differ.
KrausChannel flagged_mixture(const std::vector<FlaggedBranch>& branches, Tolerance tol = {});

/// Resolves nested flagged mixtures into leaf channels with their cumulative
/// probabilities (depth-first order). A plain channel yields itself with
/// probability one.
std::vector<FlaggedBranch> flatten_branches(const KrausChannel& ch);

/// Erasure channel: passes the d-dimensional input with probability 1-p,
/// otherwise emits the orthogonal flag |e> = |d>. dim_out = d + 1.
KrausChannel erasure(Index d, double p);

/// Rocket channel for a fixed unitary pair: inputs (C, D) of dimension d each,
/// U on C, V on D, joint dephasing P = sum_{ij} w^{ij} |i><i| (x) |j><j|, then
/// C is traced out. The constant classical registers announcing (U, V) are
/// omitted; the sampled variant reintroduces the flag as its block index.
KrausChannel rocket_conditional(Index d, const Matrix& u, const Matrix& v);

/// Uniform flagged mixture of n_samples conditional rockets with Haar (U, V)
/// pairs derived deterministically from the seed.
KrausChannel rocket_sampled(Index d, int n_samples, std::uint64_t seed);

/// Classical flag value appended to a helper output register.
struct ClassicalFlag {
  Index value = 0;
  Index dim = 2;
};

/// Isometry W: A (x) E -> B (x) F for environment-assisted channels. Rows are
/// indexed by (B, F), columns by (A, E).
class HelperIsometry {
 public:
  HelperIsometry(Matrix w, Index dim_a, Index dim_e, Index dim_b, Index dim_f,
                 std::optional<ClassicalFlag> flag = std::nullopt, Tolerance tol = {});

  const Matrix& w() const { return w_; }
  Index dim_a() const { return dim_a_; }
  Index dim_e() const { return dim_e_; }
  Index dim_b() const { return dim_b_; }
  Index dim_f() const { return dim_f_; }
  const std::optional<ClassicalFlag>& flag() const { return flag_; }

 private:
  Matrix w_;
  Index dim_a_, dim_e_, dim_b_, dim_f_;
  std::optional<ClassicalFlag> flag_;
};

HelperIsometry with_flag(HelperIsometry iso, Index value, Index dim = 2);

/// Controlled-Weyl helper: W = sum_{x,z} |xz>_F <xz|_A (x) W(x,z)_{E->B},
/// with |A| = |F| = d^2 and |E| = |B| = d.
HelperIsometry controlled_weyl_isometry(Index d);

/// SWAP helper: (|phi>_A, |psi>_E) -> (|psi>_B, |phi>_F), |A| = |F| = d^2,
/// |E| = |B| = d.
HelperIsometry swap_isometry(Index d);

/// Applies one helper isometry per channel use to a conditional input on
/// (A_1..A_n) together with the helper state eta on (E_1..E_n), traces every
/// F_i, and appends each isometry's classical flag after its B_i. Output dims:
/// (B_1, [flag_1], B_2, [flag_2], ...).
DensityMatrix helper_apply_conditional(const std::vector<HelperIsometry>& isos,
                                       const DensityMatrix& rho_a, const DensityMatrix& eta,
                                       Tolerance tol = {});

/// Same, for a classical-quantum input on (X, A_1..A_n): the X register must
/// be block-diagonal; each diagonal block is pushed through the helpers and
/// the output is reassembled as a state on (X, B_1, [flag_1], ...).
DensityMatrix helper_apply(const std::vector<HelperIsometry>& isos, const DensityMatrix& input,
                           const DensityMatrix& eta, Tolerance tol = {});

namespace detail {

/// Register bookkeeping shared by the dense and pure-vector channel
/// application paths: permutation making the targets contiguous, the flat
/// dimensions on either side, and the output dims list.
struct SubsystemPlan {
  std::vector<int> perm;
  Index left = 1;
  Index right = 1;
  Dims permuted_dims;
  Dims out_dims;
};

SubsystemPlan make_subsystem_plan(const Dims& dims, const std::vector<int>& targets,
                                  Index dim_in, Index dim_out);

/// A pure-state decomposition of (id (x) channel...)(|psi><psi|): the state is
/// sum_k v_k v_k' over the stored (unnormalized) vectors.
struct VectorState {
  std::vector<Vector> vecs;
  Dims dims;
};

VectorState apply_to_vectors(const KrausChannel& ch, const VectorState& s,
                             const std::vector<int>& targets);

/// Entropy (bits) of sum_k v_k v_k' via the Gram matrix of the vectors.
double entropy_of_vector_mixture(const std::vector<Vector>& vecs, Tolerance tol = {});

/// Reduced state of sum_k v_k v_k' on the trailing block of each vector, with
/// the leading ref_dim traced out.
Matrix marginal_of_vector_mixture(const std::vector<Vector>& vecs, Index ref_dim,
                                  Index out_dim);

}  // namespace detail

}  // namespace qcap
