#include "qcap/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qcap {

namespace {

// Weights below this are dropped when expanding mixed states into pure-state
// ensembles; the induced trace deficit stays far under every tolerance used.
constexpr double kWeightCutoff = 1e-13;

Matrix identity_like(Index d) { return Matrix::Identity(d, d); }

}  // namespace

KrausChannel::KrausChannel(std::vector<Matrix> kraus, Tolerance tol)
    : kraus_(std::move(kraus)) {
  if (kraus_.empty()) {
    throw std::invalid_argument("KrausChannel: empty Kraus family");
  }
  dim_out_ = kraus_.front().rows();
  dim_in_ = kraus_.front().cols();
  for (const Matrix& k : kraus_) {
    if (k.rows() != dim_out_ || k.cols() != dim_in_) {
      throw std::invalid_argument("KrausChannel: Kraus operators must share dimensions");
    }
  }
  Matrix sum = Matrix::Zero(dim_in_, dim_in_);
  for (const Matrix& k : kraus_) sum += k.adjoint() * k;
  const double dev = (sum - identity_like(dim_in_)).cwiseAbs().maxCoeff();
  if (dev > tol.atol) {
    throw std::invalid_argument("KrausChannel: completeness violated (max deviation " +
                                std::to_string(dev) + ")");
  }
}

KrausChannel make_channel(std::vector<Matrix> kraus, Tolerance tol) {
  return KrausChannel(std::move(kraus), tol);
}

KrausChannel identity_channel(Index d) {
  return KrausChannel({identity_like(d)});
}

KrausChannel dephasing_channel(Index d) {
  std::vector<Matrix> kraus;
  kraus.reserve(d);
  for (Index j = 0; j < d; ++j) {
    Matrix k = Matrix::Zero(d, d);
    k(j, j) = 1.0;
    kraus.push_back(std::move(k));
  }
  return KrausChannel(std::move(kraus));
}

DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho) {
  if (rho.side() != ch.dim_in()) {
    throw std::invalid_argument("apply: input side does not match channel dim_in");
  }
  Matrix out = Matrix::Zero(ch.dim_out(), ch.dim_out());
  for (const Matrix& k : ch.kraus()) out += k * rho.matrix() * k.adjoint();
  return DensityMatrix(std::move(out), {ch.dim_out()});
}

namespace detail {

SubsystemPlan make_subsystem_plan(const Dims& dims, const std::vector<int>& targets,
                                  Index dim_in, Index dim_out) {
  const int n = static_cast<int>(dims.size());
  if (targets.empty()) {
    throw std::invalid_argument("apply_on_subsystems: target list must be nonempty");
  }
  std::vector<bool> is_target(n, false);
  Index target_dim = 1;
  for (int t : targets) {
    if (t < 0 || t >= n) {
      throw std::invalid_argument("apply_on_subsystems: target index out of range");
    }
    if (is_target[t]) {
      throw std::invalid_argument("apply_on_subsystems: overlapping targets");
    }
    is_target[t] = true;
    target_dim *= dims[t];
  }
  if (target_dim != dim_in) {
    throw std::invalid_argument("apply_on_subsystems: target dims (" +
                                std::to_string(target_dim) + ") do not match channel dim_in (" +
                                std::to_string(dim_in) + ")");
  }

  std::vector<int> untouched;
  for (int i = 0; i < n; ++i) {
    if (!is_target[i]) untouched.push_back(i);
  }
  const int first = targets.front();
  std::size_t insert_pos = 0;
  while (insert_pos < untouched.size() && untouched[insert_pos] < first) ++insert_pos;

  SubsystemPlan plan;
  plan.perm.reserve(n);
  for (std::size_t i = 0; i < insert_pos; ++i) plan.perm.push_back(untouched[i]);
  for (int t : targets) plan.perm.push_back(t);
  for (std::size_t i = insert_pos; i < untouched.size(); ++i) plan.perm.push_back(untouched[i]);

  for (int p : plan.perm) plan.permuted_dims.push_back(dims[p]);
  for (std::size_t i = 0; i < insert_pos; ++i) {
    plan.left *= dims[untouched[i]];
    plan.out_dims.push_back(dims[untouched[i]]);
  }
  plan.out_dims.push_back(dim_out);
  for (std::size_t i = insert_pos; i < untouched.size(); ++i) {
    plan.right *= dims[untouched[i]];
  }
  for (std::size_t i = insert_pos; i < untouched.size(); ++i) {
    plan.out_dims.push_back(dims[untouched[i]]);
  }
  return plan;
}

VectorState apply_to_vectors(const KrausChannel& ch, const VectorState& s,
                             const std::vector<int>& targets) {
  const SubsystemPlan plan = make_subsystem_plan(s.dims, targets, ch.dim_in(), ch.dim_out());
  bool identity_perm = true;
  for (std::size_t k = 0; k < plan.perm.size(); ++k) {
    if (plan.perm[k] != static_cast<int>(k)) identity_perm = false;
  }
  std::vector<Index> map;
  if (!identity_perm) map = permutation_index_map(s.dims, plan.perm);

  VectorState out;
  out.dims = plan.out_dims;
  out.vecs.reserve(s.vecs.size() * ch.kraus().size());
  for (const Vector& v : s.vecs) {
    Vector vp;
    if (identity_perm) {
      vp = v;
    } else {
      vp.resize(v.size());
      for (Index f = 0; f < v.size(); ++f) vp(f) = v(map[f]);
    }
    for (const Matrix& k : ch.kraus()) {
      out.vecs.push_back(apply_on_block(k, vp, plan.left, plan.right));
    }
  }
  return out;
}

double entropy_of_vector_mixture(const std::vector<Vector>& vecs, Tolerance tol) {
  const Index m = static_cast<Index>(vecs.size());
  Matrix gram(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = i; j < m; ++j) {
      gram(i, j) = vecs[i].dot(vecs[j]);
      gram(j, i) = std::conj(gram(i, j));
    }
  }
  return entropy_of_spectrum(hermitian_eigenvalues(gram, tol), tol);
}

Matrix marginal_of_vector_mixture(const std::vector<Vector>& vecs, Index ref_dim,
                                  Index out_dim) {
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Matrix rho = Matrix::Zero(out_dim, out_dim);
  for (const Vector& v : vecs) {
    Eigen::Map<const RowMajor> m(v.data(), ref_dim, out_dim);
    rho += m.transpose() * m.conjugate();
  }
  return (rho + rho.adjoint()) / 2.0;
}

}  // namespace detail

DensityMatrix apply_on_subsystems(const KrausChannel& ch, const DensityMatrix& rho,
                                  const std::vector<int>& targets) {
  const detail::SubsystemPlan plan =
      detail::make_subsystem_plan(rho.dims(), targets, ch.dim_in(), ch.dim_out());

  bool identity_perm = true;
  for (std::size_t k = 0; k < plan.perm.size(); ++k) {
    if (plan.perm[k] != static_cast<int>(k)) identity_perm = false;
  }
  const Matrix src =
      identity_perm ? rho.matrix() : permute_systems(rho, plan.perm).matrix();

  const Index out_side = plan.left * ch.dim_out() * plan.right;
  Matrix out = Matrix::Zero(out_side, out_side);
  const Matrix eye_left = identity_like(plan.left);
  const Matrix eye_right = identity_like(plan.right);
  for (const Matrix& k : ch.kraus()) {
    const Matrix lifted = kron(eye_left, kron(k, eye_right));
    out += lifted * src * lifted.adjoint();
  }
  return DensityMatrix(std::move(out), plan.out_dims);
}

KrausChannel tensor(const KrausChannel& a, const KrausChannel& b) {
  std::vector<Matrix> kraus;
  kraus.reserve(a.kraus().size() * b.kraus().size());
  for (const Matrix& ka : a.kraus()) {
    for (const Matrix& kb : b.kraus()) kraus.push_back(kron(ka, kb));
  }
  return KrausChannel(std::move(kraus));
}

KrausChannel compose(const KrausChannel& after, const KrausChannel& before) {
  if (after.dim_in() != before.dim_out()) {
    throw std::invalid_argument("compose: inner dimensions do not match");
  }
  std::vector<Matrix> kraus;
  for (const Matrix& ka : after.kraus()) {
    for (const Matrix& kb : before.kraus()) {
      Matrix prod = ka * kb;
      if (prod.cwiseAbs().maxCoeff() > 1e-15) kraus.push_back(std::move(prod));
    }
  }
  if (kraus.empty()) {
    kraus.push_back(Matrix::Zero(after.dim_out(), before.dim_in()));
  }
  return KrausChannel(std::move(kraus));
}

KrausChannel complementary(const KrausChannel& ch) {
  const Index env_dim = static_cast<Index>(ch.kraus().size());
  std::vector<Matrix> kraus;
  kraus.reserve(ch.dim_out());
  for (Index a = 0; a < ch.dim_out(); ++a) {
    Matrix e(env_dim, ch.dim_in());
    for (Index k = 0; k < env_dim; ++k) e.row(k) = ch.kraus()[k].row(a);
    kraus.push_back(std::move(e));
  }
  return KrausChannel(std::move(kraus));
}

KrausChannel flagged_mixture(const std::vector<FlaggedBranch>& branches, Tolerance tol) {
  if (branches.empty()) {
    throw std::invalid_argument("flagged_mixture: no branches");
  }
  double prob_sum = 0.0;
  const Index dim_in = branches.front().channel.dim_in();
  Index dim_out = 0;
  for (const FlaggedBranch& b : branches) {
    if (b.probability < -tol.atol) {
      throw std::invalid_argument("flagged_mixture: negative branch probability");
    }
    if (b.channel.dim_in() != dim_in) {
      throw std::invalid_argument("flagged_mixture: branch dim_in mismatch");
    }
    prob_sum += b.probability;
    dim_out += b.channel.dim_out();
  }
  if (std::abs(prob_sum - 1.0) > tol.atol) {
    throw std::invalid_argument("flagged_mixture: probabilities sum to " +
                                std::to_string(prob_sum) + ", not 1");
  }

  std::vector<Matrix> kraus;
  Index offset = 0;
  for (const FlaggedBranch& b : branches) {
    const double amp = std::sqrt(std::max(b.probability, 0.0));
    for (const Matrix& k : b.channel.kraus()) {
      Matrix embedded = Matrix::Zero(dim_out, dim_in);
      embedded.block(offset, 0, b.channel.dim_out(), dim_in) = amp * k;
      kraus.push_back(std::move(embedded));
    }
    offset += b.channel.dim_out();
  }

  KrausChannel ch(std::move(kraus), tol);
  for (const FlaggedBranch& b : branches) {
    ch.branches_.push_back({b.probability, std::make_shared<const KrausChannel>(b.channel)});
  }
  return ch;
}

std::vector<FlaggedBranch> flatten_branches(const KrausChannel& ch) {
  std::vector<FlaggedBranch> leaves;
  if (!ch.flagged()) {
    leaves.push_back({1.0, ch});
    return leaves;
  }
  for (std::size_t i = 0; i < ch.branch_count(); ++i) {
    for (FlaggedBranch& sub : flatten_branches(ch.branch_channel(i))) {
      leaves.push_back({ch.branch_probability(i) * sub.probability, std::move(sub.channel)});
    }
  }
  return leaves;
}

KrausChannel erasure(Index d, double p) {
  if (d < 1) throw std::invalid_argument("erasure: d must be >= 1");
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("erasure: p must lie in [0, 1]");
  }
  std::vector<Matrix> kraus;
  Matrix keep = Matrix::Zero(d + 1, d);
  keep.topLeftCorner(d, d) = std::sqrt(1.0 - p) * identity_like(d);
  kraus.push_back(std::move(keep));
  for (Index i = 0; i < d; ++i) {
    Matrix flag = Matrix::Zero(d + 1, d);
    flag(d, i) = std::sqrt(p);
    kraus.push_back(std::move(flag));
  }
  return KrausChannel(std::move(kraus));
}

KrausChannel rocket_conditional(Index d, const Matrix& u, const Matrix& v) {
  if (d < 1) throw std::invalid_argument("rocket_conditional: d must be >= 1");
  auto check_unitary = [d](const Matrix& m, const char* name) {
    if (m.rows() != d || m.cols() != d ||
        (m.adjoint() * m - identity_like(d)).cwiseAbs().maxCoeff() > 1e-9) {
      throw std::invalid_argument(std::string("rocket_conditional: ") + name +
                                  " is not a d x d unitary");
    }
  };
  check_unitary(u, "u");
  check_unitary(v, "v");

  const double theta = 2.0 * std::numbers::pi / static_cast<double>(d);
  Matrix puv = kron(u, v);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      puv.row(i * d + j) *= std::polar(1.0, theta * static_cast<double>(i * j));
    }
  }
  std::vector<Matrix> kraus;
  kraus.reserve(d);
  for (Index c = 0; c < d; ++c) {
    kraus.push_back(puv.middleRows(c * d, d));
  }
  return KrausChannel(std::move(kraus));
}

KrausChannel rocket_sampled(Index d, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) {
    throw std::invalid_argument("rocket_sampled: n_samples must be >= 1");
  }
  std::vector<FlaggedBranch> branches;
  branches.reserve(n_samples);
  const double p = 1.0 / static_cast<double>(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    const Matrix u = haar_unitary(d, detail::derive_seed(seed, 2 * k));
    const Matrix v = haar_unitary(d, detail::derive_seed(seed, 2 * k + 1));
    branches.push_back({p, rocket_conditional(d, u, v)});
  }
  return flagged_mixture(branches);
}

HelperIsometry::HelperIsometry(Matrix w, Index dim_a, Index dim_e, Index dim_b, Index dim_f,
                               std::optional<ClassicalFlag> flag, Tolerance tol)
    : w_(std::move(w)), dim_a_(dim_a), dim_e_(dim_e), dim_b_(dim_b), dim_f_(dim_f),
      flag_(flag) {
  if (w_.rows() != dim_b_ * dim_f_ || w_.cols() != dim_a_ * dim_e_) {
    throw std::invalid_argument("HelperIsometry: matrix shape does not match dims");
  }
  const double dev =
      (w_.adjoint() * w_ - identity_like(w_.cols())).cwiseAbs().maxCoeff();
  if (dev > tol.atol) {
    throw std::invalid_argument("HelperIsometry: W'W != I (max deviation " +
                                std::to_string(dev) + ")");
  }
  if (flag_ && (flag_->value < 0 || flag_->value >= flag_->dim)) {
    throw std::invalid_argument("HelperIsometry: flag value out of range");
  }
}

HelperIsometry with_flag(HelperIsometry iso, Index value, Index dim) {
  return HelperIsometry(iso.w(), iso.dim_a(), iso.dim_e(), iso.dim_b(), iso.dim_f(),
                        ClassicalFlag{value, dim});
}

HelperIsometry controlled_weyl_isometry(Index d) {
  if (d < 2) throw std::invalid_argument("controlled_weyl_isometry: d must be >= 2");
  const Index d2 = d * d;
  Matrix w = Matrix::Zero(d * d2, d * d2);
  for (Index a = 0; a < d2; ++a) {
    const Matrix wxz = weyl(d, a / d, a % d);
    for (Index e = 0; e < d; ++e) {
      for (Index b = 0; b < d; ++b) {
        w(b * d2 + a, a * d + e) = wxz(b, e);
      }
    }
  }
  return HelperIsometry(std::move(w), d2, d, d, d2);
}

HelperIsometry swap_isometry(Index d) {
  if (d < 2) throw std::invalid_argument("swap_isometry: d must be >= 2");
  const Index d2 = d * d;
  Matrix w = Matrix::Zero(d * d2, d * d2);
  for (Index a = 0; a < d2; ++a) {
    for (Index e = 0; e < d; ++e) {
      w(e * d2 + a, a * d + e) = 1.0;
    }
  }
  return HelperIsometry(std::move(w), d2, d, d, d2);
}

namespace {

Dims helper_output_dims(const std::vector<HelperIsometry>& isos) {
  Dims dims;
  for (const HelperIsometry& iso : isos) {
    dims.push_back(iso.dim_b());
    if (iso.flag()) dims.push_back(iso.flag()->dim);
  }
  return dims;
}

}  // namespace

DensityMatrix helper_apply_conditional(const std::vector<HelperIsometry>& isos,
                                       const DensityMatrix& rho_a, const DensityMatrix& eta,
                                       Tolerance tol) {
  const std::size_t n = isos.size();
  if (n == 0) throw std::invalid_argument("helper_apply: no isometries");
  if (rho_a.dims().size() != n || eta.dims().size() != n) {
    throw std::invalid_argument("helper_apply: register count mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (rho_a.dims()[i] != isos[i].dim_a() || eta.dims()[i] != isos[i].dim_e()) {
      throw std::invalid_argument("helper_apply: register dimensions mismatch");
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig_a(rho_a.matrix());
  Eigen::SelfAdjointEigenSolver<Matrix> eig_e(eta.matrix());

  // Interleave (A1..An, E1..En) -> (A1, E1, A2, E2, ...).
  Dims ae_dims = rho_a.dims();
  ae_dims.insert(ae_dims.end(), eta.dims().begin(), eta.dims().end());
  std::vector<int> interleave(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    interleave[2 * i] = static_cast<int>(i);
    interleave[2 * i + 1] = static_cast<int>(n + i);
  }
  const auto map_in = detail::permutation_index_map(ae_dims, interleave);

  Dims bf_dims(2 * n);
  Index b_total = 1, f_total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    bf_dims[2 * i] = isos[i].dim_b();
    bf_dims[2 * i + 1] = isos[i].dim_f();
    b_total *= isos[i].dim_b();
    f_total *= isos[i].dim_f();
  }
  std::vector<int> gather(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    gather[k] = static_cast<int>(2 * k);
    gather[n + k] = static_cast<int>(2 * k + 1);
  }
  const auto map_out = detail::permutation_index_map(bf_dims, gather);

  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Matrix rho_b = Matrix::Zero(b_total, b_total);
  for (Index m = 0; m < eig_a.eigenvalues().size(); ++m) {
    const double lambda = eig_a.eigenvalues()(m);
    if (lambda < kWeightCutoff) continue;
    for (Index l = 0; l < eig_e.eigenvalues().size(); ++l) {
      const double mu = eig_e.eigenvalues()(l);
      const double weight = lambda * mu;
      if (weight < kWeightCutoff) continue;

      Vector joint = kron_vec(eig_a.eigenvectors().col(m), eig_e.eigenvectors().col(l));
      Vector psi(joint.size());
      for (Index f = 0; f < joint.size(); ++f) psi(f) = joint(map_in[f]);

      Dims cur(2 * n);
      for (std::size_t i = 0; i < n; ++i) {
        cur[2 * i] = isos[i].dim_a();
        cur[2 * i + 1] = isos[i].dim_e();
      }
      for (std::size_t i = 0; i < n; ++i) {
        Index left = 1, right = 1;
        for (std::size_t k = 0; k < 2 * i; ++k) left *= cur[k];
        for (std::size_t k = 2 * i + 2; k < cur.size(); ++k) right *= cur[k];
        psi = detail::apply_on_block(isos[i].w(), psi, left, right);
        cur[2 * i] = isos[i].dim_b();
        cur[2 * i + 1] = isos[i].dim_f();
      }

      Vector sorted(psi.size());
      for (Index f = 0; f < psi.size(); ++f) sorted(f) = psi(map_out[f]);
      Eigen::Map<const RowMajor> m_bf(sorted.data(), b_total, f_total);
      rho_b += weight * (m_bf * m_bf.adjoint());
    }
  }
  rho_b = (rho_b + rho_b.adjoint()) / 2.0;

  // Append classical flags, then interleave each one behind its B register.
  Matrix with_flags = std::move(rho_b);
  Dims dims_flat;
  for (const HelperIsometry& iso : isos) dims_flat.push_back(iso.dim_b());
  std::vector<int> flag_slot(n, -1);
  int flag_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!isos[i].flag()) continue;
    const ClassicalFlag& fl = *isos[i].flag();
    Matrix proj = Matrix::Zero(fl.dim, fl.dim);
    proj(fl.value, fl.value) = 1.0;
    with_flags = kron(with_flags, proj);
    dims_flat.push_back(fl.dim);
    flag_slot[i] = flag_count++;
  }
  if (flag_count == 0) {
    return DensityMatrix(std::move(with_flags), std::move(dims_flat), tol);
  }
  std::vector<int> order;
  for (std::size_t i = 0; i < n; ++i) {
    order.push_back(static_cast<int>(i));
    if (flag_slot[i] >= 0) order.push_back(static_cast<int>(n) + flag_slot[i]);
  }
  return permute_systems(DensityMatrix(std::move(with_flags), std::move(dims_flat), tol),
                         order);
}

DensityMatrix helper_apply(const std::vector<HelperIsometry>& isos, const DensityMatrix& input,
                           const DensityMatrix& eta, Tolerance tol) {
  const std::size_t n = isos.size();
  if (input.dims().size() != n + 1) {
    throw std::invalid_argument("helper_apply: input must carry X plus one register per use");
  }
  const Index dx = input.dims()[0];
  Dims a_dims(input.dims().begin() + 1, input.dims().end());
  const Index block = dims_product(a_dims);

  for (Index x = 0; x < dx; ++x) {
    for (Index y = 0; y < dx; ++y) {
      if (x == y) continue;
      const double off =
          input.matrix().block(x * block, y * block, block, block).cwiseAbs().maxCoeff();
      if (off > tol.atol) {
        throw std::invalid_argument("helper_apply: X register is not classical");
      }
    }
  }

  const Dims out_dims_per_block = helper_output_dims(isos);
  const Index out_block = dims_product(out_dims_per_block);
  Matrix out = Matrix::Zero(dx * out_block, dx * out_block);
  for (Index x = 0; x < dx; ++x) {
    const Matrix b = input.matrix().block(x * block, x * block, block, block);
    const double px = b.trace().real();
    if (px < kWeightCutoff) continue;
    const DensityMatrix conditional(b / px, a_dims, tol);
    const DensityMatrix sigma = helper_apply_conditional(isos, conditional, eta, tol);
    out.block(x * out_block, x * out_block, out_block, out_block) = px * sigma.matrix();
  }

  Dims out_dims{dx};
  out_dims.insert(out_dims.end(), out_dims_per_block.begin(), out_dims_per_block.end());
  return DensityMatrix(std::move(out), std::move(out_dims), tol);
}

}  // namespace qcap
