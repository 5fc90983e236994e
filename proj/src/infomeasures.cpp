#include "qcap/infomeasures.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qcap {

namespace {

// Splits phi's registers into (reference..., channel input...): the channel
// consumes as many trailing registers as multiply to dim_in.
std::vector<int> trailing_targets(const Dims& dims, Index dim_in) {
  Index acc = 1;
  std::size_t k = dims.size();
  while (k > 0 && acc < dim_in) {
    --k;
    acc *= dims[k];
  }
  if (acc != dim_in) {
    throw std::invalid_argument(
        "coherent_information: trailing registers do not match channel dim_in");
  }
  std::vector<int> targets;
  for (std::size_t i = k; i < dims.size(); ++i) targets.push_back(static_cast<int>(i));
  return targets;
}

double plain_coherent_information(const KrausChannel& ch, const PureState& phi,
                                  Tolerance tol) {
  const std::vector<int> targets = trailing_targets(phi.dims(), ch.dim_in());
  detail::VectorState state{{phi.amplitudes()}, phi.dims()};
  state = detail::apply_to_vectors(ch, state, targets);

  Index ref_dim = 1;
  const std::size_t n_ref = state.dims.size() - 1;
  for (std::size_t i = 0; i < n_ref; ++i) ref_dim *= state.dims[i];

  const double h_joint = detail::entropy_of_vector_mixture(state.vecs, tol);
  const Matrix rho_b =
      detail::marginal_of_vector_mixture(state.vecs, ref_dim, ch.dim_out());
  const double h_out = entropy_of_spectrum(hermitian_eigenvalues(rho_b, tol), tol);
  return h_out - h_joint;
}

Vector random_pure_vector(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  return v / v.norm();
}

CQEnsemble random_rank1_ensemble(Index dim, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> probs(dim);
  double total = 0.0;
  for (Index i = 0; i < dim; ++i) {
    probs[i] = expo(rng);
    total += probs[i];
  }
  std::vector<DensityMatrix> states;
  for (Index i = 0; i < dim; ++i) {
    probs[i] /= total;
    const Vector v = random_pure_vector(dim, rng);
    states.emplace_back(v * v.adjoint(), Dims{dim});
  }
  return CQEnsemble(std::move(probs), std::move(states));
}

}  // namespace

CQEnsemble::CQEnsemble(std::vector<double> probs_in, std::vector<DensityMatrix> states_in,
                       Tolerance tol)
    : probs(std::move(probs_in)), states(std::move(states_in)) {
  if (probs.empty() || probs.size() != states.size()) {
    throw std::invalid_argument("CQEnsemble: probability/state count mismatch");
  }
  double total = 0.0;
  for (double p : probs) {
    if (p < -tol.atol) throw std::invalid_argument("CQEnsemble: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > tol.atol) {
    throw std::invalid_argument("CQEnsemble: probabilities sum to " + std::to_string(total));
  }
  for (const DensityMatrix& s : states) {
    if (s.dims() != states.front().dims()) {
      throw std::invalid_argument("CQEnsemble: states must share register layout");
    }
  }
}

InfoValue coherent_information(const KrausChannel& ch, const PureState& phi, Tolerance tol) {
  InfoValue result;
  if (!ch.flagged()) {
    result.value = plain_coherent_information(ch, phi, tol);
    return result;
  }
  // Orthogonal output flags make the coherent information of the mixture the
  // probability-weighted sum of the branch coherent informations.
  double total = 0.0;
  for (std::size_t i = 0; i < ch.branch_count(); ++i) {
    const double p = ch.branch_probability(i);
    const double qi = coherent_information(ch.branch_channel(i), phi, tol).value;
    result.components["branch_" + std::to_string(i)] = qi;
    result.components["weight_" + std::to_string(i)] = p;
    if (p > 0.0) total += p * qi;
  }
  result.value = total;
  return result;
}

double coherent_information_dense(const KrausChannel& ch, const PureState& phi,
                                  Tolerance tol) {
  const std::vector<int> targets = trailing_targets(phi.dims(), ch.dim_in());
  const DensityMatrix joint = apply_on_subsystems(ch, to_density_matrix(phi), targets);

  const int out_register = static_cast<int>(joint.dims().size()) - 1;
  const double h_joint = von_neumann_entropy(joint, tol);
  const double h_out = von_neumann_entropy(partial_trace(joint, {out_register}), tol);
  return h_out - h_joint;
}

double mutual_information(const DensityMatrix& rho, const std::vector<int>& cut,
                          Tolerance tol) {
  const int n = static_cast<int>(rho.dims().size());
  if (cut.empty() || static_cast<int>(cut.size()) >= n) {
    throw std::invalid_argument("mutual_information: cut must be a proper nonempty subset");
  }
  std::vector<bool> in_cut(n, false);
  for (int c : cut) {
    if (c < 0 || c >= n) throw std::invalid_argument("mutual_information: index out of range");
    in_cut[c] = true;
  }
  std::vector<int> rest;
  for (int i = 0; i < n; ++i) {
    if (!in_cut[i]) rest.push_back(i);
  }
  return von_neumann_entropy(partial_trace(rho, cut), tol) +
         von_neumann_entropy(partial_trace(rho, rest), tol) - von_neumann_entropy(rho, tol);
}

CQEnsemble cq_push(const KrausChannel& ch, const CQEnsemble& e) {
  std::vector<DensityMatrix> pushed;
  pushed.reserve(e.states.size());
  for (const DensityMatrix& s : e.states) {
    if (s.side() != ch.dim_in()) {
      throw std::invalid_argument("cq_push: state side does not match channel dim_in");
    }
    pushed.push_back(apply(ch, DensityMatrix(s.matrix(), {s.side()})));
  }
  return CQEnsemble(e.probs, std::move(pushed));
}

double holevo_chi(const CQEnsemble& e, Tolerance tol) {
  Matrix avg = Matrix::Zero(e.states.front().side(), e.states.front().side());
  double conditional = 0.0;
  for (std::size_t x = 0; x < e.probs.size(); ++x) {
    if (e.probs[x] <= 0.0) continue;
    avg += e.probs[x] * e.states[x].matrix();
    conditional += e.probs[x] * von_neumann_entropy(e.states[x], tol);
  }
  return entropy_of_spectrum(hermitian_eigenvalues(avg, tol), tol) - conditional;
}

DensityMatrix cq_state(const CQEnsemble& e) {
  const Index n = static_cast<Index>(e.probs.size());
  const Index s = e.states.front().side();
  Matrix out = Matrix::Zero(n * s, n * s);
  for (Index x = 0; x < n; ++x) {
    out.block(x * s, x * s, s, s) = e.probs[x] * e.states[x].matrix();
  }
  Dims dims{n};
  dims.insert(dims.end(), e.states.front().dims().begin(), e.states.front().dims().end());
  return DensityMatrix(std::move(out), std::move(dims));
}

InfoValue private_information_value(const KrausChannel& ch, const CQEnsemble& e,
                                    Tolerance tol) {
  const double chi_b = holevo_chi(cq_push(ch, e), tol);
  const double chi_e = holevo_chi(cq_push(complementary(ch), e), tol);
  InfoValue result;
  result.value = chi_b - chi_e;
  result.components["holevo_output"] = chi_b;
  result.components["holevo_environment"] = chi_e;
  return result;
}

CQEnsemble helper_push(const std::vector<HelperIsometry>& isos, const CQEnsemble& e,
                       const DensityMatrix& eta, Tolerance tol) {
  std::vector<DensityMatrix> pushed;
  pushed.reserve(e.states.size());
  for (const DensityMatrix& s : e.states) {
    pushed.push_back(helper_apply_conditional(isos, s, eta, tol));
  }
  return CQEnsemble(e.probs, std::move(pushed));
}

InfoValue lower_bound_search(Objective objective, const KrausChannel& ch, int restarts,
                             std::uint64_t seed, Tolerance tol) {
  if (restarts < 1) throw std::invalid_argument("lower_bound_search: restarts must be >= 1");
  const Index din = ch.dim_in();

  auto evaluate_state = [&](const Vector& amplitudes) {
    const PureState phi(amplitudes, {din, din});
    return coherent_information(ch, phi, tol).value;
  };
  auto evaluate_ensemble = [&](const CQEnsemble& e) {
    return objective == Objective::kHolevo ? holevo_chi(cq_push(ch, e), tol)
                                           : private_information_value(ch, e, tol).value;
  };

  std::vector<double> values;
  if (objective == Objective::kCoherent) {
    values.push_back(evaluate_state(max_entangled(din).amplitudes()));
    Vector product = Vector::Zero(din * din);
    product(0) = 1.0;
    values.push_back(evaluate_state(product));
    for (int r = 0; r < restarts; ++r) {
      std::mt19937_64 rng(detail::derive_seed(seed, r));
      values.push_back(evaluate_state(random_pure_vector(din * din, rng)));
    }
  } else {
    std::vector<double> uniform(din, 1.0 / static_cast<double>(din));
    std::vector<DensityMatrix> basis;
    for (Index i = 0; i < din; ++i) {
      Matrix proj = Matrix::Zero(din, din);
      proj(i, i) = 1.0;
      basis.emplace_back(std::move(proj), Dims{din});
    }
    values.push_back(evaluate_ensemble(CQEnsemble(uniform, basis)));
    values.push_back(evaluate_ensemble(CQEnsemble({1.0}, {basis.front()})));
    for (int r = 0; r < restarts; ++r) {
      std::mt19937_64 rng(detail::derive_seed(seed, r));
      values.push_back(evaluate_ensemble(random_rank1_ensemble(din, rng)));
    }
  }

  const auto best = std::max_element(values.begin(), values.end());
  InfoValue result;
  result.value = *best;
  result.components["candidates"] = static_cast<double>(values.size());
  result.components["best_candidate"] = static_cast<double>(best - values.begin());
  return result;
}

}  // namespace qcap
