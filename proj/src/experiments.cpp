#include "qcap/experiments.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qcap {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
};

Stats stats_of(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  s.min = xs.front();
  for (double x : xs) {
    sum += x;
    s.min = std::min(s.min, x);
  }
  s.mean = sum / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

Index isqrt_exact(Index n, const char* what) {
  const auto r = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (r * r != n) {
    throw std::invalid_argument(std::string(what) + ": dimension " + std::to_string(n) +
                                " is not a perfect square");
  }
  return r;
}

}  // namespace

bool report_pass(const ExperimentReport& report) {
  for (const auto& [label, err] : report.abs_error) {
    if (!(err <= report.atol)) return false;
  }
  return true;
}

PureState build_private_input(Index d) {
  if (d < 2) throw std::invalid_argument("build_private_input: d must be >= 2");
  const Vector pair = max_entangled(d).amplitudes();
  // Product order (A1, D1, C1, C2, A2, D2); rewire to (A1, A2, C1, D1, C2, D2).
  const Vector product = kron_vec(kron_vec(pair, pair), pair);
  const PureState raw(product, {d, d, d, d, d, d});
  return permute_systems(raw, {0, 4, 2, 1, 3, 5});
}

double two_use_coherent_information(const KrausChannel& use1, const KrausChannel& use2,
                                    const PureState& input, Tolerance tol) {
  if (input.dims().size() != 6) {
    throw std::invalid_argument("two_use_coherent_information: expected six registers");
  }
  detail::VectorState state{{input.amplitudes()}, input.dims()};
  state = detail::apply_to_vectors(use1, state, {2, 3});
  state = detail::apply_to_vectors(use2, state, {3, 4});

  const Index ref_dim = state.dims[0] * state.dims[1];
  const Index out_dim = state.dims[2] * state.dims[3];
  const double h_joint = detail::entropy_of_vector_mixture(state.vecs, tol);
  const Matrix rho_b = detail::marginal_of_vector_mixture(state.vecs, ref_dim, out_dim);
  const double h_out = entropy_of_spectrum(hermitian_eigenvalues(rho_b, tol), tol);
  return h_out - h_joint;
}

InfoValue two_use_coherent_information_blockwise(const KrausChannel& ch,
                                                 const PureState& input, Tolerance tol) {
  const std::vector<FlaggedBranch> leaves = flatten_branches(ch);
  InfoValue result;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    for (std::size_t j = 0; j < leaves.size(); ++j) {
      const double w = leaves[i].probability * leaves[j].probability;
      const std::string key = std::to_string(i) + "_" + std::to_string(j);
      if (w <= 0.0) {
        result.components["weight_" + key] = w;
        continue;
      }
      const double q_ij =
          two_use_coherent_information(leaves[i].channel, leaves[j].channel, input, tol);
      result.components["pair_" + key] = q_ij;
      result.components["weight_" + key] = w;
      result.value += w * q_ij;
    }
  }
  return result;
}

ExperimentReport private_experiment(const PrivateParams& params) {
  const auto start = Clock::now();
  if (params.d < 2) throw std::invalid_argument("private_experiment: d must be >= 2");
  if (params.q < 0.0 || params.q > 1.0 || params.p < 0.0 || params.p > 1.0) {
    throw std::invalid_argument("private_experiment: q and p must lie in [0, 1]");
  }
  const Index d = params.d;
  const double q = params.q;
  const double p = params.p;
  const int n = params.n_samples;
  const double log_d = std::log2(static_cast<double>(d));
  const Tolerance tol = params.tol;

  const PureState input = build_private_input(d);
  const KrausChannel eras = erasure(d * d, p);
  const KrausChannel deph = dephasing_channel(d);

  std::vector<KrausChannel> rockets;
  rockets.reserve(n);
  for (int k = 0; k < n; ++k) {
    rockets.push_back(rocket_conditional(
        d, haar_unitary(d, detail::derive_seed(params.seed, 2 * k)),
        haar_unitary(d, detail::derive_seed(params.seed, 2 * k + 1))));
  }

  const double ee = two_use_coherent_information(eras, eras, input, tol);
  std::vector<double> er, re, rr, rr_dephased;
  for (int k = 0; k < n; ++k) {
    er.push_back(two_use_coherent_information(eras, rockets[k], input, tol));
    re.push_back(two_use_coherent_information(rockets[k], eras, input, tol));
  }
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      rr.push_back(two_use_coherent_information(rockets[k], rockets[l], input, tol));
      rr_dephased.push_back(two_use_coherent_information(
          compose(deph, rockets[k]), compose(deph, rockets[l]), input, tol));
    }
  }
  const Stats er_s = stats_of(er);
  const Stats re_s = stats_of(re);
  const Stats rr_s = stats_of(rr);
  double rr_dephased_max_abs = 0.0;
  for (double v : rr_dephased) rr_dephased_max_abs = std::max(rr_dephased_max_abs, std::abs(v));

  // Composite two-use coherent information, assembled blockwise over the
  // leaf-branch pairs of the q : (1-q)/n mixture.
  const double w_r = (1.0 - q) / static_cast<double>(n);
  double composite = q * q * ee;
  for (int k = 0; k < n; ++k) composite += q * w_r * (er[k] + re[k]);
  for (std::size_t i = 0; i < rr.size(); ++i) composite += w_r * w_r * rr[i];

  const double ee_target = (1.0 - 2.0 * p) * 2.0 * log_d;
  const double mixed_target = (2.0 - 3.0 * p) * log_d;
  const double composite_formula = 2.0 * q * ((1.0 - q) * (2.0 - 3.0 * p) + q * (1.0 - 2.0 * p)) * log_d;
  const double composite_with_rr = composite_formula + (1.0 - q) * (1.0 - q) * rr_s.mean;
  const double achievable = composite / 2.0;
  const double converse =
      q * std::max(0.0, (1.0 - 2.0 * p) * 2.0 * log_d) + 2.0 * (1.0 - q);
  const double delta_asym = region_delta(q, p);

  ExperimentReport report;
  report.name = "verify-private";
  report.atol = tol.atol;
  report.params = {{"d", static_cast<double>(d)},
                   {"q", q},
                   {"p", p},
                   {"n_samples", static_cast<double>(n)},
                   {"seed", static_cast<double>(params.seed)},
                   {"atol", tol.atol}};

  report.analytic = {{"ee", ee_target},
                     {"er", mixed_target},
                     {"re", mixed_target},
                     {"rr_dephased", 0.0},
                     {"q1_composite", composite_formula},
                     {"q1_composite_with_measured_rr", composite_with_rr},
                     {"achievable", composite_formula / 2.0},
                     {"converse", converse},
                     {"delta_asymptotic", delta_asym}};

  const bool nonconvex_finite = achievable > converse + tol.atol;
  const bool nonconvex_asymptotic = delta_asym > tol.atol;
  report.numeric = {{"ee", ee},
                    {"er_mean", er_s.mean},
                    {"er_std", er_s.stddev},
                    {"re_mean", re_s.mean},
                    {"re_std", re_s.stddev},
                    {"rr_mean", rr_s.mean},
                    {"rr_std", rr_s.stddev},
                    {"rr_min", rr_s.min},
                    {"rr_dephased_max_abs", rr_dephased_max_abs},
                    {"q1_composite", composite},
                    {"achievable", achievable},
                    {"nonconvex_finite", nonconvex_finite ? 1.0 : 0.0},
                    {"nonconvex_asymptotic", nonconvex_asymptotic ? 1.0 : 0.0},
                    {"nonconvex_asymptotic_only",
                     (nonconvex_asymptotic && !nonconvex_finite) ? 1.0 : 0.0}};

  // The raw rocket-rocket branch is only known to be nonnegative, and it
  // genuinely varies with the sampled unitary pairs; it enters the composite
  // target as measured rather than as an equality check of its own.
  report.abs_error = {{"ee", std::abs(ee - ee_target)},
                      {"er", std::abs(er_s.mean - mixed_target)},
                      {"re", std::abs(re_s.mean - mixed_target)},
                      {"er_sample_std", er_s.stddev},
                      {"re_sample_std", re_s.stddev},
                      {"er_re_symmetry", std::abs(er_s.mean - re_s.mean)},
                      {"rr_dephased", rr_dephased_max_abs},
                      {"rr_nonneg_violation", std::max(0.0, -rr_s.min)},
                      {"q1_composite", std::abs(composite - composite_with_rr)}};

  report.pass = report_pass(report);
  report.runtime_ms = elapsed_ms(start);
  return report;
}

double region_delta(double q, double p, std::optional<Index> finite_d) {
  const double achievable = q * ((1.0 - q) * (2.0 - 3.0 * p) + q * (1.0 - 2.0 * p));
  double converse = q * std::max(0.0, (1.0 - 2.0 * p) * 2.0);
  if (finite_d) {
    converse += 2.0 * (1.0 - q) / std::log2(static_cast<double>(*finite_d));
  }
  return achievable - converse;
}

std::vector<RegionPoint> region_scan(int grid_n, std::optional<Index> finite_d) {
  if (grid_n < 2) throw std::invalid_argument("region_scan: grid_n must be >= 2");
  std::vector<RegionPoint> points;
  points.reserve(static_cast<std::size_t>(grid_n) * grid_n);
  const double step = 1.0 / static_cast<double>(grid_n - 1);
  for (int i = 0; i < grid_n; ++i) {
    const double q = static_cast<double>(i) * step;
    for (int j = 0; j < grid_n; ++j) {
      const double p = static_cast<double>(j) * step;
      points.push_back({q, p, region_delta(q, p, finite_d)});
    }
  }
  return points;
}

CQEnsemble build_env_input(Index d) {
  if (d < 2) throw std::invalid_argument("build_env_input: d must be >= 2");
  const Index d2 = d * d;
  std::vector<double> probs(d2, 1.0 / static_cast<double>(d2));
  std::vector<DensityMatrix> states;
  states.reserve(d2);
  for (Index x = 0; x < d2; ++x) {
    Matrix proj = Matrix::Zero(d2, d2);
    proj(x, x) = 1.0;
    Matrix both = kron(proj, proj);
    states.emplace_back(std::move(both), Dims{d2, d2});
  }
  return CQEnsemble(std::move(probs), std::move(states));
}

ExperimentReport env_experiment(const EnvParams& params) {
  const auto start = Clock::now();
  if (params.d < 2) throw std::invalid_argument("env_experiment: d must be >= 2");
  if (params.p < 0.0 || params.p > 1.0) {
    throw std::invalid_argument("env_experiment: p must lie in [0, 1]");
  }
  const Index d = params.d;
  const double p = params.p;
  const double log_d = std::log2(static_cast<double>(d));
  const Tolerance tol = params.tol;
  const bool odd = (d % 2) == 1;

  const HelperIsometry n1 = with_flag(controlled_weyl_isometry(d), 0);
  const HelperIsometry n2 = with_flag(swap_isometry(d), 1);
  const CQEnsemble input = build_env_input(d);
  const DensityMatrix eta = to_density_matrix(max_entangled(d));

  auto branch_mi = [&](const HelperIsometry& a, const HelperIsometry& b) {
    return holevo_chi(helper_push({a, b}, input, eta, tol), tol);
  };
  const double i_11 = branch_mi(n1, n1);
  const double i_12 = branch_mi(n1, n2);
  const double i_21 = branch_mi(n2, n1);
  const double i_22 = branch_mi(n2, n2);

  const double rate =
      0.5 * (p * p * i_11 + p * (1.0 - p) * (i_12 + i_21) + (1.0 - p) * (1.0 - p) * i_22);
  const double converse = p * log_d;

  const double i_11_target = odd ? log_d : std::log2(static_cast<double>(d) / 2.0);
  const double rate_target = (2.0 * p - 1.5 * p * p) * log_d;

  ExperimentReport report;
  report.name = "verify-env";
  report.atol = tol.atol;
  report.params = {{"d", static_cast<double>(d)}, {"p", p}, {"atol", tol.atol}};
  report.analytic = {{"i_n1n1", i_11_target},
                     {"i_n1n2", 2.0 * log_d},
                     {"i_n2n1", 2.0 * log_d},
                     {"i_n2n2", 0.0},
                     {"converse", converse}};
  if (odd) report.analytic["rate"] = rate_target;

  const bool nonconvex = rate > converse + tol.atol;
  report.numeric = {{"i_n1n1", i_11},
                    {"i_n1n2", i_12},
                    {"i_n2n1", i_21},
                    {"i_n2n2", i_22},
                    {"rate", rate},
                    {"nonconvex", nonconvex ? 1.0 : 0.0}};

  report.abs_error = {{"i_n1n1", std::abs(i_11 - i_11_target)},
                      {"i_n1n2", std::abs(i_12 - 2.0 * log_d)},
                      {"i_n2n1", std::abs(i_21 - 2.0 * log_d)},
                      {"i_n2n2", std::abs(i_22)}};
  if (odd) report.abs_error["rate"] = std::abs(rate - rate_target);

  report.pass = report_pass(report);
  report.runtime_ms = elapsed_ms(start);
  return report;
}

Vector bell_state(Index d, Index j) {
  if (d < 2) throw std::invalid_argument("bell_state: d must be >= 2");
  const double theta = 2.0 * std::numbers::pi / static_cast<double>(d);
  Vector v = Vector::Zero(d * d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (Index i = 0; i < d; ++i) {
    v(i * d + i) = amp * std::polar(1.0, theta * static_cast<double>(2 * j * i));
  }
  return v;
}

BellGram bell_gram(Index d) {
  BellGram gram;
  gram.overlaps.resize(d, d);
  std::vector<Vector> states;
  states.reserve(d);
  for (Index j = 0; j < d; ++j) states.push_back(bell_state(d, j));

  for (Index a = 0; a < d; ++a) {
    for (Index b = 0; b < d; ++b) {
      gram.overlaps(a, b) = std::abs(states[a].dot(states[b]));
      const bool same = ((2 * (b - a)) % d + d) % d == 0;
      gram.max_rule_deviation =
          std::max(gram.max_rule_deviation, std::abs(gram.overlaps(a, b) - (same ? 1.0 : 0.0)));
    }
  }
  for (Index j = 0; j < d; ++j) {
    bool is_new = true;
    for (Index k = 0; k < j; ++k) {
      if (gram.overlaps(k, j) > 0.5) is_new = false;
    }
    if (is_new) ++gram.distinct;
  }
  return gram;
}

double nonconvexity_functional(const BoundEvaluator& bound, const KrausChannel& n,
                               const KrausChannel& m, double p, Tolerance tol) {
  if (!(p > 0.0) || p > 1.0) {
    throw std::invalid_argument("nonconvexity_functional: p must lie in (0, 1]");
  }
  const KrausChannel mixture = flagged_mixture({{p, n}, {1.0 - p, m}}, tol);
  return (bound(mixture) - (1.0 - p) * bound(m)) / p;
}

BoundEvaluator two_use_coherent_bound(Tolerance tol) {
  return [tol](const KrausChannel& ch) {
    const Index d = isqrt_exact(ch.dim_in(), "two_use_coherent_bound");
    const PureState input = build_private_input(d);
    return two_use_coherent_information_blockwise(ch, input, tol).value / 2.0;
  };
}

BoundEvaluator fixed_input_coherent_bound(PureState phi, Tolerance tol) {
  return [phi = std::move(phi), tol](const KrausChannel& ch) {
    return coherent_information(ch, phi, tol).value;
  };
}

}  // namespace qcap
