#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qcap/cli.hpp"
#include "qcap/experiments.hpp"
#include "qcap/infomeasures.hpp"
#include "qcap/report.hpp"
#include "support.hpp"

// Acceptance suite: every criterion pinned to its stated tolerance, one
// printed pass/fail line per criterion.

using namespace qcap;

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Criterion {
  bool ok = true;
  bool expect(bool condition) {
    ok = ok && condition;
    CHECK(condition);
    return condition;
  }
  void finish(int number, const char* label) const {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", number, label);
    std::fflush(stdout);
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<KrausChannel> sampled_rockets(Index d, int n, std::uint64_t seed) {
  std::vector<KrausChannel> rockets;
  for (int k = 0; k < n; ++k) {
    rockets.push_back(rocket_conditional(
        d, haar_unitary(d, qcap::detail::derive_seed(seed, 2 * k)),
        haar_unitary(d, qcap::detail::derive_seed(seed, 2 * k + 1))));
  }
  return rockets;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("criterion 1: erasure branch closed form") {
  Criterion c;
  const auto start = Clock::now();
  for (Index d : {Index{2}, Index{3}}) {
    const PureState input = build_private_input(d);
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const KrausChannel e = erasure(d * d, p);
      const double numeric = two_use_coherent_information(e, e, input);
      const double target = (1.0 - 2.0 * p) * 2.0 * std::log2(double(d));
      c.expect(std::abs(numeric - target) <= 1e-6);
    }
  }
  c.expect(seconds_since(start) < 10.0);
  c.finish(1, "erasure branch matches (1-2p)*2*log2(d) at 1e-6, under 10 s");
}

TEST_CASE("criterion 2: rocket-erasure branch closed form") {
  Criterion c;
  for (Index d : {Index{2}, Index{3}}) {
    const PureState input = build_private_input(d);
    const auto rockets = sampled_rockets(d, 4, 42);
    for (double p : {0.0, 0.5, 1.0}) {
      const KrausChannel e = erasure(d * d, p);
      const double target = (2.0 - 3.0 * p) * std::log2(double(d));
      std::vector<double> values;
      for (const KrausChannel& rocket : rockets) {
        values.push_back(two_use_coherent_information(rocket, e, input));
        c.expect(std::abs(values.back() - target) <= 1e-6);
      }
      double mean = 0.0;
      for (double v : values) mean += v / values.size();
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean) / values.size();
      c.expect(std::sqrt(var) < 1e-7);
    }
  }
  c.finish(2, "rocket(x)erasure matches (2-3p)*log2(d) at 1e-6 with sample std < 1e-7");
}

TEST_CASE("criterion 3: dephased double rocket") {
  Criterion c;
  for (Index d : {Index{2}, Index{3}}) {
    const PureState input = build_private_input(d);
    const auto rockets = sampled_rockets(d, 4, 42);
    const KrausChannel deph = dephasing_channel(d);
    for (std::size_t k = 0; k < rockets.size(); ++k) {
      for (std::size_t l = 0; l < rockets.size(); ++l) {
        const double dephased = two_use_coherent_information(
            compose(deph, rockets[k]), compose(deph, rockets[l]), input);
        c.expect(std::abs(dephased) <= 1e-6);
        const double raw = two_use_coherent_information(rockets[k], rockets[l], input);
        c.expect(raw >= -1e-6);
      }
    }
  }
  c.finish(3, "dephased rocket pair sits at 0 within 1e-6; raw value >= -1e-6");
}

TEST_CASE("criterion 4: composite two-use value on a 5x5 grid") {
  Criterion c;
  for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      PrivateParams params;
      params.d = 2;
      params.q = q;
      params.p = p;
      params.n_samples = 4;
      params.seed = 42;
      const ExperimentReport report = private_experiment(params);
      const double half_numeric = report.numeric.at("q1_composite") / 2.0;
      const double formula = q * ((1.0 - q) * (2.0 - 3.0 * p) + q * (1.0 - 2.0 * p));
      const double rr_as_measured =
          0.5 * (1.0 - q) * (1.0 - q) * report.numeric.at("rr_mean");
      c.expect(std::abs(half_numeric - (formula + rr_as_measured)) <= 1e-6);
      c.expect(report.pass);
    }
  }
  c.finish(4, "half composite equals q((1-q)(2-3p)+q(1-2p)) plus measured RR at 1e-6");
}

TEST_CASE("criterion 5: region scan reproduces the achievable region") {
  Criterion c;

  // Asymptotic surface: exact value and positivity around (0.5, 0.5).
  c.expect(std::abs(region_delta(0.5, 0.5) - 0.125) <= 1e-12);
  for (double dq : {-0.05, 0.0, 0.05}) {
    for (double dp : {-0.05, 0.0, 0.05}) {
      c.expect(region_delta(0.5 + dq, 0.5 + dp) > 0.0);
    }
  }

  // The small-p wedge is closed off by the finite-d converse term.
  for (Index d : {Index{2}, Index{3}}) {
    const auto finite = region_scan(101, d);
    for (const RegionPoint& pt : finite) {
      if (pt.p <= 0.25 + 1e-12) c.expect(pt.delta <= 1e-12);
    }
  }

  // Boundary columns of the asymptotic surface never go positive.
  for (int i = 0; i <= 100; ++i) {
    const double p = i / 100.0;
    c.expect(region_delta(0.0, p) <= 1e-12);
    c.expect(region_delta(1.0, p) <= 1e-12);
  }

  const auto start = Clock::now();
  const auto points = region_scan(101);
  c.expect(points.size() == 101 * 101);
  c.expect(seconds_since(start) < 1.0);
  c.finish(5, "delta(0.5,0.5)=0.125 on a positive patch; p<=0.25 and q in {0,1} stay <= 0");
}

TEST_CASE("criterion 6: environment-assisted branch values") {
  Criterion c;
  const double log3 = std::log2(3.0);
  EnvParams params;
  params.d = 3;
  params.p = 0.5;
  const ExperimentReport at3 = env_experiment(params);
  c.expect(std::abs(at3.numeric.at("i_n2n2") - 0.0) <= 1e-6);
  c.expect(std::abs(at3.numeric.at("i_n1n2") - 2.0 * log3) <= 1e-6);
  c.expect(std::abs(at3.numeric.at("i_n2n1") - 2.0 * log3) <= 1e-6);
  c.expect(std::abs(at3.numeric.at("i_n1n1") - log3) <= 1e-6);

  for (Index d : {Index{2}, Index{4}}) {
    params.d = d;
    const ExperimentReport even = env_experiment(params);
    c.expect(std::abs(even.numeric.at("i_n1n1") - std::log2(double(d) / 2.0)) <= 1e-6);
  }
  c.finish(6, "helper branch I(X;B1B2) values match log d, 2 log d, 0, log(d/2) at 1e-6");
}

TEST_CASE("criterion 7: environment-assisted total rate at d = 3") {
  Criterion c;
  const double log3 = std::log2(3.0);
  for (double p : {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}) {
    EnvParams params;
    params.d = 3;
    params.p = p;
    const ExperimentReport report = env_experiment(params);
    const double target = (2.0 * p - 1.5 * p * p) * log3;
    c.expect(std::abs(report.numeric.at("rate") - target) <= 1e-6);
    const bool expected_flag = p > 0.0 && p < 2.0 / 3.0;
    c.expect(report.numeric.at("nonconvex") == (expected_flag ? 1.0 : 0.0));
  }
  c.finish(7, "rate equals (2p - 1.5p^2) log2(3) at 1e-6; flag true exactly on (0, 2/3)");
}

TEST_CASE("criterion 8: Bell Gram divisibility rule") {
  Criterion c;
  for (Index d : {Index{2}, Index{3}, Index{4}, Index{5}}) {
    c.expect(bell_gram(d).max_rule_deviation <= 1e-8);
  }
  c.finish(8, "Gram entries match the 2(b-a) = 0 mod d rule at 1e-8 for d in {2,3,4,5}");
}

TEST_CASE("criterion 9: property suites over 100 seeded instances") {
  Criterion c;
  const double atol = 1e-7;

  // Channel completeness.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const KrausChannel ch = qcap::testing::random_channel(3, 4, 2, 10000 + seed);
    Matrix sum = Matrix::Zero(3, 3);
    for (const Matrix& k : ch.kraus()) sum += k.adjoint() * k;
    c.expect((sum - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= atol);
  }

  // Entropy bounds.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const DensityMatrix rho = qcap::testing::random_density({2, 3}, 20000 + seed);
    const double h = von_neumann_entropy(rho);
    c.expect(h >= -atol);
    c.expect(h <= std::log2(6.0) + atol);
  }

  // Araki-Lieb and subadditivity.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const DensityMatrix rho = qcap::testing::random_density({2, 3}, 30000 + seed);
    const double h_ab = von_neumann_entropy(rho);
    const double h_a = von_neumann_entropy(partial_trace(rho, {0}));
    const double h_b = von_neumann_entropy(partial_trace(rho, {1}));
    c.expect(h_ab <= h_a + h_b + atol);
    c.expect(h_ab >= std::abs(h_a - h_b) - atol);
  }

  // Blockwise versus dense entropy of flagged outputs.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const KrausChannel b0 = qcap::testing::random_channel(2, 3, 2, 40000 + seed);
    const KrausChannel b1 = qcap::testing::random_channel(2, 2, 2, 50000 + seed);
    const double p0 = 0.25 + 0.5 * ((seed % 10) / 10.0);
    const KrausChannel mix = flagged_mixture({{p0, b0}, {1.0 - p0, b1}});
    const DensityMatrix in = qcap::testing::random_density({2}, 60000 + seed);
    const double dense = von_neumann_entropy(apply(mix, in));
    const double blockwise = -p0 * std::log2(p0) - (1.0 - p0) * std::log2(1.0 - p0) +
                             p0 * von_neumann_entropy(apply(b0, in)) +
                             (1.0 - p0) * von_neumann_entropy(apply(b1, in));
    c.expect(std::abs(dense - blockwise) <= atol);
  }

  // Complementary-channel entropy symmetry on pure inputs.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const KrausChannel ch = qcap::testing::random_channel(3, 3, 3, 70000 + seed);
    const DensityMatrix in =
        to_density_matrix(qcap::testing::random_pure_state({3}, 80000 + seed));
    const double h_b = von_neumann_entropy(apply(ch, in));
    const double h_e = von_neumann_entropy(apply(complementary(ch), in));
    c.expect(std::abs(h_b - h_e) <= atol);
  }

  c.finish(9, "completeness, entropy bounds, Araki-Lieb, flagged blocks, purity: 100 seeds each");
}

TEST_CASE("criterion 10: CLI determinism for fixed seeds") {
  Criterion c;
  const char* cli = std::getenv("QCAP_CLI");
  REQUIRE_MESSAGE(cli != nullptr, "QCAP_CLI must point at the CLI binary");

  const fs::path dir = fs::temp_directory_path() / "qcap_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"verify-private", "verify-private --d 2 --q 0.5 --p 0.5 --samples 4 --seed 42"},
      {"verify-env", "verify-env --d 3 --p 0.5"},
      {"scan-csv", "scan-region --grid 31 --format csv"},
      {"scan-svg", "scan-region --grid 31 --format svg"},
      {"scan-finite", "scan-region --grid 31 --mode finite --d 2"},
      {"bell-gram", "bell-gram --d 5"},
      {"functional",
       "functional --d 2 --q 0.5 --p 0.5 --samples 2 --seed 42 --evaluator two-use"},
  };

  for (const auto& [tag, args] : commands) {
    std::string payloads[2];
    for (int run_idx = 0; run_idx < 2; ++run_idx) {
      const fs::path out = dir / (tag + "_" + std::to_string(run_idx));
      const std::string command = std::string("'") + cli + "' " + args + " --out '" +
                                  out.string() + "' 2>/dev/null";
      const int status = std::system(command.c_str());
      c.expect(WIFEXITED(status) && WEXITSTATUS(status) == 0);
      payloads[run_idx] = slurp(out);
    }
    c.expect(!payloads[0].empty());
    c.expect(payloads[0] == payloads[1]);
  }
  c.finish(10, "every CLI command yields byte-identical payloads across runs");
}
