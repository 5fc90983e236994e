#include "qcap/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "qcap/experiments.hpp"
#include "qcap/report.hpp"

namespace qcap {

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

int emit(const std::string& payload, const std::string& out_path) {
  if (out_path.empty()) {
    std::fwrite(payload.data(), 1, payload.size(), stdout);
    return kExitPass;
  }
  try {
    write_text_atomic(out_path, payload);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitPass;
}

int emit_report(const ExperimentReport& report, const RunConfig& config) {
  std::fprintf(stderr, "runtime_ms=%.3f\n", report.runtime_ms);
  const int io = emit(render_json(report), config.out_path);
  if (io != kExitPass) return io;
  return exit_code_for(report);
}

ExperimentReport functional_report(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Tolerance tol{config.atol};
  const KrausChannel flagged_erasure = erasure(config.d * config.d, config.p);
  const KrausChannel flagged_rocket = rocket_sampled(config.d, config.samples, config.seed);

  BoundEvaluator bound;
  if (config.evaluator == "two-use") {
    bound = two_use_coherent_bound(tol);
  } else if (config.evaluator == "fixed-input") {
    bound = fixed_input_coherent_bound(max_entangled(config.d * config.d), tol);
  } else {
    throw CLI::ValidationError("--evaluator", "must be two-use or fixed-input");
  }

  const double reference = bound(flagged_erasure);
  const double contextual = bound(flagged_rocket);
  const double value =
      nonconvexity_functional(bound, flagged_erasure, flagged_rocket, config.q, tol);

  ExperimentReport report;
  report.name = "functional";
  report.atol = config.atol;
  report.params = {{"d", static_cast<double>(config.d)},
                   {"q", config.q},
                   {"p", config.p},
                   {"n_samples", static_cast<double>(config.samples)},
                   {"seed", static_cast<double>(config.seed)},
                   {"atol", config.atol}};
  report.params_text = {{"evaluator", config.evaluator}};
  report.analytic = {{"reference_bound", reference}};
  report.numeric = {{"functional", value},
                    {"contextual_bound", contextual},
                    {"exceeds_reference", value > reference + config.atol ? 1.0 : 0.0}};
  if (config.q == 1.0) {
    // G reduces to T(N) exactly at mixing weight one.
    report.abs_error["identity_p1"] = std::abs(value - reference);
  }
  report.pass = report_pass(report);
  report.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

ExperimentReport bell_report(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const BellGram gram = bell_gram(config.d);
  const int expected_distinct =
      (config.d % 2 == 1) ? static_cast<int>(config.d) : static_cast<int>(config.d / 2);

  ExperimentReport report;
  report.name = "bell-gram";
  report.atol = config.atol;
  report.params = {{"d", static_cast<double>(config.d)}, {"atol", config.atol}};
  report.analytic = {{"distinct", static_cast<double>(expected_distinct)}};
  report.numeric = {{"distinct", static_cast<double>(gram.distinct)},
                    {"max_rule_deviation", gram.max_rule_deviation}};
  for (Index a = 0; a < gram.overlaps.rows(); ++a) {
    for (Index b = 0; b < gram.overlaps.cols(); ++b) {
      report.numeric["overlap_" + std::to_string(a) + "_" + std::to_string(b)] =
          gram.overlaps(a, b);
    }
  }
  report.abs_error = {{"gram_rule", gram.max_rule_deviation},
                      {"distinct", std::abs(static_cast<double>(gram.distinct - expected_distinct))}};
  report.pass = report_pass(report);
  report.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

}  // namespace

int exit_code_for(const ExperimentReport& report) {
  return report.pass ? kExitPass : kExitCheckFailure;
}

int run(const RunConfig& config) {
  switch (config.command) {
    case RunConfig::Command::kVerifyPrivate: {
      PrivateParams params;
      params.d = config.d;
      params.q = config.q;
      params.p = config.p;
      params.n_samples = config.samples;
      params.seed = config.seed;
      params.tol = Tolerance{config.atol};
      return emit_report(private_experiment(params), config);
    }
    case RunConfig::Command::kVerifyEnv: {
      EnvParams params;
      params.d = config.d;
      params.p = config.p;
      params.tol = Tolerance{config.atol};
      return emit_report(env_experiment(params), config);
    }
    case RunConfig::Command::kScanRegion: {
      const auto start = std::chrono::steady_clock::now();
      std::optional<Index> finite_d;
      if (!config.asymptotic) finite_d = config.d;
      const std::vector<RegionPoint> points = region_scan(config.grid, finite_d);
      const std::string payload = config.format == RunConfig::Format::kSvg
                                      ? render_region_svg(points, config.grid)
                                      : render_region_csv(points);
      std::fprintf(stderr, "runtime_ms=%.3f\n",
                   std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             start)
                       .count());
      return emit(payload, config.out_path);
    }
    case RunConfig::Command::kBellGram:
      return emit_report(bell_report(config), config);
    case RunConfig::Command::kFunctional:
      return emit_report(functional_report(config), config);
  }
  return kExitUsage;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Desk-scale checks of channel-capacity non-convexity constructions"};
  app.require_subcommand(1);

  RunConfig config;
  if (const char* env_atol = std::getenv("QCAP_ATOL")) {
    try {
      config.atol = std::stod(env_atol);
    } catch (const std::exception&) {
      std::fprintf(stderr, "error: QCAP_ATOL is not a number\n");
      return kExitUsage;
    }
    if (!(config.atol > 0.0)) {
      std::fprintf(stderr, "error: QCAP_ATOL must be positive\n");
      return kExitUsage;
    }
  }

  std::string format = "json";
  std::string mode = "asymptotic";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--atol", config.atol, "absolute tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--out", config.out_path, "output path (default stdout)");
  };

  CLI::App* vp = app.add_subcommand("verify-private", "two-use erasure/rocket branch checks");
  vp->add_option("--d", config.d, "local dimension")->check(CLI::Range(Index{2}, Index{3}));
  vp->add_option("--q", config.q, "erasure-branch weight")->check(CLI::Range(0.0, 1.0));
  vp->add_option("--p", config.p, "erasure probability")->check(CLI::Range(0.0, 1.0));
  vp->add_option("--samples", config.samples, "rocket unitary samples")
      ->check(CLI::Range(1, 64));
  vp->add_option("--seed", config.seed, "sampling seed");
  add_common(vp);

  CLI::App* ve = app.add_subcommand("verify-env", "environment-assisted branch checks");
  ve->add_option("--d", config.d, "local dimension")->check(CLI::Range(Index{2}, Index{5}));
  ve->add_option("--p", config.p, "controlled-Weyl branch weight")->check(CLI::Range(0.0, 1.0));
  add_common(ve);

  CLI::App* sr = app.add_subcommand("scan-region", "achievable-minus-converse surface");
  sr->add_option("--grid", config.grid, "grid points per axis")->check(CLI::Range(2, 4096));
  sr->add_option("--mode", mode, "asymptotic or finite")
      ->check(CLI::IsMember({"asymptotic", "finite"}));
  sr->add_option("--d", config.d, "dimension for finite mode")
      ->check(CLI::Range(Index{2}, Index{1024}));
  sr->add_option("--format", format, "csv or svg")->check(CLI::IsMember({"csv", "svg"}));
  add_common(sr);

  CLI::App* bg = app.add_subcommand("bell-gram", "doubly-shifted Bell-state Gram matrix");
  bg->add_option("--d", config.d, "local dimension")->check(CLI::Range(Index{2}, Index{64}));
  add_common(bg);

  CLI::App* fn = app.add_subcommand("functional", "non-convexity functional evaluation");
  fn->add_option("--d", config.d, "local dimension")->check(CLI::Range(Index{2}, Index{3}));
  fn->add_option("--q", config.q, "mixing weight of the erasure branch")
      ->check(CLI::Range(0.0, 1.0));
  fn->add_option("--p", config.p, "erasure probability")->check(CLI::Range(0.0, 1.0));
  fn->add_option("--samples", config.samples, "rocket unitary samples")
      ->check(CLI::Range(1, 64));
  fn->add_option("--seed", config.seed, "sampling seed");
  fn->add_option("--evaluator", config.evaluator, "two-use or fixed-input")
      ->check(CLI::IsMember({"two-use", "fixed-input"}));
  add_common(fn);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (vp->parsed()) config.command = RunConfig::Command::kVerifyPrivate;
  if (ve->parsed()) config.command = RunConfig::Command::kVerifyEnv;
  if (sr->parsed()) {
    config.command = RunConfig::Command::kScanRegion;
    config.asymptotic = (mode == "asymptotic");
    config.format = format == "svg" ? RunConfig::Format::kSvg : RunConfig::Format::kCsv;
  }
  if (bg->parsed()) config.command = RunConfig::Command::kBellGram;
  if (fn->parsed()) config.command = RunConfig::Command::kFunctional;

  try {
    return run(config);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
}

}  // namespace qcap
