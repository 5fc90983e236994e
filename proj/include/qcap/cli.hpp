#pragma once

#include <cstdint>
#include <string>

#include "qcap/experiments.hpp"
#include "qcap/qmat.hpp"

// Command-line front end: parses flags into a RunConfig, runs the matching
// experiment, and emits the artifact (JSON report, CSV table, or SVG heatmap)
// to a file or stdout. Exit codes: 0 all checks pass, 1 check failure,
// 2 usage error, 3 I/O error.

namespace qcap {

struct RunConfig {
  enum class Command { kVerifyPrivate, kVerifyEnv, kScanRegion, kBellGram, kFunctional };
  enum class Format { kJson, kCsv, kSvg };

  Command command = Command::kVerifyPrivate;
  Format format = Format::kJson;

  Index d = 2;
  double q = 0.5;
  double p = 0.5;
  int samples = 4;
  std::uint64_t seed = 42;
  int grid = 101;
  bool asymptotic = true;
  std::string evaluator = "two-use";
  double atol = 1e-7;
  std::string out_path;  // empty writes to stdout
};

/// 0 when every check passed, 1 otherwise.
int exit_code_for(const ExperimentReport& report);

int run(const RunConfig& config);

int cli_main(int argc, const char* const* argv);

}  // namespace qcap
