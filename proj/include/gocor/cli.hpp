#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "gocor/config.hpp"

// Subcommand implementations. Each returns the process exit status and
// writes its report to `out`; warnings and timings go to `err`.
namespace gocor::cli {

struct GradcheckOptions {
  /// Test hook: perturbs the analytic gradient so the check must fail.
  bool corrupt_gradient = false;
};

int cmd_gradcheck(const RunConfig& cfg, const GradcheckOptions& opts, std::ostream& out, std::ostream& err);

struct SolveOptions {
  std::filesystem::path reference;
  std::filesystem::path query;
  std::filesystem::path volume_out;
  std::optional<std::filesystem::path> trace_out;  // JSON loss trace
};

int cmd_solve(const RunConfig& cfg, const SolveOptions& opts, std::ostream& out, std::ostream& err);

struct BenchOptions {
  /// Adds wall-clock phase timings to the report. Off by default so the
  /// report is byte-reproducible.
  bool timings = false;
};

int cmd_bench(const RunConfig& cfg, const BenchOptions& opts, std::ostream& out, std::ostream& err);

struct HeatmapOptions {
  std::filesystem::path volume;
  int i = 0;
  int j = 0;
  std::filesystem::path pgm_out;
  std::optional<std::filesystem::path> csv_out;
};

int cmd_export_heatmap(const HeatmapOptions& opts, std::ostream& out, std::ostream& err);

/// Oracle-equivalence suite: kernels against the brute-force references.
int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace gocor::cli
