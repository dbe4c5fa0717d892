// gocor command-line tool: gradcheck, solve, bench, export-heatmap, oracle.

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gocor/cli.hpp"

namespace {

std::string flag_name(const char* key) {
  std::string s = key;
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return "--" + s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GOCor correlation: unrolled optimization of correspondence volumes"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> assignments;
  bool serial = false;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", assignments, "override one key: --set key=value (repeatable)");
  app.add_flag("--serial", serial, "single-threaded kernels");

  // One flag per configuration key; these take precedence over the file
  // and over --set.
  std::map<std::string, std::string> named;
  for (const gocor::ConfigKey& k : gocor::config_keys()) {
    if (std::string(k.name) == "serial") continue;
    app.add_option(flag_name(k.name), named[k.name], std::string(k.help) + " [" + k.default_value + "]")
        ->group("Configuration");
  }

  auto* gradcheck = app.add_subcommand("gradcheck", "compare analytic gradients with central differences");
  gocor::cli::GradcheckOptions gradcheck_opts;
  gradcheck->add_flag("--corrupt-gradient", gradcheck_opts.corrupt_gradient,
                      "perturb the analytic gradient (the check must then fail)");

  auto* solve = app.add_subcommand("solve", "optimize the filter map and write the correspondence volume");
  gocor::cli::SolveOptions solve_opts;
  std::string trace_path;
  solve->add_option("--ref", solve_opts.reference, "reference features (FMAP)")->required();
  solve->add_option("--query", solve_opts.query, "query features (FMAP)")->required();
  solve->add_option("--out", solve_opts.volume_out, "output volume (CVOL)")->required();
  solve->add_option("--trace", trace_path, "loss trace (JSON)");

  auto* bench = app.add_subcommand("bench", "disambiguation experiment over seeded synthetic scenes");
  gocor::cli::BenchOptions bench_opts;
  std::string bench_out;
  bench->add_flag("--timings", bench_opts.timings, "add wall-clock phase timings to the report");
  bench->add_option("--report", bench_out, "write the JSON report here instead of stdout");

  auto* heatmap = app.add_subcommand("export-heatmap", "render one slice of a volume as a PGM image");
  gocor::cli::HeatmapOptions heatmap_opts;
  std::string csv_path;
  heatmap->add_option("volume", heatmap_opts.volume, "input volume (CVOL)")->required();
  heatmap->add_option("i", heatmap_opts.i, "probe row")->required();
  heatmap->add_option("j", heatmap_opts.j, "probe column")->required();
  heatmap->add_option("out", heatmap_opts.pgm_out, "output image (PGM)")->required();
  heatmap->add_option("--csv", csv_path, "also write the raw slice as CSV");

  auto* oracle = app.add_subcommand("oracle", "run the oracle-equivalence suite");

  CLI11_PARSE(app, argc, argv);

  try {
    gocor::RunConfig cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const std::string& a : assignments) cfg.set_assignment(a);
    for (const auto& [key, value] : named) {
      if (app.count(flag_name(key.c_str())) > 0) cfg.set(key, value);
    }
    if (serial) cfg.set("serial", "true");

    if (*gradcheck) return gocor::cli::cmd_gradcheck(cfg, gradcheck_opts, std::cout, std::cerr);
    if (*solve) {
      if (!trace_path.empty()) solve_opts.trace_out = trace_path;
      return gocor::cli::cmd_solve(cfg, solve_opts, std::cout, std::cerr);
    }
    if (*bench) {
      if (bench_out.empty()) return gocor::cli::cmd_bench(cfg, bench_opts, std::cout, std::cerr);
      std::ofstream file(bench_out, std::ios::binary | std::ios::trunc);
      if (!file) throw std::runtime_error("cannot open " + bench_out + " for writing");
      return gocor::cli::cmd_bench(cfg, bench_opts, file, std::cerr);
    }
    if (*heatmap) {
      if (!csv_path.empty()) heatmap_opts.csv_out = csv_path;
      return gocor::cli::cmd_export_heatmap(heatmap_opts, std::cout, std::cerr);
    }
    if (*oracle) return gocor::cli::cmd_oracle(cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
