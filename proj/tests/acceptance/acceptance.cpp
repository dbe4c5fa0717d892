// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every tolerance and instance count is fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "gocor/cli.hpp"
#include "gocor/config.hpp"
#include "gocor/correlation.hpp"
#include "gocor/instances.hpp"
#include "gocor/io.hpp"
#include "gocor/metrics.hpp"
#include "gocor/oracle.hpp"
#include "gocor/reduce.hpp"
#include "gocor/solver.hpp"
#include "gocor/synthbench.hpp"

using namespace gocor;
namespace fs = std::filesystem;

namespace {

constexpr double kAdjointTol = 1e-10;
constexpr double kAdjointBudgetS = 10.0;
constexpr int kAdjointInstances = 100;
constexpr double kGradTol = 1e-5;
constexpr double kGradBudgetS = 60.0;
constexpr double kStepTol = 1e-8;
constexpr int kStepInstances = 50;
constexpr int kDescentSeeds = 100;
constexpr int kDescentIters = 10;
// Slack for round-off once the convex solve has converged, relative to the
// initial loss.
constexpr double kDescentSlack = 1e-12;
constexpr int kOracleSeeds = 50;
constexpr double kUnityTol = 1e-12;
constexpr int kUnitySamples = 1000;
constexpr double kInitTol = 1e-9;
constexpr int kDisambiguationRequired = 18;
constexpr double kDisambiguationMarginTol = 1e-6;
constexpr double kDisambiguationBudgetS = 30.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void run(const char* name, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s (%s; %.2f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double dot_all(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s;
}

Outcome adjoint_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_corr = 0.0;
  double worst_r = 0.0;
  for (VolumeKind kind : {VolumeKind::Global, VolumeKind::Local}) {
    for (int s = 0; s < kAdjointInstances; ++s) {
      const std::uint64_t seed = 1000 + s;
      const instances::Problem p = instances::random_problem(seed, kind);
      std::mt19937_64 rng(seed);
      const VolumeShape shape = VolumeShape::for_map(p.f_r, p.mode);
      const CorrespondenceVolume v = instances::random_volume(rng, shape);
      const double lhs = dot_all(correlate(p.w, p.f_r, p.mode).data(), v.data());
      const double rhs = dot_all(p.w.data(), corr_adjoint(v, p.f_r).data());
      worst_corr = std::max(worst_corr, std::abs(lhs - rhs));

      const QueryObjectiveParams q = instances::random_query_params(rng);
      const CorrespondenceVolume x = instances::random_volume(rng, shape);
      const VolumeStack y = instances::random_stack(rng, shape, q.out_channels);
      const double lr = dot_all(apply_query_operator(x, q).data(), y.data());
      const double rr = dot_all(x.data(), conv_adjoint(y, q).data());
      worst_r = std::max(worst_r, std::abs(lr - rr));
    }
  }
  const double t = seconds_since(t0);
  return {worst_corr <= kAdjointTol && worst_r <= kAdjointTol && t < kAdjointBudgetS,
          fmt("corr max |diff| %.2e, R max |diff| %.2e", worst_corr, worst_r) + fmt(", %g instances x 2 modes", kAdjointInstances)};
}

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  cfg.set("eta", "0.1");
  cfg.set("seeds", "0-19");
  cfg.set("gradcheck_step", "1e-6");
  cfg.set("gradcheck_tolerance", "1e-5");
  std::ostringstream out;
  std::ostringstream err;
  const int status = cli::cmd_gradcheck(cfg, {}, out, err);
  const double t = seconds_since(t0);
  double worst = 0.0;
  std::istringstream lines(out.str());
  for (std::string line; std::getline(lines, line);) {
    const auto at = line.find("rel_err=");
    if (at != std::string::npos) worst = std::max(worst, std::stod(line.substr(at + 8)));
  }
  return {status == 0 && worst <= kGradTol && t < kGradBudgetS,
          fmt("20 instances, max relative error %.2e", worst)};
}

Outcome step_length_oracle() {
  double worst = 0.0;
  int literal_exact = 0;
  for (int s = 0; s < kStepInstances; ++s) {
    const std::uint64_t seed = 2000 + s;
    const instances::Problem p = instances::random_problem(seed, s % 2 ? VolumeKind::Local : VolumeKind::Global);
    std::mt19937_64 rng(seed);
    const ObjectiveParams params = instances::convex_params(instances::random_query_params(rng));
    SolverConfig cfg;
    cfg.mode = p.mode;
    cfg.use_query = (s / 2) % 2 == 0;
    const FeatureMap g = grad_total(p.w, p.f_r, p.f_q, params, cfg);
    const double exact = step_length(p.w, g, p.f_r, p.f_q, params, cfg);
    const double ref = oracle::line_search_oracle(p.w, g, p.f_r, p.f_q, params, cfg);
    worst = std::max(worst, std::abs(exact - ref) / std::abs(ref));
    cfg.curvature_scale = 1.0;
    const double literal = step_length(p.w, g, p.f_r, p.f_q, params, cfg);
    literal_exact += (literal == 2.0 * exact && std::abs(literal - 2.0 * ref) <= kStepTol * 2.0 * std::abs(ref)) ? 1 : 0;
  }
  return {worst <= kStepTol && literal_exact == kStepInstances,
          fmt("max relative error %.2e, literal step == 2x on %g/50", worst, literal_exact)};
}

Outcome descent_invariant() {
  int violations = 0;
  for (int s = 0; s < kDescentSeeds; ++s) {
    const std::uint64_t seed = 3000 + s;
    const instances::Problem p = instances::random_problem(seed, s % 2 ? VolumeKind::Local : VolumeKind::Global);
    std::mt19937_64 rng(seed);
    const ObjectiveParams params = instances::convex_params(instances::random_query_params(rng));
    SolverConfig cfg;
    cfg.mode = p.mode;
    cfg.use_query = (s / 2) % 2 == 0;
    cfg.num_iter = kDescentIters;
    const SolveResult r = run_gocor(p.f_r, p.f_q, params, cfg, {});
    const auto& l = r.trace.losses;
    for (std::size_t n = 1; n < l.size(); ++n) violations += l[n] > l[n - 1] + kDescentSlack * l[0] ? 1 : 0;
  }
  return {violations == 0, fmt("%g seeds x 10 iterations, %g increases", kDescentSeeds, violations)};
}

Outcome oracle_equivalence() {
  int mismatches = 0;
  for (int s = 0; s < kOracleSeeds; ++s) {
    for (VolumeKind kind : {VolumeKind::Global, VolumeKind::Local}) {
      const instances::Problem p = instances::random_problem(4000 + s, kind);
      mismatches += correlate(p.w, p.f_r, p.mode) == oracle::brute_corr(p.w, p.f_r, p.mode) ? 0 : 1;
    }
    const instances::Problem p = instances::random_problem(4500 + s, s % 2 ? VolumeKind::Local : VolumeKind::Global);
    std::mt19937_64 rng(4500 + s);
    const QueryObjectiveParams q = instances::random_query_params(rng);
    const VolumeStack fast = query_residual(p.w, p.f_q, q, p.mode);
    const VolumeStack slow = oracle::naive_conv4d_seq(oracle::brute_corr(p.w, p.f_q, p.mode), q);
    mismatches += fast == slow ? 0 : 1;
  }
  return {mismatches == 0, fmt("50 seeds x {global, local, query operator}, %g mismatches", mismatches)};
}

Outcome basis_and_initializer() {
  const int n = 10;
  const double delta = 0.5;
  std::mt19937_64 rng(5000);
  std::uniform_real_distribution<double> dist(0.0, (n + 4) * delta);
  double unity = 0.0;
  for (int s = 0; s < kUnitySamples; ++s) {
    const double d = dist(rng);
    double total = 0.0;
    for (int k = 0; k < n; ++k) total += rho_basis(d, k, n, delta);
    unity = std::max(unity, std::abs(total - 1.0));
  }

  double constraint = 0.0;
  int degenerate = 0;
  for (int s = 0; s < 20; ++s) {
    std::mt19937_64 r(5100 + s);
    const FeatureMap f = instances::random_map(r, 2 + s % 5, 3 + s % 4, 2 + s % 5);
    std::normal_distribution<double> nd(0.0, 1.0);
    InitializerConfig cfg;
    cfg.variant = InitializerVariant::ContextAware;
    cfg.beta = {nd(r)};
    cfg.gamma = {nd(r)};
    const Initialization init = init_filter_map(f, cfg);
    degenerate += init.degenerate_locations;
    std::vector<double> mean(f.depth(), 0.0);
    for (int i = 0; i < f.height(); ++i) {
      for (int j = 0; j < f.width(); ++j) {
        for (int d = 0; d < f.depth(); ++d) mean[d] += f.at(i, j, d) / f.locations();
      }
    }
    for (int i = 0; i < f.height(); ++i) {
      for (int j = 0; j < f.width(); ++j) {
        double wf = 0.0;
        double wm = 0.0;
        for (int d = 0; d < f.depth(); ++d) {
          wf += init.filter.at(i, j, d) * f.at(i, j, d);
          wm += init.filter.at(i, j, d) * mean[d];
        }
        constraint = std::max({constraint, std::abs(wf - cfg.beta[0]), std::abs(wm - cfg.gamma[0])});
      }
    }
  }
  return {unity <= kUnityTol && constraint <= kInitTol && degenerate == 0,
          fmt("partition of unity max error %.2e, initializer max error %.2e", unity, constraint)};
}

Outcome disambiguation() {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg;
  const ObjectiveParams params = cfg.objective();
  const SolverConfig solver = cfg.solver(true);
  const InitializerConfig init = cfg.initializer();
  int good = 0;
  int monotone = 0;
  double worst_tie = 0.0;
  for (std::uint64_t seed : cfg.seeds()) {
    const SyntheticScene scene = make_repetitive_scene(cfg.scene(seed));
    const DisambiguationReport r = run_disambiguation_experiment(scene, params, solver, init);
    const IterationOutcome& first = r.per_iteration.front();
    const IterationOutcome& last = r.per_iteration.back();
    const double tie = std::abs(first.margin) / first.scale;
    worst_tie = std::max(worst_tie, tie);
    good += (tie <= kDisambiguationMarginTol && last.margin > first.margin && last.argmax_correct) ? 1 : 0;
    bool mono = true;
    for (std::size_t n = 1; n < r.per_iteration.size(); ++n) mono = mono && r.per_iteration[n].margin >= r.per_iteration[n - 1].margin;
    monotone += mono ? 1 : 0;
  }
  const double t = seconds_since(t0);
  return {good >= kDisambiguationRequired && t < kDisambiguationBudgetS,
          fmt("%g/20 seeds meet all three conditions, worst |margin_0|/scale %.1e", good, worst_tie) +
              fmt(", per-step monotone on %g/20 (not gated)", monotone)};
}

Outcome zero_iteration() {
  int mismatches = 0;
  for (int s = 0; s < 20; ++s) {
    const instances::Problem p = instances::random_problem(6000 + s, s % 2 ? VolumeKind::Local : VolumeKind::Global);
    FeatureMap unit = p.f_r;
    for (int i = 0; i < unit.height(); ++i) {
      for (int j = 0; j < unit.width(); ++j) {
        double ff = 0.0;
        for (double x : p.f_r.cell(i, j)) ff += x * x;
        const double norm = std::sqrt(ff);
        for (double& x : unit.cell(i, j)) x /= norm;
      }
    }
    SolverConfig cfg;
    cfg.mode = p.mode;
    cfg.num_iter = 0;
    const CorrespondenceVolume v = gocor_correlation(p.f_r, p.f_q, ObjectiveParams{}, cfg, {});
    mismatches += v == oracle::brute_corr(unit, p.f_q, p.mode) ? 0 : 1;
  }
  return {mismatches == 0, fmt("20 instances compared bitwise, %g mismatches", mismatches)};
}

Outcome metric_examples() {
  int bad = 0;
  auto check = [&](bool ok) { bad += ok ? 0 : 1; };
  FlowField gt(1, 1);
  check(aepe(gt, gt) == 0.0);
  check(aepe(FlowField::constant(1, 1, 3.0f, 4.0f), gt) == 5.0);

  FlowField est(1, 2);
  est.set(0, 0, 1.0f, 0.0f);
  est.set(0, 1, 0.0f, 6.0f);
  const FlowField zero(1, 2);
  check(pck(est, zero, 5.0) == 50.0);
  check(pck(est, zero, 10.0) == 100.0);

  const FlowField g10 = FlowField::constant(1, 1, 10.0f, 0.0f);
  check(f1_outlier_rate(FlowField::constant(1, 1, 14.0f, 0.0f), g10) == 100.0);
  check(f1_outlier_rate(FlowField::constant(1, 1, 12.0f, 0.0f), g10) == 0.0);
  check(f1_outlier_rate(FlowField::constant(1, 1, 13.0f, 0.0f), g10) == 0.0);
  const FlowField g100 = FlowField::constant(1, 1, 100.0f, 0.0f);
  check(f1_outlier_rate(FlowField::constant(1, 1, 103.5f, 0.0f), g100) == 0.0);
  check(f1_outlier_rate(FlowField::constant(1, 1, 106.0f, 0.0f), g100) == 100.0);
  return {bad == 0, fmt("%g failing examples", bad)};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "gocor_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::mt19937_64 rng(7000);
  save_fmap(dir / "ref.fmap", instances::random_map(rng, 12, 12, 8));
  save_fmap(dir / "query.fmap", instances::random_map(rng, 12, 12, 8));

  RunConfig cfg;
  cfg.set("serial", "true");
  std::string outputs[2];
  Bytes volumes[2];
  Bytes traces[2];
  for (int n = 0; n < 2; ++n) {
    // Same output paths both times; the bytes are read back after each run.
    cli::SolveOptions opts{dir / "ref.fmap", dir / "query.fmap", dir / "v.cvol", dir / "t.json"};
    std::ostringstream out;
    std::ostringstream err;
    if (cli::cmd_solve(cfg, opts, out, err) != 0) return {false, "solve failed"};
    outputs[n] = out.str();
    volumes[n] = read_file(opts.volume_out);
    traces[n] = read_file(*opts.trace_out);
  }
  std::string bench[2];
  for (auto& b : bench) {
    std::ostringstream out;
    std::ostringstream err;
    if (cli::cmd_bench(cfg, {}, out, err) != 0) return {false, "bench failed"};
    b = out.str();
  }
  fs::remove_all(dir);
  const bool solve_same = outputs[0] == outputs[1] && volumes[0] == volumes[1] && traces[0] == traces[1];
  const bool bench_same = bench[0] == bench[1];
  return {solve_same && bench_same,
          std::string("solve ") + (solve_same ? "identical" : "differs") + ", bench " +
              (bench_same ? "identical" : "differs")};
}

}  // namespace

int main() {
  run("AC1 adjoint identities", adjoint_identities);
  run("AC2 gradient suite", gradient_suite);
  run("AC3 step-length oracle", step_length_oracle);
  run("AC4 descent invariant", descent_invariant);
  run("AC5 oracle equivalence", oracle_equivalence);
  run("AC6 basis and initializer", basis_and_initializer);
  run("AC7 disambiguation experiment", disambiguation);
  run("AC8 zero-iteration reduction", zero_iteration);
  run("AC9 metric examples", metric_examples);
  run("AC10 determinism", determinism);
  std::printf("%s: %d failing\n", failures == 0 ? "acceptance PASS" : "acceptance FAIL", failures);
  return failures == 0 ? 0 : 1;
}
