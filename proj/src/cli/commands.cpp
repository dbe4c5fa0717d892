#include "gocor/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include <json.hpp>

#include "gocor/correlation.hpp"
#include "gocor/instances.hpp"
#include "gocor/io.hpp"
#include "gocor/oracle.hpp"
#include "gocor/reduce.hpp"
#include "gocor/synthbench.hpp"

namespace gocor::cli {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

json config_json(const RunConfig& cfg) {
  json j = json::object();
  for (const ConfigKey& k : config_keys()) j[k.name] = cfg.raw(k.name);
  return j;
}

double l2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double rel_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) num += (a[n] - b[n]) * (a[n] - b[n]);
  return std::sqrt(num) / std::max({l2(a), l2(b), 1e-300});
}

// Smallest |corr(w, f_r)| over entries whose query position is on the grid.
double min_abs_inside(const FeatureMap& w, const FeatureMap& f_r, CorrelationMode mode) {
  const CorrespondenceVolume c = oracle::brute_corr(w, f_r, mode);
  const VolumeShape& s = c.shape();
  double m = INFINITY;
  for (int i = 0; i < s.height; ++i) {
    for (int j = 0; j < s.width; ++j) {
      const auto slice = c.slice(i, j);
      for (int a = 0; a < s.slice_height(); ++a) {
        for (int b = 0; b < s.slice_width(); ++b) {
          const int qi = s.kind == VolumeKind::Global ? a : i + a - s.radius;
          const int qj = s.kind == VolumeKind::Global ? b : j + b - s.radius;
          if (qi < 0 || qi >= s.height || qj < 0 || qj >= s.width) continue;
          m = std::min(m, std::abs(slice[static_cast<std::size_t>(a) * s.slice_width() + b]));
        }
      }
    }
  }
  return m;
}

}  // namespace

int cmd_gradcheck(const RunConfig& cfg, const GradcheckOptions& opts, std::ostream& out, std::ostream& err) {
  const ObjectiveParams base = cfg.objective();
  const double h = cfg.real("gradcheck_step");
  const double tol = cfg.real("gradcheck_tolerance");
  const Exec exec = cfg.flag("serial") ? Exec::Serial : Exec::Parallel;
  const bool kink = base.reference.eta == 0.0;
  if (kink && !cfg.flag("kink_avoidance")) {
    err << "warning: eta = 0 makes the penalty non-differentiable at corr = 0; moving evaluation points away "
           "from the kink (set kink_avoidance=true to silence)\n";
  }

  int failures = 0;
  int count = 0;
  for (const std::uint64_t seed : cfg.seeds()) {
    const int combo = count++ % 4;
    const VolumeKind kind = combo < 2 ? VolumeKind::Global : VolumeKind::Local;
    const bool use_query = combo % 2 == 0;
    instances::Problem p = instances::random_problem(seed, kind, 5, 4);
    ObjectiveParams params = base;
    SolverConfig scfg = cfg.solver();
    scfg.mode = p.mode;
    scfg.use_query = use_query;
    scfg.exec = exec;

    int moved = 0;
    if (kink) {
      const double guard = 2.0 * h * max_abs(p.f_r.data());
      std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
      std::normal_distribution<double> jitter(0.0, 1e-3);
      while (min_abs_inside(p.w, p.f_r, p.mode) <= guard) {
        if (++moved > 1000) throw std::runtime_error("gradcheck: cannot move away from corr = 0");
        for (double& x : p.w.data()) x += jitter(rng);
      }
    }

    FeatureMap analytic = grad_total(p.w, p.f_r, p.f_q, params, scfg);
    if (opts.corrupt_gradient) analytic.data()[0] += 1e-3 * std::max(l2(analytic.data()), 1.0);
    const FeatureMap numeric = oracle::numeric_grad(
        [&](const FeatureMap& x) { return oracle::naive_total_loss(x, p.f_r, p.f_q, params, p.mode, use_query); },
        p.w, h);
    const double rel = rel_diff(analytic.data(), numeric.data());
    const bool ok = rel <= tol;
    failures += ok ? 0 : 1;
    out << "instance " << seed << ": mode=" << (kind == VolumeKind::Global ? "global" : "local")
        << " query=" << (use_query ? "on" : "off") << " shape=" << p.w.height() << "x" << p.w.width() << "x"
        << p.w.depth() << " rel_err=" << fmt(rel) << (moved > 0 ? " perturbed" : "") << (ok ? " PASS" : " FAIL")
        << "\n";
  }
  out << "gradcheck: " << (failures == 0 ? "PASS" : "FAIL") << " (" << count - failures << "/" << count
      << " within " << fmt(tol) << ")\n";
  return failures == 0 ? 0 : 1;
}

int cmd_solve(const RunConfig& cfg, const SolveOptions& opts, std::ostream& out, std::ostream&) {
  const FeatureMap f_r = load_fmap(opts.reference);
  const FeatureMap f_q = load_fmap(opts.query);
  const ObjectiveParams params = cfg.objective();
  const SolverConfig scfg = cfg.solver();
  const InitializerConfig init = cfg.initializer();

  const SolveResult solved = run_gocor(f_r, f_q, params, scfg, init);
  const CorrespondenceVolume volume = correlate(solved.filter, f_q, scfg.mode, scfg.exec);
  save_cvol(opts.volume_out, volume, cfg.precision());

  if (opts.trace_out) {
    json trace;
    trace["config"] = config_json(cfg);
    trace["height"] = f_r.height();
    trace["width"] = f_r.width();
    trace["depth"] = f_r.depth();
    trace["num_iter"] = scfg.num_iter;
    trace["use_query"] = scfg.use_query;
    trace["losses"] = solved.trace.losses;
    trace["step_lengths"] = solved.trace.step_lengths;
    trace["grad_norms"] = solved.trace.grad_norms;
    trace["degenerate_init_locations"] = solved.degenerate_init_locations;
    write_text(*opts.trace_out, trace.dump(2) + "\n");
  }

  out << "volume: " << opts.volume_out.string() << "\n";
  out << "kind: " << (scfg.mode.kind == VolumeKind::Global ? "global" : "local") << "\n";
  out << "iterations: " << scfg.num_iter << "\n";
  out << "loss_initial: " << fmt(solved.trace.losses.front()) << "\n";
  out << "loss_final: " << fmt(solved.trace.losses.back()) << "\n";
  return 0;
}

int cmd_bench(const RunConfig& cfg, const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  const ObjectiveParams params = cfg.objective();
  const SolverConfig scfg = cfg.solver(true);
  const InitializerConfig init = cfg.initializer();

  json report;
  report["config"] = config_json(cfg);
  report["num_iter"] = scfg.num_iter;
  report["use_query"] = scfg.use_query;

  const int iters = scfg.num_iter;
  json runs = json::array();
  std::vector<double> margin_sum(static_cast<std::size_t>(iters) + 1, 0.0);
  int final_correct = 0;
  int increased = 0;
  double worst_initial = 0.0;
  const auto seeds = cfg.seeds();
  for (const std::uint64_t seed : seeds) {
    const SyntheticScene scene = make_repetitive_scene(cfg.scene(seed));
    const DisambiguationReport rep = run_disambiguation_experiment(scene, params, scfg, init);
    json run;
    run["seed"] = seed;
    run["probe"] = {scene.probe.i, scene.probe.j};
    run["true_match"] = {scene.true_match.i, scene.true_match.j};
    json margins = json::array();
    json argmax = json::array();
    json scale = json::array();
    json truth = json::array();
    json distractor = json::array();
    json loss = json::array();
    for (const IterationOutcome& o : rep.per_iteration) {
      margins.push_back(o.margin);
      argmax.push_back(o.argmax_correct);
      scale.push_back(o.scale);
      truth.push_back(o.true_confidence);
      distractor.push_back(o.best_distractor);
      loss.push_back(o.loss);
      margin_sum[o.iterations] += o.margin;
    }
    run["margins"] = margins;
    run["argmax_correct"] = argmax;
    run["scale"] = scale;
    run["true_confidence"] = truth;
    run["best_distractor"] = distractor;
    run["losses"] = loss;
    if (opts.timings) {
      run["timings_ms"] = {{"init", rep.timings.init_ms}, {"solve", rep.timings.solve_ms},
                           {"volume", rep.timings.volume_ms}};
      err << "seed " << seed << ": init " << rep.timings.init_ms << " ms, solve " << rep.timings.solve_ms
          << " ms, volume " << rep.timings.volume_ms << " ms\n";
    }
    runs.push_back(run);

    const IterationOutcome& first = rep.per_iteration.front();
    const IterationOutcome& last = rep.per_iteration.back();
    final_correct += last.argmax_correct ? 1 : 0;
    increased += last.margin > first.margin ? 1 : 0;
    worst_initial = std::max(worst_initial, std::abs(first.margin) / std::max(first.scale, 1e-300));
  }
  report["runs"] = runs;

  const double n = static_cast<double>(seeds.size());
  json mean = json::array();
  for (double s : margin_sum) mean.push_back(s / n);
  report["summary"] = {{"seeds", seeds.size()},
                       {"mean_margin", mean},
                       {"final_argmax_correct", final_correct},
                       {"margin_increased", increased},
                       {"max_relative_initial_margin", worst_initial}};
  out << report.dump(2) << "\n";
  return 0;
}

int cmd_export_heatmap(const HeatmapOptions& opts, std::ostream& out, std::ostream&) {
  const CorrespondenceVolume volume = load_cvol(opts.volume);
  write_file(opts.pgm_out, encode_heatmap_pgm(volume, opts.i, opts.j));
  if (opts.csv_out) write_text(*opts.csv_out, slice_csv(volume, opts.i, opts.j));
  out << "heatmap: " << opts.pgm_out.string() << " (" << volume.shape().slice_width() << "x"
      << volume.shape().slice_height() << ")\n";
  return 0;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const Exec exec = cfg.flag("serial") ? Exec::Serial : Exec::Parallel;
  constexpr int kSeeds = 50;
  int failed_checks = 0;
  auto report = [&](const std::string& name, int passed, int total, const std::string& detail) {
    const bool ok = passed == total;
    failed_checks += ok ? 0 : 1;
    out << name << ": " << (ok ? "PASS" : "FAIL") << " (" << passed << "/" << total << ", " << detail << ")\n";
  };

  for (const VolumeKind kind : {VolumeKind::Global, VolumeKind::Local}) {
    int exact = 0;
    for (int s = 0; s < kSeeds; ++s) {
      const instances::Problem p = instances::random_problem(1000 + s, kind);
      exact += correlate(p.w, p.f_r, p.mode, exec) == oracle::brute_corr(p.w, p.f_r, p.mode) ? 1 : 0;
    }
    report(kind == VolumeKind::Global ? "global_corr == brute_corr" : "local_corr == brute_corr", exact, kSeeds,
           "bitwise");
  }

  {
    int exact = 0;
    for (int s = 0; s < kSeeds; ++s) {
      const instances::Problem p =
          instances::random_problem(2000 + s, s % 2 == 0 ? VolumeKind::Global : VolumeKind::Local);
      std::mt19937_64 rng(3000 + s);
      const QueryObjectiveParams q = instances::random_query_params(rng);
      const VolumeStack fast = query_residual(p.w, p.f_q, q, p.mode, exec);
      exact += fast == oracle::naive_conv4d_seq(oracle::brute_corr(p.w, p.f_q, p.mode), q) ? 1 : 0;
    }
    report("query_residual == naive_conv4d_seq", exact, kSeeds, "bitwise");
  }

  {
    int within = 0;
    double worst = 0.0;
    for (int s = 0; s < kSeeds; ++s) {
      const instances::Problem p =
          instances::random_problem(4000 + s, s % 2 == 0 ? VolumeKind::Global : VolumeKind::Local);
      std::mt19937_64 rng(5000 + s);
      ObjectiveParams params;
      params.query = instances::random_query_params(rng);
      params.reference.eta = 0.1;
      const double a = total_loss(p.w, p.f_r, p.f_q, params, p.mode, true, exec);
      const double b = oracle::naive_total_loss(p.w, p.f_r, p.f_q, params, p.mode, true);
      const double rel = std::abs(a - b) / std::max(std::abs(b), 1e-300);
      worst = std::max(worst, rel);
      within += rel <= 1e-12 ? 1 : 0;
    }
    report("total_loss ~ naive_total_loss", within, kSeeds, "max rel " + fmt(worst) + ", tol 1e-12");
  }

  {
    int within = 0;
    double worst = 0.0;
    for (int s = 0; s < kSeeds; ++s) {
      const instances::Problem p =
          instances::random_problem(6000 + s, s % 2 == 0 ? VolumeKind::Global : VolumeKind::Local);
      std::mt19937_64 rng(7000 + s);
      const ObjectiveParams params = instances::convex_params(instances::random_query_params(rng));
      SolverConfig scfg;
      scfg.mode = p.mode;
      scfg.use_query = s % 4 < 2;
      scfg.exec = exec;
      const FeatureMap g = grad_total(p.w, p.f_r, p.f_q, params, scfg);
      const double a = step_length(p.w, g, p.f_r, p.f_q, params, scfg);
      const double b = oracle::line_search_oracle(p.w, g, p.f_r, p.f_q, params, scfg);
      const double rel = std::abs(a - b) / std::max(std::abs(b), 1e-300);
      worst = std::max(worst, rel);
      within += rel <= 1e-8 ? 1 : 0;
    }
    report("step_length ~ line_search_oracle", within, kSeeds, "max rel " + fmt(worst) + ", tol 1e-8");
  }

  {
    constexpr int kGrad = 8;
    int within = 0;
    double worst = 0.0;
    for (int s = 0; s < kGrad; ++s) {
      const instances::Problem p =
          instances::random_problem(8000 + s, s % 2 == 0 ? VolumeKind::Global : VolumeKind::Local, 4, 3);
      std::mt19937_64 rng(9000 + s);
      ObjectiveParams params;
      params.query = instances::random_query_params(rng);
      params.reference.eta = 0.1;
      SolverConfig scfg;
      scfg.mode = p.mode;
      scfg.use_query = s % 4 < 2;
      scfg.exec = exec;
      const FeatureMap g = grad_total(p.w, p.f_r, p.f_q, params, scfg);
      const FeatureMap fd = oracle::numeric_grad(
          [&](const FeatureMap& x) {
            return oracle::naive_total_loss(x, p.f_r, p.f_q, params, p.mode, scfg.use_query);
          },
          p.w);
      const double rel = rel_diff(g.data(), fd.data());
      worst = std::max(worst, rel);
      within += rel <= 1e-5 ? 1 : 0;
    }
    report("grad_total ~ numeric_grad", within, kGrad, "max rel " + fmt(worst) + ", tol 1e-5");
  }

  out << "oracle: " << (failed_checks == 0 ? "PASS" : "FAIL") << "\n";
  return failed_checks == 0 ? 0 : 1;
}

}  // namespace gocor::cli
