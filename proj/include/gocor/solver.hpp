#pragma once

#include <functional>
#include <vector>

#include "gocor/feature_map.hpp"
#include "gocor/objective.hpp"

namespace gocor {

enum class InitializerVariant { Simple, FlexibleSimple, ContextAware, FlexibleContextAware };

/// beta and gamma hold one value (scalar variants) or D values (Flexible
/// variants, applied channel by channel).
struct InitializerConfig {
  InitializerVariant variant = InitializerVariant::Simple;
  std::vector<double> beta{1.0};
  std::vector<double> gamma{0.0};

  void validate(int depth) const;
};

struct Initialization {
  FeatureMap filter;
  /// Locations where the context-aware system was singular and the simple
  /// rule (or zero, for a zero feature) was used instead.
  int degenerate_locations = 0;
};

/// Closed-form starting filter map.
///   Simple:        w0_ij = beta * f_ij / ||f_ij||
///   ContextAware:  w0_ij = a_ij f_ij + b_ij f_bar with w0_ij.f_ij = beta and
///                  w0_ij.f_bar = gamma, f_bar the spatial mean of f_r.
Initialization init_filter_map(const FeatureMap& f_r, const InitializerConfig& cfg);

struct SolverConfig {
  int num_iter = 3;
  bool use_query = true;
  /// The step is ||g||^2 / (curvature_scale * ||J g||^2). 2 is the exact
  /// minimizer of the Gauss-Newton model along -g (Hessian 2 J^T J);
  /// 1 takes the literal Q = J^T J step, which is twice as long.
  double curvature_scale = 2.0;
  CorrelationMode mode = CorrelationMode::global();
  Exec exec = Exec::Parallel;

  void validate() const;

  /// Global correlation: full objective, 3 iterations.
  static SolverConfig global_default();
  /// Local correlation: reference term only, 7 iterations.
  static SolverConfig local_default(int radius);
};

struct SolveTrace {
  std::vector<double> losses;        // num_iter + 1 entries: at w0 and after every step
  std::vector<double> step_lengths;  // num_iter entries
  std::vector<double> grad_norms;    // num_iter entries, ||grad L|| at the step's start
};

/// grad L = 2 [d corr/dw]^T (sigma' . r_r) + [use_query] 2 [d corr/dw]^T [R*]^T r_q
///          + 2 lambda^2 w, with sigma' evaluated at corr(w, f_r).
FeatureMap grad_total(const FeatureMap& w, const FeatureMap& f_r, const FeatureMap& f_q,
                      const ObjectiveParams& params, const SolverConfig& cfg);

/// Gauss-Newton step length along -g. Returns 0 when the curvature term
/// vanishes relative to ||g||^2 (converged or degenerate).
double step_length(const FeatureMap& w, const FeatureMap& g, const FeatureMap& f_r, const FeatureMap& f_q,
                   const ObjectiveParams& params, const SolverConfig& cfg);

struct StepResult {
  FeatureMap next;
  double step = 0.0;
  double grad_norm = 0.0;
  double loss = 0.0;  // total loss at `next`
};

/// One steepest-descent update w - alpha * grad L(w).
StepResult sd_iteration(const FeatureMap& w, const FeatureMap& f_r, const FeatureMap& f_q,
                        const ObjectiveParams& params, const SolverConfig& cfg);

struct SolveResult {
  FeatureMap filter;
  SolveTrace trace;
  int degenerate_init_locations = 0;
};

/// Called with (iteration, filter) for the initial filter (iteration 0) and
/// after every step.
using IterateObserver = std::function<void(int, const FeatureMap&)>;

/// Initializer followed by cfg.num_iter steepest-descent iterations.
SolveResult run_gocor(const FeatureMap& f_r, const FeatureMap& f_q, const ObjectiveParams& params,
                      const SolverConfig& cfg, const InitializerConfig& init_cfg,
                      const IterateObserver& observer = {});

/// corr(w*, f_q) for the optimized filter map w*.
CorrespondenceVolume gocor_correlation(const FeatureMap& f_r, const FeatureMap& f_q, const ObjectiveParams& params,
                                       const SolverConfig& cfg, const InitializerConfig& init_cfg);

}  // namespace gocor
