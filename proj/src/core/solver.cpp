#include "gocor/solver.hpp"

#include <cmath>
#include <string>

#include "gocor/correlation.hpp"
#include "gocor/reduce.hpp"

namespace gocor {

namespace {

// Below this gradient norm the iterate is left unchanged.
constexpr double kStationaryGradNorm = 1e-12;
// Curvature below this fraction of ||g||^2 yields a zero step.
constexpr double kDegenerateCurvature = 1e-12;

// Shapes, tabulated reference weights and scratch volumes shared by the
// gradient and step-length evaluations of one solve.
class Problem {
 public:
  Problem(const FeatureMap& f_r, const FeatureMap& f_q, const ObjectiveParams& params, const SolverConfig& cfg)
      : f_r_(f_r), f_q_(f_q), params_(params), cfg_(cfg),
        shape_(VolumeShape::for_map(f_r, cfg.mode)),
        weights_(ReferenceWeights::build(params.reference, shape_)),
        corr_(shape_), scratch_(shape_) {}

  const VolumeShape& shape() const { return shape_; }

  void check(const FeatureMap& w) const {
    if (!w.same_shape(f_r_)) throw DimensionError("filter map shape does not match the reference features");
  }

  // corr(w, f_r) into corr_.
  void correlate_reference(const FeatureMap& w) { detail::correlate_into(w, f_r_, corr_, cfg_.exec); }

  FeatureMap gradient(const FeatureMap& w) {
    const Exec exec = cfg_.exec;
    correlate_reference(w);
    visit_reference([&](double c, double vp, double vn, double y) {
      const double eta = params_.reference.eta;
      return 2.0 * sigma_eta_prime(c, vp, vn, eta) * (sigma_eta(c, vp, vn, eta) - y);
    }, corr_, scratch_);
    FeatureMap g(w.height(), w.width(), w.depth());
    detail::corr_adjoint_into(scratch_, f_r_, g, exec);

    if (cfg_.use_query) {
      detail::correlate_into(w, f_q_, scratch_, exec);
      const VolumeStack residual = apply_query_operator(scratch_, params_.query, exec);
      CorrespondenceVolume back = conv_adjoint(residual, params_.query, exec);
      for (double& x : back.data()) x *= 2.0;
      FeatureMap gq(w.height(), w.width(), w.depth());
      detail::corr_adjoint_into(back, f_q_, gq, exec);
      auto gd = g.data();
      const auto qd = gq.data();
      for (std::size_t n = 0; n < gd.size(); ++n) gd[n] += qd[n];
    }

    const double decay = 2.0 * params_.lambda * params_.lambda;
    auto gd = g.data();
    const auto wd = w.data();
    for (std::size_t n = 0; n < gd.size(); ++n) gd[n] += decay * wd[n];
    return g;
  }

  // Requires corr_ to hold corr(w, f_r) for the w at which g was taken.
  double step(const FeatureMap& g) {
    const Exec exec = cfg_.exec;
    const double num = squared_norm(g.data(), exec);
    if (num == 0.0) return 0.0;

    CorrespondenceVolume jg(shape_);
    detail::correlate_into(g, f_r_, jg, exec);
    // sigma'(corr(w, f_r)) . corr(g, f_r)
    const double eta = params_.reference.eta;
    visit_reference([&](double c, double vp, double vn, double) { return sigma_eta_prime(c, vp, vn, eta); },
                    corr_, scratch_);
    auto jd = jg.data();
    const auto sd = scratch_.data();
    for (std::size_t n = 0; n < jd.size(); ++n) jd[n] *= sd[n];
    double curvature = squared_norm(jg.data(), exec);

    if (cfg_.use_query) {
      detail::correlate_into(g, f_q_, scratch_, exec);
      curvature += squared_norm(apply_query_operator(scratch_, params_.query, exec).data(), exec);
    }
    curvature += params_.lambda * params_.lambda * num;

    if (curvature <= kDegenerateCurvature * num) return 0.0;
    return num / (cfg_.curvature_scale * curvature);
  }

 private:
  // out[e] = fn(in[e], v+, v-, y) with the weights of entry e.
  template <typename Fn>
  void visit_reference(Fn fn, const CorrespondenceVolume& in, CorrespondenceVolume& out) const {
    const VolumeShape& s = shape_;
    const int sh = s.slice_height();
    const int sw = s.slice_width();
    const int locations = s.height * s.width;
#pragma omp parallel for schedule(static) if (cfg_.exec == Exec::Parallel)
    for (int loc = 0; loc < locations; ++loc) {
      const int i = loc / s.width;
      const int j = loc % s.width;
      const auto src = in.slice(i, j);
      auto dst = out.slice(i, j);
      for (int a = 0; a < sh; ++a) {
        for (int b = 0; b < sw; ++b) {
          const int sq = s.squared_distance(i, j, a, b);
          const int e = a * sw + b;
          dst[e] = fn(src[e], weights_.positive[sq], weights_.negative[sq], weights_.target[sq]);
        }
      }
    }
  }

  const FeatureMap& f_r_;
  const FeatureMap& f_q_;
  const ObjectiveParams& params_;
  const SolverConfig& cfg_;
  VolumeShape shape_;
  ReferenceWeights weights_;
  CorrespondenceVolume corr_;
  CorrespondenceVolume scratch_;
};

void check_inputs(const FeatureMap& f_r, const FeatureMap& f_q, const ObjectiveParams& params,
                  const SolverConfig& cfg) {
  if (!f_r.same_shape(f_q)) throw DimensionError("reference and query feature maps differ in shape");
  f_r.validate();
  f_q.validate();
  params.validate();
  cfg.validate();
}

StepResult iterate(Problem& problem, const FeatureMap& w, const FeatureMap& f_r, const FeatureMap& f_q,
                   const ObjectiveParams& params, const SolverConfig& cfg) {
  StepResult out;
  const FeatureMap g = problem.gradient(w);
  out.grad_norm = std::sqrt(squared_norm(g.data(), cfg.exec));
  out.step = out.grad_norm <= kStationaryGradNorm ? 0.0 : problem.step(g);
  out.next = w;
  if (out.step != 0.0) {
    auto nd = out.next.data();
    const auto gd = g.data();
    for (std::size_t n = 0; n < nd.size(); ++n) nd[n] -= out.step * gd[n];
  }
  out.loss = total_loss(out.next, f_r, f_q, params, cfg.mode, cfg.use_query, cfg.exec);
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  if (num_iter < 0) throw ValidationError("num_iter must be >= 0");
  if (!(curvature_scale > 0.0) || !std::isfinite(curvature_scale)) {
    throw ValidationError("curvature_scale must be a positive finite number");
  }
  if (mode.kind == VolumeKind::Local && mode.radius < 0) throw ValidationError("radius must be >= 0");
}

SolverConfig SolverConfig::global_default() { return SolverConfig{}; }

SolverConfig SolverConfig::local_default(int radius) {
  SolverConfig cfg;
  cfg.num_iter = 7;
  cfg.use_query = false;
  cfg.mode = CorrelationMode::local(radius);
  return cfg;
}

FeatureMap grad_total(const FeatureMap& w, const FeatureMap& f_r, const FeatureMap& f_q,
                      const ObjectiveParams& params, const SolverConfig& cfg) {
  check_inputs(f_r, f_q, params, cfg);
  Problem problem(f_r, f_q, params, cfg);
  problem.check(w);
  w.validate();
  return problem.gradient(w);
}

double step_length(const FeatureMap& w, const FeatureMap& g, const FeatureMap& f_r, const FeatureMap& f_q,
                   const ObjectiveParams& params, const SolverConfig& cfg) {
  check_inputs(f_r, f_q, params, cfg);
  Problem problem(f_r, f_q, params, cfg);
  problem.check(w);
  problem.check(g);
  w.validate();
  g.validate();
  problem.correlate_reference(w);
  return problem.step(g);
}

StepResult sd_iteration(const FeatureMap& w, const FeatureMap& f_r, const FeatureMap& f_q,
                        const ObjectiveParams& params, const SolverConfig& cfg) {
  check_inputs(f_r, f_q, params, cfg);
  Problem problem(f_r, f_q, params, cfg);
  problem.check(w);
  w.validate();
  return iterate(problem, w, f_r, f_q, params, cfg);
}

SolveResult run_gocor(const FeatureMap& f_r, const FeatureMap& f_q, const ObjectiveParams& params,
                      const SolverConfig& cfg, const InitializerConfig& init_cfg, const IterateObserver& observer) {
  check_inputs(f_r, f_q, params, cfg);
  Initialization init = init_filter_map(f_r, init_cfg);
  SolveResult result{std::move(init.filter), {}, init.degenerate_locations};
  result.trace.losses.push_back(total_loss(result.filter, f_r, f_q, params, cfg.mode, cfg.use_query, cfg.exec));
  if (observer) observer(0, result.filter);

  Problem problem(f_r, f_q, params, cfg);
  for (int n = 0; n < cfg.num_iter; ++n) {
    StepResult step = iterate(problem, result.filter, f_r, f_q, params, cfg);
    result.filter = std::move(step.next);
    result.trace.losses.push_back(step.loss);
    result.trace.step_lengths.push_back(step.step);
    result.trace.grad_norms.push_back(step.grad_norm);
    if (observer) observer(n + 1, result.filter);
  }
  return result;
}

CorrespondenceVolume gocor_correlation(const FeatureMap& f_r, const FeatureMap& f_q, const ObjectiveParams& params,
                                       const SolverConfig& cfg, const InitializerConfig& init_cfg) {
  const SolveResult solved = run_gocor(f_r, f_q, params, cfg, init_cfg);
  return correlate(solved.filter, f_q, cfg.mode, cfg.exec);
}

}  // namespace gocor
