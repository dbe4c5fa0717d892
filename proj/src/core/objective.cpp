#include "gocor/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gocor/correlation.hpp"
#include "gocor/reduce.hpp"

namespace gocor {

namespace {

// m(k * delta) = tanh(k * delta) after the Sigmoid. tanh(0) = 0 has no
// finite logit, so the profile is clamped away from {0, 1}.
constexpr double kTanhClamp = 1e-3;

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

void ReferenceObjectiveParams::validate() const {
  target_shape.validate();
  positive_weight.validate();
  negative_ratio.validate();
  if (negative_ratio.squash == Squash::None) {
    for (double c : negative_ratio.coefficients) {
      if (c < 0.0 || c > 1.0) throw ValidationError("negative_ratio: unsquashed coefficients must lie in [0, 1]");
    }
  }
  for (double c : positive_weight.coefficients) {
    if (c < 0.0) throw ValidationError("positive_weight: coefficients must be nonnegative");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ValidationError("eta must be finite and >= 0");
}

ReferenceObjectiveParams ReferenceObjectiveParams::initial(int n, double delta) {
  ReferenceObjectiveParams p;
  p.target_shape = WeightFunction::from_knots(n, delta, [](double d) { return std::exp(-0.5 * d * d); });
  p.positive_weight = WeightFunction::constant(n, delta, 1.0);
  p.negative_ratio = WeightFunction::from_knots(
      n, delta, [](double d) { return logit(std::clamp(std::tanh(d), kTanhClamp, 1.0 - kTanhClamp)); },
      Squash::Sigmoid);
  p.eta = 0.0;
  return p;
}

ReferenceObjectiveParams ReferenceObjectiveParams::linear(int n, double delta) {
  ReferenceObjectiveParams p = initial(n, delta);
  p.negative_ratio = WeightFunction::constant(n, delta, 1.0);
  return p;
}

void ObjectiveParams::validate() const {
  reference.validate();
  query.validate();
  if (!std::isfinite(lambda)) throw ValidationError("lambda must be finite");
}

double sigma_eta(double c, double vp, double vn, double eta) {
  if (eta == 0.0) return c >= 0.0 ? vp * c : vn * c;
  return 0.5 * (vp - vn) * (std::sqrt(c * c + eta * eta) - eta) + 0.5 * (vp + vn) * c;
}

double sigma_eta_prime(double c, double vp, double vn, double eta) {
  if (eta == 0.0) {
    if (c > 0.0) return vp;
    if (c < 0.0) return vn;
    return 0.5 * (vp + vn);
  }
  return 0.5 * (vp - vn) * (c / std::sqrt(c * c + eta * eta)) + 0.5 * (vp + vn);
}

ReferenceWeights ReferenceWeights::build(const ReferenceObjectiveParams& p, const VolumeShape& shape) {
  const int max_sq = shape.max_squared_distance();
  ReferenceWeights rw;
  rw.positive = tabulate_by_squared_distance(p.positive_weight, max_sq);
  const std::vector<double> ratio = tabulate_by_squared_distance(p.negative_ratio, max_sq);
  const std::vector<double> shape_y = tabulate_by_squared_distance(p.target_shape, max_sq);
  rw.negative.resize(rw.positive.size());
  rw.target.resize(rw.positive.size());
  for (std::size_t s = 0; s < rw.positive.size(); ++s) {
    rw.negative[s] = rw.positive[s] * ratio[s];
    rw.target[s] = rw.positive[s] * shape_y[s];
  }
  return rw;
}

CorrespondenceVolume reference_residual(const FeatureMap& w, const FeatureMap& f_r,
                                        const ReferenceObjectiveParams& p, CorrelationMode mode, Exec exec) {
  p.validate();
  CorrespondenceVolume r = correlate(w, f_r, mode, exec);
  const VolumeShape& s = r.shape();
  const ReferenceWeights rw = ReferenceWeights::build(p, s);
  const int sh = s.slice_height();
  const int sw = s.slice_width();
  const int locations = s.height * s.width;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int loc = 0; loc < locations; ++loc) {
    const int i = loc / s.width;
    const int j = loc % s.width;
    auto slice = r.slice(i, j);
    for (int a = 0; a < sh; ++a) {
      for (int b = 0; b < sw; ++b) {
        const int sq = s.squared_distance(i, j, a, b);
        double& x = slice[a * sw + b];
        x = sigma_eta(x, rw.positive[sq], rw.negative[sq], p.eta) - rw.target[sq];
      }
    }
  }
  return r;
}

double reference_loss(const FeatureMap& w, const FeatureMap& f_r, const ReferenceObjectiveParams& p,
                      CorrelationMode mode, Exec exec) {
  return squared_norm(reference_residual(w, f_r, p, mode, exec).data(), exec);
}

VolumeStack query_residual(const FeatureMap& w, const FeatureMap& f_q, const QueryObjectiveParams& q,
                           CorrelationMode mode, Exec exec) {
  return apply_query_operator(correlate(w, f_q, mode, exec), q, exec);
}

double query_loss(const FeatureMap& w, const FeatureMap& f_q, const QueryObjectiveParams& q,
                  CorrelationMode mode, Exec exec) {
  return squared_norm(query_residual(w, f_q, q, mode, exec).data(), exec);
}

LossTerms loss_terms(const FeatureMap& w, const FeatureMap& f_r, const FeatureMap& f_q,
                     const ObjectiveParams& params, CorrelationMode mode, bool use_query, Exec exec) {
  if (!f_r.same_shape(f_q)) throw DimensionError("loss: reference and query maps differ in shape");
  LossTerms t;
  t.reference = reference_loss(w, f_r, params.reference, mode, exec);
  if (use_query) t.query = query_loss(w, f_q, params.query, mode, exec);
  t.regularizer = params.lambda * params.lambda * squared_norm(w.data(), exec);
  return t;
}

double total_loss(const FeatureMap& w, const FeatureMap& f_r, const FeatureMap& f_q,
                  const ObjectiveParams& params, CorrelationMode mode, bool use_query, Exec exec) {
  return loss_terms(w, f_r, f_q, params, mode, use_query, exec).total();
}

}  // namespace gocor
