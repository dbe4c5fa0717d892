#include <cmath>
#include <string>

#include "gocor/correlation.hpp"
#include "gocor/solver.hpp"

namespace gocor {

namespace {

bool is_flexible(InitializerVariant v) {
  return v == InitializerVariant::FlexibleSimple || v == InitializerVariant::FlexibleContextAware;
}

bool is_context_aware(InitializerVariant v) {
  return v == InitializerVariant::ContextAware || v == InitializerVariant::FlexibleContextAware;
}

// Relative singularity threshold on ||f_bar||^2 ||f||^2 - (f . f_bar)^2.
constexpr double kSingularTolerance = 1e-12;

}  // namespace

void InitializerConfig::validate(int depth) const {
  const std::size_t want = is_flexible(variant) ? static_cast<std::size_t>(depth) : 1;
  if (beta.size() != want) {
    throw DimensionError("initializer beta has " + std::to_string(beta.size()) + " values, expected " +
                         std::to_string(want));
  }
  if (is_context_aware(variant) && gamma.size() != want) {
    throw DimensionError("initializer gamma has " + std::to_string(gamma.size()) + " values, expected " +
                         std::to_string(want));
  }
  for (double b : beta) {
    if (!std::isfinite(b)) throw ValidationError("initializer beta must be finite");
  }
  for (double g : gamma) {
    if (!std::isfinite(g)) throw ValidationError("initializer gamma must be finite");
  }
}

Initialization init_filter_map(const FeatureMap& f_r, const InitializerConfig& cfg) {
  f_r.validate();
  const int D = f_r.depth();
  cfg.validate(D);
  const bool flexible = is_flexible(cfg.variant);
  const bool context = is_context_aware(cfg.variant);
  auto beta = [&](int d) { return flexible ? cfg.beta[d] : cfg.beta[0]; };
  auto gamma = [&](int d) { return flexible ? cfg.gamma[d] : cfg.gamma[0]; };

  const std::vector<double> mean = context ? spatial_mean(f_r) : std::vector<double>(D, 0.0);
  double mm = 0.0;
  for (double x : mean) mm += x * x;

  Initialization out{FeatureMap(f_r.height(), f_r.width(), D), 0};
  for (int i = 0; i < f_r.height(); ++i) {
    for (int j = 0; j < f_r.width(); ++j) {
      const auto f = f_r.cell(i, j);
      auto w = out.filter.cell(i, j);
      double ff = 0.0;
      double fm = 0.0;
      for (int d = 0; d < D; ++d) {
        ff += f[d] * f[d];
        fm += f[d] * mean[d];
      }
      if (context) {
        const double den = mm * ff - fm * fm;
        if (ff > 0.0 && den > kSingularTolerance * mm * ff) {
          for (int d = 0; d < D; ++d) {
            const double a = beta(d) * mm - gamma(d) * fm;
            const double b = beta(d) * fm - gamma(d) * ff;
            w[d] = (a * f[d] - b * mean[d]) / den;
          }
          continue;
        }
        ++out.degenerate_locations;
      }
      if (ff == 0.0) {
        if (!context) ++out.degenerate_locations;
        for (double& x : w) x = 0.0;
        continue;
      }
      const double norm = std::sqrt(ff);
      for (int d = 0; d < D; ++d) w[d] = beta(d) * (f[d] / norm);
    }
  }
  return out;
}

}  // namespace gocor
