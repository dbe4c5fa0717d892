#include "gocor/metrics.hpp"

#include <cmath>
#include <string>

namespace gocor {

namespace {

constexpr double kOutlierPixels = 3.0;
constexpr double kOutlierRelative = 0.05;

void check_pair(const FlowField& est, const FlowField& gt, const char* op) {
  est.validate();
  gt.validate();
  if (est.height != gt.height || est.width != gt.width) {
    throw DimensionError(std::string(op) + ": flow fields differ in shape");
  }
}

template <typename Fn>
std::size_t for_each_valid(const FlowField& est, const FlowField& gt, Fn fn) {
  std::size_t count = 0;
  for (int i = 0; i < gt.height; ++i) {
    for (int j = 0; j < gt.width; ++j) {
      if (!est.valid(i, j) || !gt.valid(i, j)) continue;
      const double du = static_cast<double>(est.u(i, j)) - gt.u(i, j);
      const double dv = static_cast<double>(est.v(i, j)) - gt.v(i, j);
      const double gu = gt.u(i, j);
      const double gv = gt.v(i, j);
      fn(std::sqrt(du * du + dv * dv), std::sqrt(gu * gu + gv * gv));
      ++count;
    }
  }
  return count;
}

struct Counts {
  std::size_t hits = 0;
  std::size_t valid = 0;
};

Counts pck_counts(const FlowField& est, const FlowField& gt, double threshold) {
  if (!(threshold > 0.0)) throw ValidationError("pck: threshold must be > 0");
  Counts c;
  c.valid = for_each_valid(est, gt, [&](double err, double) { c.hits += err <= threshold ? 1 : 0; });
  return c;
}

}  // namespace

FlowField::FlowField(int h, int w) : height(h), width(w), uv(2 * static_cast<std::size_t>(h) * w, 0.0f) {
  if (h <= 0 || w <= 0) throw DimensionError("FlowField: H and W must be positive");
}

FlowField FlowField::constant(int h, int w, float u, float v) {
  FlowField f(h, w);
  for (std::size_t n = 0; n < f.uv.size(); n += 2) {
    f.uv[n] = u;
    f.uv[n + 1] = v;
  }
  return f;
}

void FlowField::set(int i, int j, float u, float v) {
  const std::size_t n = 2 * (static_cast<std::size_t>(i) * width + j);
  uv[n] = u;
  uv[n + 1] = v;
}

void FlowField::validate() const {
  if (height <= 0 || width <= 0) throw DimensionError("FlowField: H and W must be positive");
  const std::size_t pixels = static_cast<std::size_t>(height) * width;
  if (uv.size() != 2 * pixels) throw DimensionError("FlowField: displacement array must hold 2*H*W values");
  if (!mask.empty() && mask.size() != pixels) throw DimensionError("FlowField: mask must hold H*W values");
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      if (valid(i, j) && !(std::isfinite(u(i, j)) && std::isfinite(v(i, j)))) {
        throw ValidationError("FlowField: non-finite displacement at valid pixel (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
    }
  }
}

double aepe(const FlowField& est, const FlowField& gt) {
  check_pair(est, gt, "aepe");
  double total = 0.0;
  const std::size_t n = for_each_valid(est, gt, [&](double err, double) { total += err; });
  if (n == 0) throw ValidationError("aepe: no valid pixels");
  return total / static_cast<double>(n);
}

double pck(const FlowField& est, const FlowField& gt, double threshold) {
  check_pair(est, gt, "pck");
  const Counts c = pck_counts(est, gt, threshold);
  if (c.valid == 0) throw ValidationError("pck: no valid pixels");
  return 100.0 * static_cast<double>(c.hits) / static_cast<double>(c.valid);
}

double f1_outlier_rate(const FlowField& est, const FlowField& gt) {
  check_pair(est, gt, "f1_outlier_rate");
  std::size_t outliers = 0;
  const std::size_t n = for_each_valid(est, gt, [&](double err, double mag) {
    const bool absolute = err > kOutlierPixels;
    const bool relative = mag == 0.0 ? absolute : err / mag > kOutlierRelative;
    outliers += absolute && relative ? 1 : 0;
  });
  if (n == 0) throw ValidationError("f1_outlier_rate: no valid pixels");
  return 100.0 * static_cast<double>(outliers) / static_cast<double>(n);
}

double dataset_pck(std::span<const std::pair<FlowField, FlowField>> pairs, double threshold, PckPooling pooling) {
  if (pairs.empty()) throw ValidationError("dataset_pck: no image pairs");
  if (pooling == PckPooling::PerImageMean) {
    double total = 0.0;
    for (const auto& [est, gt] : pairs) total += pck(est, gt, threshold);
    return total / static_cast<double>(pairs.size());
  }
  Counts all;
  for (const auto& [est, gt] : pairs) {
    check_pair(est, gt, "dataset_pck");
    const Counts c = pck_counts(est, gt, threshold);
    all.hits += c.hits;
    all.valid += c.valid;
  }
  if (all.valid == 0) throw ValidationError("dataset_pck: no valid pixels");
  return 100.0 * static_cast<double>(all.hits) / static_cast<double>(all.valid);
}

}  // namespace gocor
