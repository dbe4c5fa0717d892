#include "gocor/weight_function.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gocor {

double rho_basis(double d, int k, int n, double delta) {
  if (k < 0 || k >= n) {
    throw ValidationError("rho_basis: knot index " + std::to_string(k) + " outside [0, " +
                          std::to_string(n) + ")");
  }
  const double offset = d - k * delta;
  if (k < n - 1) return std::max(0.0, 1.0 - std::abs(offset) / delta);
  return std::max(0.0, std::min(1.0, 1.0 + offset / delta));
}

void WeightFunction::validate() const {
  if (count() < 2) throw ValidationError("WeightFunction: need at least 2 basis functions");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("WeightFunction: delta must be > 0");
  for (double c : coefficients) {
    if (!std::isfinite(c)) throw ValidationError("WeightFunction: non-finite coefficient");
  }
}

double WeightFunction::operator()(double d) const {
  const int n = count();
  double acc = 0.0;
  for (int k = 0; k < n; ++k) acc += coefficients[k] * rho_basis(d, k, n, delta);
  if (squash == Squash::Sigmoid) return 1.0 / (1.0 + std::exp(-acc));
  return acc;
}

WeightFunction WeightFunction::constant(int n, double delta, double value, Squash squash) {
  WeightFunction wf{std::vector<double>(static_cast<std::size_t>(std::max(n, 0)), value), delta, squash};
  wf.validate();
  return wf;
}

WeightFunction WeightFunction::from_knots(int n, double delta, const std::function<double(double)>& profile,
                                          Squash squash) {
  WeightFunction wf{{}, delta, squash};
  wf.coefficients.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int k = 0; k < n; ++k) wf.coefficients.push_back(profile(k * delta));
  wf.validate();
  return wf;
}

double DistanceField::operator()(int i, int j, int k, int l) const {
  const double di = shape_.kind == VolumeKind::Global ? i - k : k;
  const double dj = shape_.kind == VolumeKind::Global ? j - l : l;
  return std::sqrt(di * di + dj * dj);
}

std::vector<double> tabulate_by_squared_distance(const WeightFunction& wf, int max_squared) {
  wf.validate();
  std::vector<double> table(static_cast<std::size_t>(std::max(max_squared, 0)) + 1);
  for (std::size_t s = 0; s < table.size(); ++s) table[s] = wf(std::sqrt(static_cast<double>(s)));
  return table;
}

CorrespondenceVolume eval_weight_fn(const WeightFunction& wf, const DistanceField& d) {
  const VolumeShape& s = d.shape();
  const std::vector<double> table = tabulate_by_squared_distance(wf, s.max_squared_distance());
  CorrespondenceVolume out(s);
  const int sh = s.slice_height();
  const int sw = s.slice_width();
  for (int i = 0; i < s.height; ++i) {
    for (int j = 0; j < s.width; ++j) {
      auto slice = out.slice(i, j);
      for (int a = 0; a < sh; ++a) {
        for (int b = 0; b < sw; ++b) slice[a * sw + b] = table[s.squared_distance(i, j, a, b)];
      }
    }
  }
  return out;
}

}  // namespace gocor
