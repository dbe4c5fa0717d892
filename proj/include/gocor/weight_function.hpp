#pragma once

#include <functional>
#include <vector>

#include "gocor/feature_map.hpp"

namespace gocor {

enum class Squash { None, Sigmoid };

/// Piecewise-linear function of match distance d, written as a combination
/// of N triangular basis functions with knots at k * delta. The last basis
/// function saturates to 1 beyond (N-1) * delta, so the function is constant
/// there.
struct WeightFunction {
  std::vector<double> coefficients;
  double delta = 0.5;
  Squash squash = Squash::None;

  int count() const noexcept { return static_cast<int>(coefficients.size()); }

  /// Throws ValidationError unless N >= 2, delta > 0 and the coefficients
  /// are finite.
  void validate() const;

  /// squash(sum_k coefficients[k] * rho_k(d)).
  double operator()(double d) const;

  static WeightFunction constant(int n, double delta, double value, Squash squash = Squash::None);

  /// Coefficients set to profile(k * delta). For a Sigmoid-squashed function
  /// pass the pre-squash profile.
  static WeightFunction from_knots(int n, double delta, const std::function<double(double)>& profile,
                                   Squash squash = Squash::None);
};

/// Triangular basis function rho_k(d) for N knots spaced delta apart.
/// Throws ValidationError if k is outside [0, N).
double rho_basis(double d, int k, int n, double delta);

/// Grid distance between each reference location and the query position of
/// each volume entry: sqrt((i-k)^2 + (j-l)^2) globally, sqrt(k^2 + l^2) for
/// local displacements.
class DistanceField {
 public:
  explicit DistanceField(VolumeShape shape) : shape_(shape) {}

  const VolumeShape& shape() const noexcept { return shape_; }
  /// Indexing follows CorrespondenceVolume::at.
  double operator()(int i, int j, int k, int l) const;

 private:
  VolumeShape shape_;
};

/// Volume-shaped field value[x] = wf(d[x]).
CorrespondenceVolume eval_weight_fn(const WeightFunction& wf, const DistanceField& d);

/// wf evaluated at sqrt(s) for every integer s in [0, max_squared]. Volume
/// distances are square roots of integers, so this table covers every entry.
std::vector<double> tabulate_by_squared_distance(const WeightFunction& wf, int max_squared);

}  // namespace gocor
