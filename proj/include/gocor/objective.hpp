#pragma once

#include <cstdint>
#include <vector>

#include "gocor/feature_map.hpp"
#include "gocor/weight_function.hpp"

namespace gocor {

/// Parameters of the robust reference-frame term. The derived weights are
/// y = v+ * y' and v- = v+ * m, evaluated at each entry's match distance.
struct ReferenceObjectiveParams {
  WeightFunction target_shape;     // y'
  WeightFunction positive_weight;  // v+
  WeightFunction negative_ratio;   // m in [0, 1]; Sigmoid-squashed unless constant
  double eta = 0.0;                // smoothing of the kink at c = 0

  void validate() const;

  /// Initial values: y' = exp(-d^2/2) (Gaussian, mean 0, std 1), v+ = 1,
  /// m = tanh(d) at the knots after the Sigmoid, eta = 0.
  static ReferenceObjectiveParams initial(int n = 10, double delta = 0.5);

  /// v+ = v- = 1 (m is the unsquashed constant 1) with the Gaussian y'.
  /// sigma_eta is then the identity and L_r is linear least squares.
  static ReferenceObjectiveParams linear(int n = 10, double delta = 0.5);
};

/// 4D query operator R factorized into two 2D convolutions: kernel_a runs
/// over the slice dimensions (k, l) of every reference location with one
/// input and Q' outputs; kernel_b runs over (i, j) for every slice entry,
/// mapping Q' channels to Q. Both are cross-correlations with zero padding
/// (K-1)/2 and no bias.
struct QueryObjectiveParams {
  int kernel_size = 3;
  int mid_channels = 16;
  int out_channels = 16;
  std::vector<double> kernel_a;  // [Q'][K][K]
  std::vector<double> kernel_b;  // [Q][Q'][K][K]

  double a(int q, int u, int v) const {
    return kernel_a[(static_cast<std::size_t>(q) * kernel_size + u) * kernel_size + v];
  }
  double b(int q, int p, int u, int v) const {
    return kernel_b[((static_cast<std::size_t>(q) * mid_channels + p) * kernel_size + u) * kernel_size + v];
  }

  void validate() const;

  /// Single-channel identity: R * x == x.
  static QueryObjectiveParams identity(int kernel_size = 3);

  /// Kernels drawn uniformly from +-1/sqrt(fan_in) with a fixed seed.
  static QueryObjectiveParams seeded(int kernel_size = 3, int mid_channels = 16, int out_channels = 16,
                                     std::uint64_t seed = 0, double scale = 1.0);
};

/// Everything the total objective needs besides the feature maps.
struct ObjectiveParams {
  ReferenceObjectiveParams reference = ReferenceObjectiveParams::initial();
  QueryObjectiveParams query = QueryObjectiveParams::seeded();
  double lambda = 0.1;  // weight-decay strength, term ||lambda w||^2

  void validate() const;
};

/// Smoothed asymmetric penalty:
/// (vp - vn)/2 * (sqrt(c^2 + eta^2) - eta) + (vp + vn)/2 * c.
double sigma_eta(double c, double vp, double vn, double eta);

/// d sigma_eta / dc. At the eta = 0 kink (c = 0) returns (vp + vn)/2.
double sigma_eta_prime(double c, double vp, double vn, double eta);

/// v+, v- and y tabulated by squared grid distance for one volume shape.
struct ReferenceWeights {
  std::vector<double> positive;
  std::vector<double> negative;
  std::vector<double> target;

  static ReferenceWeights build(const ReferenceObjectiveParams& p, const VolumeShape& shape);
};

/// r_r = sigma_eta(corr(w, f_r); v+, v-) - y, entrywise.
CorrespondenceVolume reference_residual(const FeatureMap& w, const FeatureMap& f_r,
                                        const ReferenceObjectiveParams& p, CorrelationMode mode,
                                        Exec exec = Exec::Parallel);

/// ||r_r||^2.
double reference_loss(const FeatureMap& w, const FeatureMap& f_r, const ReferenceObjectiveParams& p,
                      CorrelationMode mode, Exec exec = Exec::Parallel);

/// R * x for a volume-shaped field x.
VolumeStack apply_query_operator(const CorrespondenceVolume& x, const QueryObjectiveParams& q,
                                 Exec exec = Exec::Parallel);

/// [R *]^T y: transpose of the kernel_b stage followed by the transpose of
/// the kernel_a stage. <R * x, y> == <x, conv_adjoint(y, q)>.
CorrespondenceVolume conv_adjoint(const VolumeStack& y, const QueryObjectiveParams& q,
                                  Exec exec = Exec::Parallel);

/// r_q = R * corr(w, f_q).
VolumeStack query_residual(const FeatureMap& w, const FeatureMap& f_q, const QueryObjectiveParams& q,
                           CorrelationMode mode, Exec exec = Exec::Parallel);

/// ||r_q||^2.
double query_loss(const FeatureMap& w, const FeatureMap& f_q, const QueryObjectiveParams& q,
                  CorrelationMode mode, Exec exec = Exec::Parallel);

struct LossTerms {
  double reference = 0.0;
  double query = 0.0;
  double regularizer = 0.0;
  double total() const noexcept { return reference + query + regularizer; }
};

/// Every term of L = L_r + [use_query] L_q + ||lambda w||^2.
LossTerms loss_terms(const FeatureMap& w, const FeatureMap& f_r, const FeatureMap& f_q,
                     const ObjectiveParams& params, CorrelationMode mode, bool use_query,
                     Exec exec = Exec::Parallel);

double total_loss(const FeatureMap& w, const FeatureMap& f_r, const FeatureMap& f_q,
                  const ObjectiveParams& params, CorrelationMode mode, bool use_query,
                  Exec exec = Exec::Parallel);

}  // namespace gocor
