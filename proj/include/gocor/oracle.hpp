#pragma once

#include <functional>

#include "gocor/feature_map.hpp"
#include "gocor/objective.hpp"
#include "gocor/solver.hpp"

// Brute-force references for the library kernels. Nothing here calls into
// correlation, objective or solver code: the types are shared, the
// arithmetic is rewritten as plain loops. Single-threaded, desk scale only.
namespace gocor::oracle {

/// Direct transcription of the global/local correlation definitions.
CorrespondenceVolume brute_corr(const FeatureMap& w, const FeatureMap& f, CorrelationMode mode);

/// Literal nested-loop evaluation of the factorized 4D query convolution
/// with zero padding.
VolumeStack naive_conv4d_seq(const CorrespondenceVolume& x, const QueryObjectiveParams& q);

/// L(w) assembled entry by entry, with its own basis, penalty and weights.
double naive_total_loss(const FeatureMap& w, const FeatureMap& f_r, const FeatureMap& f_q,
                        const ObjectiveParams& params, CorrelationMode mode, bool use_query);

using LossFn = std::function<double(const FeatureMap&)>;

/// Central differences (L(w + h e) - L(w - h e)) / 2h per coordinate.
FeatureMap numeric_grad(const LossFn& loss, const FeatureMap& w, double h = 1e-6);

/// Minimizer along -g of the model sum_b ||r_b - alpha J_b g||^2 +
/// ||lambda (w - alpha g)||^2 with every residual block linearized at w.
/// Zero curvature gives 0.
double line_search_oracle(const FeatureMap& w, const FeatureMap& g, const FeatureMap& f_r, const FeatureMap& f_q,
                          const ObjectiveParams& params, const SolverConfig& cfg);

}  // namespace gocor::oracle
