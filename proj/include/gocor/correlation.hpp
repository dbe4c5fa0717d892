#pragma once

#include <vector>

#include "gocor/feature_map.hpp"

namespace gocor {

/// All-pairs scalar products: out[i,j,k,l] = <w[i,j], f[k,l]>.
CorrespondenceVolume global_corr(const FeatureMap& w, const FeatureMap& f, Exec exec = Exec::Parallel);

/// Scalar products within a (2R+1)^2 neighborhood:
/// out[i,j,k,l] = <w[i,j], f[i+k, j+l]>, zero where (i+k, j+l) leaves the grid.
CorrespondenceVolume local_corr(const FeatureMap& w, const FeatureMap& f, int radius,
                                Exec exec = Exec::Parallel);

/// Dispatches to global_corr or local_corr.
CorrespondenceVolume correlate(const FeatureMap& w, const FeatureMap& f, CorrelationMode mode,
                               Exec exec = Exec::Parallel);

/// Jacobian-transpose of correlation in its first argument:
/// <correlate(w, f), v> == <w, corr_adjoint(v, f)> for every w.
FeatureMap corr_adjoint(const CorrespondenceVolume& v, const FeatureMap& f, Exec exec = Exec::Parallel);

/// Per-channel mean over all H*W locations.
std::vector<double> spatial_mean(const FeatureMap& f);

namespace detail {
// Unchecked kernels used inside the solver loop; callers guarantee shapes.
void correlate_into(const FeatureMap& w, const FeatureMap& f, CorrespondenceVolume& out, Exec exec);
void corr_adjoint_into(const CorrespondenceVolume& v, const FeatureMap& f, FeatureMap& out, Exec exec);
}  // namespace detail

}  // namespace gocor
