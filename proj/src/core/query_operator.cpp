#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "gocor/objective.hpp"

namespace gocor {

void QueryObjectiveParams::validate() const {
  if (kernel_size <= 0 || kernel_size % 2 == 0) throw ValidationError("query kernel size must be odd and positive");
  if (mid_channels <= 0 || out_channels <= 0) throw ValidationError("query channel counts must be positive");
  const std::size_t kk = static_cast<std::size_t>(kernel_size) * kernel_size;
  if (kernel_a.size() != kk * mid_channels) throw DimensionError("kernel_a must hold Q'*K*K weights");
  if (kernel_b.size() != kk * mid_channels * out_channels) throw DimensionError("kernel_b must hold Q*Q'*K*K weights");
  for (double x : kernel_a) {
    if (!std::isfinite(x)) throw ValidationError("kernel_a: non-finite weight");
  }
  for (double x : kernel_b) {
    if (!std::isfinite(x)) throw ValidationError("kernel_b: non-finite weight");
  }
}

QueryObjectiveParams QueryObjectiveParams::identity(int kernel_size) {
  QueryObjectiveParams q;
  q.kernel_size = kernel_size;
  q.mid_channels = 1;
  q.out_channels = 1;
  const std::size_t kk = static_cast<std::size_t>(kernel_size) * kernel_size;
  q.kernel_a.assign(kk, 0.0);
  q.kernel_b.assign(kk, 0.0);
  q.kernel_a[kk / 2] = 1.0;
  q.kernel_b[kk / 2] = 1.0;
  q.validate();
  return q;
}

QueryObjectiveParams QueryObjectiveParams::seeded(int kernel_size, int mid_channels, int out_channels,
                                                  std::uint64_t seed, double scale) {
  QueryObjectiveParams q;
  q.kernel_size = kernel_size;
  q.mid_channels = mid_channels;
  q.out_channels = out_channels;
  const std::size_t kk = static_cast<std::size_t>(kernel_size) * kernel_size;
  std::mt19937_64 rng(seed);
  const double bound_a = scale / std::sqrt(static_cast<double>(kk));
  const double bound_b = scale / std::sqrt(static_cast<double>(kk * mid_channels));
  std::uniform_real_distribution<double> ua(-bound_a, bound_a);
  std::uniform_real_distribution<double> ub(-bound_b, bound_b);
  q.kernel_a.resize(kk * mid_channels);
  for (double& x : q.kernel_a) x = ua(rng);
  q.kernel_b.resize(kk * mid_channels * out_channels);
  for (double& x : q.kernel_b) x = ub(rng);
  q.validate();
  return q;
}

namespace {

// Stage A: 2D cross-correlation over the slice of every reference location.
void slice_conv(const CorrespondenceVolume& x, const QueryObjectiveParams& q, VolumeStack& mid, Exec exec) {
  const VolumeShape& s = x.shape();
  const int K = q.kernel_size;
  const int h = K / 2;
  const int sh = s.slice_height();
  const int sw = s.slice_width();
  const int locations = s.height * s.width;
  const std::size_t slice = s.slice_size();
  const double* xd = x.data().data();
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int loc = 0; loc < locations; ++loc) {
    const double* src = xd + static_cast<std::size_t>(loc) * slice;
    for (int c = 0; c < q.mid_channels; ++c) {
      double* dst = mid.channel(c).data() + static_cast<std::size_t>(loc) * slice;
      for (int a = 0; a < sh; ++a) {
        for (int b = 0; b < sw; ++b) {
          double acc = 0.0;
          for (int u = 0; u < K; ++u) {
            const int aa = a + u - h;
            if (aa < 0 || aa >= sh) continue;
            for (int v = 0; v < K; ++v) {
              const int bb = b + v - h;
              if (bb < 0 || bb >= sw) continue;
              acc += q.a(c, u, v) * src[aa * sw + bb];
            }
          }
          dst[a * sw + b] = acc;
        }
      }
    }
  }
}

// Transpose of stage A.
void slice_conv_transpose(const VolumeStack& mid, const QueryObjectiveParams& q, CorrespondenceVolume& x,
                          Exec exec) {
  const VolumeShape& s = x.shape();
  const int K = q.kernel_size;
  const int h = K / 2;
  const int sh = s.slice_height();
  const int sw = s.slice_width();
  const int locations = s.height * s.width;
  const std::size_t slice = s.slice_size();
  double* xd = x.data().data();
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int loc = 0; loc < locations; ++loc) {
    double* dst = xd + static_cast<std::size_t>(loc) * slice;
    for (int a = 0; a < sh; ++a) {
      for (int b = 0; b < sw; ++b) {
        double acc = 0.0;
        for (int c = 0; c < q.mid_channels; ++c) {
          const double* src = mid.channel(c).data() + static_cast<std::size_t>(loc) * slice;
          for (int u = 0; u < K; ++u) {
            const int aa = a - u + h;
            if (aa < 0 || aa >= sh) continue;
            for (int v = 0; v < K; ++v) {
              const int bb = b - v + h;
              if (bb < 0 || bb >= sw) continue;
              acc += q.a(c, u, v) * src[aa * sw + bb];
            }
          }
        }
        dst[a * sw + b] = acc;
      }
    }
  }
}

// Stage B: 2D cross-correlation over the reference grid (i, j), Q' -> Q
// channels, applied to whole slices at once.
void grid_conv(const VolumeStack& mid, const QueryObjectiveParams& q, VolumeStack& out, Exec exec) {
  const VolumeShape& s = mid.shape();
  const int K = q.kernel_size;
  const int h = K / 2;
  const int H = s.height;
  const int W = s.width;
  const std::size_t slice = s.slice_size();
  const int tasks = q.out_channels * H * W;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int t = 0; t < tasks; ++t) {
    const int oc = t / (H * W);
    const int i = (t / W) % H;
    const int j = t % W;
    double* dst = out.channel(oc).data() + (static_cast<std::size_t>(i) * W + j) * slice;
    std::fill(dst, dst + slice, 0.0);
    for (int c = 0; c < q.mid_channels; ++c) {
      const double* src_channel = mid.channel(c).data();
      for (int u = 0; u < K; ++u) {
        const int ii = i + u - h;
        if (ii < 0 || ii >= H) continue;
        for (int v = 0; v < K; ++v) {
          const int jj = j + v - h;
          if (jj < 0 || jj >= W) continue;
          const double weight = q.b(oc, c, u, v);
          const double* src = src_channel + (static_cast<std::size_t>(ii) * W + jj) * slice;
          for (std::size_t e = 0; e < slice; ++e) dst[e] += weight * src[e];
        }
      }
    }
  }
}

// Transpose of stage B.
void grid_conv_transpose(const VolumeStack& y, const QueryObjectiveParams& q, VolumeStack& mid, Exec exec) {
  const VolumeShape& s = y.shape();
  const int K = q.kernel_size;
  const int h = K / 2;
  const int H = s.height;
  const int W = s.width;
  const std::size_t slice = s.slice_size();
  const int tasks = q.mid_channels * H * W;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int t = 0; t < tasks; ++t) {
    const int c = t / (H * W);
    const int i = (t / W) % H;
    const int j = t % W;
    double* dst = mid.channel(c).data() + (static_cast<std::size_t>(i) * W + j) * slice;
    std::fill(dst, dst + slice, 0.0);
    for (int oc = 0; oc < q.out_channels; ++oc) {
      const double* src_channel = y.channel(oc).data();
      for (int u = 0; u < K; ++u) {
        const int ii = i - u + h;
        if (ii < 0 || ii >= H) continue;
        for (int v = 0; v < K; ++v) {
          const int jj = j - v + h;
          if (jj < 0 || jj >= W) continue;
          const double weight = q.b(oc, c, u, v);
          const double* src = src_channel + (static_cast<std::size_t>(ii) * W + jj) * slice;
          for (std::size_t e = 0; e < slice; ++e) dst[e] += weight * src[e];
        }
      }
    }
  }
}

}  // namespace

VolumeStack apply_query_operator(const CorrespondenceVolume& x, const QueryObjectiveParams& q, Exec exec) {
  q.validate();
  if (x.size() != x.shape().size()) throw DimensionError("apply_query_operator: volume data length mismatch");
  VolumeStack mid(x.shape(), q.mid_channels);
  slice_conv(x, q, mid, exec);
  VolumeStack out(x.shape(), q.out_channels);
  grid_conv(mid, q, out, exec);
  return out;
}

CorrespondenceVolume conv_adjoint(const VolumeStack& y, const QueryObjectiveParams& q, Exec exec) {
  q.validate();
  if (y.channels() != q.out_channels) {
    throw DimensionError("conv_adjoint: field has " + std::to_string(y.channels()) + " channels, operator outputs " +
                         std::to_string(q.out_channels));
  }
  VolumeStack mid(y.shape(), q.mid_channels);
  grid_conv_transpose(y, q, mid, exec);
  CorrespondenceVolume x(y.shape());
  slice_conv_transpose(mid, q, x, exec);
  return x;
}

}  // namespace gocor
