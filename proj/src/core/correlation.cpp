#include "gocor/correlation.hpp"

#include <algorithm>
#include <cstddef>
#include <string>

namespace gocor {

namespace {

void check_pair(const FeatureMap& w, const FeatureMap& f, const char* op) {
  if (!w.same_shape(f)) {
    throw DimensionError(std::string(op) + ": filter map " + std::to_string(w.height()) + "x" +
                         std::to_string(w.width()) + "x" + std::to_string(w.depth()) +
                         " does not match feature map " + std::to_string(f.height()) + "x" +
                         std::to_string(f.width()) + "x" + std::to_string(f.depth()));
  }
  w.validate();
  f.validate();
}

inline double dot_cell(const double* a, const double* b, int depth) {
  double acc = 0.0;
  for (int d = 0; d < depth; ++d) acc += a[d] * b[d];
  return acc;
}

}  // namespace

namespace detail {

void correlate_into(const FeatureMap& w, const FeatureMap& f, CorrespondenceVolume& out, Exec exec) {
  const VolumeShape& s = out.shape();
  const int H = s.height;
  const int W = s.width;
  const int D = w.depth();
  const int locations = H * W;
  const double* wd = w.data().data();
  const double* fd = f.data().data();
  double* od = out.data().data();
  const std::size_t slice = s.slice_size();

  if (s.kind == VolumeKind::Global) {
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (int p = 0; p < locations; ++p) {
      const double* wp = wd + static_cast<std::size_t>(p) * D;
      double* op = od + static_cast<std::size_t>(p) * slice;
      for (int q = 0; q < locations; ++q) op[q] = dot_cell(wp, fd + static_cast<std::size_t>(q) * D, D);
    }
    return;
  }

  const int R = s.radius;
  const int side = 2 * R + 1;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int p = 0; p < locations; ++p) {
    const int i = p / W;
    const int j = p % W;
    const double* wp = wd + static_cast<std::size_t>(p) * D;
    double* op = od + static_cast<std::size_t>(p) * slice;
    for (int a = 0; a < side; ++a) {
      const int qi = i + a - R;
      for (int b = 0; b < side; ++b) {
        const int qj = j + b - R;
        const bool inside = qi >= 0 && qi < H && qj >= 0 && qj < W;
        op[a * side + b] =
            inside ? dot_cell(wp, fd + (static_cast<std::size_t>(qi) * W + qj) * D, D) : 0.0;
      }
    }
  }
}

void corr_adjoint_into(const CorrespondenceVolume& v, const FeatureMap& f, FeatureMap& out, Exec exec) {
  const VolumeShape& s = v.shape();
  const int H = s.height;
  const int W = s.width;
  const int D = f.depth();
  const int locations = H * W;
  const double* vd = v.data().data();
  const double* fd = f.data().data();
  double* gd = out.data().data();
  const std::size_t slice = s.slice_size();

  if (s.kind == VolumeKind::Global) {
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (int p = 0; p < locations; ++p) {
      const double* vp = vd + static_cast<std::size_t>(p) * slice;
      double* gp = gd + static_cast<std::size_t>(p) * D;
      std::fill(gp, gp + D, 0.0);
      for (int q = 0; q < locations; ++q) {
        const double c = vp[q];
        const double* fq = fd + static_cast<std::size_t>(q) * D;
        for (int d = 0; d < D; ++d) gp[d] += c * fq[d];
      }
    }
    return;
  }

  const int R = s.radius;
  const int side = 2 * R + 1;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int p = 0; p < locations; ++p) {
    const int i = p / W;
    const int j = p % W;
    const double* vp = vd + static_cast<std::size_t>(p) * slice;
    double* gp = gd + static_cast<std::size_t>(p) * D;
    std::fill(gp, gp + D, 0.0);
    for (int a = 0; a < side; ++a) {
      const int qi = i + a - R;
      if (qi < 0 || qi >= H) continue;
      for (int b = 0; b < side; ++b) {
        const int qj = j + b - R;
        if (qj < 0 || qj >= W) continue;
        const double c = vp[a * side + b];
        const double* fq = fd + (static_cast<std::size_t>(qi) * W + qj) * D;
        for (int d = 0; d < D; ++d) gp[d] += c * fq[d];
      }
    }
  }
}

}  // namespace detail

CorrespondenceVolume correlate(const FeatureMap& w, const FeatureMap& f, CorrelationMode mode, Exec exec) {
  check_pair(w, f, "correlate");
  CorrespondenceVolume out(VolumeShape::for_map(f, mode));
  detail::correlate_into(w, f, out, exec);
  return out;
}

CorrespondenceVolume global_corr(const FeatureMap& w, const FeatureMap& f, Exec exec) {
  return correlate(w, f, CorrelationMode::global(), exec);
}

CorrespondenceVolume local_corr(const FeatureMap& w, const FeatureMap& f, int radius, Exec exec) {
  return correlate(w, f, CorrelationMode::local(radius), exec);
}

FeatureMap corr_adjoint(const CorrespondenceVolume& v, const FeatureMap& f, Exec exec) {
  const VolumeShape& s = v.shape();
  if (s.height != f.height() || s.width != f.width()) {
    throw DimensionError("corr_adjoint: volume grid " + std::to_string(s.height) + "x" +
                         std::to_string(s.width) + " does not match feature map " +
                         std::to_string(f.height()) + "x" + std::to_string(f.width()));
  }
  if (v.size() != s.size()) throw DimensionError("corr_adjoint: volume data length mismatch");
  f.validate();
  FeatureMap out(f.height(), f.width(), f.depth());
  detail::corr_adjoint_into(v, f, out, exec);
  return out;
}

std::vector<double> spatial_mean(const FeatureMap& f) {
  f.validate();
  const int D = f.depth();
  std::vector<double> mean(static_cast<std::size_t>(D), 0.0);
  for (int i = 0; i < f.height(); ++i) {
    for (int j = 0; j < f.width(); ++j) {
      const auto c = f.cell(i, j);
      for (int d = 0; d < D; ++d) mean[d] += c[d];
    }
  }
  for (double& m : mean) m /= static_cast<double>(f.locations());
  return mean;
}

}  // namespace gocor
