#include "gocor/oracle.hpp"

#include <cmath>
#include <string>

namespace gocor::oracle {

namespace {

void same_grid(const FeatureMap& a, const FeatureMap& b, const char* op) {
  if (a.height() != b.height() || a.width() != b.width() || a.depth() != b.depth()) {
    throw DimensionError(std::string(op) + ": feature map shapes differ");
  }
}

double hat(double d, int k, int n, double delta) {
  const double knot = k * delta;
  if (k == n - 1) {
    if (d >= knot) return 1.0;
    if (d <= knot - delta) return 0.0;
    return (d - (knot - delta)) / delta;
  }
  if (d <= knot - delta || d >= knot + delta) return 0.0;
  return d < knot ? (d - (knot - delta)) / delta : ((knot + delta) - d) / delta;
}

double weight_at(const WeightFunction& wf, double d) {
  double s = 0.0;
  for (int k = 0; k < wf.count(); ++k) s += wf.coefficients[k] * hat(d, k, wf.count(), wf.delta);
  return wf.squash == Squash::Sigmoid ? 1.0 / (1.0 + std::exp(-s)) : s;
}

double penalty(double c, double vp, double vn, double eta) {
  if (eta > 0.0) {
    return (vp - vn) / 2.0 * (std::sqrt(c * c + eta * eta) - eta) + (vp + vn) / 2.0 * c;
  }
  return c < 0.0 ? vn * c : vp * c;
}

double penalty_slope(double c, double vp, double vn, double eta) {
  if (eta > 0.0) return (vp - vn) / 2.0 * c / std::sqrt(c * c + eta * eta) + (vp + vn) / 2.0;
  if (c == 0.0) return (vp + vn) / 2.0;
  return c < 0.0 ? vn : vp;
}

// Query position (qi, qj) of slice entry (a, b) at reference (i, j).
void query_pos(const VolumeShape& s, int i, int j, int a, int b, int& qi, int& qj) {
  if (s.kind == VolumeKind::Global) {
    qi = a;
    qj = b;
  } else {
    qi = i + a - s.radius;
    qj = j + b - s.radius;
  }
}

struct Entry {
  double vp, vn, y;
};

Entry entry_weights(const ReferenceObjectiveParams& p, const VolumeShape& s, int i, int j, int a, int b) {
  int qi = 0;
  int qj = 0;
  query_pos(s, i, j, a, b, qi, qj);
  const double d = std::hypot(static_cast<double>(qi - i), static_cast<double>(qj - j));
  const double vp = weight_at(p.positive_weight, d);
  return {vp, vp * weight_at(p.negative_ratio, d), vp * weight_at(p.target_shape, d)};
}

template <typename Fn>
void each_entry(const VolumeShape& s, Fn fn) {
  for (int i = 0; i < s.height; ++i) {
    for (int j = 0; j < s.width; ++j) {
      for (int a = 0; a < s.slice_height(); ++a) {
        for (int b = 0; b < s.slice_width(); ++b) fn(i, j, a, b);
      }
    }
  }
}

double sq_sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

CorrespondenceVolume brute_corr(const FeatureMap& w, const FeatureMap& f, CorrelationMode mode) {
  same_grid(w, f, "brute_corr");
  if (mode.kind == VolumeKind::Local && mode.radius < 0) throw ValidationError("brute_corr: negative radius");
  VolumeShape s{mode.kind, f.height(), f.width(), mode.kind == VolumeKind::Local ? mode.radius : 0};
  std::vector<double> out;
  out.reserve(s.size());
  for (int i = 0; i < s.height; ++i) {
    for (int j = 0; j < s.width; ++j) {
      for (int a = 0; a < s.slice_height(); ++a) {
        for (int b = 0; b < s.slice_width(); ++b) {
          int k = 0;
          int l = 0;
          query_pos(s, i, j, a, b, k, l);
          double c = 0.0;
          if (k >= 0 && k < s.height && l >= 0 && l < s.width) {
            for (int d = 0; d < f.depth(); ++d) c += w.at(i, j, d) * f.at(k, l, d);
          }
          out.push_back(c);
        }
      }
    }
  }
  return CorrespondenceVolume(s, std::move(out));
}

VolumeStack naive_conv4d_seq(const CorrespondenceVolume& x, const QueryObjectiveParams& q) {
  const VolumeShape& s = x.shape();
  if (x.size() != s.size()) throw DimensionError("naive_conv4d_seq: volume data length mismatch");
  const std::size_t kk = static_cast<std::size_t>(q.kernel_size) * q.kernel_size;
  if (q.kernel_size <= 0 || q.kernel_size % 2 == 0 || q.kernel_a.size() != kk * q.mid_channels ||
      q.kernel_b.size() != kk * q.mid_channels * q.out_channels) {
    throw DimensionError("naive_conv4d_seq: kernel sizes do not match the channel counts");
  }
  const int K = q.kernel_size;
  const int pad = (K - 1) / 2;
  const int H = s.height;
  const int W = s.width;
  const int A = s.slice_height();
  const int B = s.slice_width();
  auto in = [&](int i, int j, int a, int b) {
    if (a < 0 || a >= A || b < 0 || b >= B) return 0.0;
    return x.slice(i, j)[static_cast<std::size_t>(a) * B + b];
  };

  // First layer: every slice filtered over (a, b).
  VolumeStack mid(s, q.mid_channels);
  for (int c = 0; c < q.mid_channels; ++c) {
    auto m = mid.channel(c);
    std::size_t n = 0;
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < W; ++j) {
        for (int a = 0; a < A; ++a) {
          for (int b = 0; b < B; ++b) {
            double acc = 0.0;
            for (int u = 0; u < K; ++u) {
              for (int v = 0; v < K; ++v) {
                const int aa = a + u - pad;
                const int bb = b + v - pad;
                if (aa < 0 || aa >= A || bb < 0 || bb >= B) continue;
                acc += q.kernel_a[(static_cast<std::size_t>(c) * K + u) * K + v] * in(i, j, aa, bb);
              }
            }
            m[n++] = acc;
          }
        }
      }
    }
  }

  // Second layer: every slice entry filtered over (i, j), mixing channels.
  auto mid_at = [&](int c, int i, int j, int a, int b) {
    return mid.channel(c)[((static_cast<std::size_t>(i) * W + j) * A + a) * B + b];
  };
  VolumeStack out(s, q.out_channels);
  for (int o = 0; o < q.out_channels; ++o) {
    auto r = out.channel(o);
    std::size_t n = 0;
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < W; ++j) {
        for (int a = 0; a < A; ++a) {
          for (int b = 0; b < B; ++b) {
            double acc = 0.0;
            for (int c = 0; c < q.mid_channels; ++c) {
              for (int u = 0; u < K; ++u) {
                for (int v = 0; v < K; ++v) {
                  const int ii = i + u - pad;
                  const int jj = j + v - pad;
                  if (ii < 0 || ii >= H || jj < 0 || jj >= W) continue;
                  const double wt = q.kernel_b[((static_cast<std::size_t>(o) * q.mid_channels + c) * K + u) * K + v];
                  acc += wt * mid_at(c, ii, jj, a, b);
                }
              }
            }
            r[n++] = acc;
          }
        }
      }
    }
  }
  return out;
}

double naive_total_loss(const FeatureMap& w, const FeatureMap& f_r, const FeatureMap& f_q,
                        const ObjectiveParams& params, CorrelationMode mode, bool use_query) {
  same_grid(w, f_r, "naive_total_loss");
  same_grid(w, f_q, "naive_total_loss");
  const ReferenceObjectiveParams& p = params.reference;
  const CorrespondenceVolume c = brute_corr(w, f_r, mode);
  const VolumeShape& s = c.shape();
  double loss = 0.0;
  each_entry(s, [&](int i, int j, int a, int b) {
    const Entry e = entry_weights(p, s, i, j, a, b);
    const double r = penalty(c.slice(i, j)[static_cast<std::size_t>(a) * s.slice_width() + b], e.vp, e.vn, p.eta) - e.y;
    loss += r * r;
  });
  if (use_query) loss += sq_sum(naive_conv4d_seq(brute_corr(w, f_q, mode), params.query).data());
  return loss + params.lambda * params.lambda * sq_sum(w.data());
}

FeatureMap numeric_grad(const LossFn& loss, const FeatureMap& w, double h) {
  if (!(h > 0.0)) throw ValidationError("numeric_grad: step must be > 0");
  FeatureMap g(w.height(), w.width(), w.depth());
  FeatureMap probe = w;
  auto pd = probe.data();
  auto gd = g.data();
  for (std::size_t n = 0; n < pd.size(); ++n) {
    const double x = pd[n];
    pd[n] = x + h;
    const double up = loss(probe);
    pd[n] = x - h;
    const double down = loss(probe);
    pd[n] = x;
    gd[n] = (up - down) / (2.0 * h);
  }
  return g;
}

double line_search_oracle(const FeatureMap& w, const FeatureMap& g, const FeatureMap& f_r, const FeatureMap& f_q,
                          const ObjectiveParams& params, const SolverConfig& cfg) {
  same_grid(w, g, "line_search_oracle");
  same_grid(w, f_r, "line_search_oracle");
  same_grid(w, f_q, "line_search_oracle");
  const ReferenceObjectiveParams& p = params.reference;
  const double lam2 = params.lambda * params.lambda;

  // phi(alpha) = sum ||r - alpha Jg||^2 + lambda^2 ||w - alpha g||^2, so
  // phi'(alpha) = 0 at alpha = <r, Jg> / ||Jg||^2 summed over blocks.
  double num = 0.0;
  double den = 0.0;

  const CorrespondenceVolume cw = brute_corr(w, f_r, cfg.mode);
  const CorrespondenceVolume cg = brute_corr(g, f_r, cfg.mode);
  const VolumeShape& s = cw.shape();
  each_entry(s, [&](int i, int j, int a, int b) {
    const std::size_t e = static_cast<std::size_t>(a) * s.slice_width() + b;
    const Entry wt = entry_weights(p, s, i, j, a, b);
    const double c = cw.slice(i, j)[e];
    const double r = penalty(c, wt.vp, wt.vn, p.eta) - wt.y;
    const double jg = penalty_slope(c, wt.vp, wt.vn, p.eta) * cg.slice(i, j)[e];
    num += r * jg;
    den += jg * jg;
  });

  if (cfg.use_query) {
    const VolumeStack rq = naive_conv4d_seq(brute_corr(w, f_q, cfg.mode), params.query);
    const VolumeStack jq = naive_conv4d_seq(brute_corr(g, f_q, cfg.mode), params.query);
    for (std::size_t n = 0; n < rq.size(); ++n) {
      num += rq.data()[n] * jq.data()[n];
      den += jq.data()[n] * jq.data()[n];
    }
  }

  double wg = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) wg += w.data()[n] * g.data()[n];
  num += lam2 * wg;
  den += lam2 * sq_sum(g.data());
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace gocor::oracle
