#include "gocor/synthbench.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "gocor/correlation.hpp"

namespace gocor {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Separable Gaussian blur over (i, j) with wrap-around, per channel.
void blur(std::vector<double>& x, int h, int w, int depth, double sigma) {
  if (sigma <= 0.0) return;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double norm = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    taps[t + radius] = std::exp(-0.5 * t * t / (sigma * sigma));
    norm += taps[t + radius];
  }
  for (double& t : taps) t /= norm;

  auto wrap = [](int v, int n) { return ((v % n) + n) % n; };
  std::vector<double> tmp(x.size(), 0.0);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int t = -radius; t <= radius; ++t) {
        const std::size_t src = (static_cast<std::size_t>(wrap(i + t, h)) * w + j) * depth;
        const std::size_t dst = (static_cast<std::size_t>(i) * w + j) * depth;
        for (int d = 0; d < depth; ++d) tmp[dst + d] += taps[t + radius] * x[src + d];
      }
    }
  }
  std::fill(x.begin(), x.end(), 0.0);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int t = -radius; t <= radius; ++t) {
        const std::size_t src = (static_cast<std::size_t>(i) * w + wrap(j + t, w)) * depth;
        const std::size_t dst = (static_cast<std::size_t>(i) * w + j) * depth;
        for (int d = 0; d < depth; ++d) x[dst + d] += taps[t + radius] * tmp[src + d];
      }
    }
  }
}

FeatureMap smooth_field(std::mt19937_64& rng, int h, int w, int depth, double sigma) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(h) * w * depth);
  for (double& v : x) v = normal(rng);
  blur(x, h, w, depth, sigma);
  return FeatureMap(h, w, depth, std::move(x));
}

double cell_norm(std::span<const double> c) {
  double s = 0.0;
  for (double v : c) s += v * v;
  return std::sqrt(s);
}

// Scales f so its mean cell norm equals `amplitude`.
void set_mean_norm(FeatureMap& f, double amplitude) {
  double total = 0.0;
  for (int i = 0; i < f.height(); ++i) {
    for (int j = 0; j < f.width(); ++j) total += cell_norm(f.cell(i, j));
  }
  const double mean = total / f.locations();
  if (mean == 0.0) return;
  for (double& v : f.data()) v *= amplitude / mean;
}

double distance(GridPos a, GridPos b) {
  const double di = a.i - b.i;
  const double dj = a.j - b.j;
  return std::sqrt(di * di + dj * dj);
}

}  // namespace

void SceneOptions::validate() const {
  if (height <= 0 || width <= 0 || depth <= 0) throw ValidationError("scene: H, W and D must be positive");
  if (depth < 2) throw ValidationError("scene: depth must be >= 2 to hold an orthogonal copy component");
  if (n_repeats < 2) throw ValidationError("scene: n_repeats must be >= 2");
  if (patch_size <= 0) throw ValidationError("scene: patch_size must be positive");
  if (!(noise_std >= 0.0) || !(background_amplitude >= 0.0) || !(copy_perturbation >= 0.0) || !(smoothing >= 0.0) ||
      !(exclusion_radius >= 0.0)) {
    throw ValidationError("scene: noise, amplitudes, smoothing and exclusion radius must be >= 0");
  }
}

SyntheticScene make_repetitive_scene(const SceneOptions& opts) {
  opts.validate();
  const int H = opts.height;
  const int W = opts.width;
  const int D = opts.depth;
  const int ps = opts.patch_size;
  const int dy = opts.shift[0];
  const int dx = opts.shift[1];
  std::mt19937_64 rng(opts.seed);

  // Origins keep both the copy and its shifted image inside the grid.
  const int i_lo = std::max(0, -dy);
  const int i_hi = std::min(H - ps, H - ps - dy);
  const int j_lo = std::max(0, -dx);
  const int j_hi = std::min(W - ps, W - ps - dx);
  if (i_hi < i_lo || j_hi < j_lo) throw ValidationError("scene: patch and shift do not fit in the grid");

  SyntheticScene scene;
  scene.exclusion_radius = opts.exclusion_radius;
  std::uniform_int_distribution<int> pick_i(i_lo, i_hi);
  std::uniform_int_distribution<int> pick_j(j_lo, j_hi);
  const int centre = ps / 2;
  constexpr int kAttempts = 10000;
  for (int attempt = 0; attempt < kAttempts && static_cast<int>(scene.copy_origins.size()) < opts.n_repeats;
       ++attempt) {
    const GridPos cand{pick_i(rng), pick_j(rng)};
    bool ok = true;
    for (const GridPos& o : scene.copy_origins) {
      // One empty cell between copies, and centres outside each other's
      // exclusion disk.
      const bool apart = std::abs(cand.i - o.i) >= ps + 1 || std::abs(cand.j - o.j) >= ps + 1;
      const bool far = distance(cand, o) > opts.exclusion_radius;
      ok = ok && apart && far;
    }
    if (ok) scene.copy_origins.push_back(cand);
  }
  if (static_cast<int>(scene.copy_origins.size()) < opts.n_repeats) {
    throw ValidationError("scene: cannot place " + std::to_string(opts.n_repeats) + " disjoint copies of a " +
                          std::to_string(ps) + "x" + std::to_string(ps) + " patch");
  }

  FeatureMap reference = smooth_field(rng, H, W, D, opts.smoothing);
  set_mean_norm(reference, opts.background_amplitude);

  FeatureMap patch = smooth_field(rng, ps, ps, D, opts.smoothing);
  for (int a = 0; a < ps; ++a) {
    for (int b = 0; b < ps; ++b) {
      auto c = patch.cell(a, b);
      const double n = cell_norm(c);
      for (double& v : c) v /= n;
    }
  }

  for (int copy = 0; copy < opts.n_repeats; ++copy) {
    const GridPos o = scene.copy_origins[copy];
    FeatureMap extra = smooth_field(rng, ps, ps, D, opts.smoothing);
    for (int a = 0; a < ps; ++a) {
      for (int b = 0; b < ps; ++b) {
        const auto p = patch.cell(a, b);
        auto dst = reference.cell(o.i + a, o.j + b);
        if (copy == 0 || opts.copy_perturbation == 0.0) {
          std::copy(p.begin(), p.end(), dst.begin());
          continue;
        }
        auto e = extra.cell(a, b);
        double proj = 0.0;
        for (int d = 0; d < D; ++d) proj += e[d] * p[d];
        for (int d = 0; d < D; ++d) e[d] -= proj * p[d];
        const double n = cell_norm(e);
        for (int d = 0; d < D; ++d) dst[d] = p[d] + opts.copy_perturbation * (e[d] / n);
      }
    }
  }

  FeatureMap query = smooth_field(rng, H, W, D, opts.smoothing);
  set_mean_norm(query, opts.background_amplitude);
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      const int si = i - dy;
      const int sj = j - dx;
      if (si < 0 || si >= H || sj < 0 || sj >= W) continue;
      const auto src = reference.cell(si, sj);
      std::copy(src.begin(), src.end(), query.cell(i, j).begin());
    }
  }
  if (opts.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, opts.noise_std);
    for (double& v : query.data()) v += noise(rng);
  }

  scene.reference = std::move(reference);
  scene.query = std::move(query);
  scene.gt_flow = FlowField::constant(H, W, static_cast<float>(dx), static_cast<float>(dy));
  scene.probe = {scene.copy_origins[0].i + centre, scene.copy_origins[0].j + centre};
  scene.true_match = {scene.probe.i + dy, scene.probe.j + dx};
  for (int copy = 1; copy < opts.n_repeats; ++copy) {
    const GridPos o = scene.copy_origins[copy];
    scene.distractors.push_back({o.i + centre + dy, o.j + centre + dx});
  }
  return scene;
}

namespace {

// Calls fn(query_pos, value) for every in-grid entry of the probe's slice.
template <typename Fn>
void for_each_slice_entry(const CorrespondenceVolume& volume, GridPos probe, Fn fn) {
  const VolumeShape& s = volume.shape();
  if (probe.i < 0 || probe.i >= s.height || probe.j < 0 || probe.j >= s.width) {
    throw ValidationError("probe (" + std::to_string(probe.i) + ", " + std::to_string(probe.j) + ") outside the grid");
  }
  const auto slice = volume.slice(probe.i, probe.j);
  const int sh = s.slice_height();
  const int sw = s.slice_width();
  for (int a = 0; a < sh; ++a) {
    for (int b = 0; b < sw; ++b) {
      const GridPos q = s.kind == VolumeKind::Global ? GridPos{a, b}
                                                     : GridPos{probe.i + a - s.radius, probe.j + b - s.radius};
      if (q.i < 0 || q.i >= s.height || q.j < 0 || q.j >= s.width) continue;
      fn(q, slice[a * sw + b]);
    }
  }
}

}  // namespace

double margin_statistic(const CorrespondenceVolume& volume, GridPos probe, GridPos true_loc, double exclusion_radius) {
  bool found = false;
  double truth = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for_each_slice_entry(volume, probe, [&](GridPos q, double value) {
    if (q == true_loc) {
      found = true;
      truth = value;
    } else if (distance(q, true_loc) > exclusion_radius) {
      best = std::max(best, value);
    }
  });
  if (!found) throw ValidationError("margin_statistic: true location is not covered by the probe's slice");
  if (best == -std::numeric_limits<double>::infinity()) {
    throw ValidationError("margin_statistic: no slice entry lies outside the exclusion radius");
  }
  return truth - best;
}

GridPos slice_argmax(const CorrespondenceVolume& volume, GridPos probe) {
  GridPos arg{-1, -1};
  double best = -std::numeric_limits<double>::infinity();
  for_each_slice_entry(volume, probe, [&](GridPos q, double value) {
    if (value > best) {
      best = value;
      arg = q;
    }
  });
  return arg;
}

DisambiguationReport run_disambiguation_experiment(const SyntheticScene& scene, const ObjectiveParams& params,
                                                   const SolverConfig& cfg, const InitializerConfig& init_cfg) {
  DisambiguationReport report;
  const auto t0 = Clock::now();
  bool first = true;
  double volume_ms = 0.0;
  auto observe = [&](int n, const FeatureMap& w) {
    if (first) {
      report.timings.init_ms = ms_since(t0);
      first = false;
    }
    const auto tv = Clock::now();
    const CorrespondenceVolume volume = correlate(w, scene.query, cfg.mode, cfg.exec);
    IterationOutcome out;
    out.iterations = n;
    out.margin = margin_statistic(volume, scene.probe, scene.true_match, scene.exclusion_radius);
    out.argmax_correct = slice_argmax(volume, scene.probe) == scene.true_match;
    out.best_distractor = -std::numeric_limits<double>::infinity();
    for_each_slice_entry(volume, scene.probe, [&](GridPos q, double value) {
      out.scale = std::max(out.scale, std::abs(value));
      if (q == scene.true_match) out.true_confidence = value;
    });
    out.best_distractor = out.true_confidence - out.margin;
    report.per_iteration.push_back(out);
    volume_ms += ms_since(tv);
  };
  const SolveResult solved = run_gocor(scene.reference, scene.query, params, cfg, init_cfg, observe);
  const double total_ms = ms_since(t0);
  for (std::size_t n = 0; n < report.per_iteration.size(); ++n) {
    report.per_iteration[n].loss = solved.trace.losses[n];
  }
  report.timings.volume_ms = volume_ms;
  report.timings.solve_ms = total_ms - volume_ms - report.timings.init_ms;
  return report;
}

}  // namespace gocor
