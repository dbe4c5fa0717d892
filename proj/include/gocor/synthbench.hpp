#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gocor/feature_map.hpp"
#include "gocor/metrics.hpp"
#include "gocor/solver.hpp"

namespace gocor {

struct GridPos {
  int i = 0;
  int j = 0;
  bool operator==(const GridPos&) const = default;
};

struct SceneOptions {
  int height = 32;
  int width = 32;
  int depth = 16;
  int n_repeats = 2;
  int patch_size = 5;
  std::array<int, 2> shift{2, 1};  // (dy, dx): query(i + dy, j + dx) = reference(i, j)
  double noise_std = 0.0;          // additive Gaussian noise on the query, per channel
  /// Mean feature norm of the background relative to the unit-norm patch.
  double background_amplitude = 0.1;
  /// Norm of the component added to every copy after the first, orthogonal
  /// cell by cell to the source patch. Under plain correlation with the
  /// unit-normalized source cell, every copy scores exactly like the source.
  double copy_perturbation = 0.5;
  /// Spatial Gaussian smoothing (in grid cells) of patch and background.
  double smoothing = 1.0;
  double exclusion_radius = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Reference/query pair with a repeated patch. The probe is the center cell
/// of the first copy; its true match is probe + shift and every other
/// copy's center, shifted, is a distractor.
struct SyntheticScene {
  FeatureMap reference;
  FeatureMap query;
  FlowField gt_flow;
  std::vector<GridPos> copy_origins;  // top-left cell of each copy in the reference
  std::vector<GridPos> distractors;   // in query coordinates
  GridPos probe;
  GridPos true_match;  // in query coordinates
  double exclusion_radius = 2.0;
};

/// Throws ValidationError when the copies cannot be placed disjointly with
/// their shifted images inside the grid.
SyntheticScene make_repetitive_scene(const SceneOptions& opts);

/// Confidence at true_loc minus the best confidence farther than
/// exclusion_radius from it, both read from the probe's slice. Positions are
/// absolute query coordinates for either volume kind.
double margin_statistic(const CorrespondenceVolume& volume, GridPos probe, GridPos true_loc, double exclusion_radius);

/// Query position of the largest entry in the probe's slice (first wins).
GridPos slice_argmax(const CorrespondenceVolume& volume, GridPos probe);

struct IterationOutcome {
  int iterations = 0;
  double margin = 0.0;
  bool argmax_correct = false;
  double true_confidence = 0.0;
  double best_distractor = 0.0;  // strongest confidence outside the exclusion disk
  double scale = 0.0;            // max |confidence| in the probe's slice
  double loss = 0.0;
};

struct PhaseTimings {
  double init_ms = 0.0;
  double solve_ms = 0.0;
  double volume_ms = 0.0;
};

struct DisambiguationReport {
  std::vector<IterationOutcome> per_iteration;  // iteration counts 0..cfg.num_iter
  PhaseTimings timings;
};

/// Runs the solver once and evaluates corr(w_n, f_q) for every iterate
/// w_0..w_N. Steepest descent is deterministic, so w_n equals a fresh solve
/// with num_iter = n.
DisambiguationReport run_disambiguation_experiment(const SyntheticScene& scene, const ObjectiveParams& params,
                                                   const SolverConfig& cfg, const InitializerConfig& init_cfg);

}  // namespace gocor
