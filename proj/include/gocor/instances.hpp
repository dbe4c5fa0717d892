#pragma once

#include <cstdint>
#include <random>

#include "gocor/feature_map.hpp"
#include "gocor/objective.hpp"

// Seeded random problems shared by the oracle suite, the CLI checks, tests
// and benchmarks.
namespace gocor::instances {

/// i.i.d. N(0, scale^2) entries.
FeatureMap random_map(std::mt19937_64& rng, int height, int width, int depth, double scale = 1.0);

/// Volume-shaped i.i.d. N(0, 1) field.
CorrespondenceVolume random_volume(std::mt19937_64& rng, const VolumeShape& shape);

/// Channel-stacked i.i.d. N(0, 1) field.
VolumeStack random_stack(std::mt19937_64& rng, const VolumeShape& shape, int channels);

struct Problem {
  FeatureMap f_r;
  FeatureMap f_q;
  FeatureMap w;
  CorrelationMode mode;
};

/// Grid sides in [2, max_side], depth in [1, max_depth], radius in [0, 2]
/// for local problems.
Problem random_problem(std::uint64_t seed, VolumeKind kind, int max_side = 8, int max_depth = 6);

/// Query operator with small random kernels: K in {1, 3}, channel counts in
/// [1, max_channels].
QueryObjectiveParams random_query_params(std::mt19937_64& rng, int max_channels = 3);

/// v+ = v- = 1, eta = 0: L_r becomes linear least squares.
ObjectiveParams convex_params(const QueryObjectiveParams& query, double lambda = 0.1);

}  // namespace gocor::instances
