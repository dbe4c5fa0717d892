#include "gocor/instances.hpp"

namespace gocor::instances {

FeatureMap random_map(std::mt19937_64& rng, int height, int width, int depth, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  FeatureMap f(height, width, depth);
  for (double& x : f.data()) x = normal(rng);
  return f;
}

CorrespondenceVolume random_volume(std::mt19937_64& rng, const VolumeShape& shape) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CorrespondenceVolume v(shape);
  for (double& x : v.data()) x = normal(rng);
  return v;
}

VolumeStack random_stack(std::mt19937_64& rng, const VolumeShape& shape, int channels) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VolumeStack v(shape, channels);
  for (double& x : v.data()) x = normal(rng);
  return v;
}

Problem random_problem(std::uint64_t seed, VolumeKind kind, int max_side, int max_depth) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> side(2, max_side);
  std::uniform_int_distribution<int> depth(1, max_depth);
  std::uniform_int_distribution<int> radius(0, 2);
  const int h = side(rng);
  const int w = side(rng);
  const int d = depth(rng);
  const CorrelationMode mode = kind == VolumeKind::Global ? CorrelationMode::global()
                                                          : CorrelationMode::local(radius(rng));
  Problem p{random_map(rng, h, w, d), random_map(rng, h, w, d), random_map(rng, h, w, d), mode};
  return p;
}

QueryObjectiveParams random_query_params(std::mt19937_64& rng, int max_channels) {
  std::uniform_int_distribution<int> channels(1, max_channels);
  std::bernoulli_distribution wide(0.75);
  const int k = wide(rng) ? 3 : 1;
  const int mid = channels(rng);
  const int out = channels(rng);
  return QueryObjectiveParams::seeded(k, mid, out, rng(), 1.0);
}

ObjectiveParams convex_params(const QueryObjectiveParams& query, double lambda) {
  ObjectiveParams p;
  p.reference = ReferenceObjectiveParams::linear();
  p.query = query;
  p.lambda = lambda;
  return p;
}

}  // namespace gocor::instances
