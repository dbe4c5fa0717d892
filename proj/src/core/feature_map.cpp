#include "gocor/feature_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gocor {

namespace {

void check_finite(std::span<const double> values, const char* what) {
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (!std::isfinite(values[n])) {
      throw ValidationError(std::string(what) + ": non-finite value at flat index " + std::to_string(n));
    }
  }
}

}  // namespace

FeatureMap::FeatureMap(int height, int width, int depth)
    : FeatureMap(height, width, depth,
                 std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0) *
                                     std::max(depth, 0))) {}

FeatureMap::FeatureMap(int height, int width, int depth, std::vector<double> data)
    : height_(height), width_(width), depth_(depth), data_(std::move(data)) {
  if (height <= 0 || width <= 0 || depth <= 0) {
    throw DimensionError("FeatureMap: H, W and D must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(height) * width * depth) {
    throw DimensionError("FeatureMap: data length " + std::to_string(data_.size()) + " != H*W*D");
  }
}

void FeatureMap::validate() const { check_finite(data_, "FeatureMap"); }

VolumeShape VolumeShape::for_map(const FeatureMap& f, CorrelationMode mode) {
  if (mode.kind == VolumeKind::Local && mode.radius < 0) {
    throw ValidationError("local correlation radius must be nonnegative");
  }
  return {mode.kind, f.height(), f.width(), mode.kind == VolumeKind::Local ? mode.radius : 0};
}

CorrespondenceVolume::CorrespondenceVolume(VolumeShape shape)
    : shape_(shape), data_(shape.size(), 0.0) {}

CorrespondenceVolume::CorrespondenceVolume(VolumeShape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw DimensionError("CorrespondenceVolume: data length " + std::to_string(data_.size()) +
                         " != " + std::to_string(shape_.size()));
  }
}

void CorrespondenceVolume::validate() const { check_finite(data_, "CorrespondenceVolume"); }

VolumeStack::VolumeStack(VolumeShape shape, int channels)
    : shape_(shape), channels_(channels), data_(shape.size() * static_cast<std::size_t>(channels), 0.0) {
  if (channels <= 0) throw DimensionError("VolumeStack: channel count must be positive");
}

}  // namespace gocor
