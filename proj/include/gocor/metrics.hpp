#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gocor/common.hpp"

namespace gocor {

/// Dense H x W displacement field in pixels, stored as interleaved
/// single-precision (u, v) pairs. An empty mask marks every pixel valid.
struct FlowField {
  int height = 0;
  int width = 0;
  std::vector<float> uv;             // 2 * H * W, row-major
  std::vector<std::uint8_t> mask;    // empty, or H * W entries (nonzero = valid)

  FlowField() = default;
  FlowField(int height, int width);

  static FlowField constant(int height, int width, float u, float v);

  float u(int i, int j) const { return uv[2 * (static_cast<std::size_t>(i) * width + j)]; }
  float v(int i, int j) const { return uv[2 * (static_cast<std::size_t>(i) * width + j) + 1]; }
  void set(int i, int j, float u, float v);
  bool valid(int i, int j) const { return mask.empty() || mask[static_cast<std::size_t>(i) * width + j] != 0; }

  /// Throws on inconsistent lengths or non-finite valid entries.
  void validate() const;

  bool operator==(const FlowField&) const = default;
};

/// Average endpoint error over pixels valid in both fields.
double aepe(const FlowField& est, const FlowField& gt);

/// Percentage of valid pixels with endpoint error <= threshold.
double pck(const FlowField& est, const FlowField& gt, double threshold);

/// KITTI outlier percentage: error > 3 px and error / |gt| > 5%. Pixels with
/// |gt| = 0 count as outliers on the absolute test alone.
double f1_outlier_rate(const FlowField& est, const FlowField& gt);

enum class PckPooling {
  PerImageMean,  // PCK per image pair, then the mean over pairs
  AllPixels,     // one ratio over every valid pixel of the dataset
};

/// Dataset-level PCK over (estimate, ground truth) pairs.
double dataset_pck(std::span<const std::pair<FlowField, FlowField>> pairs, double threshold,
                   PckPooling pooling = PckPooling::PerImageMean);

}  // namespace gocor
