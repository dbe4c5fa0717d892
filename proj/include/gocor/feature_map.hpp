#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gocor/common.hpp"

namespace gocor {

/// H x W grid of D-dimensional vectors, stored row-major as (i, j, d).
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int depth);
  FeatureMap(int height, int width, int depth, std::vector<double> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int depth() const noexcept { return depth_; }
  int locations() const noexcept { return height_ * width_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& at(int i, int j, int d) { return data_[index(i, j, d)]; }
  double at(int i, int j, int d) const { return data_[index(i, j, d)]; }

  std::span<double> cell(int i, int j) {
    return {data_.data() + index(i, j, 0), static_cast<std::size_t>(depth_)};
  }
  std::span<const double> cell(int i, int j) const {
    return {data_.data() + index(i, j, 0), static_cast<std::size_t>(depth_)};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const FeatureMap& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && depth_ == other.depth_;
  }

  /// Throws ValidationError if any value is NaN or infinite.
  void validate() const;

  bool operator==(const FeatureMap&) const = default;

 private:
  std::size_t index(int i, int j, int d) const noexcept {
    return (static_cast<std::size_t>(i) * width_ + j) * depth_ + d;
  }

  int height_ = 0;
  int width_ = 0;
  int depth_ = 0;
  std::vector<double> data_;
};

enum class VolumeKind : std::uint8_t { Global = 0, Local = 1 };

/// Which correlation is evaluated: all pairs, or displacements within a
/// square search radius.
struct CorrelationMode {
  VolumeKind kind = VolumeKind::Global;
  int radius = 0;

  static CorrelationMode global() { return {VolumeKind::Global, 0}; }
  static CorrelationMode local(int radius) { return {VolumeKind::Local, radius}; }

  bool operator==(const CorrelationMode&) const = default;
};

/// Geometry of a 4D correspondence volume. Global volumes have an H x W
/// slice per reference location indexed by absolute query position (k, l);
/// local volumes have a (2R+1) x (2R+1) slice indexed by displacement.
struct VolumeShape {
  VolumeKind kind = VolumeKind::Global;
  int height = 0;
  int width = 0;
  int radius = 0;

  static VolumeShape for_map(const FeatureMap& f, CorrelationMode mode);

  int slice_height() const noexcept { return kind == VolumeKind::Global ? height : 2 * radius + 1; }
  int slice_width() const noexcept { return kind == VolumeKind::Global ? width : 2 * radius + 1; }
  std::size_t slice_size() const noexcept {
    return static_cast<std::size_t>(slice_height()) * slice_width();
  }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(height) * width * slice_size();
  }
  CorrelationMode mode() const noexcept { return {kind, radius}; }

  /// Slice row/column of the entry pairing (i, j) with absolute query
  /// position (qi, qj). Local volumes offset by R so the zero displacement
  /// sits at (R, R).
  int slice_row(int i, int qi) const noexcept { return kind == VolumeKind::Global ? qi : qi - i + radius; }
  int slice_col(int j, int qj) const noexcept { return kind == VolumeKind::Global ? qj : qj - j + radius; }

  /// Squared grid distance between (i, j) and the query position of slice
  /// entry (a, b).
  int squared_distance(int i, int j, int a, int b) const noexcept {
    const int di = kind == VolumeKind::Global ? a - i : a - radius;
    const int dj = kind == VolumeKind::Global ? b - j : b - radius;
    return di * di + dj * dj;
  }
  /// Largest value squared_distance can take.
  int max_squared_distance() const noexcept {
    if (kind == VolumeKind::Global) return (height - 1) * (height - 1) + (width - 1) * (width - 1);
    return 2 * radius * radius;
  }

  bool operator==(const VolumeShape&) const = default;
};

/// Dense 4D volume (i, j, a, b) with (a, b) the slice coordinates defined by
/// VolumeShape. Also used for any volume-shaped field (residuals, weights).
class CorrespondenceVolume {
 public:
  CorrespondenceVolume() = default;
  explicit CorrespondenceVolume(VolumeShape shape);
  CorrespondenceVolume(VolumeShape shape, std::vector<double> data);

  const VolumeShape& shape() const noexcept { return shape_; }
  VolumeKind kind() const noexcept { return shape_.kind; }
  std::size_t size() const noexcept { return data_.size(); }

  /// Global: (k, l) absolute. Local: (k, l) displacement in [-R, R].
  double& at(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
  double at(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }

  std::span<double> slice(int i, int j) {
    return {data_.data() + slice_offset(i, j), shape_.slice_size()};
  }
  std::span<const double> slice(int i, int j) const {
    return {data_.data() + slice_offset(i, j), shape_.slice_size()};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  void validate() const;

  bool operator==(const CorrespondenceVolume&) const = default;

 private:
  std::size_t slice_offset(int i, int j) const noexcept {
    return (static_cast<std::size_t>(i) * shape_.width + j) * shape_.slice_size();
  }
  std::size_t index(int i, int j, int k, int l) const noexcept {
    const int a = shape_.kind == VolumeKind::Global ? k : k + shape_.radius;
    const int b = shape_.kind == VolumeKind::Global ? l : l + shape_.radius;
    return slice_offset(i, j) + static_cast<std::size_t>(a) * shape_.slice_width() + b;
  }

  VolumeShape shape_;
  std::vector<double> data_;
};

/// C channels of volume-shaped data, channel-major. Output of the 4D query
/// operator.
class VolumeStack {
 public:
  VolumeStack() = default;
  VolumeStack(VolumeShape shape, int channels);

  const VolumeShape& shape() const noexcept { return shape_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> channel(int c) {
    return {data_.data() + static_cast<std::size_t>(c) * shape_.size(), shape_.size()};
  }
  std::span<const double> channel(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * shape_.size(), shape_.size()};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const VolumeStack&) const = default;

 private:
  VolumeShape shape_;
  int channels_ = 0;
  std::vector<double> data_;
};

}  // namespace gocor
