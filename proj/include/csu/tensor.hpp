#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csu/error.hpp"

namespace csu {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Batch, channel, height, width.
struct Shape {
  Index batch = 0;
  Index channels = 0;
  Index height = 0;
  Index width = 0;

  Index plane_size() const { return height * width; }
  Index numel() const { return batch * channels * height * width; }
  bool operator==(const Shape&) const = default;
};

inline std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.batch) + "," + std::to_string(s.channels) + "," +
         std::to_string(s.height) + "," + std::to_string(s.width) + ")";
}

/// Batched 4-D feature map stored row-major in (b, c, h, w) order.
///
/// Construction validates the shape and rejects NaN/Inf, so every consumer may
/// assume finite data. Instances are immutable once built.
template <typename Scalar>
class FeatureMap {
  static_assert(std::is_same_v<Scalar, float> || std::is_same_v<Scalar, double>,
                "FeatureMap supports float and double only");

 public:
  using value_type = Scalar;
  using PlaneArray = Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>>;

  static FeatureMap create(const Shape& shape, std::vector<Scalar> data) {
    if (shape.batch < 1 || shape.channels < 1 || shape.height < 1 || shape.width < 1)
      throw DimensionError("feature map dims must all be >= 1, got " + to_string(shape));
    if (static_cast<Index>(data.size()) != shape.numel())
      throw DimensionError("feature map " + to_string(shape) + " needs " +
                           std::to_string(shape.numel()) + " values, got " +
                           std::to_string(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i)
      if (!std::isfinite(data[i])) throw NonFiniteError(i);
    return FeatureMap(shape, std::move(data));
  }

  const Shape& shape() const { return shape_; }
  std::span<const Scalar> data() const { return data_; }

  /// The H*W values of instance `b`, channel `c`, in (h, w) row-major order.
  std::span<const Scalar> channel_plane(Index b, Index c) const {
    check_plane(b, c);
    return std::span<const Scalar>(data_).subspan(offset(b, c), shape_.plane_size());
  }

  PlaneArray plane_array(Index b, Index c) const {
    check_plane(b, c);
    return PlaneArray(data_.data() + offset(b, c), shape_.plane_size());
  }

  /// Instances [first, first + count) as a new map.
  FeatureMap slice_batch(Index first, Index count) const {
    if (first < 0 || count < 1 || first + count > shape_.batch)
      throw IndexError("batch slice [" + std::to_string(first) + ", " +
                       std::to_string(first + count) + ") outside batch of " +
                       std::to_string(shape_.batch));
    const std::size_t stride = static_cast<std::size_t>(shape_.channels * shape_.plane_size());
    Shape s = shape_;
    s.batch = count;
    std::vector<Scalar> out(data_.begin() + first * stride, data_.begin() + (first + count) * stride);
    return FeatureMap(s, std::move(out));
  }

 private:
  FeatureMap(const Shape& shape, std::vector<Scalar> data) : shape_(shape), data_(std::move(data)) {}

  std::size_t offset(Index b, Index c) const {
    return static_cast<std::size_t>((b * shape_.channels + c) * shape_.plane_size());
  }

  void check_plane(Index b, Index c) const {
    if (b < 0 || b >= shape_.batch || c < 0 || c >= shape_.channels)
      throw IndexError("plane (b=" + std::to_string(b) + ", c=" + std::to_string(c) +
                       ") outside " + to_string(shape_));
  }

  Shape shape_;
  std::vector<Scalar> data_;
};

template <typename Scalar>
FeatureMap<Scalar> make_feature_map(const Shape& shape, std::vector<Scalar> data) {
  return FeatureMap<Scalar>::create(shape, std::move(data));
}

/// Concatenates maps with matching (C, H, W) along the batch axis.
template <typename Scalar>
FeatureMap<Scalar> concat_batches(std::span<const FeatureMap<Scalar>> parts) {
  if (parts.empty()) throw DimensionError("concat_batches: no inputs");
  Shape s = parts.front().shape();
  s.batch = 0;
  std::vector<Scalar> out;
  for (const auto& p : parts) {
    const Shape& ps = p.shape();
    if (ps.channels != s.channels || ps.height != s.height || ps.width != s.width)
      throw DimensionError("concat_batches: shape " + to_string(ps) + " does not match");
    s.batch += ps.batch;
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  return FeatureMap<Scalar>::create(s, std::move(out));
}

}  // namespace csu
