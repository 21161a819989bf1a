#pragma once

// Image containers. Every image is a list of channel planes, each plane a
// row-major Eigen array indexed (row, col) = (y, x).

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dichotome/errors.hpp"

namespace dichotome {

using Index = Eigen::Index;

template <typename T>
using Plane = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

template <typename T>
void check_planes(const std::vector<Plane<T>>& planes, const char* what) {
  if (planes.empty()) throw DomainError(std::string(what) + ": no channels");
  for (const auto& p : planes) {
    if (p.rows() != planes.front().rows() || p.cols() != planes.front().cols()) {
      throw GeometryMismatch(std::string(what) + ": channel planes differ in size");
    }
  }
}

}  // namespace detail

/// Normalized image: samples in [0,1], 1 or 3 channels, plus the bit depth of
/// the raster it came from (8 or 16), which selects the LUT size on inversion.
template <typename Scalar = double>
class PlanarImage {
 public:
  using scalar_type = Scalar;

  PlanarImage() = default;

  PlanarImage(Index width, Index height, int channels, int source_bit_depth = 8)
      : bit_depth_(source_bit_depth) {
    if (width <= 0 || height <= 0) throw DomainError("PlanarImage: width and height must be positive");
    if (channels != 1 && channels != 3) throw DomainError("PlanarImage: channels must be 1 or 3");
    check_depth(source_bit_depth);
    planes_.assign(static_cast<std::size_t>(channels), Plane<Scalar>::Zero(height, width));
  }

  /// Takes ownership of channel planes; samples are validated to lie in [0,1].
  explicit PlanarImage(std::vector<Plane<Scalar>> planes, int source_bit_depth = 8)
      : planes_(std::move(planes)), bit_depth_(source_bit_depth) {
    detail::check_planes(planes_, "PlanarImage");
    if (planes_.size() != 1 && planes_.size() != 3) throw DomainError("PlanarImage: channels must be 1 or 3");
    check_depth(source_bit_depth);
    for (const auto& p : planes_) {
      if (!((p >= Scalar(0)) && (p <= Scalar(1))).all()) {
        throw DomainError("PlanarImage: samples must lie in [0,1]");
      }
    }
  }

  static PlanarImage constant(Index width, Index height, int channels, Scalar value,
                              int source_bit_depth = 8) {
    PlanarImage img(width, height, channels, source_bit_depth);
    for (auto& p : img.planes_) p.setConstant(value);
    return img;
  }

  Index width() const { return planes_.empty() ? 0 : planes_.front().cols(); }
  Index height() const { return planes_.empty() ? 0 : planes_.front().rows(); }
  int channels() const { return static_cast<int>(planes_.size()); }
  int source_bit_depth() const { return bit_depth_; }
  void set_source_bit_depth(int bits) {
    check_depth(bits);
    bit_depth_ = bits;
  }
  bool empty() const { return planes_.empty(); }
  std::size_t sample_count() const {
    return static_cast<std::size_t>(width() * height()) * planes_.size();
  }

  Plane<Scalar>& channel(int c) { return planes_.at(static_cast<std::size_t>(c)); }
  const Plane<Scalar>& channel(int c) const { return planes_.at(static_cast<std::size_t>(c)); }
  std::vector<Plane<Scalar>>& planes() { return planes_; }
  const std::vector<Plane<Scalar>>& planes() const { return planes_; }

  Scalar& operator()(Index x, Index y, int c = 0) { return channel(c)(y, x); }
  Scalar operator()(Index x, Index y, int c = 0) const { return channel(c)(y, x); }

  template <typename Other>
  bool same_geometry(const Other& other) const {
    return width() == other.width() && height() == other.height() && channels() == other.channels();
  }

  template <typename NewScalar>
  PlanarImage<NewScalar> cast() const {
    PlanarImage<NewScalar> out(width(), height(), channels(), bit_depth_);
    for (int c = 0; c < channels(); ++c) out.channel(c) = channel(c).template cast<NewScalar>();
    return out;
  }

 private:
  static void check_depth(int bits) {
    if (bits != 8 && bits != 16) throw DomainError("PlanarImage: source bit depth must be 8 or 16");
  }

  std::vector<Plane<Scalar>> planes_;
  int bit_depth_ = 8;
};

/// Signed per-channel response (DoG and its variants). Not range-restricted.
template <typename Scalar = double>
struct ResponseMap {
  std::vector<Plane<Scalar>> planes;

  Index width() const { return planes.empty() ? 0 : planes.front().cols(); }
  Index height() const { return planes.empty() ? 0 : planes.front().rows(); }
  int channels() const { return static_cast<int>(planes.size()); }
  Scalar min_value() const {
    Scalar m = planes.front().minCoeff();
    for (const auto& p : planes) m = std::min(m, p.minCoeff());
    return m;
  }
  Scalar max_value() const {
    Scalar m = planes.front().maxCoeff();
    for (const auto& p : planes) m = std::max(m, p.maxCoeff());
    return m;
  }
};

/// +1 / -1 / 0 per sample.
struct SignedMask {
  std::vector<Plane<std::int8_t>> planes;

  Index width() const { return planes.empty() ? 0 : planes.front().cols(); }
  Index height() const { return planes.empty() ? 0 : planes.front().rows(); }
  int channels() const { return static_cast<int>(planes.size()); }
  Index count(std::int8_t sign) const {
    Index n = 0;
    for (const auto& p : planes) n += (p == sign).count();
    return n;
  }
};

/// Integer raster as stored on disk, channel-planar.
struct Raster {
  int bit_depth = 8;
  std::vector<Plane<std::uint16_t>> planes;

  Raster() = default;
  Raster(Index width, Index height, int channels, int bits) : bit_depth(bits) {
    planes.assign(static_cast<std::size_t>(channels), Plane<std::uint16_t>::Zero(height, width));
  }

  Index width() const { return planes.empty() ? 0 : planes.front().cols(); }
  Index height() const { return planes.empty() ? 0 : planes.front().rows(); }
  int channels() const { return static_cast<int>(planes.size()); }
  std::uint32_t max_level() const { return (1u << bit_depth) - 1u; }
};

inline std::uint32_t max_level(int bits) {
  if (bits != 8 && bits != 16) throw DomainError("bit depth must be 8 or 16");
  return (1u << bits) - 1u;
}

/// round(sample * (2^bits - 1)), half-up.
template <typename Scalar>
Raster quantize(const PlanarImage<Scalar>& image, int bits) {
  const double scale = static_cast<double>(max_level(bits));
  Raster out(image.width(), image.height(), image.channels(), bits);
  for (int c = 0; c < image.channels(); ++c) {
    out.planes[static_cast<std::size_t>(c)] = image.channel(c).unaryExpr([scale](Scalar v) {
      const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
      return static_cast<std::uint16_t>(std::floor(clamped * scale + 0.5));
    });
  }
  return out;
}

template <typename Scalar = double>
PlanarImage<Scalar> dequantize(const Raster& raster) {
  if (raster.planes.empty()) throw DomainError("dequantize: empty raster");
  const Scalar levels = static_cast<Scalar>(max_level(raster.bit_depth));
  PlanarImage<Scalar> out(raster.width(), raster.height(), raster.channels(), raster.bit_depth);
  for (int c = 0; c < raster.channels(); ++c) {
    out.channel(c) = raster.planes[static_cast<std::size_t>(c)].template cast<Scalar>() / levels;
  }
  return out;
}

}  // namespace dichotome
