#pragma once

// Whole-image application of the dichotomy transform. Every operation here is
// pointwise: output sample (x, y, c) depends only on input sample (x, y, c).

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>

#include "dichotome/core.hpp"
#include "dichotome/image.hpp"
#include "dichotome/parallel.hpp"

namespace dichotome {

/// Per-sample branch tags with the geometry of the classified image.
struct SlopeClassMap {
  std::vector<Plane<std::uint8_t>> planes;

  Index width() const { return planes.empty() ? 0 : planes.front().cols(); }
  Index height() const { return planes.empty() ? 0 : planes.front().rows(); }
  int channels() const { return static_cast<int>(planes.size()); }
  Branch at(Index x, Index y, int c = 0) const {
    return static_cast<Branch>(planes.at(static_cast<std::size_t>(c))(y, x));
  }
  Index ascending_count() const {
    Index n = 0;
    for (const auto& p : planes) n += (p == static_cast<std::uint8_t>(Branch::Ascending)).count();
    return n;
  }
};

/// Everything needed to undo enhance(): gamma-derived params, the branch of
/// every sample and, for integer sources, the forward table.
struct TransformRecord {
  DichotomyParams params;
  SlopeClassMap class_map;
  std::optional<DichotomyLut> lut;
  int source_bit_depth = 8;
};

template <typename Scalar>
struct Enhanced {
  PlanarImage<Scalar> image;
  TransformRecord record;
};

struct EnhanceOptions {
  /// Build a LUT for the source bit depth so inversion is exact at integer level.
  bool build_lut = true;
};

namespace detail {

inline void require_nondegenerate(double gamma, const char* where) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError(std::string(where) + ": gamma must be >= 0");
  if (gamma == 1.0) throw DegenerateGamma(where);
}

template <typename Scalar, typename Fn>
Plane<Scalar> map_rows(const Plane<Scalar>& in, Fn fn) {
  Plane<Scalar> out(in.rows(), in.cols());
  parallel_rows(in.rows(), [&](Index r0, Index r1) {
    out.middleRows(r0, r1 - r0) = in.middleRows(r0, r1 - r0).unaryExpr(fn);
  });
  return out;
}

}  // namespace detail

/// x^gamma per sample (plain gamma correction).
template <typename Scalar>
PlanarImage<Scalar> apply_gamma(const PlanarImage<Scalar>& image, double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("apply_gamma: gamma must be >= 0");
  PlanarImage<Scalar> out = image;
  for (int c = 0; c < image.channels(); ++c) {
    out.channel(c) = detail::map_rows(image.channel(c), [gamma](Scalar v) {
      return static_cast<Scalar>(gamma_correct(static_cast<double>(v), gamma));
    });
  }
  return out;
}

template <typename Scalar>
SlopeClassMap classify_slopes(const PlanarImage<Scalar>& image, const DichotomyParams& params) {
  SlopeClassMap map;
  map.planes.reserve(static_cast<std::size_t>(image.channels()));
  for (int c = 0; c < image.channels(); ++c) {
    map.planes.push_back(image.channel(c).unaryExpr([&params](Scalar v) {
      return static_cast<std::uint8_t>(branch_of(static_cast<double>(v), params));
    }));
  }
  return map;
}

/// Ascending iff sample <= d_max, per channel.
template <typename Scalar>
SlopeClassMap classify_slopes(const PlanarImage<Scalar>& image, double gamma) {
  detail::require_nondegenerate(gamma, "classify_slopes");
  return classify_slopes(image, compute_params(gamma));
}

template <typename Scalar>
Enhanced<Scalar> enhance(const PlanarImage<Scalar>& image, double gamma, EnhanceOptions options = {}) {
  detail::require_nondegenerate(gamma, "enhance");
  const DichotomyParams params = compute_params(gamma);

  Enhanced<Scalar> result{image, {}};
  for (int c = 0; c < image.channels(); ++c) {
    result.image.channel(c) = detail::map_rows(image.channel(c), [&params](Scalar v) {
      return static_cast<Scalar>(dichotomy_normalized(static_cast<double>(v), params));
    });
  }
  result.record.params = params;
  result.record.class_map = classify_slopes(image, params);
  result.record.source_bit_depth = image.source_bit_depth();
  if (options.build_lut) {
    result.record.lut = build_lut(gamma, static_cast<int>(max_level(image.source_bit_depth())));
  }
  return result;
}

/// Throws RecordMismatch when geometry, gamma or LUT disagree with the record.
void validate_record(const TransformRecord& record, Index width, Index height, int channels);

/// Undo enhance(). With a LUT the result is exact on the source's integer grid;
/// otherwise each sample is recovered by golden-section search.
template <typename Scalar>
PlanarImage<Scalar> invert(const PlanarImage<Scalar>& enhanced, const TransformRecord& record,
                           const GoldenSearchConfig& cfg = {}) {
  validate_record(record, enhanced.width(), enhanced.height(), enhanced.channels());
  const DichotomyParams& params = record.params;

  PlanarImage<Scalar> out(enhanced.width(), enhanced.height(), enhanced.channels(), record.source_bit_depth);
  for (int c = 0; c < enhanced.channels(); ++c) {
    const auto& in = enhanced.channel(c);
    const auto& tags = record.class_map.planes[static_cast<std::size_t>(c)];
    auto& dst = out.channel(c);
    parallel_rows(in.rows(), [&](Index r0, Index r1) {
      for (Index y = r0; y < r1; ++y) {
        for (Index x = 0; x < in.cols(); ++x) {
          const auto branch = static_cast<Branch>(tags(y, x));
          const double value = std::clamp(static_cast<double>(in(y, x)), 0.0, 1.0);
          double recovered;
          if (record.lut) {
            recovered = static_cast<double>(invert_lut(value, *record.lut, branch)) / record.lut->bit_max;
          } else {
            recovered = invert_golden(value / params.k, params, branch, cfg);
          }
          dst(y, x) = static_cast<Scalar>(recovered);
        }
      }
    });
  }
  return out;
}

/// Colour coding of a class map. Grayscale sources: red = ascending, blue =
/// descending. RGB sources: each output channel is 1 where that channel is
/// ascending, so white = all ascending, black = all descending.
PlanarImage<double> render_class_map(const SlopeClassMap& map);

/// Luma with weights 0.299 / 0.587 / 0.114.
template <typename Scalar>
PlanarImage<Scalar> to_grayscale(const PlanarImage<Scalar>& image) {
  if (image.channels() != 3) throw AlreadyGray();
  PlanarImage<Scalar> out(image.width(), image.height(), 1, image.source_bit_depth());
  out.channel(0) = (Scalar(0.299) * image.channel(0) + Scalar(0.587) * image.channel(1) +
                    Scalar(0.114) * image.channel(2))
                       .min(Scalar(1))
                       .max(Scalar(0));
  return out;
}

}  // namespace dichotome
