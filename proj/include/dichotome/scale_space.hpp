#pragma once

// Gaussian scale space and the three difference-of-Gaussians responses:
//
//   plain       (L(t+dt) - L(t)) / dt
//   gamma       (L(t+dt)^g - L(t)^g) / dt
//   dichotomy   k (|L(t+dt)^g - L(t+dt)| - |L(t)^g - L(t)|) / dt
//
// plus thresholding, aggregation over the gamma axis and colour overlays.

#include <array>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "dichotome/core.hpp"
#include "dichotome/image.hpp"
#include "dichotome/parallel.hpp"

namespace dichotome {

using Rgb = std::array<double, 3>;

struct ScaleSpaceConfig {
  std::vector<double> sigma2_levels{1.0, 2.0, 3.0, 4.0};
  /// Downsampling factor per level; level i is divided by subsample_factors[i].
  std::vector<int> subsample_factors{1, 2, 3, 4};
  std::vector<double> gammas{0.25, 0.38, 0.5, 1.2, 1.8, 2.0, 2.4, 4.0};
  /// t = t_numerator / sigma^2.
  double t_numerator = 8.192;
  double delta_t = 1.0;
  /// Self-similar sampling factor: dt = (s^2 - 1) t when use_scale_factor is set.
  double s = std::sqrt(2.0);
  bool use_scale_factor = false;
  double thr_plus = 0.2;
  double thr_minus = -0.2;
  /// One colour per gamma for the overlay composites.
  std::vector<Rgb> palette = default_palette();

  double t_for_level(std::size_t level) const { return t_numerator / sigma2_levels.at(level); }
  double step_for(double t) const { return use_scale_factor ? (s * s - 1.0) * t : delta_t; }

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  static std::vector<Rgb> default_palette();
};

/// Sampled Gaussian of variance t, radius ceil(4 sqrt(t)), renormalized to unit sum.
std::vector<double> gaussian_kernel(double t);

/// Separable convolution with gaussian_kernel(t), edge-replicated borders.
template <typename Scalar>
Plane<Scalar> gaussian_smooth(const Plane<Scalar>& in, double t) {
  const std::vector<double> kernel = gaussian_kernel(t);
  const Index radius = static_cast<Index>(kernel.size() / 2);
  const Index rows = in.rows();
  const Index cols = in.cols();

  Plane<Scalar> tmp(rows, cols);
  parallel_rows(rows, [&](Index r0, Index r1) {
    for (Index y = r0; y < r1; ++y) {
      for (Index x = 0; x < cols; ++x) {
        double acc = 0.0;
        for (Index j = -radius; j <= radius; ++j) {
          const Index xx = std::clamp<Index>(x + j, 0, cols - 1);
          acc += kernel[static_cast<std::size_t>(j + radius)] * static_cast<double>(in(y, xx));
        }
        tmp(y, x) = static_cast<Scalar>(acc);
      }
    }
  });

  Plane<Scalar> out(rows, cols);
  parallel_rows(rows, [&](Index r0, Index r1) {
    Eigen::Array<double, 1, Eigen::Dynamic> acc(cols);
    for (Index y = r0; y < r1; ++y) {
      acc.setZero();
      for (Index j = -radius; j <= radius; ++j) {
        const Index yy = std::clamp<Index>(y + j, 0, rows - 1);
        acc += kernel[static_cast<std::size_t>(j + radius)] * tmp.row(yy).template cast<double>();
      }
      out.row(y) = acc.template cast<Scalar>();
    }
  });
  return out;
}

template <typename Scalar>
PlanarImage<Scalar> gaussian_smooth(const PlanarImage<Scalar>& image, double t) {
  if (!(t > 0.0)) throw DomainError("gaussian_smooth: t must be > 0");
  PlanarImage<Scalar> out = image;
  for (int c = 0; c < image.channels(); ++c) out.channel(c) = gaussian_smooth(image.channel(c), t);
  return out;
}

/// Mean over factor x factor blocks; trailing rows/cols that do not fill a block are dropped.
template <typename Scalar>
Plane<Scalar> area_downsample(const Plane<Scalar>& in, int factor) {
  if (factor == 1) return in;
  const Index rows = in.rows() / factor;
  const Index cols = in.cols() / factor;
  Plane<Scalar> out(rows, cols);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (Index y = 0; y < rows; ++y) {
    for (Index x = 0; x < cols; ++x) {
      out(y, x) = static_cast<Scalar>(
          in.block(y * factor, x * factor, factor, factor).template cast<double>().sum() * inv);
    }
  }
  return out;
}

/// (width, height) of every pyramid level. Throws ImageTooSmall below 8x8.
std::vector<std::pair<Index, Index>> pyramid_level_sizes(Index width, Index height,
                                                         const ScaleSpaceConfig& cfg);

/// Level i: smooth with variance sigma2_levels[i], then area-downsample by subsample_factors[i].
template <typename Scalar>
std::vector<PlanarImage<Scalar>> build_pyramid(const PlanarImage<Scalar>& image, const ScaleSpaceConfig& cfg) {
  if (image.empty()) throw DomainError("build_pyramid: empty image");
  cfg.validate();
  (void)pyramid_level_sizes(image.width(), image.height(), cfg);

  std::vector<PlanarImage<Scalar>> levels;
  levels.reserve(cfg.sigma2_levels.size());
  for (std::size_t i = 0; i < cfg.sigma2_levels.size(); ++i) {
    const int factor = cfg.subsample_factors[i];
    std::vector<Plane<Scalar>> planes;
    for (int c = 0; c < image.channels(); ++c) {
      planes.push_back(area_downsample(gaussian_smooth(image.channel(c), cfg.sigma2_levels[i]), factor));
    }
    PlanarImage<Scalar> level(planes.front().cols(), planes.front().rows(), image.channels(),
                              image.source_bit_depth());
    for (int c = 0; c < image.channels(); ++c) level.channel(c) = std::move(planes[static_cast<std::size_t>(c)]);
    levels.push_back(std::move(level));
  }
  return levels;
}

namespace detail {

inline void check_dog_args(double t, double delta_t) {
  if (!(t > 0.0)) throw DomainError("dog: t must be > 0");
  if (!(delta_t > 0.0)) throw DomainError("dog: delta_t must be > 0");
}

inline double power0(double x, double gamma) { return gamma == 0.0 ? 1.0 : std::pow(x, gamma); }

// (transform(far) - transform(near)) / dt, channel by channel.
template <typename Scalar, typename Transform>
ResponseMap<Scalar> difference_of(const PlanarImage<Scalar>& near, const PlanarImage<Scalar>& far,
                                  double delta_t, Transform transform) {
  ResponseMap<Scalar> out;
  for (int c = 0; c < near.channels(); ++c) {
    out.planes.push_back((far.channel(c).unaryExpr(transform) - near.channel(c).unaryExpr(transform)) /
                         static_cast<Scalar>(delta_t));
  }
  return out;
}

template <typename Scalar, typename Transform>
ResponseMap<Scalar> dog_with(const PlanarImage<Scalar>& image, double t, double delta_t, Transform transform) {
  check_dog_args(t, delta_t);
  return difference_of(gaussian_smooth(image, t), gaussian_smooth(image, t + delta_t), delta_t, transform);
}

template <typename Scalar>
auto identity_transform() {
  return [](Scalar v) { return v; };
}

template <typename Scalar>
auto gamma_transform(double gamma) {
  return [gamma](Scalar v) { return static_cast<Scalar>(power0(static_cast<double>(v), gamma)); };
}

template <typename Scalar>
auto dichotomy_transform(const DichotomyParams& params) {
  return [params](Scalar v) {
    const double x = static_cast<double>(v);
    return static_cast<Scalar>(params.k * std::abs(power0(x, params.gamma) - x));
  };
}

}  // namespace detail

template <typename Scalar>
ResponseMap<Scalar> dog(const PlanarImage<Scalar>& image, double t, double delta_t) {
  return detail::dog_with(image, t, delta_t, detail::identity_transform<Scalar>());
}

template <typename Scalar>
ResponseMap<Scalar> dog_gamma(const PlanarImage<Scalar>& image, double gamma, double t, double delta_t) {
  if (!(gamma >= 0.0)) throw DomainError("dog_gamma: gamma must be >= 0");
  return detail::dog_with(image, t, delta_t, detail::gamma_transform<Scalar>(gamma));
}

template <typename Scalar>
ResponseMap<Scalar> dog_dichotomy(const PlanarImage<Scalar>& image, double gamma, double t, double delta_t) {
  return detail::dog_with(image, t, delta_t, detail::dichotomy_transform<Scalar>(compute_params(gamma)));
}

/// +1 where response >= thr_plus, -1 where response <= thr_minus.
template <typename Scalar>
SignedMask threshold_extrema(const ResponseMap<Scalar>& response, double thr_plus, double thr_minus) {
  if (!(thr_plus > 0.0) || !(thr_minus < 0.0)) {
    throw DomainError("threshold_extrema: thresholds must satisfy thr_plus > 0 > thr_minus");
  }
  SignedMask mask;
  for (const auto& p : response.planes) {
    const Plane<double> r = p.template cast<double>();
    mask.planes.push_back((r >= thr_plus).template cast<std::int8_t>() - (r <= thr_minus).template cast<std::int8_t>());
  }
  return mask;
}

enum class AggregateMode { Max, NegMin };

/// Pixelwise max over gamma, or the negated pixelwise min.
template <typename Scalar>
ResponseMap<Scalar> aggregate_over_gamma(std::span<const ResponseMap<Scalar>> responses, AggregateMode mode) {
  if (responses.empty()) throw DomainError("aggregate_over_gamma: no responses");
  const auto& first = responses.front();
  for (const auto& r : responses) {
    if (r.width() != first.width() || r.height() != first.height() || r.channels() != first.channels()) {
      throw GeometryMismatch("aggregate_over_gamma: responses differ in geometry");
    }
  }
  ResponseMap<Scalar> out = first;
  for (std::size_t i = 1; i < responses.size(); ++i) {
    for (int c = 0; c < out.channels(); ++c) {
      auto& acc = out.planes[static_cast<std::size_t>(c)];
      const auto& next = responses[i].planes[static_cast<std::size_t>(c)];
      if (mode == AggregateMode::Max) {
        acc = acc.max(next);
      } else {
        acc = acc.min(next);
      }
    }
  }
  if (mode == AggregateMode::NegMin) {
    for (auto& p : out.planes) p = -p;
  }
  return out;
}

/// Additive (clamped) blend of palette[i] wherever masks[i] is nonzero.
/// Multi-channel masks count a pixel as detected when any channel fires.
PlanarImage<double> compose_gamma_overlay(std::span<const SignedMask> masks, std::span<const Rgb> palette);

/// Red for positive, green for negative extrema.
PlanarImage<double> render_extrema(const SignedMask& mask);

struct ScaleSpaceCell {
  std::size_t level = 0;
  double sigma2 = 0.0;
  double gamma = 0.0;
  double t = 0.0;
  double delta_t = 0.0;
  ResponseMap<double> dichotomy;
  ResponseMap<double> gamma_response;
  SignedMask dichotomy_mask;
  SignedMask gamma_mask;
};

struct ScaleSpaceLevel {
  double sigma2 = 0.0;
  int factor = 1;
  double t = 0.0;
  double delta_t = 0.0;
  PlanarImage<double> image;     ///< pyramid level
  PlanarImage<double> smoothed;  ///< L(t) of the level
  ResponseMap<double> plain;     ///< plain DoG
  ResponseMap<double> dichotomy_max, dichotomy_neg_min;
  ResponseMap<double> gamma_max, gamma_neg_min;
  PlanarImage<double> dichotomy_overlay, gamma_overlay;
};

struct ScaleSpaceStack {
  std::vector<ScaleSpaceLevel> levels;
  std::vector<ScaleSpaceCell> cells;  ///< level-major, gamma-minor

  const ScaleSpaceCell& cell(std::size_t level, std::size_t gamma_index) const;
};

/// Full (level, gamma) stack. Cells are computed independently and stored in
/// a fixed order, so the result does not depend on the thread count.
ScaleSpaceStack build_scale_space(const PlanarImage<double>& image, const ScaleSpaceConfig& cfg);

}  // namespace dichotome
