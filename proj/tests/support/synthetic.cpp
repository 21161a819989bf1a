#include "synthetic.hpp"

#include <cmath>
#include <numbers>

namespace dichotome::fixtures {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double smoothstep(double e0, double e1, double x) {
  const double t = clamp01((x - e0) / (e1 - e0));
  return t * t * (3.0 - 2.0 * t);
}

// Scene luminance at normalized coordinates u, v in [0,1].
double scene_at(double u, double v, std::uint32_t px, std::uint32_t py) {
  const double pi = std::numbers::pi;
  const double sky = 0.55 + 0.35 * (1.0 - v) + 0.05 * std::sin(6.0 * pi * u + 2.0 * v);
  const double water = 0.3 + 0.12 * std::sin(40.0 * v + 3.0 * std::sin(7.0 * u)) + 0.08 * std::cos(23.0 * u * (1.0 + v));
  double lum = v < 0.62 ? sky : water;
  lum += (hash01(px, py, 7) - 0.5) * 0.06;

  // Body ellipse, neck and legs of the bird.
  const double bx = (u - 0.48) / 0.17;
  const double by = (v - 0.45) / 0.09;
  const double body = 1.0 - smoothstep(0.85, 1.0, bx * bx + by * by);
  const double neck_x = 0.36 + 0.05 * std::sin((v - 0.2) * 9.0);
  const double neck = (v > 0.18 && v < 0.45) ? 1.0 - smoothstep(0.012, 0.022, std::abs(u - neck_x)) : 0.0;
  const double head = 1.0 - smoothstep(0.8, 1.0, std::pow((u - 0.38) / 0.045, 2) + std::pow((v - 0.17) / 0.03, 2));
  const double legs = (v > 0.5 && v < 0.85)
                          ? std::max(1.0 - smoothstep(0.004, 0.008, std::abs(u - 0.46)),
                                     1.0 - smoothstep(0.004, 0.008, std::abs(u - 0.53)))
                          : 0.0;
  const double bird = std::max({body, neck, head, legs});
  const double feather = 0.08 + 0.06 * std::sin(60.0 * u + 25.0 * v) + 0.04 * hash01(px, py, 11);
  lum = lum * (1.0 - bird) + feather * bird;

  // Low sun highlight in the upper right.
  const double sx = u - 0.82;
  const double sy = v - 0.15;
  lum += 0.6 * std::exp(-(sx * sx + sy * sy) / 0.004);
  return clamp01(lum);
}

template <typename Fn>
PlanarImage<double> gray_from(Index width, Index height, int bits, Fn fn) {
  PlanarImage<double> img(width, height, 1, bits);
  for (Index y = 0; y < height; ++y) {
    for (Index x = 0; x < width; ++x) img(x, y) = fn(x, y);
  }
  return img;
}

double scene_pixel(Index x, Index y, Index width, Index height) {
  const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(width);
  const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(height);
  return scene_at(u, v, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
}

}  // namespace

double hash01(std::uint32_t x, std::uint32_t y, std::uint32_t seed) {
  std::uint32_t h = x * 0x8da6b343u ^ y * 0xd8163841u ^ seed * 0xcb1ab31fu;
  h ^= h >> 16;
  h *= 0x7feb352du;
  h ^= h >> 15;
  h *= 0x846ca68bu;
  h ^= h >> 16;
  return static_cast<double>(h) / 4294967296.0;
}

PlanarImage<double> scene(Index width, Index height) {
  return gray_from(width, height, 16, [&](Index x, Index y) { return scene_pixel(x, y, width, height); });
}

PlanarImage<double> underexposed(Index width, Index height) {
  return gray_from(width, height, 16, [&](Index x, Index y) { return 0.2 * scene_pixel(x, y, width, height); });
}

PlanarImage<double> overexposed(Index width, Index height) {
  PlanarImage<double> img(width, height, 3, 8);
  static constexpr double kTint[3] = {1.0, 0.95, 0.85};
  for (Index y = 0; y < height; ++y) {
    for (Index x = 0; x < width; ++x) {
      const double s = scene_pixel(x, y, width, height);
      for (int c = 0; c < 3; ++c) img(x, y, c) = clamp01((0.55 + 0.9 * s) * kTint[c]);
    }
  }
  return img;
}

PlanarImage<double> mixed(Index width, Index height) {
  PlanarImage<double> img(width, height, 3, 8);
  static constexpr double kTint[3] = {0.9, 1.0, 1.1};
  for (Index y = 0; y < height; ++y) {
    for (Index x = 0; x < width; ++x) {
      const double s = scene_pixel(x, y, width, height);
      // Compress shadows towards black and stretch highlights towards white.
      const double t = s < 0.5 ? 0.4 * s * s : 1.0 - 1.6 * (1.0 - s) * (1.0 - s);
      for (int c = 0; c < 3; ++c) img(x, y, c) = clamp01(t * kTint[c]);
    }
  }
  return img;
}

PlanarImage<double> ramp(Index width, Index height) {
  return gray_from(width, height, 8,
                   [&](Index x, Index) { return static_cast<double>(x) / static_cast<double>(width - 1); });
}

PlanarImage<double> checkerboard(Index width, Index height, Index cell, double low, double high) {
  return gray_from(width, height, 8, [&](Index x, Index y) { return ((x / cell + y / cell) % 2 == 0) ? low : high; });
}

PlanarImage<double> ssim_reference() { return scene(96, 96); }

PlanarImage<double> ssim_distorted() {
  const PlanarImage<double> ref = ssim_reference();
  PlanarImage<double> out(ref.width(), ref.height(), 1, 16);
  for (Index y = 0; y < ref.height(); ++y) {
    for (Index x = 0; x < ref.width(); ++x) {
      // 3x3 box blur with clamped borders.
      double acc = 0.0;
      for (Index dy = -1; dy <= 1; ++dy) {
        for (Index dx = -1; dx <= 1; ++dx) {
          acc += ref(std::clamp<Index>(x + dx, 0, ref.width() - 1), std::clamp<Index>(y + dy, 0, ref.height() - 1));
        }
      }
      const double noise = (hash01(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), 29) - 0.5) * 0.12;
      out(x, y) = clamp01(0.15 + 0.7 * acc / 9.0 + noise);
    }
  }
  return out;
}

}  // namespace dichotome::fixtures
