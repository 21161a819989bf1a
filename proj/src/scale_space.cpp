#include "dichotome/scale_space.hpp"

#include <sstream>

namespace dichotome {

namespace {
constexpr double kHalf = 128.0 / 255.0;
}  // namespace

std::vector<Rgb> ScaleSpaceConfig::default_palette() {
  return {
      Rgb{1.0, 0.0, 0.0},    // red
      Rgb{0.0, 1.0, 0.0},    // green
      Rgb{0.0, 0.0, 1.0},    // blue
      Rgb{1.0, kHalf, 0.0},  // orange
      Rgb{1.0, 0.0, 1.0},    // magenta
      Rgb{0.0, 1.0, 1.0},    // cyan
      Rgb{kHalf, 0.0, 1.0},  // violet
      Rgb{kHalf, 1.0, 0.0},  // chartreuse
  };
}

void ScaleSpaceConfig::validate() const {
  if (sigma2_levels.empty()) throw ConfigError("scale space: at least one sigma^2 level is required");
  for (double s2 : sigma2_levels) {
    if (!(s2 > 0.0)) throw ConfigError("scale space: sigma^2 levels must be > 0");
  }
  if (subsample_factors.size() != sigma2_levels.size()) {
    throw ConfigError("scale space: subsample_factors must have one entry per sigma^2 level");
  }
  for (int f : subsample_factors) {
    if (f < 1) throw ConfigError("scale space: subsample factors must be >= 1");
  }
  if (gammas.empty()) throw ConfigError("scale space: at least one gamma is required");
  for (double g : gammas) {
    if (!(g >= 0.0)) throw ConfigError("scale space: gamma values must be >= 0");
    if (g == 1.0) throw ConfigError("scale space: gamma = 1 is degenerate and not allowed");
  }
  if (!(t_numerator > 0.0)) throw ConfigError("scale space: t_numerator must be > 0");
  if (use_scale_factor ? !(s > 1.0) : !(delta_t > 0.0)) {
    throw ConfigError("scale space: the DoG step must be > 0 (delta_t > 0, or s > 1)");
  }
  if (!(thr_plus > 0.0) || !(thr_minus < 0.0)) {
    throw ConfigError("scale space: thresholds must satisfy thr_plus > 0 > thr_minus");
  }
  if (palette.size() < gammas.size()) {
    throw ConfigError("scale space: palette needs one colour per gamma");
  }
}

std::vector<double> gaussian_kernel(double t) {
  if (!(t > 0.0)) throw DomainError("gaussian_kernel: t must be > 0");
  const auto radius = static_cast<int>(std::ceil(4.0 * std::sqrt(t)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-static_cast<double>(i) * i / (2.0 * t));
    kernel[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (double& w : kernel) w /= sum;
  return kernel;
}

std::vector<std::pair<Index, Index>> pyramid_level_sizes(Index width, Index height, const ScaleSpaceConfig& cfg) {
  if (cfg.subsample_factors.size() != cfg.sigma2_levels.size()) {
    throw ConfigError("scale space: subsample_factors must have one entry per sigma^2 level");
  }
  std::vector<std::pair<Index, Index>> sizes;
  for (int factor : cfg.subsample_factors) {
    const Index w = width / factor;
    const Index h = height / factor;
    if (w < 8 || h < 8) {
      std::ostringstream msg;
      msg << "pyramid level /" << factor << " of a " << width << "x" << height << " image is " << w << "x" << h
          << ", below the 8x8 minimum";
      throw ImageTooSmall(msg.str());
    }
    sizes.emplace_back(w, h);
  }
  return sizes;
}

PlanarImage<double> compose_gamma_overlay(std::span<const SignedMask> masks, std::span<const Rgb> palette) {
  if (masks.empty()) throw DomainError("compose_gamma_overlay: no masks");
  if (palette.size() != masks.size()) {
    throw DomainError("compose_gamma_overlay: palette length must equal the number of masks");
  }
  const Index w = masks.front().width();
  const Index h = masks.front().height();
  for (const auto& m : masks) {
    if (m.width() != w || m.height() != h || m.planes.empty()) {
      throw GeometryMismatch("compose_gamma_overlay: masks differ in geometry");
    }
  }

  PlanarImage<double> out(w, h, 3);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    Plane<bool> hit = masks[i].planes.front() != 0;
    for (const auto& p : masks[i].planes) hit = hit || (p != 0);
    const Plane<double> weight = hit.cast<double>();
    for (int c = 0; c < 3; ++c) out.channel(c) += weight * palette[i][static_cast<std::size_t>(c)];
  }
  for (auto& p : out.planes()) p = p.min(1.0);
  return out;
}

PlanarImage<double> render_extrema(const SignedMask& mask) {
  if (mask.planes.empty()) throw DomainError("render_extrema: empty mask");
  Plane<bool> pos = mask.planes.front() > 0;
  Plane<bool> neg = mask.planes.front() < 0;
  for (const auto& p : mask.planes) {
    pos = pos || (p > 0);
    neg = neg || (p < 0);
  }
  PlanarImage<double> out(mask.width(), mask.height(), 3);
  out.channel(0) = pos.cast<double>();
  out.channel(1) = (neg && !pos).cast<double>();
  return out;
}

const ScaleSpaceCell& ScaleSpaceStack::cell(std::size_t level, std::size_t gamma_index) const {
  if (levels.empty()) throw DomainError("ScaleSpaceStack: empty stack");
  const std::size_t per_level = cells.size() / levels.size();
  return cells.at(level * per_level + gamma_index);
}

ScaleSpaceStack build_scale_space(const PlanarImage<double>& image, const ScaleSpaceConfig& cfg) {
  cfg.validate();
  std::vector<PlanarImage<double>> pyramid = build_pyramid(image, cfg);

  ScaleSpaceStack stack;
  stack.levels.resize(pyramid.size());
  const std::size_t n_gamma = cfg.gammas.size();
  stack.cells.resize(pyramid.size() * n_gamma);

  // Both smoothings of every level are shared by all of its gamma cells.
  std::vector<PlanarImage<double>> far(pyramid.size());
  for (std::size_t l = 0; l < pyramid.size(); ++l) {
    ScaleSpaceLevel& level = stack.levels[l];
    level.sigma2 = cfg.sigma2_levels[l];
    level.factor = cfg.subsample_factors[l];
    level.t = cfg.t_for_level(l);
    level.delta_t = cfg.step_for(level.t);
    level.smoothed = gaussian_smooth(pyramid[l], level.t);
    far[l] = gaussian_smooth(pyramid[l], level.t + level.delta_t);
    level.plain = detail::difference_of(level.smoothed, far[l], level.delta_t, detail::identity_transform<double>());
    level.image = std::move(pyramid[l]);
  }

  parallel_for(stack.cells.size(), [&](std::size_t i) {
    const std::size_t l = i / n_gamma;
    const std::size_t g = i % n_gamma;
    const ScaleSpaceLevel& level = stack.levels[l];
    ScaleSpaceCell& cell = stack.cells[i];
    cell.level = l;
    cell.sigma2 = level.sigma2;
    cell.gamma = cfg.gammas[g];
    cell.t = level.t;
    cell.delta_t = level.delta_t;
    cell.dichotomy = detail::difference_of(level.smoothed, far[l], level.delta_t,
                                           detail::dichotomy_transform<double>(compute_params(cell.gamma)));
    cell.gamma_response =
        detail::difference_of(level.smoothed, far[l], level.delta_t, detail::gamma_transform<double>(cell.gamma));
    cell.dichotomy_mask = threshold_extrema(cell.dichotomy, cfg.thr_plus, cfg.thr_minus);
    cell.gamma_mask = threshold_extrema(cell.gamma_response, cfg.thr_plus, cfg.thr_minus);
  });

  const std::span<const Rgb> palette(cfg.palette.data(), n_gamma);
  for (std::size_t l = 0; l < stack.levels.size(); ++l) {
    std::vector<ResponseMap<double>> dich;
    std::vector<ResponseMap<double>> gam;
    std::vector<SignedMask> dich_masks;
    std::vector<SignedMask> gam_masks;
    for (std::size_t g = 0; g < n_gamma; ++g) {
      const ScaleSpaceCell& cell = stack.cells[l * n_gamma + g];
      dich.push_back(cell.dichotomy);
      gam.push_back(cell.gamma_response);
      dich_masks.push_back(cell.dichotomy_mask);
      gam_masks.push_back(cell.gamma_mask);
    }
    ScaleSpaceLevel& level = stack.levels[l];
    level.dichotomy_max = aggregate_over_gamma<double>(dich, AggregateMode::Max);
    level.dichotomy_neg_min = aggregate_over_gamma<double>(dich, AggregateMode::NegMin);
    level.gamma_max = aggregate_over_gamma<double>(gam, AggregateMode::Max);
    level.gamma_neg_min = aggregate_over_gamma<double>(gam, AggregateMode::NegMin);
    level.dichotomy_overlay = compose_gamma_overlay(dich_masks, palette);
    level.gamma_overlay = compose_gamma_overlay(gam_masks, palette);
  }
  return stack;
}

}  // namespace dichotome
