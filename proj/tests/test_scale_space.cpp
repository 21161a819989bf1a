#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "dichotome/scale_space.hpp"
#include "dichotome/transform.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace dichotome;

namespace {

PlanarImage<double> bright_ramp(Index w, Index h) {
  // Values in [0.7, 0.98]: above d_max (at most 0.63, gamma = 4) for every default gamma.
  PlanarImage<double> img(w, h, 1);
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) img(x, y) = 0.7 + 0.28 * (static_cast<double>(x) / (w - 1)) * (static_cast<double>(x) / (w - 1));
  }
  return img;
}

}  // namespace

TEST(GaussianKernel, RadiusAndNormalization) {
  for (double t : {0.5, 2.0, 8.192}) {
    const auto k = gaussian_kernel(t);
    EXPECT_EQ(k.size(), static_cast<std::size_t>(2 * std::ceil(4.0 * std::sqrt(t)) + 1));
    EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-15);
  }
  EXPECT_THROW(gaussian_kernel(0.0), DomainError);
}

TEST(GaussianSmooth, ConstantIsFixed) {
  const auto img = PlanarImage<double>::constant(20, 13, 3, 0.37);
  const auto s = gaussian_smooth(img, 3.0);
  for (const auto& p : s.planes()) EXPECT_LT((p - 0.37).abs().maxCoeff(), 1e-15);
}

TEST(GaussianSmooth, ImpulseMatchesDirect2DOracle) {
  PlanarImage<double> img(41, 41, 1);
  img(20, 20) = 1.0;
  const auto s = gaussian_smooth(img, 2.0);
  EXPECT_NEAR(s.channel(0).sum(), 1.0, 1e-12);
  const auto direct = oracle::gaussian_2d(img.channel(0), 2.0);
  EXPECT_LT((s.channel(0) - direct).abs().maxCoeff(), 1e-15);
  EXPECT_NEAR(s(20, 20), 1.0 / (2.0 * 3.14159265358979 * 2.0), 2e-3);
}

TEST(GaussianSmooth, EdgeReplicationMatchesOracle) {
  const auto img = fixtures::scene(37, 29);
  const auto s = gaussian_smooth(img, 4.0);
  EXPECT_LT((s.channel(0) - oracle::gaussian_2d(img.channel(0), 4.0)).abs().maxCoeff(), 1e-13);
}

TEST(GaussianSmooth, SemigroupAwayFromBorders) {
  // Replicated borders are not closed under composition, so compare where the
  // one-step kernel never reaches the frame.
  const auto img = fixtures::scene(96, 96);
  const auto two_step = gaussian_smooth(gaussian_smooth(img, 1.5), 2.5);
  const auto one_step = gaussian_smooth(img, 4.0);
  const Index m = static_cast<Index>(std::ceil(4.0 * std::sqrt(4.0)));
  const Plane<double> diff = (two_step.channel(0) - one_step.channel(0)).abs();
  EXPECT_LT(diff.block(m, m, 96 - 2 * m, 96 - 2 * m).maxCoeff(), 1e-3);
}

TEST(GaussianSmooth, SemigroupOnFlatBorderedImage) {
  auto img = PlanarImage<double>::constant(96, 96, 1, 0.5);
  img.channel(0).block(24, 24, 48, 48) = fixtures::scene(48, 48).channel(0);
  const auto two_step = gaussian_smooth(gaussian_smooth(img, 2.0), 2.0);
  const auto one_step = gaussian_smooth(img, 4.0);
  EXPECT_LT((two_step.channel(0) - one_step.channel(0)).abs().maxCoeff(), 1e-3);
}

TEST(Pyramid, LevelSizes) {
  const ScaleSpaceConfig cfg;
  const auto sizes = pyramid_level_sizes(6000, 4000, cfg);
  ASSERT_EQ(sizes.size(), 4u);
  EXPECT_EQ(sizes[0].first, 6000);
  EXPECT_EQ(sizes[1].first, 3000);
  EXPECT_EQ(sizes[2].first, 2000);
  EXPECT_EQ(sizes[3].first, 1500);
  EXPECT_EQ(sizes[3].second, 1000);
  EXPECT_THROW(pyramid_level_sizes(8, 8, cfg), ImageTooSmall);
}

TEST(Pyramid, SingleLevelIsSmoothedInput) {
  ScaleSpaceConfig cfg;
  cfg.sigma2_levels = {2.0};
  cfg.subsample_factors = {1};
  const auto img = fixtures::scene(40, 30);
  const auto levels = build_pyramid(img, cfg);
  ASSERT_EQ(levels.size(), 1u);
  EXPECT_EQ((levels[0].channel(0) - gaussian_smooth(img, 2.0).channel(0)).abs().maxCoeff(), 0.0);
}

TEST(Pyramid, AreaAveraging) {
  Plane<double> p(4, 6);
  p << 0, 1, 2, 3, 4, 5,  //
      6, 7, 8, 9, 10, 11,  //
      12, 13, 14, 15, 16, 17,  //
      18, 19, 20, 21, 22, 23;
  const auto d = area_downsample(p, 2);
  ASSERT_EQ(d.rows(), 2);
  ASSERT_EQ(d.cols(), 3);
  EXPECT_DOUBLE_EQ(d(0, 0), 3.5);
  EXPECT_DOUBLE_EQ(d(1, 2), 19.5);
  const auto t = area_downsample(p, 3);
  EXPECT_EQ(t.rows(), 1);
  EXPECT_DOUBLE_EQ(t(0, 1), (3 + 4 + 5 + 9 + 10 + 11 + 15 + 16 + 17) / 9.0);
}

TEST(Dog, ConstantImageGivesZero) {
  const auto img = PlanarImage<double>::constant(24, 24, 1, 0.6);
  EXPECT_LT(dog(img, 2.0, 1.0).planes[0].abs().maxCoeff(), 1e-15);
  EXPECT_LT(dog_gamma(img, 0.5, 2.0, 1.0).planes[0].abs().maxCoeff(), 1e-15);
  EXPECT_LT(dog_dichotomy(img, 0.5, 2.0, 1.0).planes[0].abs().maxCoeff(), 1e-14);
}

TEST(Dog, StepEdgeGivesAntisymmetricPair) {
  PlanarImage<double> img(64, 8, 1);
  for (Index y = 0; y < 8; ++y) {
    for (Index x = 32; x < 64; ++x) img(x, y) = 1.0;
  }
  const auto r = dog(img, 4.0, 1.0);
  // Edge between columns 31 and 32: response mirrored with opposite sign.
  for (Index d = 0; d < 10; ++d) EXPECT_NEAR(r.planes[0](4, 31 - d), -r.planes[0](4, 32 + d), 1e-12);
  EXPECT_GT(r.planes[0](4, 31), 0.0);
  EXPECT_LT(r.planes[0](4, 32), 0.0);
}

TEST(Dog, InteriorContentSumsToZero) {
  PlanarImage<double> img(64, 64, 1);
  for (Index y = 24; y < 40; ++y) {
    for (Index x = 24; x < 40; ++x) img(x, y) = 1.0;
  }
  const auto r = dog(img, 2.0, 1.0);
  EXPECT_LT(std::abs(r.planes[0].sum()), 1e-2 * r.planes[0].abs().sum());
}

TEST(Dog, GammaOneIsPlainDogBitExact) {
  const auto img = fixtures::scene(64, 48);
  const auto a = dog(img, 8.192, 1.0);
  const auto b = dog_gamma(img, 1.0, 8.192, 1.0);
  EXPECT_TRUE((a.planes[0] == b.planes[0]).all());
}

TEST(Dog, GammaVariantMatchesScalarOracle) {
  const auto img = fixtures::ramp(32, 8);
  const auto near = gaussian_smooth(img, 2.0);
  const auto far = gaussian_smooth(img, 3.0);
  const auto r = dog_gamma(img, 2.0, 2.0, 1.0);
  for (Index x = 0; x < 32; ++x) {
    EXPECT_NEAR(r.planes[0](3, x), far(x, 3) * far(x, 3) - near(x, 3) * near(x, 3), 1e-15);
  }
}

TEST(Dog, DichotomyVariantMatchesScalarOracle) {
  const auto img = fixtures::scene(40, 40);
  const auto near = gaussian_smooth(img, 2.0);
  const auto far = gaussian_smooth(img, 4.0);
  const double g = 0.38;
  const double k = 1.0 / oracle::f(std::pow(g, 1.0 / (1.0 - g)), g);
  const auto r = dog_dichotomy(img, g, 2.0, 2.0);
  for (Index y = 0; y < 40; y += 3) {
    for (Index x = 0; x < 40; x += 3) {
      EXPECT_NEAR(r.planes[0](y, x), k * (oracle::f(far(x, y), g) - oracle::f(near(x, y), g)) / 2.0, 1e-12);
    }
  }
  EXPECT_THROW(dog_dichotomy(img, 1.0, 2.0, 1.0), DegenerateGamma);
  EXPECT_THROW(dog(img, 0.0, 1.0), DomainError);
  EXPECT_THROW(dog(img, 1.0, 0.0), DomainError);
}

TEST(Dog, DichotomySignFlipOnBrightRamp) {
  const auto img = bright_ramp(96, 16);
  for (double g : ScaleSpaceConfig{}.gammas) {
    const auto dg = dog_gamma(img, g, 4.0, 1.0);
    const auto dd = dog_dichotomy(img, g, 4.0, 1.0);
    int checked = 0;
    for (Index i = 0; i < dg.planes[0].size(); ++i) {
      const double a = dg.planes[0].data()[i];
      const double b = dd.planes[0].data()[i];
      if (std::abs(a) > 1e-6) {
        ++checked;
        ASSERT_EQ(a > 0, b < 0) << "gamma " << g;
      }
    }
    EXPECT_GT(checked, 100);
  }
}

TEST(Threshold, Examples) {
  ResponseMap<double> r;
  r.planes.push_back(Plane<double>(1, 5));
  r.planes[0] << 0.3, -0.3, 0.2, -0.2, 0.1;
  const auto m = threshold_extrema(r, 0.2, -0.2);
  EXPECT_EQ(m.planes[0](0, 0), 1);
  EXPECT_EQ(m.planes[0](0, 1), -1);
  EXPECT_EQ(m.planes[0](0, 2), 1);
  EXPECT_EQ(m.planes[0](0, 3), -1);
  EXPECT_EQ(m.planes[0](0, 4), 0);
  ResponseMap<double> zero;
  zero.planes.push_back(Plane<double>::Zero(3, 3));
  EXPECT_EQ(threshold_extrema(zero, 0.2, -0.2).count(0), 9);
  EXPECT_THROW(threshold_extrema(zero, -0.1, -0.2), DomainError);
}

TEST(Threshold, RaisingThresholdNeverAddsDetections) {
  const auto r = dog_dichotomy(fixtures::scene(64, 64), 0.5, 1.0, 1.0);
  Index prev = r.planes[0].size() + 1;
  for (double thr = 0.01; thr < 0.5; thr += 0.02) {
    const auto m = threshold_extrema(r, thr, -thr);
    const Index n = m.count(1);
    EXPECT_LE(n, prev);
    prev = n;
  }
}

TEST(Aggregate, Examples) {
  ResponseMap<double> a;
  ResponseMap<double> b;
  a.planes.push_back(Plane<double>::Constant(2, 2, 0.1));
  b.planes.push_back(Plane<double>::Constant(2, 2, 0.4));
  const std::vector<ResponseMap<double>> ab{a, b};
  EXPECT_EQ(aggregate_over_gamma<double>(ab, AggregateMode::Max).planes[0](0, 0), 0.4);
  const std::vector<ResponseMap<double>> single{a};
  EXPECT_EQ(aggregate_over_gamma<double>(single, AggregateMode::Max).planes[0](1, 1), 0.1);
  ResponseMap<double> c;
  c.planes.push_back(Plane<double>::Constant(2, 2, -0.3));
  const std::vector<ResponseMap<double>> ca{c, a};
  EXPECT_EQ(aggregate_over_gamma<double>(ca, AggregateMode::NegMin).planes[0](0, 1), 0.3);

  ResponseMap<double> wrong;
  wrong.planes.push_back(Plane<double>::Zero(3, 2));
  const std::vector<ResponseMap<double>> mismatched{a, wrong};
  EXPECT_THROW(aggregate_over_gamma<double>(mismatched, AggregateMode::Max), GeometryMismatch);
}

TEST(Aggregate, MaxDominatesEveryResponse) {
  const auto img = fixtures::scene(48, 48);
  std::vector<ResponseMap<double>> rs;
  for (double g : ScaleSpaceConfig{}.gammas) rs.push_back(dog_dichotomy(img, g, 2.0, 1.0));
  const auto mx = aggregate_over_gamma<double>(rs, AggregateMode::Max);
  const auto nm = aggregate_over_gamma<double>(rs, AggregateMode::NegMin);
  for (const auto& r : rs) {
    EXPECT_TRUE((mx.planes[0] >= r.planes[0]).all());
    EXPECT_TRUE((-nm.planes[0] <= r.planes[0]).all());
  }
}

TEST(Overlay, PaletteBlending) {
  SignedMask red_hit;
  SignedMask green_hit;
  red_hit.planes.push_back(Plane<std::int8_t>::Zero(2, 2));
  green_hit.planes.push_back(Plane<std::int8_t>::Zero(2, 2));
  red_hit.planes[0](0, 0) = 1;
  red_hit.planes[0](0, 1) = -1;
  green_hit.planes[0](0, 1) = 1;
  const std::vector<SignedMask> masks{red_hit, green_hit};
  const std::vector<Rgb> palette{Rgb{1, 0, 0}, Rgb{0, 1, 0}};
  const auto o = compose_gamma_overlay(masks, palette);
  EXPECT_EQ(o(0, 0, 0), 1.0);
  EXPECT_EQ(o(0, 0, 1), 0.0);
  EXPECT_EQ(o(1, 0, 0), 1.0);  // yellow
  EXPECT_EQ(o(1, 0, 1), 1.0);
  EXPECT_EQ(o(1, 0, 2), 0.0);
  EXPECT_EQ(o(1, 1, 0) + o(1, 1, 1) + o(1, 1, 2), 0.0);

  const std::vector<Rgb> short_palette{Rgb{1, 0, 0}};
  EXPECT_THROW(compose_gamma_overlay(masks, short_palette), DomainError);
  SignedMask odd;
  odd.planes.push_back(Plane<std::int8_t>::Zero(3, 2));
  const std::vector<SignedMask> bad{red_hit, odd};
  EXPECT_THROW(compose_gamma_overlay(bad, palette), GeometryMismatch);
}

TEST(Extrema, RedGreenRendering) {
  SignedMask m;
  m.planes.push_back(Plane<std::int8_t>(1, 3));
  m.planes[0] << 1, -1, 0;
  const auto img = render_extrema(m);
  EXPECT_EQ(img(0, 0, 0), 1.0);
  EXPECT_EQ(img(0, 0, 1), 0.0);
  EXPECT_EQ(img(1, 0, 0), 0.0);
  EXPECT_EQ(img(1, 0, 1), 1.0);
  EXPECT_EQ(img(2, 0, 0) + img(2, 0, 1) + img(2, 0, 2), 0.0);
}

TEST(Config, Validation) {
  ScaleSpaceConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.gammas = {0.5, 1.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ScaleSpaceConfig{};
  cfg.thr_minus = 0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ScaleSpaceConfig{};
  cfg.sigma2_levels = {1.0, -2.0, 3.0, 4.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ScaleSpaceConfig{};
  cfg.subsample_factors = {1, 2};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ScaleSpaceConfig{};
  EXPECT_DOUBLE_EQ(cfg.t_for_level(3), 8.192 / 4.0);
  cfg.use_scale_factor = true;
  EXPECT_NEAR(cfg.step_for(2.0), 2.0, 1e-15);
}

TEST(Stack, DefaultConfigHas32Cells) {
  const auto img = to_grayscale(fixtures::mixed(128, 96));
  const ScaleSpaceConfig cfg;
  const auto stack = build_scale_space(img, cfg);
  ASSERT_EQ(stack.levels.size(), 4u);
  ASSERT_EQ(stack.cells.size(), 32u);
  EXPECT_EQ(stack.levels[2].image.width(), 128 / 3);
  EXPECT_EQ(stack.cell(3, 7).gamma, 4.0);
  EXPECT_DOUBLE_EQ(stack.cell(1, 0).t, 8.192 / 2.0);
  for (const auto& cell : stack.cells) {
    for (const auto& p : cell.dichotomy.planes) EXPECT_TRUE(p.allFinite());
  }
}

TEST(Stack, CellsMatchStandaloneDogAndAreThreadIndependent) {
  const auto img = fixtures::scene(64, 64);
  ScaleSpaceConfig cfg;
  cfg.sigma2_levels = {1.0, 2.0};
  cfg.subsample_factors = {1, 2};
  cfg.gammas = {0.5, 2.0};
  set_thread_count(1);
  const auto a = build_scale_space(img, cfg);
  set_thread_count(3);
  const auto b = build_scale_space(img, cfg);
  set_thread_count(0);
  ASSERT_EQ(a.cells.size(), 4u);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_TRUE((a.cells[i].dichotomy.planes[0] == b.cells[i].dichotomy.planes[0]).all());
  }
  const auto& c = a.cell(1, 1);
  const auto expected = dog_dichotomy(a.levels[1].image, 2.0, c.t, c.delta_t);
  EXPECT_LT((c.dichotomy.planes[0] - expected.planes[0]).abs().maxCoeff(), 1e-15);
}
