#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "dichotome/transform.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace dichotome;

namespace {

PlanarImage<double> random_image(Index w, Index h, int channels, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlanarImage<double> img(w, h, channels);
  for (auto& p : img.planes()) p = p.unaryExpr([&](double) { return u(rng); });
  return img;
}

PlanarImage<double> rgb_pixel(double r, double g, double b) {
  PlanarImage<double> img(1, 1, 3);
  img(0, 0, 0) = r;
  img(0, 0, 1) = g;
  img(0, 0, 2) = b;
  return img;
}

Raster all_levels_raster(int channels) {
  Raster r(256, 3, channels, 8);
  for (auto& p : r.planes) {
    for (Index y = 0; y < 3; ++y) {
      for (Index x = 0; x < 256; ++x) p(y, x) = static_cast<std::uint16_t>((x + 85 * y) % 256);
    }
  }
  return r;
}

}  // namespace

TEST(PlanarImage, ValidatesConstruction) {
  EXPECT_THROW(PlanarImage<double>(0, 4, 1), DomainError);
  EXPECT_THROW(PlanarImage<double>(4, 4, 2), DomainError);
  EXPECT_THROW(PlanarImage<double>(4, 4, 1, 12), DomainError);
  std::vector<Plane<double>> bad{Plane<double>::Constant(2, 2, 1.5)};
  EXPECT_THROW(PlanarImage<double>(std::move(bad)), DomainError);
  std::vector<Plane<double>> ragged{Plane<double>::Zero(2, 2), Plane<double>::Zero(2, 3), Plane<double>::Zero(2, 2)};
  EXPECT_THROW(PlanarImage<double>(std::move(ragged)), GeometryMismatch);
}

TEST(Quantize, Examples) {
  auto img = PlanarImage<double>::constant(1, 1, 1, 0.25);
  EXPECT_EQ(quantize(img, 8).planes[0](0, 0), 64);
  img(0, 0) = 1.0;
  EXPECT_EQ(quantize(img, 8).planes[0](0, 0), 255);
  img(0, 0) = 0.5;
  EXPECT_EQ(quantize(img, 8).planes[0](0, 0), 128);
  EXPECT_EQ(quantize(img, 16).planes[0](0, 0), 32768);
}

TEST(Quantize, DequantizeRoundTripsEveryLevel) {
  const Raster r = all_levels_raster(1);
  const auto back = quantize(dequantize<double>(r), 8);
  EXPECT_TRUE((back.planes[0] == r.planes[0]).all());
  EXPECT_EQ(dequantize<double>(r).source_bit_depth(), 8);
}

TEST(Enhance, ConstantAtDMaxBecomesOne) {
  const auto e = enhance(PlanarImage<double>::constant(5, 4, 1, 0.25), 0.5);
  EXPECT_TRUE((e.image.channel(0) == 1.0).all());
}

TEST(Enhance, BinaryImageVanishes) {
  const auto binary = fixtures::checkerboard(16, 16, 2);
  for (double g : {0.1, 0.5, 2.0, 4.0}) {
    EXPECT_EQ(enhance(binary, g).image.channel(0).abs().maxCoeff(), 0.0) << "gamma " << g;
  }
}

TEST(Enhance, GammaZeroIsTheNegative) {
  const auto img = random_image(13, 7, 3, 1);
  const auto e = enhance(img, 0.0);
  for (int c = 0; c < 3; ++c) EXPECT_TRUE(((1.0 - img.channel(c)) - e.image.channel(c)).abs().maxCoeff() < 1e-15);
}

TEST(Enhance, MatchesScalarOracle) {
  const auto img = random_image(9, 11, 3, 2);
  for (double g : {0.25, 0.5, 1.8, 4.0}) {
    const auto e = enhance(img, g);
    const double k = 1.0 / oracle::f(std::pow(g, 1.0 / (1.0 - g)), g);
    for (int c = 0; c < 3; ++c) {
      for (Index y = 0; y < img.height(); ++y) {
        for (Index x = 0; x < img.width(); ++x) {
          EXPECT_NEAR(e.image(x, y, c), std::min(1.0, k * oracle::f(img(x, y, c), g)), 1e-12);
        }
      }
    }
  }
}

TEST(Enhance, PreservesGeometryAndRange) {
  const auto img = random_image(17, 5, 3, 3);
  for (double g : {0.0, 0.1, 0.5, 0.9, 1.1, 2.0, 4.0, 10.0}) {
    const auto e = enhance(img, g);
    EXPECT_TRUE(e.image.same_geometry(img));
    for (const auto& p : e.image.planes()) {
      EXPECT_GE(p.minCoeff(), 0.0);
      EXPECT_LE(p.maxCoeff(), 1.0);
    }
  }
}

TEST(Enhance, RejectsDegenerateGamma) {
  const auto img = random_image(4, 4, 1, 4);
  EXPECT_THROW(enhance(img, 1.0), DegenerateGamma);
  EXPECT_THROW(enhance(img, -0.5), DomainError);
  EXPECT_THROW(classify_slopes(img, 1.0), DegenerateGamma);
}

TEST(Enhance, CommutesWithPixelShuffle) {
  const auto img = random_image(12, 10, 1, 5);
  std::vector<Index> perm(static_cast<std::size_t>(img.width() * img.height()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), std::mt19937(6));

  PlanarImage<double> shuffled(img.width(), img.height(), 1);
  for (std::size_t i = 0; i < perm.size(); ++i) shuffled.channel(0).data()[i] = img.channel(0).data()[perm[i]];

  const auto a = enhance(img, 0.38).image;
  const auto b = enhance(shuffled, 0.38).image;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    ASSERT_EQ(b.channel(0).data()[i], a.channel(0).data()[perm[i]]);
  }
}

TEST(Enhance, IndependentOfThreadCount) {
  const auto img = random_image(64, 97, 3, 7);
  set_thread_count(1);
  const auto one = enhance(img, 0.5);
  set_thread_count(4);
  const auto four = enhance(img, 0.5);
  set_thread_count(0);
  for (int c = 0; c < 3; ++c) EXPECT_TRUE((one.image.channel(c) == four.image.channel(c)).all());
}

TEST(Classify, Examples) {
  auto gray = PlanarImage<double>::constant(1, 1, 1, 0.1);
  EXPECT_EQ(classify_slopes(gray, 0.5).at(0, 0), Branch::Ascending);
  gray(0, 0) = 0.9;
  EXPECT_EQ(classify_slopes(gray, 0.5).at(0, 0), Branch::Descending);

  const auto map = classify_slopes(rgb_pixel(0.9, 0.1, 0.1), 0.5);
  EXPECT_EQ(map.at(0, 0, 0), Branch::Descending);
  EXPECT_EQ(map.at(0, 0, 1), Branch::Ascending);
  EXPECT_EQ(map.at(0, 0, 2), Branch::Ascending);
  const auto colour = render_class_map(map);
  EXPECT_EQ(colour(0, 0, 0), 0.0);  // cyan
  EXPECT_EQ(colour(0, 0, 1), 1.0);
  EXPECT_EQ(colour(0, 0, 2), 1.0);
}

TEST(Classify, CountMatchesThreshold) {
  const auto img = random_image(31, 23, 3, 8);
  for (double g : {0.25, 0.5, 1.8, 2.4}) {
    const double d = compute_d_max(g);
    Index expected = 0;
    for (const auto& p : img.planes()) expected += (p <= d).count();
    EXPECT_EQ(classify_slopes(img, g).ascending_count(), expected);
  }
}

TEST(RenderClassMap, ColourCode) {
  EXPECT_TRUE([] {
    const auto out = render_class_map(classify_slopes(rgb_pixel(0.1, 0.1, 0.1), 0.5));
    return out(0, 0, 0) == 1.0 && out(0, 0, 1) == 1.0 && out(0, 0, 2) == 1.0;
  }()) << "all ascending renders white";
  const auto yellow = render_class_map(classify_slopes(rgb_pixel(0.1, 0.1, 0.9), 0.5));
  EXPECT_EQ(yellow(0, 0, 0), 1.0);
  EXPECT_EQ(yellow(0, 0, 1), 1.0);
  EXPECT_EQ(yellow(0, 0, 2), 0.0);
  const auto black = render_class_map(classify_slopes(rgb_pixel(0.9, 0.9, 0.9), 0.5));
  EXPECT_EQ(black(0, 0, 0) + black(0, 0, 1) + black(0, 0, 2), 0.0);

  auto gray = PlanarImage<double>::constant(1, 1, 1, 0.9);
  const auto blue = render_class_map(classify_slopes(gray, 0.5));
  EXPECT_EQ(blue(0, 0, 0), 0.0);
  EXPECT_EQ(blue(0, 0, 1), 0.0);
  EXPECT_EQ(blue(0, 0, 2), 1.0);
  gray(0, 0) = 0.1;
  const auto red = render_class_map(classify_slopes(gray, 0.5));
  EXPECT_EQ(red(0, 0, 0), 1.0);
  EXPECT_EQ(red(0, 0, 2), 0.0);
}

TEST(Grayscale, Examples) {
  EXPECT_NEAR(to_grayscale(rgb_pixel(1, 1, 1))(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(to_grayscale(rgb_pixel(1, 0, 0))(0, 0), 0.299, 1e-15);
  EXPECT_NEAR(to_grayscale(rgb_pixel(0.2, 0.2, 0.2))(0, 0), 0.2, 1e-15);
  EXPECT_THROW(to_grayscale(PlanarImage<double>(2, 2, 1)), AlreadyGray);
}

TEST(Invert, LutRoundTripIsBitExact) {
  std::vector<double> gammas{0.0};
  for (int i = 1; i <= 40; ++i) {
    if (i != 10) gammas.push_back(i / 10.0);
  }
  const Raster raster = all_levels_raster(3);
  const auto img = dequantize<double>(raster);
  for (double g : gammas) {
    const auto e = enhance(img, g);
    ASSERT_TRUE(e.record.lut.has_value());
    const auto back = quantize(invert(e.image, e.record), 8);
    for (int c = 0; c < 3; ++c) {
      ASSERT_TRUE((back.planes[static_cast<std::size_t>(c)] == raster.planes[static_cast<std::size_t>(c)]).all())
          << "gamma " << g;
    }
  }
}

TEST(Invert, SixteenBitLutRoundTrip) {
  Raster r(4096, 1, 1, 16);
  for (Index x = 0; x < 4096; ++x) r.planes[0](0, x) = static_cast<std::uint16_t>(x * 16 + x % 16);
  const auto img = dequantize<double>(r);
  const auto e = enhance(img, 0.5);
  ASSERT_EQ(e.record.lut->bit_max, 65535);
  const auto back = quantize(invert(e.image, e.record), 16);
  EXPECT_TRUE((back.planes[0] == r.planes[0]).all());
}

TEST(Invert, GoldenRoundTripOnRealImage) {
  const auto img = random_image(40, 30, 3, 9);
  for (double g : {0.25, 0.5, 1.2, 2.0, 4.0}) {
    auto e = enhance(img, g, EnhanceOptions{.build_lut = false});
    ASSERT_FALSE(e.record.lut.has_value());
    const auto back = invert(e.image, e.record);
    double worst = 0.0;
    for (int c = 0; c < 3; ++c) worst = std::max(worst, (back.channel(c) - img.channel(c)).abs().maxCoeff());
    EXPECT_LT(worst, 1e-5) << "gamma " << g;
  }
}

TEST(Invert, ZeroImageStaysZero) {
  const auto zero = PlanarImage<double>::constant(6, 6, 1, 0.0);
  const auto e = enhance(zero, 0.5);
  EXPECT_EQ(invert(e.image, e.record).channel(0).abs().maxCoeff(), 0.0);
  auto golden = e.record;
  golden.lut.reset();
  EXPECT_EQ(invert(e.image, golden).channel(0).abs().maxCoeff(), 0.0);
}

TEST(Invert, RejectsMismatchedRecord) {
  const auto img = random_image(8, 8, 1, 10);
  const auto e = enhance(img, 0.5);
  const auto other = random_image(8, 9, 1, 11);
  EXPECT_THROW(invert(other, e.record), RecordMismatch);
  auto wrong_gamma = e.record;
  wrong_gamma.lut = build_lut(0.6, 255);
  EXPECT_THROW(invert(e.image, wrong_gamma), RecordMismatch);
  const auto rgb = random_image(8, 8, 3, 12);
  EXPECT_THROW(invert(rgb, e.record), RecordMismatch);
}

TEST(ApplyGamma, MatchesPow) {
  const auto img = random_image(7, 7, 1, 13);
  const auto out = apply_gamma(img, 2.2);
  EXPECT_NEAR((out.channel(0) - img.channel(0).pow(2.2)).abs().maxCoeff(), 0.0, 1e-15);
  EXPECT_TRUE((apply_gamma(img, 0.0).channel(0) == 1.0).all());
}
