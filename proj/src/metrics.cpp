#include "dichotome/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dichotome/parallel.hpp"
#include "dichotome/transform.hpp"

namespace dichotome {
namespace {

void check_same_geometry(const Raster& a, const Raster& b, const char* where) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels() ||
      a.bit_depth != b.bit_depth) {
    std::ostringstream msg;
    msg << where << ": rasters differ (" << a.width() << "x" << a.height() << "x" << a.channels() << "@"
        << a.bit_depth << " vs " << b.width() << "x" << b.height() << "x" << b.channels() << "@" << b.bit_depth
        << ")";
    throw GeometryMismatch(msg.str());
  }
  if (a.planes.empty()) throw DomainError(std::string(where) + ": empty raster");
}

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;

std::array<double, kWindow> ssim_window() {
  std::array<double, kWindow> w{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
    sum += w[static_cast<std::size_t>(i)];
  }
  for (double& v : w) v /= sum;
  return w;
}

// 'valid' separable filtering: output is (rows - 10) x (cols - 10).
Plane<double> filter_valid(const Plane<double>& in, const std::array<double, kWindow>& w) {
  const Index out_rows = in.rows() - kWindow + 1;
  const Index out_cols = in.cols() - kWindow + 1;
  Plane<double> tmp = Plane<double>::Zero(in.rows(), out_cols);
  for (int j = 0; j < kWindow; ++j) tmp += w[static_cast<std::size_t>(j)] * in.middleCols(j, out_cols);
  Plane<double> out = Plane<double>::Zero(out_rows, out_cols);
  for (int j = 0; j < kWindow; ++j) out += w[static_cast<std::size_t>(j)] * tmp.middleRows(j, out_rows);
  return out;
}

double ssim_plane(const Plane<double>& x, const Plane<double>& y, double dynamic_range) {
  static const auto w = ssim_window();
  const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);

  const Plane<double> mu_x = filter_valid(x, w);
  const Plane<double> mu_y = filter_valid(y, w);
  const Plane<double> sigma_xx = filter_valid(x * x, w) - mu_x * mu_x;
  const Plane<double> sigma_yy = filter_valid(y * y, w) - mu_y * mu_y;
  const Plane<double> sigma_xy = filter_valid(x * y, w) - mu_x * mu_y;

  const Plane<double> map = ((2.0 * mu_x * mu_y + c1) * (2.0 * sigma_xy + c2)) /
                            ((mu_x * mu_x + mu_y * mu_y + c1) * (sigma_xx + sigma_yy + c2));
  return map.mean();
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) {
    r.mean = std::numeric_limits<double>::quiet_NaN();
    r.std = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(v.size()));
  return r;
}

}  // namespace

EntropyGrid patch_entropy(const Raster& gray8, int rows, int cols) {
  if (gray8.channels() != 1 || gray8.bit_depth != 8) {
    throw DomainError("patch_entropy: expects an 8-bit single-channel raster");
  }
  if (rows < 1 || cols < 1) throw DomainError("patch_entropy: mesh must be at least 1x1");
  if (gray8.height() < rows || gray8.width() < cols) {
    std::ostringstream msg;
    msg << "patch_entropy: " << gray8.width() << "x" << gray8.height() << " image is smaller than the " << cols
        << "x" << rows << " mesh";
    throw ImageTooSmall(msg.str());
  }

  const Index patch_h = gray8.height() / rows;
  const Index patch_w = gray8.width() / cols;
  const auto& data = gray8.planes.front();

  EntropyGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.values.resize(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const Index y0 = r * patch_h;
    const Index h = r == rows - 1 ? gray8.height() - y0 : patch_h;
    for (int c = 0; c < cols; ++c) {
      const Index x0 = c * patch_w;
      const Index w = c == cols - 1 ? gray8.width() - x0 : patch_w;

      std::array<std::size_t, 256> hist{};
      const auto block = data.block(y0, x0, h, w);
      for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) ++hist[block(y, x)];
      }
      const double n = static_cast<double>(h * w);
      double entropy = 0.0;
      for (std::size_t count : hist) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / n;
        entropy -= p * std::log2(p);
      }
      grid.values(r, c) = entropy;
    }
  }
  return grid;
}

std::vector<std::size_t> entropy_histogram(const EntropyGrid& grid, int bins) {
  if (bins < 1) throw DomainError("entropy_histogram: bins must be >= 1");
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  const double width = 8.0 / bins;
  for (Index i = 0; i < grid.values.size(); ++i) {
    const double v = grid.values(i);
    auto bin = static_cast<int>(std::floor(v / width));
    bin = std::clamp(bin, 0, bins - 1);
    ++counts[static_cast<std::size_t>(bin)];
  }
  return counts;
}

double psnr(const Raster& reference, const Raster& candidate) {
  check_same_geometry(reference, candidate, "psnr");
  double sse = 0.0;
  double n = 0.0;
  for (int c = 0; c < reference.channels(); ++c) {
    const auto diff = reference.planes[static_cast<std::size_t>(c)].cast<double>() -
                      candidate.planes[static_cast<std::size_t>(c)].cast<double>();
    sse += diff.square().sum();
    n += static_cast<double>(diff.size());
  }
  const double mse = sse / n;
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = static_cast<double>(max_level(reference.bit_depth));
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Raster& reference, const Raster& candidate) {
  check_same_geometry(reference, candidate, "ssim");
  if (reference.width() < kWindow || reference.height() < kWindow) {
    throw ImageTooSmall("ssim: images must be at least 11x11");
  }
  const double range = static_cast<double>(max_level(reference.bit_depth));
  double total = 0.0;
  for (int c = 0; c < reference.channels(); ++c) {
    total += ssim_plane(reference.planes[static_cast<std::size_t>(c)].cast<double>(),
                        candidate.planes[static_cast<std::size_t>(c)].cast<double>(), range);
  }
  return total / reference.channels();
}

SweepResult gamma_sweep(std::span<const ImagePair> pairs, std::span<const double> gammas) {
  SweepResult result;
  if (gammas.empty()) return result;
  if (pairs.empty()) throw DomainError("gamma_sweep: no image pairs");
  for (double g : gammas) {
    if (g == 1.0) throw DegenerateGamma("gamma_sweep");
    if (!(g >= 0.0)) throw DomainError("gamma_sweep: gamma values must be >= 0");
  }

  // Dequantize once; every gamma reuses the same inputs.
  std::vector<std::optional<PlanarImage<double>>> lows(pairs.size());
  std::vector<std::string> pair_errors(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const ImagePair& p = pairs[i];
    try {
      if (p.low.width() != p.normal.width() || p.low.height() != p.normal.height() ||
          p.low.channels() != p.normal.channels()) {
        throw GeometryMismatch("low and normal images differ in geometry");
      }
      if (p.normal.bit_depth != 8) throw DomainError("normal-light reference must be 8-bit");
      lows[i] = dequantize<double>(p.low);
    } catch (const Error& e) {
      pair_errors[i] = p.name + ": " + e.what();
    }
  }
  for (const auto& e : pair_errors) {
    if (!e.empty()) result.errors.push_back(e);
  }

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pairs[a].name < pairs[b].name; });

  for (double gamma : gammas) {
    std::vector<std::optional<PairScore>> scores(pairs.size());
    std::vector<std::string> failures(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
      if (!lows[i]) return;
      try {
        const auto enhanced = enhance(*lows[i], gamma, EnhanceOptions{.build_lut = false});
        const Raster out = quantize(enhanced.image, 8);
        scores[i] = PairScore{pairs[i].name, psnr(pairs[i].normal, out), ssim(pairs[i].normal, out)};
      } catch (const Error& e) {
        failures[i] = pairs[i].name + ": " + e.what();
      }
    });

    BenchmarkRecord record;
    record.gamma = gamma;
    std::vector<double> psnrs;
    std::vector<double> ssims;
    for (std::size_t i : order) {
      if (!failures[i].empty()) result.errors.push_back(failures[i]);
      if (!scores[i]) continue;
      record.scores.push_back(*scores[i]);
      if (std::isinf(scores[i]->psnr)) {
        ++record.excluded_infinite;
        std::ostringstream msg;
        msg << "gamma " << gamma << ": " << pairs[i].name << " is identical to its reference; PSNR excluded";
        result.warnings.push_back(msg.str());
      } else {
        psnrs.push_back(scores[i]->psnr);
      }
      ssims.push_back(scores[i]->ssim);
    }
    const MeanStd p = mean_std(psnrs);
    const MeanStd s = mean_std(ssims);
    record.psnr_mean = p.mean;
    record.psnr_std = p.std;
    record.ssim_mean = s.mean;
    record.ssim_std = s.std;
    result.records.push_back(std::move(record));
  }

  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& r = result.records[i];
    if (!std::isnan(r.psnr_mean) && (!result.best_psnr || r.psnr_mean > result.records[*result.best_psnr].psnr_mean)) {
      result.best_psnr = i;
    }
    if (!std::isnan(r.ssim_mean) && (!result.best_ssim || r.ssim_mean > result.records[*result.best_ssim].ssim_mean)) {
      result.best_ssim = i;
    }
  }
  return result;
}

}  // namespace dichotome
