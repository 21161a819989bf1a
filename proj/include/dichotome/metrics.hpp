#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dichotome/image.hpp"

namespace dichotome {

/// Shannon entropy (bits) of each patch of a rows x cols mesh.
struct EntropyGrid {
  int rows = 0;
  int cols = 0;
  Eigen::ArrayXXd values;  ///< rows x cols

  double mean() const { return values.mean(); }
};

/// Patches partition the image by integer division; the last patch row and
/// column absorb the remainder. Requires an 8-bit single-channel raster.
EntropyGrid patch_entropy(const Raster& gray8, int rows, int cols);

/// Counts of patch entropies over `bins` equal-width bins on [0, 8].
std::vector<std::size_t> entropy_histogram(const EntropyGrid& grid, int bins);

/// 10 log10(MAX^2 / MSE); +infinity when the rasters are identical.
double psnr(const Raster& reference, const Raster& candidate);

/// Mean SSIM over the valid region of an 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, L = 2^bits - 1. Multi-channel: mean of per-channel scores.
double ssim(const Raster& reference, const Raster& candidate);

struct ImagePair {
  std::string name;
  Raster low;
  Raster normal;
};

struct PairScore {
  std::string name;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct BenchmarkRecord {
  double gamma = 0.0;
  double psnr_mean = 0.0;
  double psnr_std = 0.0;
  double ssim_mean = 0.0;
  double ssim_std = 0.0;
  std::vector<PairScore> scores;      ///< sorted by pair name
  std::size_t excluded_infinite = 0;  ///< pairs dropped from the PSNR mean (MSE = 0)
};

struct SweepResult {
  std::vector<BenchmarkRecord> records;  ///< one per gamma, input order
  std::optional<std::size_t> best_psnr;  ///< index into records
  std::optional<std::size_t> best_ssim;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;  ///< per-pair failures, not fatal
};

/// For each gamma: enhance every low image, quantize to 8 bits and score it
/// against its normal-light mate.
SweepResult gamma_sweep(std::span<const ImagePair> pairs, std::span<const double> gammas);

}  // namespace dichotome
