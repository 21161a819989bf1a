#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dichotome/core.hpp"
#include "dichotome/image.hpp"
#include "dichotome/metrics.hpp"
#include "dichotome/transform.hpp"

namespace dichotome::io {

namespace fs = std::filesystem;

/// PNG (8/16-bit gray, gray+alpha, RGB, RGBA, palette) or baseline JPEG.
/// Alpha is dropped; gray+alpha becomes gray, palette becomes RGB.
Raster read_image(const fs::path& path);

/// Grayscale or RGB PNG at the raster's bit depth, written atomically.
void write_png(const fs::path& path, const Raster& raster);

/// Encoded PNG bytes (no file involved).
std::vector<std::uint8_t> encode_png(const Raster& raster);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const fs::path& path, std::string_view contents);

std::string read_text(const fs::path& path);

nlohmann::json to_json(const DichotomyParams& params);
nlohmann::json to_json(const DichotomyLut& lut);
DichotomyLut lut_from_json(const nlohmann::json& j);

/// Class maps are stored per channel as run lengths of alternating branches,
/// starting with Ascending (a leading 0 means the row-major scan starts Descending).
nlohmann::json to_json(const TransformRecord& record);
TransformRecord record_from_json(const nlohmann::json& j);

void save_record(const fs::path& path, const TransformRecord& record);
TransformRecord load_record(const fs::path& path);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string file_hash(const fs::path& path);

/// Formats a double the same way on every run ("%.17g"; "inf"/"nan" spelled out).
std::string format_double(double v);

struct DatasetLoad {
  std::vector<ImagePair> pairs;  ///< sorted by file name
  std::vector<std::string> warnings;
};

/// Paired low/normal dataset. Accepted layouts under `root`:
///   low/ + high/,  eval15/low/ + eval15/high/,  test/low/ + test/high/.
/// Pairs are matched by identical file name; unmatched or unreadable files are
/// reported as warnings. Throws IoError when no layout or no pair is found.
DatasetLoad load_paired_dataset(const fs::path& root);

}  // namespace dichotome::io
