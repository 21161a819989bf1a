#include "dichotome/io.hpp"

#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

namespace dichotome::io {
namespace {

using json = nlohmann::json;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
  return f;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- PNG -------------------------------------------------------------------

struct PngReadState {
  const std::vector<std::uint8_t>* data;
  std::size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (state->offset + n > state->data->size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, state->data->data() + state->offset, n);
  state->offset += n;
}

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text != nullptr) *text = msg;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

Raster decode_png(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_fn, png_warning_fn);
  if (png == nullptr) throw IoError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialisation failed");
  }

  PngReadState state{&bytes, 0};
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  Raster raster;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("cannot decode PNG '" + path.string() + "': " + error);
  }

  png_set_read_fn(png, &state, png_read_from_memory);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // host little-endian uint16 samples
  png_read_update_info(png, info);

  const auto width = static_cast<Index>(png_get_image_width(png, info));
  const auto height = static_cast<Index>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);

  pixels.resize(rowbytes * static_cast<std::size_t>(height));
  rows.resize(static_cast<std::size_t>(height));
  for (Index y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = pixels.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) throw IoError("unsupported PNG channel layout in '" + path.string() + "'");
  raster = Raster(width, height, channels, out_depth == 16 ? 16 : 8);
  for (Index y = 0; y < height; ++y) {
    const std::uint8_t* row = rows[static_cast<std::size_t>(y)];
    for (Index x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        const std::size_t i = static_cast<std::size_t>(x * channels + c);
        std::uint16_t v;
        if (out_depth == 16) {
          std::memcpy(&v, row + 2 * i, 2);
        } else {
          v = row[i];
        }
        raster.planes[static_cast<std::size_t>(c)](y, x) = v;
      }
    }
  }
  return raster;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

// ---- JPEG ------------------------------------------------------------------

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

Raster decode_jpeg(std::vector<std::uint8_t>& bytes, const fs::path& path) {
  jpeg_decompress_struct cinfo{};
  JpegError err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  std::vector<std::uint8_t> pixels;

  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError("cannot decode JPEG '" + path.string() + "': " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const auto width = static_cast<Index>(cinfo.output_width);
  const auto height = static_cast<Index>(cinfo.output_height);
  const int channels = cinfo.output_components;
  const std::size_t stride = static_cast<std::size_t>(width * channels);
  pixels.resize(stride * static_cast<std::size_t>(height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  Raster raster(width, height, channels, 8);
  for (Index y = 0; y < height; ++y) {
    for (Index x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        raster.planes[static_cast<std::size_t>(c)](y, x) =
            pixels[static_cast<std::size_t>(y) * stride + static_cast<std::size_t>(x * channels + c)];
      }
    }
  }
  return raster;
}

// ---- records ---------------------------------------------------------------

json encode_runs(const Plane<std::uint8_t>& tags) {
  json runs = json::array();
  std::uint8_t current = static_cast<std::uint8_t>(Branch::Ascending);
  std::uint64_t run = 0;
  for (Index i = 0; i < tags.size(); ++i) {
    const std::uint8_t v = tags.data()[i];
    if (v != current) {
      runs.push_back(run);
      run = 0;
      current = v;
    }
    ++run;
  }
  runs.push_back(run);
  return runs;
}

Plane<std::uint8_t> decode_runs(const json& runs, Index width, Index height) {
  Plane<std::uint8_t> tags(height, width);
  Index pos = 0;
  std::uint8_t current = static_cast<std::uint8_t>(Branch::Ascending);
  for (const auto& r : runs) {
    const auto n = r.get<std::int64_t>();
    if (n < 0 || pos + n > tags.size()) throw RecordMismatch("class map runs exceed the image size");
    std::fill_n(tags.data() + pos, n, current);
    pos += n;
    current ^= 1u;
  }
  if (pos != tags.size()) throw RecordMismatch("class map runs do not cover the image");
  return tags;
}

fs::path temp_sibling(const fs::path& path) {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::ostringstream name;
  name << "." << path.filename().string() << ".tmp" << std::hex << rng();
  return path.parent_path() / name.str();
}

}  // namespace

Raster read_image(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("no such file: '" + path.string() + "'");
  std::vector<std::uint8_t> bytes = read_bytes(path);
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(std::begin(kPngMagic), std::end(kPngMagic), bytes.begin())) {
    return decode_png(bytes, path);
  }
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return decode_jpeg(bytes, path);
  }
  throw IoError("unsupported image format: '" + path.string() + "' (expected PNG or JPEG)");
}

std::vector<std::uint8_t> encode_png(const Raster& raster) {
  if (raster.planes.empty()) throw IoError("encode_png: empty raster");
  if (raster.channels() != 1 && raster.channels() != 3) throw IoError("encode_png: channels must be 1 or 3");
  if (raster.bit_depth != 8 && raster.bit_depth != 16) throw IoError("encode_png: bit depth must be 8 or 16");

  const Index width = raster.width();
  const Index height = raster.height();
  const int channels = raster.channels();
  const int bytes_per_sample = raster.bit_depth / 8;
  const std::size_t stride = static_cast<std::size_t>(width * channels * bytes_per_sample);
  std::vector<std::uint8_t> pixels(stride * static_cast<std::size_t>(height));
  for (Index y = 0; y < height; ++y) {
    std::uint8_t* row = pixels.data() + static_cast<std::size_t>(y) * stride;
    for (Index x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        const std::uint16_t v = raster.planes[static_cast<std::size_t>(c)](y, x);
        const std::size_t i = static_cast<std::size_t>(x * channels + c);
        if (bytes_per_sample == 2) {
          row[2 * i] = static_cast<std::uint8_t>(v >> 8);  // PNG is big-endian
          row[2 * i + 1] = static_cast<std::uint8_t>(v & 0xFF);
        } else {
          row[i] = static_cast<std::uint8_t>(v);
        }
      }
    }
  }

  std::string error;
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_fn, png_warning_fn);
  if (png == nullptr) throw IoError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialisation failed");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (Index y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = pixels.data() + y * stride;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encoding failed: " + error);
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), raster.bit_depth,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const fs::path& path, const Raster& raster) {
  const std::vector<std::uint8_t> bytes = encode_png(raster);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  const fs::path tmp = temp_sibling(path);
  {
    FilePtr f = open_file(tmp, "wb");
    if (std::fwrite(contents.data(), 1, contents.size(), f.get()) != contents.size() || std::fflush(f.get()) != 0) {
      f.reset();
      fs::remove(tmp);
      throw IoError("cannot write '" + path.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot replace '" + path.string() + "': " + ec.message());
  }
}

std::string read_text(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

json to_json(const DichotomyParams& p) {
  return json{{"gamma", p.gamma},     {"d_max", p.d_max},       {"doc_max", p.doc_max},
              {"k", p.k},             {"m_plus", p.m_plus},     {"m_minus", p.m_minus},
              {"r_plus", p.r_plus},   {"r_minus", p.r_minus}};
}

json to_json(const DichotomyLut& lut) {
  return json{{"gamma", lut.gamma},
              {"bit_max", lut.bit_max},
              {"boundary_index", lut.boundary_index},
              {"entries", lut.entries}};
}

DichotomyLut lut_from_json(const json& j) {
  try {
    DichotomyLut lut;
    lut.gamma = j.at("gamma").get<double>();
    lut.bit_max = j.at("bit_max").get<int>();
    lut.boundary_index = j.at("boundary_index").get<int>();
    lut.entries = j.at("entries").get<std::vector<double>>();
    return lut;
  } catch (const json::exception& e) {
    throw RecordMismatch(std::string("malformed LUT: ") + e.what());
  }
}

json to_json(const TransformRecord& record) {
  json channels = json::array();
  for (const auto& plane : record.class_map.planes) channels.push_back(encode_runs(plane));
  json j{{"format", "dichotome-record"},
         {"version", 1},
         {"gamma", record.params.gamma},
         {"source_bit_depth", record.source_bit_depth},
         {"params", to_json(record.params)},
         {"class_map",
          {{"width", record.class_map.width()},
           {"height", record.class_map.height()},
           {"channels", record.class_map.channels()},
           {"runs", channels}}}};
  j["lut"] = record.lut ? to_json(*record.lut) : json(nullptr);
  return j;
}

TransformRecord record_from_json(const json& j) {
  try {
    if (j.value("format", std::string()) != "dichotome-record") throw RecordMismatch("not a transform record");
    if (j.at("version").get<int>() != 1) throw RecordMismatch("unsupported record version");
    TransformRecord record;
    // Params are rederived from gamma so a record cannot smuggle in an inconsistent set.
    record.params = compute_params(j.at("gamma").get<double>());
    record.source_bit_depth = j.at("source_bit_depth").get<int>();
    const json& map = j.at("class_map");
    const auto width = map.at("width").get<Index>();
    const auto height = map.at("height").get<Index>();
    const int channels = map.at("channels").get<int>();
    const json& runs = map.at("runs");
    if (width <= 0 || height <= 0 || static_cast<int>(runs.size()) != channels) {
      throw RecordMismatch("class map header is inconsistent");
    }
    for (const auto& r : runs) record.class_map.planes.push_back(decode_runs(r, width, height));
    if (!j.at("lut").is_null()) record.lut = lut_from_json(j.at("lut"));
    return record;
  } catch (const json::exception& e) {
    throw RecordMismatch(std::string("malformed record: ") + e.what());
  } catch (const DegenerateGamma&) {
    throw RecordMismatch("record gamma is degenerate");
  } catch (const DomainError& e) {
    throw RecordMismatch(std::string("record gamma is invalid: ") + e.what());
  }
}

void save_record(const fs::path& path, const TransformRecord& record) {
  write_file_atomic(path, to_json(record).dump(1) + "\n");
}

TransformRecord load_record(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("no such file: '" + path.string() + "'");
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw RecordMismatch("record '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return record_from_json(j);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const fs::path& path) { return fnv1a_hex(read_text(path)); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DatasetLoad load_paired_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("dataset directory not found: '" + root.string() + "'");
  static const std::pair<const char*, const char*> kLayouts[] = {
      {"low", "high"}, {"eval15/low", "eval15/high"}, {"test/low", "test/high"}};

  fs::path low_dir;
  fs::path high_dir;
  for (const auto& [low, high] : kLayouts) {
    if (fs::is_directory(root / low) && fs::is_directory(root / high)) {
      low_dir = root / low;
      high_dir = root / high;
      break;
    }
  }
  if (low_dir.empty()) {
    throw IoError("no low/ + high/ (or eval15/low + eval15/high) directories under '" + root.string() + "'");
  }

  auto list = [](const fs::path& dir) {
    std::map<std::string, fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files[entry.path().filename().string()] = entry.path();
    }
    return files;
  };
  const auto lows = list(low_dir);
  const auto highs = list(high_dir);

  DatasetLoad load;
  for (const auto& [name, low_path] : lows) {
    const auto it = highs.find(name);
    if (it == highs.end()) {
      load.warnings.push_back("no normal-light mate for '" + name + "'; skipped");
      continue;
    }
    try {
      ImagePair pair{name, read_image(low_path), read_image(it->second)};
      load.pairs.push_back(std::move(pair));
    } catch (const Error& e) {
      load.warnings.push_back("unreadable pair '" + name + "': " + e.what() + "; skipped");
    }
  }
  for (const auto& [name, path] : highs) {
    if (!lows.contains(name)) load.warnings.push_back("no low-light mate for '" + name + "'; skipped");
  }
  if (load.pairs.empty()) throw IoError("no readable image pairs under '" + root.string() + "'");
  return load;
}

}  // namespace dichotome::io
