#include "dichotome/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "dichotome/config.hpp"
#include "dichotome/io.hpp"
#include "dichotome/metrics.hpp"
#include "dichotome/parallel.hpp"
#include "dichotome/scale_space.hpp"
#include "dichotome/transform.hpp"

namespace dichotome::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Raised for argument combinations CLI11 cannot express; maps to exit 2.
struct UsageError : Error {
  using Error::Error;
};

void require_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw UsageError("--gamma must be a finite value >= 0");
  if (gamma == 1.0) throw UsageError("--gamma 1 is degenerate (x^1 - x is identically 0)");
}

double mean_of(const PlanarImage<double>& img) {
  double sum = 0.0;
  for (const auto& p : img.planes()) sum += p.sum();
  return sum / static_cast<double>(img.sample_count());
}

std::string gamma_tag(double gamma) {
  std::ostringstream s;
  s << std::setprecision(6) << gamma;
  return s.str();
}

// ---- enhance ----------------------------------------------------------------

struct EnhanceArgs {
  std::string input;
  std::string output;
  double gamma = 0.5;
  std::string record;
  std::string classmap;
  int depth = 0;
};

int cmd_enhance(const EnhanceArgs& a, std::ostream& out) {
  require_gamma(a.gamma);
  const Raster raster = io::read_image(a.input);
  const auto image = dequantize<double>(raster);
  const auto result = enhance(image, a.gamma, EnhanceOptions{.build_lut = !a.record.empty()});

  int depth = a.depth;
  if (depth == 0) depth = a.record.empty() ? raster.bit_depth : 16;
  io::write_png(a.output, quantize(result.image, depth));
  if (!a.record.empty()) io::save_record(a.record, result.record);
  if (!a.classmap.empty()) io::write_png(a.classmap, quantize(render_class_map(result.record.class_map), 8));

  const auto& p = result.record.params;
  out << std::setprecision(10) << "gamma " << p.gamma << "  d_max " << p.d_max << "  k " << p.k << "\n"
      << "mean intensity " << mean_of(image) << " -> " << mean_of(result.image) << "\n"
      << "ascending samples " << result.record.class_map.ascending_count() << " of " << image.sample_count()
      << "\n"
      << "wrote " << a.output << " (" << depth << "-bit)\n";
  return kOk;
}

// ---- invert -----------------------------------------------------------------

struct InvertArgs {
  std::string enhanced;
  std::string record;
  std::string output;
  std::string reference;
  bool golden = false;
  double epsilon = GoldenSearchConfig{}.epsilon;
};

int cmd_invert(const InvertArgs& a, std::ostream& out) {
  const Raster raster = io::read_image(a.enhanced);
  TransformRecord record = io::load_record(a.record);
  if (a.golden) record.lut.reset();
  GoldenSearchConfig golden;
  golden.epsilon = a.epsilon;
  golden.validate();

  const auto enhanced = dequantize<double>(raster);
  const auto recon = invert(enhanced, record, golden);
  const Raster recon_raster = quantize(recon, record.source_bit_depth);
  io::write_png(a.output, recon_raster);

  out << std::setprecision(10) << "inversion: " << (record.lut ? "lookup table" : "golden-section search") << "\n";
  if (!a.reference.empty()) {
    const Raster ref = io::read_image(a.reference);
    if (ref.width() != recon_raster.width() || ref.height() != recon_raster.height() ||
        ref.channels() != recon_raster.channels()) {
      throw RecordMismatch("reference image geometry differs from the reconstruction");
    }
    const auto ref_img = dequantize<double>(ref);
    const auto& cmp = record.lut ? dequantize<double>(recon_raster) : recon;
    double err = 0.0;
    for (int c = 0; c < ref_img.channels(); ++c) {
      err = std::max(err, (cmp.channel(c) - ref_img.channel(c)).abs().maxCoeff());
    }
    out << "max error vs reference: " << err << "\n";
  }
  if (!record.lut) {
    // Forward residual: how well the recovered samples reproduce the stored image.
    const auto& p = record.params;
    double residual = 0.0;
    for (int c = 0; c < recon.channels(); ++c) {
      const auto forward = recon.channel(c).unaryExpr([&p](double x) { return dichotomy_normalized(x, p); });
      residual = std::max(residual, (forward - enhanced.channel(c)).abs().maxCoeff());
    }
    out << "max forward residual: " << residual << "\n";
  }
  out << "wrote " << a.output << " (" << record.source_bit_depth << "-bit)\n";
  return kOk;
}

// ---- dogspace ---------------------------------------------------------------

struct DogspaceArgs {
  std::string input;
  std::string outdir;
  std::string config;
  std::string gammas;
  std::optional<double> thr_plus;
  std::optional<double> thr_minus;
};

struct Artifact {
  std::string path;  // relative to the output directory
  std::string hash;
};

class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) {}

  Artifact png(const std::string& rel, const Raster& raster) {
    const std::vector<std::uint8_t> bytes = io::encode_png(raster);
    return text(rel, std::string(bytes.begin(), bytes.end()));
  }

  Artifact text(const std::string& rel, const std::string& contents) {
    io::write_file_atomic(root_ / rel, contents);
    return {rel, io::fnv1a_hex(contents)};
  }

 private:
  fs::path root_;
};

json artifact_json(const Artifact& a) { return json{{"path", a.path}, {"fnv1a", a.hash}}; }

// 16-bit gray rendering stretched over [min, max] plus a JSON sidecar with the range.
json write_response(OutputDir& dir, const std::string& stem, const ResponseMap<double>& r) {
  const double lo = r.min_value();
  const double hi = r.max_value();
  const double span = hi > lo ? hi - lo : 1.0;
  PlanarImage<double> img(r.width(), r.height(), r.channels(), 16);
  for (int c = 0; c < r.channels(); ++c) {
    img.channel(c) = ((r.planes[static_cast<std::size_t>(c)] - lo) / span).min(1.0).max(0.0);
  }
  const Artifact png = dir.png(stem + ".png", quantize(img, 16));
  const json range{{"min", lo}, {"max", hi}, {"width", r.width()}, {"height", r.height()}};
  const Artifact side = dir.text(stem + ".json", range.dump(1) + "\n");
  return json{{"image", artifact_json(png)}, {"range", artifact_json(side)}, {"min", lo}, {"max", hi}};
}

json write_mask(OutputDir& dir, const std::string& stem, const SignedMask& mask) {
  const Artifact png = dir.png(stem + ".png", quantize(render_extrema(mask), 8));
  return json{{"image", artifact_json(png)},
              {"positive", mask.count(1)},
              {"negative", mask.count(-1)}};
}

int cmd_dogspace(const DogspaceArgs& a, std::ostream& out) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  if (!a.gammas.empty()) cfg.scale_space.gammas = parse_gamma_list(a.gammas);
  if (a.thr_plus) cfg.scale_space.thr_plus = *a.thr_plus;
  if (a.thr_minus) cfg.scale_space.thr_minus = *a.thr_minus;
  cfg.validate();
  const ScaleSpaceConfig& ss = cfg.scale_space;

  const std::string input_bytes = io::read_text(a.input);
  auto image = dequantize<double>(io::read_image(a.input));
  if (image.channels() == 3) image = to_grayscale(image);
  (void)pyramid_level_sizes(image.width(), image.height(), ss);

  const ScaleSpaceStack stack = build_scale_space(image, ss);
  OutputDir dir(a.outdir);

  json levels = json::array();
  for (std::size_t l = 0; l < stack.levels.size(); ++l) {
    const ScaleSpaceLevel& level = stack.levels[l];
    const std::string base = "level" + std::to_string(l) + "/";
    levels.push_back({{"index", l},
                      {"sigma2", level.sigma2},
                      {"factor", level.factor},
                      {"width", level.image.width()},
                      {"height", level.image.height()},
                      {"t", level.t},
                      {"delta_t", level.delta_t},
                      {"pyramid", artifact_json(dir.png(base + "pyramid.png", quantize(level.image, 16)))},
                      {"dog", write_response(dir, base + "dog", level.plain)},
                      {"dichotomy_max", write_response(dir, base + "dichotomy_max", level.dichotomy_max)},
                      {"dichotomy_neg_min", write_response(dir, base + "dichotomy_neg_min", level.dichotomy_neg_min)},
                      {"gamma_max", write_response(dir, base + "gamma_max", level.gamma_max)},
                      {"gamma_neg_min", write_response(dir, base + "gamma_neg_min", level.gamma_neg_min)},
                      {"dichotomy_overlay",
                       artifact_json(dir.png(base + "dichotomy_overlay.png", quantize(level.dichotomy_overlay, 8)))},
                      {"gamma_overlay",
                       artifact_json(dir.png(base + "gamma_overlay.png", quantize(level.gamma_overlay, 8)))}});
  }

  json cells = json::array();
  for (const ScaleSpaceCell& cell : stack.cells) {
    const std::string base = "level" + std::to_string(cell.level) + "/gamma_" + gamma_tag(cell.gamma) + "/";
    cells.push_back({{"level", cell.level},
                     {"sigma2", cell.sigma2},
                     {"gamma", cell.gamma},
                     {"t", cell.t},
                     {"delta_t", cell.delta_t},
                     {"dichotomy", write_response(dir, base + "dichotomy", cell.dichotomy)},
                     {"dichotomy_extrema", write_mask(dir, base + "dichotomy_extrema", cell.dichotomy_mask)},
                     {"gamma_dog", write_response(dir, base + "gamma_dog", cell.gamma_response)},
                     {"gamma_extrema", write_mask(dir, base + "gamma_extrema", cell.gamma_mask)}});
  }

  const json manifest{{"format", "dichotome-dogspace"},
                      {"version", 1},
                      {"input", {{"path", fs::path(a.input).filename().string()}, {"fnv1a", io::fnv1a_hex(input_bytes)}}},
                      {"config", to_config_text(cfg)},
                      {"levels", levels},
                      {"cells", cells},
                      {"cell_count", stack.cells.size()}};
  dir.text("manifest.json", manifest.dump(1) + "\n");

  out << stack.levels.size() << " levels x " << ss.gammas.size() << " gammas = " << stack.cells.size()
      << " cells\n"
      << "wrote " << (fs::path(a.outdir) / "manifest.json").string() << "\n";
  return kOk;
}

// ---- entropy ----------------------------------------------------------------

struct EntropyArgs {
  std::string input;
  std::string outdir;
  std::string mesh;
  std::string config;
  std::optional<int> bins;
  std::optional<double> gamma;
};

Rgb heat_colour(double v) {
  // Piecewise-linear dark blue -> cyan -> yellow -> white.
  static const std::array<Rgb, 4> stops{Rgb{0.05, 0.03, 0.35}, Rgb{0.0, 0.7, 0.8}, Rgb{1.0, 0.9, 0.1},
                                        Rgb{1.0, 1.0, 1.0}};
  const double t = std::clamp(v, 0.0, 1.0) * (stops.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  Rgb c{};
  for (std::size_t k = 0; k < 3; ++k) c[k] = stops[i][k] * (1.0 - f) + stops[i + 1][k] * f;
  return c;
}

Raster render_heatmap(const EntropyGrid& grid, int cell_px) {
  PlanarImage<double> img(grid.cols * cell_px, grid.rows * cell_px, 3);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const Rgb colour = heat_colour(grid.values(r, c) / 8.0);
      for (int ch = 0; ch < 3; ++ch) {
        img.channel(ch).block(r * cell_px, c * cell_px, cell_px, cell_px).setConstant(colour[static_cast<std::size_t>(ch)]);
      }
    }
  }
  return quantize(img, 8);
}

std::string grid_csv(const EntropyGrid& grid) {
  std::ostringstream s;
  s << std::setprecision(10);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) s << (c ? "," : "") << grid.values(r, c);
    s << "\n";
  }
  return s.str();
}

std::string histogram_csv(const std::vector<std::size_t>& counts) {
  std::ostringstream s;
  s << "bin_low,bin_high,count\n";
  const double w = 8.0 / static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) s << i * w << "," << (i + 1) * w << "," << counts[i] << "\n";
  return s.str();
}

Raster gray8(const PlanarImage<double>& img) {
  return quantize(img.channels() == 3 ? to_grayscale(img) : img, 8);
}

int cmd_entropy(const EntropyArgs& a, std::ostream& out) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  if (!a.mesh.empty()) std::tie(cfg.mesh_rows, cfg.mesh_cols) = parse_mesh(a.mesh);
  if (a.bins) cfg.histogram_bins = *a.bins;
  if (a.gamma) require_gamma(*a.gamma);
  if (cfg.mesh_rows < 1 || cfg.mesh_cols < 1) throw UsageError("--mesh must be at least 1x1");
  if (cfg.histogram_bins < 1) throw UsageError("--bins must be >= 1");

  const auto image = dequantize<double>(io::read_image(a.input));
  OutputDir dir(a.outdir);

  auto emit = [&](const std::string& prefix, const PlanarImage<double>& img) {
    const EntropyGrid grid = patch_entropy(gray8(img), cfg.mesh_rows, cfg.mesh_cols);
    dir.text(prefix + "entropy.csv", grid_csv(grid));
    dir.text(prefix + "histogram.csv", histogram_csv(entropy_histogram(grid, cfg.histogram_bins)));
    dir.png(prefix + "heatmap.png", render_heatmap(grid, 16));
    return grid.mean();
  };

  out << std::setprecision(6) << "mesh " << cfg.mesh_rows << "x" << cfg.mesh_cols << "\n";
  const double original = emit("", image);
  out << "mean patch entropy " << original << " bits\n";
  if (a.gamma) {
    const double enhanced = emit("enhanced_", enhance(image, *a.gamma, EnhanceOptions{.build_lut = false}).image);
    out << "mean patch entropy after enhancement (gamma " << *a.gamma << ") " << enhanced << " bits\n";
  }
  out << "wrote " << a.outdir << "\n";
  return kOk;
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
  std::string dataset;
  std::string outdir;
  std::string gammas = "0.5:0.05:1.5";
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<double> gammas = parse_gamma_list(a.gammas);
  for (double g : gammas) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw UsageError("gamma values must be finite and >= 0");
  }
  if (std::erase(gammas, 1.0) > 0) err << "warning: gamma = 1 is degenerate and was dropped from the grid\n";
  if (gammas.empty()) throw UsageError("the gamma grid is empty");

  const io::DatasetLoad data = io::load_paired_dataset(a.dataset);
  for (const auto& w : data.warnings) err << "warning: " << w << "\n";
  const SweepResult sweep = gamma_sweep(data.pairs, gammas);
  for (const auto& w : sweep.warnings) err << "warning: " << w << "\n";
  for (const auto& e : sweep.errors) err << "error: " << e << "\n";

  std::ostringstream csv;
  csv << std::setprecision(10) << "gamma,psnr_mean,psnr_std,ssim_mean,ssim_std\n";
  json records = json::array();
  for (const auto& r : sweep.records) {
    csv << r.gamma << "," << r.psnr_mean << "," << r.psnr_std << "," << r.ssim_mean << "," << r.ssim_std << "\n";
    json scores = json::array();
    for (const auto& s : r.scores) {
      scores.push_back({{"name", s.name},
                        {"psnr", std::isinf(s.psnr) ? json("inf") : json(s.psnr)},
                        {"ssim", s.ssim}});
    }
    records.push_back({{"gamma", r.gamma},
                       {"psnr_mean", r.psnr_mean},
                       {"psnr_std", r.psnr_std},
                       {"ssim_mean", r.ssim_mean},
                       {"ssim_std", r.ssim_std},
                       {"excluded_infinite", r.excluded_infinite},
                       {"scores", scores}});
  }
  json summary{{"format", "dichotome-bench"}, {"version", 1}, {"pairs", data.pairs.size()}, {"records", records}};
  summary["best_psnr_gamma"] = sweep.best_psnr ? json(sweep.records[*sweep.best_psnr].gamma) : json(nullptr);
  summary["best_ssim_gamma"] = sweep.best_ssim ? json(sweep.records[*sweep.best_ssim].gamma) : json(nullptr);

  OutputDir dir(a.outdir);
  dir.text("bench.csv", csv.str());
  dir.text("bench.json", summary.dump(1) + "\n");

  out << data.pairs.size() << " pairs, " << gammas.size() << " gamma values\n" << std::fixed;
  if (sweep.best_psnr) {
    const auto& r = sweep.records[*sweep.best_psnr];
    out << std::setprecision(2) << "PSNR max at γ=" << r.gamma << ": " << std::setprecision(4) << r.psnr_mean
        << " ± " << r.psnr_std << " dB\n";
  }
  if (sweep.best_ssim) {
    const auto& r = sweep.records[*sweep.best_ssim];
    out << std::setprecision(2) << "SSIM max at γ=" << r.gamma << ": " << std::setprecision(4) << r.ssim_mean
        << " ± " << r.ssim_std << "\n";
  }
  if (!sweep.best_psnr && !sweep.best_ssim) {
    err << "error: no pair could be scored\n";
    return kRuntime;
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tone-dichotomy enhancement, inversion, scale-space and evaluation tool", "dichotome"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dichotome 1.0.0");
  std::optional<int> threads;
  app.add_option("--threads", threads, "Worker thread cap (default: $DICHOTOME_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  EnhanceArgs enhance_args;
  auto* enhance_cmd = app.add_subcommand("enhance", "Apply k|x^g - x| to an image");
  enhance_cmd->add_option("input", enhance_args.input, "Input PNG/JPEG")->required();
  enhance_cmd->add_option("output", enhance_args.output, "Output PNG")->required();
  enhance_cmd->add_option("-g,--gamma", enhance_args.gamma, "Gamma (>= 0, != 1)")->required();
  enhance_cmd->add_option("--save-record", enhance_args.record, "Write the inversion record (JSON)");
  enhance_cmd->add_option("--save-classmap", enhance_args.classmap, "Write the slope class map (PNG)");
  enhance_cmd->add_option("--depth", enhance_args.depth, "Output bit depth (default: 16 with --save-record)")
      ->check(CLI::IsMember({8, 16}));

  InvertArgs invert_args;
  auto* invert_cmd = app.add_subcommand("invert", "Reconstruct the original from an enhanced image and its record");
  invert_cmd->add_option("enhanced", invert_args.enhanced, "Enhanced PNG")->required();
  invert_cmd->add_option("record", invert_args.record, "Record JSON written by enhance")->required();
  invert_cmd->add_option("output", invert_args.output, "Reconstructed PNG")->required();
  invert_cmd->add_option("--reference", invert_args.reference, "Original image to report the error against");
  invert_cmd->add_flag("--golden", invert_args.golden, "Ignore the lookup table and use golden-section search");
  invert_cmd->add_option("--epsilon", invert_args.epsilon, "Golden-section tolerance")->check(CLI::PositiveNumber);

  DogspaceArgs dog_args;
  auto* dog_cmd = app.add_subcommand("dogspace", "Build the dichotomy / gamma DoG stack");
  dog_cmd->add_option("input", dog_args.input, "Input PNG/JPEG")->required();
  dog_cmd->add_option("outdir", dog_args.outdir, "Output directory")->required();
  dog_cmd->add_option("-c,--config", dog_args.config, "Config file");
  dog_cmd->add_option("--gammas", dog_args.gammas, "Gamma list (a,b,c or start:step:stop)");
  dog_cmd->add_option("--thr-plus", dog_args.thr_plus, "Positive extremum threshold");
  dog_cmd->add_option("--thr-minus", dog_args.thr_minus, "Negative extremum threshold");

  EntropyArgs entropy_args;
  auto* entropy_cmd = app.add_subcommand("entropy", "Patch-entropy grid, heatmap and histogram");
  entropy_cmd->add_option("input", entropy_args.input, "Input PNG/JPEG")->required();
  entropy_cmd->add_option("outdir", entropy_args.outdir, "Output directory")->required();
  entropy_cmd->add_option("--mesh", entropy_args.mesh, "Patch mesh ROWSxCOLS (default 30x30)");
  entropy_cmd->add_option("--bins", entropy_args.bins, "Histogram bins (default 16)");
  entropy_cmd->add_option("-g,--gamma", entropy_args.gamma, "Also evaluate the enhanced image");
  entropy_cmd->add_option("-c,--config", entropy_args.config, "Config file");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "PSNR/SSIM sweep over gamma on a paired low/normal dataset");
  bench_cmd->add_option("dataset", bench_args.dataset, "Dataset root (low/ + high/ or eval15/)")->required();
  bench_cmd->add_option("outdir", bench_args.outdir, "Output directory")->required();
  bench_cmd->add_option("--gammas", bench_args.gammas, "Gamma grid (default 0.5:0.05:1.5)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (threads) set_thread_count(static_cast<std::size_t>(*threads));
    if (*enhance_cmd) return cmd_enhance(enhance_args, out);
    if (*invert_cmd) return cmd_invert(invert_args, out);
    if (*dog_cmd) return cmd_dogspace(dog_args, out);
    if (*entropy_cmd) return cmd_entropy(entropy_args, out);
    if (*bench_cmd) return cmd_bench(bench_args, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DegenerateGamma& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace dichotome::cli
