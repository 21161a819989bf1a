#include "dichotome/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dichotome {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + t + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + t + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true") return true;
  if (t == "false") return false;
  throw ConfigError("config: '" + key + "' expects true or false, got '" + t + "'");
}

std::vector<std::string> split_list(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
    throw ConfigError("config: '" + key + "' expects a [a, b, ...] list");
  }
  std::vector<std::string> items;
  std::stringstream body(t.substr(1, t.size() - 2));
  std::string item;
  while (std::getline(body, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <typename T, typename Convert>
std::vector<T> to_list(const std::string& key, const std::string& text, Convert convert) {
  std::vector<T> out;
  for (const auto& item : split_list(key, text)) out.push_back(convert(key, item));
  return out;
}

Rgb to_colour(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
  unsigned r = 0, g = 0, b = 0;
  if (t.size() != 7 || t[0] != '#' || std::sscanf(t.c_str() + 1, "%2x%2x%2x", &r, &g, &b) != 3) {
    throw ConfigError("config: '" + key + "' colours must be \"#rrggbb\", got '" + t + "'");
  }
  return {r / 255.0, g / 255.0, b / 255.0};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T, typename Format>
std::string join(const std::vector<T>& values, Format format) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += format(values[i]);
  }
  return out + "]";
}

}  // namespace

void RunConfig::validate() const {
  if (version != kVersion) throw ConfigError("config: unsupported version " + std::to_string(version));
  scale_space.validate();
  if (mesh_rows < 1 || mesh_cols < 1) throw ConfigError("config: mesh must be at least 1x1");
  if (histogram_bins < 1) throw ConfigError("config: histogram_bins must be >= 1");
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (out.contains(key)) throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

RunConfig parse_run_config(const std::string& text) {
  const auto kv = parse_key_values(text);
  if (!kv.contains("version")) throw ConfigError("config: missing 'version'");

  RunConfig cfg;
  ScaleSpaceConfig& ss = cfg.scale_space;
  bool palette_given = false;
  for (const auto& [key, value] : kv) {
    if (key == "version") {
      cfg.version = to_int(key, value);
    } else if (key == "sigma2_levels") {
      ss.sigma2_levels = to_list<double>(key, value, to_double);
    } else if (key == "subsample_factors") {
      ss.subsample_factors = to_list<int>(key, value, to_int);
    } else if (key == "gammas") {
      ss.gammas = to_list<double>(key, value, to_double);
    } else if (key == "t_numerator") {
      ss.t_numerator = to_double(key, value);
    } else if (key == "delta_t") {
      ss.delta_t = to_double(key, value);
    } else if (key == "s") {
      ss.s = to_double(key, value);
    } else if (key == "use_scale_factor") {
      ss.use_scale_factor = to_bool(key, value);
    } else if (key == "thr_plus") {
      ss.thr_plus = to_double(key, value);
    } else if (key == "thr_minus") {
      ss.thr_minus = to_double(key, value);
    } else if (key == "palette") {
      ss.palette = to_list<Rgb>(key, value, to_colour);
      palette_given = true;
    } else if (key == "mesh_rows") {
      cfg.mesh_rows = to_int(key, value);
    } else if (key == "mesh_cols") {
      cfg.mesh_cols = to_int(key, value);
    } else if (key == "histogram_bins") {
      cfg.histogram_bins = to_int(key, value);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  // A shortened level list without explicit factors keeps the default ladder prefix.
  if (!kv.contains("subsample_factors") && ss.subsample_factors.size() != ss.sigma2_levels.size()) {
    ss.subsample_factors.resize(ss.sigma2_levels.size());
    for (std::size_t i = 0; i < ss.subsample_factors.size(); ++i) ss.subsample_factors[i] = static_cast<int>(i) + 1;
  }
  if (!palette_given && ss.palette.size() < ss.gammas.size()) {
    throw ConfigError("config: more than " + std::to_string(ss.palette.size()) +
                      " gammas need an explicit palette");
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string to_config_text(const RunConfig& cfg) {
  const ScaleSpaceConfig& ss = cfg.scale_space;
  auto colour = [](const Rgb& c) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "\"#%02x%02x%02x\"", static_cast<unsigned>(std::lround(c[0] * 255)),
                  static_cast<unsigned>(std::lround(c[1] * 255)), static_cast<unsigned>(std::lround(c[2] * 255)));
    return std::string(buf);
  };
  std::ostringstream out;
  out << "version = " << cfg.version << "\n"
      << "sigma2_levels = " << join(ss.sigma2_levels, fmt) << "\n"
      << "subsample_factors = " << join(ss.subsample_factors, [](int v) { return std::to_string(v); }) << "\n"
      << "gammas = " << join(ss.gammas, fmt) << "\n"
      << "t_numerator = " << fmt(ss.t_numerator) << "\n"
      << "delta_t = " << fmt(ss.delta_t) << "\n"
      << "s = " << fmt(ss.s) << "\n"
      << "use_scale_factor = " << (ss.use_scale_factor ? "true" : "false") << "\n"
      << "thr_plus = " << fmt(ss.thr_plus) << "\n"
      << "thr_minus = " << fmt(ss.thr_minus) << "\n"
      << "palette = " << join(ss.palette, colour) << "\n"
      << "mesh_rows = " << cfg.mesh_rows << "\n"
      << "mesh_cols = " << cfg.mesh_cols << "\n"
      << "histogram_bins = " << cfg.histogram_bins << "\n";
  return out.str();
}

std::vector<double> parse_gamma_list(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return {};
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 3) throw ConfigError("gamma range must be start:step:stop, got '" + t + "'");
    const double start = to_double("gamma", parts[0]);
    const double step = to_double("gamma", parts[1]);
    const double stop = to_double("gamma", parts[2]);
    if (!(step > 0.0) || stop < start) throw ConfigError("gamma range needs step > 0 and stop >= start");
    // Generate from integer counts and round to 12 digits so 0.5 + 18 * 0.05 is exactly 1.4.
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    std::vector<double> out;
    for (long i = 0; i <= n; ++i) out.push_back(std::round((start + i * step) * 1e12) / 1e12);
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(to_double("gamma", item));
  }
  return out;
}

std::pair<int, int> parse_mesh(const std::string& text) {
  const std::string t = trim(text);
  const auto x = t.find_first_of("xX");
  if (x == std::string::npos) {
    const int n = to_int("mesh", t);
    return {n, n};
  }
  return {to_int("mesh", t.substr(0, x)), to_int("mesh", t.substr(x + 1))};
}

}  // namespace dichotome
