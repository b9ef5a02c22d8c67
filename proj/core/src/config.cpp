#include "airysim/config.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace airysim {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& v, int line) {
  size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(line, "expected a number, got '" + v + "'");
  }
  if (pos != v.size())
    throw ConfigError(line, "trailing characters after number '" + v + "'");
  return out;
}

uint64_t parse_u64(const std::string& v, int line) {
  size_t pos = 0;
  uint64_t out = 0;
  try {
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(line, "expected an unsigned integer, got '" + v + "'");
  }
  if (pos != v.size())
    throw ConfigError(line, "trailing characters after integer '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(line, "expected true/false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item, line));
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Shorten when a shorter representation round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    if (std::stod(shorter) == v) return shorter;
  }
  return buf;
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

double ExperimentConfig::wavenumber() const {
  return 2.0 * std::numbers::pi / downconverted_wavelength;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(0, m); };
  if (!(pump_wavelength > 0.0)) fail("pump wavelength must be positive");
  if (std::abs(downconverted_wavelength - 2.0 * pump_wavelength) >
      1e-9 * downconverted_wavelength)
    fail("degenerate phase matching requires downconverted = 2 * pump "
         "wavelength");
  if (grid_n < 8 || !std::has_single_bit(static_cast<unsigned>(grid_n)))
    fail("grid n must be a power of two >= 8");
  if (!(grid_dx > 0.0)) fail("grid dx must be positive");
  if (!(source.sigma_plus > 0.0) || !(source.sigma_minus > 0.0))
    fail("source sigmas must be positive");
  if (!(mask_x0 > 0.0)) fail("mask x0 must be positive");
  if (mask_a < 0.0) fail("mask a must be >= 0");
  if (!(z_unit > 0.0)) fail("mask z_unit must be positive");
  if (magnification == 0.0) fail("magnification must be nonzero");
  if (!(fourier_focal > 0.0)) fail("fourier focal must be positive");
  if (propagated_offset < 0.0) fail("propagated offset must be >= 0");
  if (aperture_position < 0.0 || aperture_momentum < 0.0)
    fail("apertures must be >= 0");
  if (!(efficiency > 0.0) || efficiency > 1.0)
    fail("efficiency must be in (0, 1]");
  if (scan_points < 5) fail("scan points must be >= 5");
  if (!(scan_half_span_widths > 0.0)) fail("scan half span must be positive");
  if (!(integration_time > 0.0)) fail("integration time must be positive");
  if (peak_rate < 0.0) fail("peak rate must be >= 0");
  if (!(x_scale > 0.0)) fail("x_scale must be positive");
  for (double z : z_crystal_face)
    if (z < 0.0) fail("crystal-face Z values must be >= 0");
  for (double z : z_propagated)
    if (z < 0.0) fail("propagated-plane Z values must be >= 0");
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  using Setter = std::function<void(ExperimentConfig&, const std::string&, int)>;
  static const std::map<std::string, Setter> setters = {
      {"wavelengths.pump_nm",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.pump_wavelength = parse_double(v, l) * 1e-9;
       }},
      {"wavelengths.downconverted_nm",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.downconverted_wavelength = parse_double(v, l) * 1e-9;
       }},
      {"grid.n",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.grid_n = static_cast<int>(parse_u64(v, l));
       }},
      {"grid.dx",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.grid_dx = parse_double(v, l);
       }},
      {"source.kind",
       [](ExperimentConfig& c, const std::string& v, int l) {
         if (v == "gaussian")
           c.source.kind = SourceSpec::Kind::gaussian_spdc;
         else if (v == "ideal_epr")
           c.source.kind = SourceSpec::Kind::ideal_epr;
         else
           throw ConfigError(l, "source kind must be gaussian or ideal_epr");
       }},
      {"source.sigma_plus",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.source.sigma_plus = parse_double(v, l);
       }},
      {"source.sigma_minus",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.source.sigma_minus = parse_double(v, l);
       }},
      {"mask.x0",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.mask_x0 = parse_double(v, l);
       }},
      {"mask.a",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.mask_a = parse_double(v, l);
       }},
      {"mask.z_unit",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.z_unit = parse_double(v, l);
       }},
      {"optics.magnification",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.magnification = parse_double(v, l);
       }},
      {"optics.invert",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.invert = parse_bool(v, l);
       }},
      {"optics.fourier_focal",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.fourier_focal = parse_double(v, l);
       }},
      {"optics.propagated_offset",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.propagated_offset = parse_double(v, l);
       }},
      {"detectors.aperture_position",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.aperture_position = parse_double(v, l);
       }},
      {"detectors.aperture_momentum",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.aperture_momentum = parse_double(v, l);
       }},
      {"detectors.efficiency",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.efficiency = parse_double(v, l);
       }},
      {"scan.points",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.scan_points = static_cast<int>(parse_u64(v, l));
       }},
      {"scan.half_span_widths",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.scan_half_span_widths = parse_double(v, l);
       }},
      {"scan.integration_time_s",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.integration_time = parse_double(v, l);
       }},
      {"scan.peak_rate_hz",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.peak_rate = parse_double(v, l);
       }},
      {"scan.seed",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.seed = parse_u64(v, l);
       }},
      {"units.x_scale",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.x_scale = parse_double(v, l);
       }},
      {"campaign crystal_face_airy.z",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.z_crystal_face = parse_list(v, l);
       }},
      {"campaign propagated_plane_airy.z",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.z_propagated = parse_list(v, l);
       }},
  };

  std::stringstream ss(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    std::string line = trim(raw);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(line_no, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = setters.find(full);
    if (it == setters.end())
      throw ConfigError(line_no, "unknown key '" + full + "'");
    it->second(cfg, value, line_no);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  auto kv = [&out](const std::string& k, const std::string& v) {
    out += k + " = " + v + "\n";
  };
  out += "[wavelengths]\n";
  kv("pump_nm", format_double(c.pump_wavelength * 1e9));
  kv("downconverted_nm", format_double(c.downconverted_wavelength * 1e9));
  out += "\n[grid]\n";
  kv("n", std::to_string(c.grid_n));
  kv("dx", format_double(c.grid_dx));
  out += "\n[source]\n";
  kv("kind", c.source.kind == SourceSpec::Kind::gaussian_spdc ? "gaussian"
                                                              : "ideal_epr");
  kv("sigma_plus", format_double(c.source.sigma_plus));
  kv("sigma_minus", format_double(c.source.sigma_minus));
  out += "\n[mask]\n";
  kv("x0", format_double(c.mask_x0));
  kv("a", format_double(c.mask_a));
  kv("z_unit", format_double(c.z_unit));
  out += "\n[optics]\n";
  kv("magnification", format_double(c.magnification));
  kv("invert", c.invert ? "true" : "false");
  kv("fourier_focal", format_double(c.fourier_focal));
  kv("propagated_offset", format_double(c.propagated_offset));
  out += "\n[detectors]\n";
  kv("aperture_position", format_double(c.aperture_position));
  kv("aperture_momentum", format_double(c.aperture_momentum));
  kv("efficiency", format_double(c.efficiency));
  out += "\n[scan]\n";
  kv("points", std::to_string(c.scan_points));
  kv("half_span_widths", format_double(c.scan_half_span_widths));
  kv("integration_time_s", format_double(c.integration_time));
  kv("peak_rate_hz", format_double(c.peak_rate));
  kv("seed", std::to_string(c.seed));
  out += "\n[units]\n";
  kv("x_scale", format_double(c.x_scale));
  out += "\n[campaign crystal_face_airy]\n";
  kv("z", format_list(c.z_crystal_face));
  out += "\n[campaign propagated_plane_airy]\n";
  kv("z", format_list(c.z_propagated));
  return out;
}

}  // namespace airysim
