#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "airysim/biphoton.hpp"

namespace airysim {

/// Parse/validation failure with the offending line (0 when the problem
/// is not tied to a single line).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error(message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

struct ExperimentConfig {
  // [wavelengths] — degenerate phase matching: downconverted = 2 * pump.
  double pump_wavelength = 405e-9;           // [m]
  double downconverted_wavelength = 810e-9;  // [m]

  // [grid]
  int grid_n = 2048;
  double grid_dx = 2.4e-6;  // [m]

  // [source]
  SourceSpec source{SourceSpec::Kind::gaussian_spdc, 1.1e4, 3.3e4};

  // [mask] — x0 is the Airy scale at the Fourier readout plane; the SLM
  // pattern scale follows from the readout focal length. Z values in the
  // campaigns are multiples of z_unit.
  double mask_x0 = 7.5e-4;  // [m]
  double mask_a = 0.08;
  double z_unit = 1.6;  // [m]

  // [optics]
  double magnification = 3.0;
  bool invert = true;
  double fourier_focal = 0.5;       // [m]
  double propagated_offset = 0.10;  // [m], extra free space after SLM/mirror

  // [detectors] — Gaussian collection sigma at the detection plane, one
  // value per lens configuration.
  double aperture_position = 1.6e-5;  // [m]
  double aperture_momentum = 1.7e-4;  // [m]
  double efficiency = 1.0;

  // [scan]
  int scan_points = 61;
  double scan_half_span_widths = 4.0;  // half span in units of profile width
  double integration_time = 10.0;      // [s]
  double peak_rate = 1000.0;           // [counts/s]
  uint64_t seed = 20240810;

  // [units]
  double x_scale = 1e-5;  // [m] dimensionless-variable convention

  // [campaign ...]
  std::vector<double> z_crystal_face{0, 2, 4, 6, 8};
  std::vector<double> z_propagated{0, 6, 12};

  double wavenumber() const;  // down-converted beams

  /// Cross-field invariants; throws ConfigError (line 0) on violation.
  void validate() const;
};

ExperimentConfig default_config();

/// Flat line-oriented `key = value` text with [section] headers, `#`
/// comments. Unknown keys/sections and malformed values raise ConfigError
/// with the line number.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical serialization; parse(serialize(parse(text))) == parse(text).
std::string serialize_config(const ExperimentConfig& config);

}  // namespace airysim
