#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "airysim/biphoton.hpp"
#include "airysim/measurement.hpp"

namespace airysim {

/// Dimensionless-variable convention: x/x_scale and p/p_scale with
/// x_scale * p_scale = 1, so |[x, p]|^2 = 1 and the separability bound is
/// exactly 1.
struct UnitConvention {
  double x_scale = 1.0;  // [m]
  double p_scale = 1.0;  // [1/m]
};

UnitConvention make_units(double x_scale);

/// Optics needed to refer detector-plane scans back to the source:
/// x_source = x_detector / M (imaging), q = k x_detector / f (Fourier).
struct OpticsMetadata {
  double magnification = 0.0;
  double fourier_focal = 0.0;
  double wavelength = 0.0;
};

struct WitnessResult {
  enum class Form { product, sum };
  Form form = Form::product;
  double var_x_minus = 0.0;  // dimensionless variance
  double var_p_plus = 0.0;   // dimensionless variance
  double value = 0.0;        // product (MGVT) or sum (Duan)
  double uncertainty = 0.0;
  double bound = 1.0;  // 1 for the product form, 2 for the sum form
  bool violated = false;
  double significance = 0.0;  // (bound - value) / uncertainty
  int position_sign = 0;      // detected correlation sign (+1, -1, 0)
  int momentum_sign = 0;
  std::string delta_convention = "variance";  // Delta(.) denotes a variance
};

/// Separability witness from exact maps: a position-domain map supplies
/// Delta(x1 - x2), a wavenumber-domain map Delta(p1 + p2). Separable
/// states obey product >= 1; uncertainty is zero (no counting noise).
/// Maps must be normalized; strongly contradicting correlation signs are
/// rejected.
WitnessResult witness_from_map(const CoincidenceMap& position_map,
                               const CoincidenceMap& momentum_map,
                               const UnitConvention& units);

/// Sum-form cross-check, bound Delta(x1-x2) + Delta(p1+p2) >= 2.
WitnessResult duan_witness(const CoincidenceMap& position_map,
                           const CoincidenceMap& momentum_map,
                           const UnitConvention& units);

/// Witness from fitted conditional scans, following the measurement
/// protocol: conditional variances stand in for the difference/sum
/// variances, detector coordinates are referred back to the source plane
/// through the optics metadata, and fit uncertainties propagate to the
/// product in first order. Requires converged fits.
WitnessResult witness_from_scans(const ScanResult& position_scan,
                                 const ScanResult& momentum_scan,
                                 const UnitConvention& units,
                                 const OpticsMetadata& optics);

/// Report JSON {Z, basis_config, var_x, var_p, product, uncertainty,
/// violated, significance, ...}.
std::string witness_json(const WitnessResult& result, double z,
                         const std::string& basis_config);

/// Table CSV mirroring the campaign summaries: header Z,product,uncertainty.
void write_witness_table_csv(const std::vector<double>& z,
                             const std::vector<WitnessResult>& results,
                             std::ostream& out);

}  // namespace airysim
