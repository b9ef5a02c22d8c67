#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "airysim/biphoton.hpp"

namespace airysim {

/// Gaussian collection profile of one detector.
struct DetectorSpec {
  double aperture_sigma = 0.0;  // [m] (or [1/m] on a wavenumber axis); 0 = point
  double efficiency = 1.0;      // in (0, 1]
};

/// One conditional scan: the signal detector is held at fixed_position
/// while the idler detector visits `positions`.
struct ScanSpec {
  std::vector<double> positions;
  double fixed_position = 0.0;
  double integration_time = 10.0;    // [s]
  double mean_rate_at_peak = 1000.0; // [counts/s]
  uint64_t rng_seed = 0;
  std::string basis = "position";    // metadata: position | momentum
  double z = 0.0;                    // metadata: mask Z multiple
};

struct GaussianFit {
  double amplitude = 0.0, center = 0.0, sigma = 0.0, offset = 0.0;
  double amplitude_err = 0.0, center_err = 0.0, sigma_err = 0.0,
         offset_err = 0.0;
  double chi2_reduced = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct ScanResult {
  std::vector<double> positions;
  std::vector<long> counts;
  std::vector<double> count_errors;  // sqrt(max(counts, 1))
  GaussianFit fit;
  std::string basis;
  double z = 0.0;
  uint64_t seed = 0;
  std::string rng_algorithm;
  double fixed_position = 0.0;
  double integration_time = 0.0;
  double mean_rate_at_peak = 0.0;
  bool off_grid_warning = false;
};

/// Convolves the probability map with the detectors' Gaussian apertures
/// (detector 1 along the signal axis, detector 2 along the idler axis).
/// Total probability is preserved; apertures must span >= 2 grid samples
/// or be zero.
CoincidenceMap blur(const CoincidenceMap& map, const DetectorSpec& detector1,
                    const DetectorSpec& detector2);
ConditionalSlice blur(const ConditionalSlice& slice,
                      const DetectorSpec& detector);

/// Blurred conditional profile seen by the scanning idler detector with
/// the signal detector fixed; used for choosing scan windows.
ConditionalSlice expected_profile(const CoincidenceMap& map,
                                  double fixed_position,
                                  const DetectorSpec& detector1,
                                  const DetectorSpec& detector2);

/// Simulates Poisson counting over the integration time at each scan
/// position. Expected rate = mean_rate_at_peak * blurred conditional /
/// its maximum, scaled by the detector efficiencies. Deterministic for a
/// fixed seed; the generator identity is recorded in the result.
ScanResult simulate_scan(const CoincidenceMap& map, const ScanSpec& spec,
                         const DetectorSpec& detector1,
                         const DetectorSpec& detector2);

/// Weighted nonlinear least squares of A exp(-(x-x0)^2/(2 s^2)) + B with
/// weights 1/err^2 (Levenberg-Marquardt, analytic Jacobian). Parameter
/// uncertainties come from the covariance at the optimum. Degenerate data
/// yields converged = false rather than an exception.
GaussianFit fit_gaussian(const std::vector<double>& positions,
                         const std::vector<double>& values,
                         const std::vector<double>& errors,
                         const std::optional<GaussianFit>& initial = {});

struct VarianceEstimate {
  double variance = 0.0;
  double uncertainty = 0.0;
};

/// variance = sigma^2, uncertainty = 2 sigma sigma_err (first order).
/// Requires a converged fit.
VarianceEstimate variance_from_fit(const GaussianFit& fit);

/// Moment-based alternative estimator (about the distribution mean) for
/// comparison with the Gaussian-fit pipeline.
VarianceEstimate variance_from_moments(const std::vector<double>& positions,
                                       const std::vector<long>& counts);

/// CSV with header position_m,counts,count_error.
void write_scan_csv(const ScanResult& result, std::ostream& out);

/// JSON sidecar with fit parameters, metadata, seed and basis.
std::string scan_json(const ScanResult& result);

}  // namespace airysim
