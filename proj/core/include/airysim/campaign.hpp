#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "airysim/config.hpp"
#include "airysim/witness.hpp"

namespace airysim {

enum class CampaignKind { free_propagation, crystal_face_airy, propagated_plane_airy };

std::string campaign_name(CampaignKind kind);
std::optional<CampaignKind> campaign_from_name(const std::string& name);

/// One Z value of a campaign: the two conditional scans, the paper-style
/// witness from the fitted scans, and the exact map-level witness for
/// comparison (the conditional-variance proxy bias stays visible).
struct CampaignEntry {
  double z_multiple = 0.0;
  ScanResult position_scan;
  ScanResult momentum_scan;
  WitnessResult witness;
  WitnessResult exact_witness;
};

struct CampaignResult {
  CampaignKind kind = CampaignKind::free_propagation;
  std::vector<CampaignEntry> entries;
  bool all_converged = false;
};

/// Runs the configured campaign. Z entries are independent and evaluated
/// concurrently (bounded); results are deterministic for a fixed config.
CampaignResult run_campaign(const ExperimentConfig& config, CampaignKind kind);

/// Writes out/<campaign>/<Z>/{position.csv,momentum.csv,fit.json,
/// witness.json} plus out/<campaign>/table.csv. Optionally dumps the
/// blurred detector-plane coincidence maps (CSV + binary) per entry.
void write_campaign_artifacts(const CampaignResult& result,
                              const std::filesystem::path& out_dir,
                              bool dump_maps = false,
                              const ExperimentConfig* config = nullptr);

struct CalibrationResult {
  double sigma_ratio = 0.0;  // sigma_minus / sigma_plus
  double product = 0.0;
  int iterations = 0;
};

/// One-dimensional bisection on sigma_minus/sigma_plus until the
/// free-propagation campaign's variance product hits `target`. Updates
/// config.source.sigma_minus.
CalibrationResult calibrate_free_product(ExperimentConfig& config,
                                         double target = 0.090,
                                         double tolerance = 0.002);

struct OracleCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string message;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  bool all_passed() const;
};

/// Built-in cross-checks: FFT propagator vs direct quadrature, Gaussian
/// beam width law, Airy ballistics, witness saturation on two-mode
/// vacuum. Failures (including sampling-guard rejections) become report
/// entries, never exceptions. `selection` restricts the checks by name;
/// an empty list yields an empty report.
OracleReport run_oracle_suite(
    const ExperimentConfig& config,
    const std::optional<std::vector<std::string>>& selection = std::nullopt);

std::string oracle_report_json(const OracleReport& report);

/// Detector-plane map referred back to the source plane: position maps
/// divide pitch by |M|, momentum maps reinterpret x = q f / k as a
/// wavenumber axis.
CoincidenceMap detector_to_source(const CoincidenceMap& map,
                                  const std::string& basis,
                                  const OpticsMetadata& optics);

}  // namespace airysim
