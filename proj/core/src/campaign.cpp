#include "airysim/campaign.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numbers>
#include <semaphore>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "airysim/masks.hpp"
#include "airysim/numerics.hpp"
#include "airysim/propagation.hpp"

namespace airysim {

namespace {

constexpr const char* kPositionBasis = "position";
constexpr const char* kMomentumBasis = "momentum";

OpticsMetadata optics_metadata(const ExperimentConfig& cfg) {
  return OpticsMetadata{cfg.magnification, cfg.fourier_focal,
                        cfg.downconverted_wavelength};
}

OpticalSystem arm_system(const ExperimentConfig& cfg, CampaignKind kind,
                         const std::string& basis, double z_multiple,
                         bool with_mask, const TransverseGrid& grid) {
  OpticalSystem sys{cfg.downconverted_wavelength, {}};
  if (with_mask) {
    const AiryMaskSpec spec{cfg.mask_x0, cfg.mask_a, z_multiple * cfg.z_unit,
                            cfg.wavenumber()};
    sys.elements.emplace_back(airy_slm_mask(spec, grid, cfg.fourier_focal));
  }
  if (kind == CampaignKind::propagated_plane_airy)
    sys.elements.emplace_back(FreeSpace{cfg.propagated_offset});
  if (basis == kPositionBasis)
    sys.elements.emplace_back(Imaging{cfg.magnification, cfg.invert});
  else
    sys.elements.emplace_back(FourierLens{cfg.fourier_focal});
  return sys;
}

double profile_width(const ConditionalSlice& slice) {
  const int n = slice.grid.n;
  int jmax = 0;
  for (int j = 1; j < n; ++j)
    if (slice.prob[j] > slice.prob[jmax]) jmax = j;
  const double half = 0.5 * slice.prob[jmax];
  auto coord = [&](int j) {
    return slice.domain == Domain::position ? slice.grid.x(j)
                                            : slice.grid.q(j);
  };
  double left = coord(0), right = coord(n - 1);
  for (int j = jmax; j-- > 0;)
    if (slice.prob[j] < half) {
      left = coord(j);
      break;
    }
  for (int j = jmax + 1; j < n; ++j)
    if (slice.prob[j] < half) {
      right = coord(j);
      break;
    }
  const double pitch =
      slice.domain == Domain::position ? slice.grid.dx : slice.grid.dq();
  return std::max(right - left, pitch) / 2.355;
}

struct BasisOutput {
  ScanResult scan;
  CoincidenceMap raw_map;  // unblurred detector-plane map
};

BasisOutput run_basis(const ExperimentConfig& cfg, CampaignKind kind,
                      const std::string& basis, double z_multiple,
                      uint64_t seed) {
  const TransverseGrid grid = make_grid(cfg.grid_n, cfg.grid_dx);
  const BiphotonAmplitude source = make_source(cfg.source, grid, grid);
  const bool with_mask = kind != CampaignKind::free_propagation;

  const OpticalSystem idler_sys =
      arm_system(cfg, kind, basis, z_multiple, with_mask, grid);
  const OpticalSystem signal_sys =
      arm_system(cfg, kind, basis, z_multiple, false, grid);

  BiphotonAmplitude state = apply_arm(source, Arm::idler, idler_sys);
  state = apply_arm(state, Arm::signal, signal_sys);
  CoincidenceMap map = coincidence_map(state);

  const double aperture =
      basis == kPositionBasis ? cfg.aperture_position : cfg.aperture_momentum;
  const DetectorSpec det{aperture, cfg.efficiency};
  const CoincidenceMap blurred = blur(map, det, det);

  // Signal detector fixed at the coincidence peak.
  int imax = 0, jmax = 0;
  blurred.prob.maxCoeff(&imax, &jmax);
  const double fixed = blurred.grid1.x(imax);

  const ConditionalSlice slice =
      conditional_slice(blurred, Arm::signal, fixed);
  std::vector<double> coords(static_cast<size_t>(slice.grid.n));
  std::vector<double> values(static_cast<size_t>(slice.grid.n));
  for (int j = 0; j < slice.grid.n; ++j) {
    coords[static_cast<size_t>(j)] =
        slice.domain == Domain::position ? slice.grid.x(j) : slice.grid.q(j);
    values[static_cast<size_t>(j)] = slice.prob[j];
  }
  const double center = peak_position(values, coords);
  const double half_span = cfg.scan_half_span_widths * profile_width(slice);

  ScanSpec scan_spec;
  scan_spec.positions.resize(static_cast<size_t>(cfg.scan_points));
  for (int i = 0; i < cfg.scan_points; ++i)
    scan_spec.positions[static_cast<size_t>(i)] =
        center - half_span +
        2.0 * half_span * i / static_cast<double>(cfg.scan_points - 1);
  scan_spec.fixed_position = fixed;
  scan_spec.integration_time = cfg.integration_time;
  scan_spec.mean_rate_at_peak = cfg.peak_rate;
  scan_spec.rng_seed = seed;
  scan_spec.basis = basis;
  scan_spec.z = z_multiple;

  // The map is blurred once up front; the scan keeps only the
  // efficiencies.
  const DetectorSpec point_det{0.0, cfg.efficiency};
  BasisOutput out{simulate_scan(blurred, scan_spec, point_det, point_det),
                  std::move(map)};
  return out;
}

CampaignEntry run_entry(const ExperimentConfig& cfg, CampaignKind kind,
                        double z_multiple, size_t index) {
  const uint64_t base = cfg.seed + 1000003ULL * static_cast<uint64_t>(index);
  BasisOutput pos = run_basis(cfg, kind, kPositionBasis, z_multiple, base);
  BasisOutput mom = run_basis(cfg, kind, kMomentumBasis, z_multiple,
                              base + 7919ULL);

  CampaignEntry entry;
  entry.z_multiple = z_multiple;
  const UnitConvention units = make_units(cfg.x_scale);
  const OpticsMetadata optics = optics_metadata(cfg);
  entry.witness =
      witness_from_scans(pos.scan, mom.scan, units, optics);
  entry.exact_witness = witness_from_map(
      detector_to_source(pos.raw_map, kPositionBasis, optics),
      detector_to_source(mom.raw_map, kMomentumBasis, optics), units);
  entry.position_scan = std::move(pos.scan);
  entry.momentum_scan = std::move(mom.scan);
  return entry;
}

std::string z_label(double z) {
  if (z == std::floor(z) && std::abs(z) < 1e9) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(z));
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", z);
  return buf;
}

}  // namespace

std::string campaign_name(CampaignKind kind) {
  switch (kind) {
    case CampaignKind::free_propagation:
      return "free";
    case CampaignKind::crystal_face_airy:
      return "crystal_face_airy";
    case CampaignKind::propagated_plane_airy:
      return "propagated_plane_airy";
  }
  return "unknown";
}

std::optional<CampaignKind> campaign_from_name(const std::string& name) {
  if (name == "free") return CampaignKind::free_propagation;
  if (name == "crystal_face_airy") return CampaignKind::crystal_face_airy;
  if (name == "propagated_plane_airy")
    return CampaignKind::propagated_plane_airy;
  return std::nullopt;
}

CoincidenceMap detector_to_source(const CoincidenceMap& map,
                                  const std::string& basis,
                                  const OpticsMetadata& optics) {
  CoincidenceMap out = map;
  if (basis == kPositionBasis) {
    const double m = std::abs(optics.magnification);
    out.grid1 = make_grid(map.grid1.n, map.grid1.dx / m, map.grid1.center / m);
    out.grid2 = make_grid(map.grid2.n, map.grid2.dx / m, map.grid2.center / m);
    out.domain1 = out.domain2 = Domain::position;
  } else {
    const double k = 2.0 * std::numbers::pi / optics.wavelength;
    const double q_pitch1 = map.grid1.dx * k / optics.fourier_focal;
    const double q_pitch2 = map.grid2.dx * k / optics.fourier_focal;
    const double two_pi = 2.0 * std::numbers::pi;
    out.grid1 = make_grid(map.grid1.n, two_pi / (map.grid1.n * q_pitch1), 0.0);
    out.grid2 = make_grid(map.grid2.n, two_pi / (map.grid2.n * q_pitch2), 0.0);
    out.domain1 = out.domain2 = Domain::wavenumber;
  }
  return out;
}

CampaignResult run_campaign(const ExperimentConfig& config,
                            CampaignKind kind) {
  config.validate();
  std::vector<double> z_values;
  switch (kind) {
    case CampaignKind::free_propagation:
      z_values = {0.0};
      break;
    case CampaignKind::crystal_face_airy:
      z_values = config.z_crystal_face;
      break;
    case CampaignKind::propagated_plane_airy:
      z_values = config.z_propagated;
      break;
  }
  if (z_values.empty())
    throw ConfigError(0, "campaign has an empty Z list");

  CampaignResult result;
  result.kind = kind;
  result.entries.resize(z_values.size());

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (hw > 1 && z_values.size() > 1) {
    static std::counting_semaphore<8> slots(2);
    std::vector<std::future<CampaignEntry>> futures;
    futures.reserve(z_values.size());
    for (size_t i = 0; i < z_values.size(); ++i) {
      futures.push_back(std::async(std::launch::async, [&, i] {
        slots.acquire();
        try {
          CampaignEntry e = run_entry(config, kind, z_values[i], i);
          slots.release();
          return e;
        } catch (...) {
          slots.release();
          throw;
        }
      }));
    }
    for (size_t i = 0; i < futures.size(); ++i)
      result.entries[i] = futures[i].get();
  } else {
    for (size_t i = 0; i < z_values.size(); ++i)
      result.entries[i] = run_entry(config, kind, z_values[i], i);
  }

  result.all_converged = true;
  for (const CampaignEntry& e : result.entries)
    result.all_converged = result.all_converged &&
                           e.position_scan.fit.converged &&
                           e.momentum_scan.fit.converged;
  return result;
}

void write_campaign_artifacts(const CampaignResult& result,
                              const std::filesystem::path& out_dir,
                              bool dump_maps,
                              const ExperimentConfig* config) {
  namespace fs = std::filesystem;
  const fs::path base = out_dir / campaign_name(result.kind);
  fs::create_directories(base);

  std::vector<double> zs;
  std::vector<WitnessResult> witnesses;
  for (const CampaignEntry& entry : result.entries) {
    const fs::path dir = base / z_label(entry.z_multiple);
    fs::create_directories(dir);
    {
      std::ofstream f(dir / "position.csv");
      write_scan_csv(entry.position_scan, f);
    }
    {
      std::ofstream f(dir / "momentum.csv");
      write_scan_csv(entry.momentum_scan, f);
    }
    {
      nlohmann::ordered_json j;
      j["position"] = nlohmann::ordered_json::parse(
          scan_json(entry.position_scan));
      j["momentum"] = nlohmann::ordered_json::parse(
          scan_json(entry.momentum_scan));
      std::ofstream f(dir / "fit.json");
      f << j.dump(2) << "\n";
    }
    {
      nlohmann::ordered_json j = nlohmann::ordered_json::parse(witness_json(
          entry.witness, entry.z_multiple, campaign_name(result.kind)));
      j["exact_map"] = nlohmann::ordered_json::parse(witness_json(
          entry.exact_witness, entry.z_multiple, "map"));
      std::ofstream f(dir / "witness.json");
      f << j.dump(2) << "\n";
    }
    if (dump_maps && config != nullptr) {
      const double z = entry.z_multiple;
      for (const char* basis : {kPositionBasis, kMomentumBasis}) {
        BasisOutput out = run_basis(*config, result.kind, basis, z, 0);
        std::ofstream f(dir / (std::string(basis) + "_map.bin"),
                        std::ios::binary);
        write_map_binary(out.raw_map, f);
      }
    }
    zs.push_back(entry.z_multiple);
    witnesses.push_back(entry.witness);
  }
  std::ofstream table(base / "table.csv");
  write_witness_table_csv(zs, witnesses, table);
}

CalibrationResult calibrate_free_product(ExperimentConfig& config,
                                         double target, double tolerance) {
  const double sigma_plus = config.source.sigma_plus;
  auto product_at = [&](double ratio) {
    config.source.sigma_minus = ratio * sigma_plus;
    const CampaignResult res =
        run_campaign(config, CampaignKind::free_propagation);
    if (!res.all_converged)
      throw std::runtime_error("calibration: scan fit did not converge");
    return res.entries.front().witness.value;
  };

  double lo = 1.3, hi = 8.0;
  double p_lo = product_at(lo);
  double p_hi = product_at(hi);
  if (!(p_hi <= target && target <= p_lo))
    throw std::runtime_error(
        "calibration: target product outside the bracketed ratio range");

  CalibrationResult out;
  out.iterations = 2;
  double best_r = lo, best_p = p_lo;
  if (std::abs(p_hi - target) < std::abs(p_lo - target)) {
    best_r = hi;
    best_p = p_hi;
  }
  for (int it = 0; it < 24; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double p_mid = product_at(mid);
    ++out.iterations;
    if (std::abs(p_mid - target) < std::abs(best_p - target)) {
      best_p = p_mid;
      best_r = mid;
    }
    if (std::abs(p_mid - target) <= tolerance || hi - lo < 1e-3) break;
    if (p_mid > target)
      lo = mid;
    else
      hi = mid;
  }
  config.source.sigma_minus = best_r * sigma_plus;
  out.sigma_ratio = best_r;
  out.product = best_p;
  return out;
}

bool OracleReport::all_passed() const {
  for (const OracleCheck& c : checks)
    if (!c.passed) return false;
  return true;
}

namespace {

OracleCheck run_check(const std::string& name,
                      const std::function<OracleCheck()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    OracleCheck c;
    c.name = name;
    c.passed = false;
    c.message = e.what();
    return c;
  }
}

OracleCheck check_quadrature_vs_fft(const ExperimentConfig& cfg) {
  OracleCheck c{"quadrature_vs_fft", false, 0.0, 1e-6, ""};
  const double k = cfg.wavenumber();
  const TransverseGrid grid = make_grid(256, 8.0 * cfg.grid_dx);
  const double w0 = 16.0 * grid.dx;
  Eigen::VectorXcd values(grid.n);
  for (int j = 0; j < grid.n; ++j) {
    const double x = grid.x(j);
    values[j] = std::exp(-x * x / (w0 * w0));
  }
  const ComplexField field = make_field(grid, std::move(values));
  const double z = 0.5 * k * w0 * w0;  // one Rayleigh range
  const ComplexField fast = propagate_free(field, z, k);
  const ComplexField slow = propagate_quadrature(field, z, k);
  const Eigen::VectorXcd aligned = align_global_phase(fast.values, slow.values);
  c.value = (fast.values - aligned).cwiseAbs().maxCoeff();
  c.passed = c.value < c.threshold;
  if (!c.passed) c.message = "max amplitude deviation above threshold";
  return c;
}

OracleCheck check_gaussian_beam_width(const ExperimentConfig& cfg) {
  OracleCheck c{"gaussian_beam_width", false, 0.0, 1e-3, ""};
  const double k = cfg.wavenumber();
  const TransverseGrid grid = make_grid(4096, cfg.grid_dx);
  const double w0 = 8.0 * grid.dx;
  Eigen::VectorXcd values(grid.n);
  for (int j = 0; j < grid.n; ++j) {
    const double x = grid.x(j);
    values[j] = std::exp(-x * x / (w0 * w0));
  }
  const ComplexField field = make_field(grid, std::move(values));
  const double z_r = 0.5 * k * w0 * w0;
  const OpticalSystem sys{2.0 * std::numbers::pi / k, {}};
  double worst = 0.0;
  for (const double z : {0.1 * z_r, z_r, 10.0 * z_r}) {
    OpticalSystem step = sys;
    step.elements.emplace_back(FreeSpace{z});
    const ComplexField out = apply_system(field, step);
    const double w_measured = 2.0 * std::sqrt(variance(out));
    const double w_expected = w0 * std::sqrt(1.0 + (z / z_r) * (z / z_r));
    worst = std::max(worst, std::abs(w_measured / w_expected - 1.0));
  }
  c.value = worst;
  c.passed = worst < c.threshold;
  if (!c.passed) c.message = "beam width deviates from w(z)";
  return c;
}

OracleCheck check_airy_ballistics(const ExperimentConfig& cfg) {
  OracleCheck c{"airy_ballistics", false, 0.0, 0.02, ""};
  const double k = cfg.wavenumber();
  const TransverseGrid grid = make_grid(cfg.grid_n, cfg.grid_dx);
  const double x0 = 8.0 * grid.dx;
  const AiryMaskSpec spec{x0, 0.05, 0.0, k};
  const Mask mask = airy_mask(spec, grid);
  ComplexField beam = to_domain(
      apply_mask(uniform_field(grid, 1.0, Domain::wavenumber), mask),
      Domain::position);

  const double z_max = 248.0 * k * grid.dx * grid.dx;
  std::vector<double> zs, peaks;
  for (int i = 0; i <= 8; ++i) {
    const double z = z_max * i / 8.0;
    OpticalSystem sys{2.0 * std::numbers::pi / k, {}};
    if (z > 0.0) sys.elements.emplace_back(FreeSpace{z});
    const ComplexField out = apply_system(beam, sys);
    zs.push_back(z);
    peaks.push_back(peak_position(out));
  }
  const QuadraticFit fit = fit_quadratic(zs, peaks);
  const double expected = 1.0 / (4.0 * k * k * x0 * x0 * x0);
  c.value = std::abs(fit.c2 / expected - 1.0);
  c.passed = c.value < c.threshold && fit.r_squared > 0.999;
  if (!c.passed) c.message = "peak trajectory not parabolic within tolerance";
  return c;
}

OracleCheck check_witness_saturation(const ExperimentConfig&) {
  OracleCheck c{"witness_saturation", false, 0.0, 0.01, ""};
  const TransverseGrid grid = make_grid(256, 1.0);
  const double s = 10.0 * grid.dx;
  Eigen::VectorXcd values(grid.n);
  for (int j = 0; j < grid.n; ++j) {
    const double x = grid.x(j);
    values[j] = std::exp(-x * x / (4.0 * s * s));
  }
  const ComplexField g = make_field(grid, std::move(values));
  const ComplexField gq = fft_unitary(g);

  auto outer_map = [](const ComplexField& f, Domain domain) {
    const Eigen::VectorXd inten = f.values.cwiseAbs2();
    Eigen::MatrixXd prob = inten * inten.transpose();
    prob /= prob.sum();
    return CoincidenceMap{f.grid, f.grid, domain, domain, std::move(prob)};
  };
  const CoincidenceMap pos = outer_map(g, Domain::position);
  const CoincidenceMap mom = outer_map(gq, Domain::wavenumber);
  const UnitConvention units = make_units(std::sqrt(2.0) * s);
  const WitnessResult product = witness_from_map(pos, mom, units);
  const WitnessResult sum = duan_witness(pos, mom, units);
  c.value = std::max(std::abs(product.value - 1.0),
                     0.5 * std::abs(sum.value - 2.0));
  c.passed = c.value < c.threshold;
  if (!c.passed) c.message = "two-mode vacuum does not saturate the bounds";
  return c;
}

}  // namespace

OracleReport run_oracle_suite(
    const ExperimentConfig& config,
    const std::optional<std::vector<std::string>>& selection) {
  using Body = std::function<OracleCheck(const ExperimentConfig&)>;
  const std::vector<std::pair<std::string, Body>> all = {
      {"quadrature_vs_fft", check_quadrature_vs_fft},
      {"gaussian_beam_width", check_gaussian_beam_width},
      {"airy_ballistics", check_airy_ballistics},
      {"witness_saturation", check_witness_saturation},
  };
  OracleReport report;
  for (const auto& [name, body] : all) {
    if (selection.has_value()) {
      bool wanted = false;
      for (const std::string& s : *selection) wanted = wanted || s == name;
      if (!wanted) continue;
    }
    report.checks.push_back(
        run_check(name, [&, n = name] { return body(config); }));
  }
  if (selection.has_value()) {
    for (const std::string& s : *selection) {
      bool known = false;
      for (const auto& [name, body] : all) known = known || name == s;
      if (!known)
        throw std::invalid_argument("unknown oracle check '" + s + "'");
    }
  }
  return report;
}

std::string oracle_report_json(const OracleReport& report) {
  nlohmann::ordered_json j;
  j["checks"] = nlohmann::ordered_json::array();
  for (const OracleCheck& c : report.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"value", c.value},
                           {"threshold", c.threshold},
                           {"message", c.message}});
  }
  j["all_passed"] = report.all_passed();
  return j.dump(2);
}

}  // namespace airysim
