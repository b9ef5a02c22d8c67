#include "airysim/witness.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace airysim {

namespace {

struct JointMoments {
  double var_combo = 0.0;  // variance of x1 +/- x2
  double correlation = 0.0;
  int sign = 0;
};

/// Central moments of c1 x1 + c2 x2 under the map, plus the (x1, x2)
/// correlation coefficient.
JointMoments combo_moments(const CoincidenceMap& map, double c2) {
  const double total = map.prob.sum();
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("witness: map is not normalized");

  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < map.grid1.n; ++i) {
    const double a = map.domain1 == Domain::position ? map.grid1.x(i)
                                                     : map.grid1.q(i);
    for (int j = 0; j < map.grid2.n; ++j) {
      const double b = map.domain2 == Domain::position ? map.grid2.x(j)
                                                       : map.grid2.q(j);
      const double p = map.prob(i, j);
      m1 += p * a;
      m2 += p * b;
    }
  }
  double v1 = 0.0, v2 = 0.0, cov = 0.0, vc = 0.0, mc = 0.0;
  for (int i = 0; i < map.grid1.n; ++i) {
    const double a = (map.domain1 == Domain::position ? map.grid1.x(i)
                                                      : map.grid1.q(i)) -
                     m1;
    for (int j = 0; j < map.grid2.n; ++j) {
      const double b = (map.domain2 == Domain::position ? map.grid2.x(j)
                                                        : map.grid2.q(j)) -
                       m2;
      const double p = map.prob(i, j);
      v1 += p * a * a;
      v2 += p * b * b;
      cov += p * a * b;
      const double u = a + c2 * b;
      mc += p * u;
      vc += p * u * u;
    }
  }
  JointMoments out;
  out.var_combo = vc - mc * mc;
  const double denom = std::sqrt(v1 * v2);
  out.correlation = denom > 0.0 ? cov / denom : 0.0;
  out.sign = std::abs(out.correlation) < 0.05 ? 0
             : out.correlation > 0.0          ? +1
                                              : -1;
  return out;
}

void check_units(const UnitConvention& u) {
  if (!(u.x_scale > 0.0) || std::abs(u.x_scale * u.p_scale - 1.0) > 1e-12)
    throw std::invalid_argument(
        "units: require x_scale > 0 and x_scale * p_scale == 1");
}

WitnessResult map_witness(const CoincidenceMap& position_map,
                          const CoincidenceMap& momentum_map,
                          const UnitConvention& units,
                          WitnessResult::Form form) {
  check_units(units);
  if (position_map.domain1 != Domain::position ||
      position_map.domain2 != Domain::position)
    throw std::invalid_argument("witness: position map not in position domain");
  if (momentum_map.domain1 != Domain::wavenumber ||
      momentum_map.domain2 != Domain::wavenumber)
    throw std::invalid_argument(
        "witness: momentum map not in wavenumber domain");

  // x1 - x2 presumes correlated positions, p1 + p2 anti-correlated
  // momenta; strongly contradicting data means the wrong combination was
  // requested.
  const JointMoments xm = combo_moments(position_map, -1.0);
  if (xm.correlation < -0.25)
    throw std::invalid_argument(
        "witness: position map is anti-correlated; x1 - x2 is the wrong "
        "combination");
  const JointMoments pm = combo_moments(momentum_map, +1.0);
  if (pm.correlation > +0.25)
    throw std::invalid_argument(
        "witness: momentum map is positively correlated; p1 + p2 is the "
        "wrong combination");

  WitnessResult r;
  r.form = form;
  r.var_x_minus = xm.var_combo / (units.x_scale * units.x_scale);
  r.var_p_plus = pm.var_combo / (units.p_scale * units.p_scale);
  r.position_sign = xm.sign;
  r.momentum_sign = pm.sign;
  if (form == WitnessResult::Form::product) {
    r.value = r.var_x_minus * r.var_p_plus;
    r.bound = 1.0;
  } else {
    r.value = r.var_x_minus + r.var_p_plus;
    r.bound = 2.0;
  }
  r.uncertainty = 0.0;
  r.violated = r.value < r.bound;
  r.significance = 0.0;
  return r;
}

}  // namespace

UnitConvention make_units(double x_scale) {
  if (!(x_scale > 0.0) || !std::isfinite(x_scale))
    throw std::invalid_argument("make_units: x_scale must be positive");
  return UnitConvention{x_scale, 1.0 / x_scale};
}

WitnessResult witness_from_map(const CoincidenceMap& position_map,
                               const CoincidenceMap& momentum_map,
                               const UnitConvention& units) {
  return map_witness(position_map, momentum_map, units,
                     WitnessResult::Form::product);
}

WitnessResult duan_witness(const CoincidenceMap& position_map,
                           const CoincidenceMap& momentum_map,
                           const UnitConvention& units) {
  return map_witness(position_map, momentum_map, units,
                     WitnessResult::Form::sum);
}

WitnessResult witness_from_scans(const ScanResult& position_scan,
                                 const ScanResult& momentum_scan,
                                 const UnitConvention& units,
                                 const OpticsMetadata& optics) {
  check_units(units);
  if (!position_scan.fit.converged || !momentum_scan.fit.converged)
    throw std::invalid_argument("witness_from_scans: unconverged fit");
  if (optics.magnification == 0.0 || !(optics.fourier_focal > 0.0) ||
      !(optics.wavelength > 0.0))
    throw std::invalid_argument("witness_from_scans: missing optics metadata");

  const double k = 2.0 * std::numbers::pi / optics.wavelength;
  const VarianceEstimate vx_det = variance_from_fit(position_scan.fit);
  const VarianceEstimate vp_det = variance_from_fit(momentum_scan.fit);

  // Detector plane -> source plane -> dimensionless.
  const double m2 = optics.magnification * optics.magnification;
  const double q_per_x = k / optics.fourier_focal;
  const double var_x = vx_det.variance / m2;
  const double var_x_err = vx_det.uncertainty / m2;
  const double var_q = vp_det.variance * q_per_x * q_per_x;
  const double var_q_err = vp_det.uncertainty * q_per_x * q_per_x;

  WitnessResult r;
  r.form = WitnessResult::Form::product;
  r.var_x_minus = var_x / (units.x_scale * units.x_scale);
  r.var_p_plus = var_q / (units.p_scale * units.p_scale);
  const double ex = var_x_err / (units.x_scale * units.x_scale);
  const double ep = var_q_err / (units.p_scale * units.p_scale);
  r.value = r.var_x_minus * r.var_p_plus;
  r.uncertainty = std::hypot(r.var_p_plus * ex, r.var_x_minus * ep);
  r.bound = 1.0;
  r.violated = r.value < r.bound;
  r.significance =
      r.uncertainty > 0.0 ? (r.bound - r.value) / r.uncertainty : 0.0;
  r.position_sign = +1;  // SPDC convention: positions correlate,
  r.momentum_sign = -1;  // momenta anti-correlate
  return r;
}

std::string witness_json(const WitnessResult& result, double z,
                         const std::string& basis_config) {
  nlohmann::ordered_json j;
  j["z"] = z;
  j["basis_config"] = basis_config;
  j["form"] = result.form == WitnessResult::Form::product ? "product" : "sum";
  j["var_x"] = result.var_x_minus;
  j["var_p"] = result.var_p_plus;
  j["product"] = result.value;
  j["uncertainty"] = result.uncertainty;
  j["bound"] = result.bound;
  j["violated"] = result.violated;
  j["significance"] = result.significance;
  j["position_sign"] = result.position_sign;
  j["momentum_sign"] = result.momentum_sign;
  j["delta_convention"] = result.delta_convention;
  return j.dump(2);
}

void write_witness_table_csv(const std::vector<double>& z,
                             const std::vector<WitnessResult>& results,
                             std::ostream& out) {
  if (z.size() != results.size())
    throw std::invalid_argument("witness table: size mismatch");
  out << "Z,product,uncertainty\n";
  char line[96];
  for (size_t i = 0; i < z.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", z[i],
                  results[i].value, results[i].uncertainty);
    out << line;
  }
}

}  // namespace airysim
