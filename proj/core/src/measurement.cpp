#include "airysim/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "airysim/random.hpp"
#include "fft_engine.hpp"

namespace airysim {

namespace {

void check_detector(const DetectorSpec& d) {
  if (d.aperture_sigma < 0.0 || !std::isfinite(d.aperture_sigma))
    throw std::invalid_argument("detector: aperture_sigma must be >= 0");
  if (!(d.efficiency > 0.0) || d.efficiency > 1.0)
    throw std::invalid_argument("detector: efficiency must be in (0, 1]");
}

/// Circular Gaussian convolution of a real sequence; sum-preserving.
/// Frequency bin m carries q = dq * m for m < n/2 and dq * (m - n) above.
void gaussian_blur_inplace(double* data, int n, double pitch, double sigma) {
  if (sigma == 0.0) return;
  if (sigma < 2.0 * pitch)
    throw std::domain_error(
        "blur: aperture under-resolved (< 2 samples per sigma)");
  const double input_sum = std::accumulate(data, data + n, 0.0);
  Eigen::VectorXcd buf(n);
  for (int j = 0; j < n; ++j) buf[j] = data[j];
  detail::dft_inplace(buf.data(), n, -1);
  const double dq = 2.0 * std::numbers::pi / (n * pitch);
  for (int m = 0; m < n; ++m) {
    const double q = dq * (m < n / 2 ? m : m - n);
    buf[m] *= std::exp(-0.5 * q * q * sigma * sigma);
  }
  detail::dft_inplace(buf.data(), n, +1);
  double out_sum = 0.0;
  for (int j = 0; j < n; ++j) {
    data[j] = std::max(buf[j].real() / n, 0.0);
    out_sum += data[j];
  }
  if (out_sum > 0.0) {
    const double rescale = input_sum / out_sum;
    for (int j = 0; j < n; ++j) data[j] *= rescale;
  }
}

}  // namespace

CoincidenceMap blur(const CoincidenceMap& map, const DetectorSpec& detector1,
                    const DetectorSpec& detector2) {
  check_detector(detector1);
  check_detector(detector2);
  CoincidenceMap out = map;
  const double pitch1 =
      map.domain1 == Domain::position ? map.grid1.dx : map.grid1.dq();
  const double pitch2 =
      map.domain2 == Domain::position ? map.grid2.dx : map.grid2.dq();
  if (detector1.aperture_sigma > 0.0) {
    Eigen::VectorXd col(map.grid1.n);
    for (int j = 0; j < map.grid2.n; ++j) {
      col = out.prob.col(j);
      gaussian_blur_inplace(col.data(), map.grid1.n, pitch1,
                            detector1.aperture_sigma);
      out.prob.col(j) = col;
    }
  }
  if (detector2.aperture_sigma > 0.0) {
    Eigen::VectorXd row(map.grid2.n);
    for (int i = 0; i < map.grid1.n; ++i) {
      row = out.prob.row(i).transpose();
      gaussian_blur_inplace(row.data(), map.grid2.n, pitch2,
                            detector2.aperture_sigma);
      out.prob.row(i) = row.transpose();
    }
  }
  return out;
}

ConditionalSlice blur(const ConditionalSlice& slice,
                      const DetectorSpec& detector) {
  check_detector(detector);
  ConditionalSlice out = slice;
  const double pitch =
      slice.domain == Domain::position ? slice.grid.dx : slice.grid.dq();
  if (detector.aperture_sigma > 0.0)
    gaussian_blur_inplace(out.prob.data(), slice.grid.n, pitch,
                          detector.aperture_sigma);
  return out;
}

ConditionalSlice expected_profile(const CoincidenceMap& map,
                                  double fixed_position,
                                  const DetectorSpec& detector1,
                                  const DetectorSpec& detector2) {
  const CoincidenceMap blurred = blur(map, detector1, detector2);
  return conditional_slice(blurred, Arm::signal, fixed_position);
}

ScanResult simulate_scan(const CoincidenceMap& map, const ScanSpec& spec,
                         const DetectorSpec& detector1,
                         const DetectorSpec& detector2) {
  if (!(spec.integration_time > 0.0))
    throw std::invalid_argument("simulate_scan: integration_time must be > 0");
  if (spec.mean_rate_at_peak < 0.0)
    throw std::invalid_argument("simulate_scan: negative peak rate");
  if (spec.positions.size() < 2)
    throw std::invalid_argument("simulate_scan: need at least two positions");
  for (size_t i = 1; i < spec.positions.size(); ++i)
    if (!(spec.positions[i] > spec.positions[i - 1]))
      throw std::invalid_argument(
          "simulate_scan: positions must be strictly increasing");

  const TransverseGrid& fixed_grid = map.grid1;
  const double lo = map.domain1 == Domain::position ? fixed_grid.x(0)
                                                    : fixed_grid.q(0);
  const double hi = map.domain1 == Domain::position
                        ? fixed_grid.x(fixed_grid.n - 1)
                        : fixed_grid.q(fixed_grid.n - 1);
  if (spec.fixed_position < lo || spec.fixed_position > hi)
    throw std::invalid_argument("simulate_scan: fixed_position outside grid");

  const ConditionalSlice profile =
      expected_profile(map, spec.fixed_position, detector1, detector2);
  const double peak = profile.prob.maxCoeff();
  if (!(peak > 0.0))
    throw std::domain_error("simulate_scan: empty conditional profile");

  const double rate_scale = spec.mean_rate_at_peak * detector1.efficiency *
                            detector2.efficiency / peak;
  CountingRng rng(spec.rng_seed);
  ScanResult result;
  result.positions = spec.positions;
  result.counts.reserve(spec.positions.size());
  result.count_errors.reserve(spec.positions.size());
  for (const double pos : spec.positions) {
    const int j = profile.grid.nearest_index(pos, profile.domain);
    const double mean =
        rate_scale * profile.prob[j] * spec.integration_time;
    const long c = rng.poisson(mean);
    result.counts.push_back(c);
    result.count_errors.push_back(
        std::sqrt(static_cast<double>(std::max(c, 1L))));
  }

  std::vector<double> values(result.counts.size());
  for (size_t i = 0; i < result.counts.size(); ++i)
    values[i] = static_cast<double>(result.counts[i]);
  result.fit = fit_gaussian(result.positions, values, result.count_errors);
  result.basis = spec.basis;
  result.z = spec.z;
  result.seed = spec.rng_seed;
  result.rng_algorithm = CountingRng::algorithm();
  result.fixed_position = spec.fixed_position;
  result.integration_time = spec.integration_time;
  result.mean_rate_at_peak = spec.mean_rate_at_peak;
  result.off_grid_warning = profile.off_grid_warning;
  return result;
}

namespace {

struct FitWork {
  Eigen::Vector4d p;  // A, x0, s, B
  double chi2 = 0.0;
};

double chi_squared(const std::vector<double>& x, const std::vector<double>& y,
                   const std::vector<double>& e, const Eigen::Vector4d& p) {
  double chi2 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = (x[i] - p[1]) / p[2];
    const double model = p[0] * std::exp(-0.5 * d * d) + p[3];
    const double r = (y[i] - model) / e[i];
    chi2 += r * r;
  }
  return chi2;
}

GaussianFit default_guess(const std::vector<double>& x,
                          const std::vector<double>& y) {
  const auto [mn_it, mx_it] = std::minmax_element(y.begin(), y.end());
  const size_t jmax = static_cast<size_t>(mx_it - y.begin());
  GaussianFit g;
  g.amplitude = *mx_it - *mn_it;
  g.center = x[jmax];
  g.offset = *mn_it;
  const double half = 0.5 * (*mx_it + *mn_it);
  double left = x.front(), right = x.back();
  for (size_t j = jmax; j-- > 0;)
    if (y[j] < half) {
      left = x[j];
      break;
    }
  for (size_t j = jmax + 1; j < y.size(); ++j)
    if (y[j] < half) {
      right = x[j];
      break;
    }
  const double fwhm = std::max(right - left, x[1] - x[0]);
  g.sigma = fwhm / 2.355;
  return g;
}

}  // namespace

GaussianFit fit_gaussian(const std::vector<double>& positions,
                         const std::vector<double>& values,
                         const std::vector<double>& errors,
                         const std::optional<GaussianFit>& initial) {
  const size_t n = positions.size();
  if (n < 5 || values.size() != n || errors.size() != n)
    throw std::invalid_argument("fit_gaussian: need >= 5 matching samples");
  for (const double e : errors)
    if (!(e > 0.0))
      throw std::invalid_argument("fit_gaussian: errors must be positive");

  GaussianFit out;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  if (*mx == *mn) return out;  // flat data: unconverged, no exception

  const GaussianFit guess = initial.value_or(default_guess(positions, values));
  FitWork w;
  w.p << guess.amplitude, guess.center, std::abs(guess.sigma), guess.offset;
  if (!(w.p[2] > 0.0)) w.p[2] = positions.back() - positions.front();
  w.chi2 = chi_squared(positions, values, errors, w.p);

  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 4);
  Eigen::VectorXd res(static_cast<Eigen::Index>(n));
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  for (; iter < 200 && !converged; ++iter) {
    for (size_t i = 0; i < n; ++i) {
      const double d = (positions[i] - w.p[1]) / w.p[2];
      const double g = std::exp(-0.5 * d * d);
      const double inv_e = 1.0 / errors[i];
      const auto row = static_cast<Eigen::Index>(i);
      res(row) = (values[i] - (w.p[0] * g + w.p[3])) * inv_e;
      jac(row, 0) = g * inv_e;
      jac(row, 1) = w.p[0] * g * d / w.p[2] * inv_e;
      jac(row, 2) = w.p[0] * g * d * d / w.p[2] * inv_e;
      jac(row, 3) = inv_e;
    }
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d jtr = jac.transpose() * res;

    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      Eigen::Matrix4d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal();
      const Eigen::Vector4d step = damped.ldlt().solve(jtr);
      if (!step.allFinite()) break;
      Eigen::Vector4d cand = w.p + step;
      cand[2] = std::abs(cand[2]);
      if (!(cand[2] > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const double chi2 = chi_squared(positions, values, errors, cand);
      if (chi2 <= w.chi2 * (1.0 + 1e-14)) {
        const double rel_step =
            step.cwiseAbs().maxCoeff() /
            (w.p.cwiseAbs().maxCoeff() + 1e-300);
        const double rel_drop = (w.chi2 - chi2) / (w.chi2 + 1e-300);
        w.p = cand;
        w.chi2 = chi2;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel_step < 1e-11 || rel_drop < 1e-13) converged = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;
  }

  out.amplitude = w.p[0];
  out.center = w.p[1];
  out.sigma = std::abs(w.p[2]);
  out.offset = w.p[3];
  out.iterations = iter;
  out.chi2_reduced = w.chi2 / static_cast<double>(n - 4);

  for (size_t i = 0; i < n; ++i) {
    const double d = (positions[i] - w.p[1]) / w.p[2];
    const double g = std::exp(-0.5 * d * d);
    const double inv_e = 1.0 / errors[i];
    const auto row = static_cast<Eigen::Index>(i);
    jac(row, 0) = g * inv_e;
    jac(row, 1) = w.p[0] * g * d / w.p[2] * inv_e;
    jac(row, 2) = w.p[0] * g * d * d / w.p[2] * inv_e;
    jac(row, 3) = inv_e;
  }
  const Eigen::Matrix4d jtj = jac.transpose() * jac;
  const Eigen::FullPivLU<Eigen::Matrix4d> lu(jtj);
  if (converged && lu.isInvertible()) {
    const Eigen::Matrix4d cov = lu.inverse();
    out.amplitude_err = std::sqrt(std::max(cov(0, 0), 0.0));
    out.center_err = std::sqrt(std::max(cov(1, 1), 0.0));
    out.sigma_err = std::sqrt(std::max(cov(2, 2), 0.0));
    out.offset_err = std::sqrt(std::max(cov(3, 3), 0.0));
    out.converged = out.sigma > 0.0 && std::isfinite(out.sigma) &&
                    std::isfinite(out.sigma_err);
  }
  return out;
}

VarianceEstimate variance_from_fit(const GaussianFit& fit) {
  if (!fit.converged)
    throw std::invalid_argument("variance_from_fit: fit did not converge");
  return VarianceEstimate{fit.sigma * fit.sigma,
                          2.0 * fit.sigma * fit.sigma_err};
}

VarianceEstimate variance_from_moments(const std::vector<double>& positions,
                                       const std::vector<long>& counts) {
  if (positions.size() != counts.size() || positions.size() < 2)
    throw std::invalid_argument("variance_from_moments: size mismatch");
  double total = 0.0, mean = 0.0;
  for (size_t i = 0; i < counts.size(); ++i) {
    total += static_cast<double>(counts[i]);
    mean += static_cast<double>(counts[i]) * positions[i];
  }
  if (!(total > 0.0))
    throw std::invalid_argument("variance_from_moments: no counts");
  mean /= total;
  double m2 = 0.0, m4 = 0.0;
  for (size_t i = 0; i < counts.size(); ++i) {
    const double d2 = (positions[i] - mean) * (positions[i] - mean);
    m2 += static_cast<double>(counts[i]) * d2;
    m4 += static_cast<double>(counts[i]) * d2 * d2;
  }
  m2 /= total;
  m4 /= total;
  const double var_of_var = std::max(m4 - m2 * m2, 0.0) / total;
  return VarianceEstimate{m2, std::sqrt(var_of_var)};
}

void write_scan_csv(const ScanResult& result, std::ostream& out) {
  out << "position_m,counts,count_error\n";
  char line[96];
  for (size_t i = 0; i < result.positions.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.17g,%ld,%.17g\n",
                  result.positions[i], result.counts[i],
                  result.count_errors[i]);
    out << line;
  }
}

std::string scan_json(const ScanResult& result) {
  nlohmann::ordered_json j;
  j["basis"] = result.basis;
  j["z"] = result.z;
  j["seed"] = result.seed;
  j["rng"] = result.rng_algorithm;
  j["fixed_position"] = result.fixed_position;
  j["integration_time_s"] = result.integration_time;
  j["mean_rate_at_peak_hz"] = result.mean_rate_at_peak;
  j["off_grid_warning"] = result.off_grid_warning;
  j["fit"] = {{"amplitude", result.fit.amplitude},
              {"amplitude_err", result.fit.amplitude_err},
              {"center", result.fit.center},
              {"center_err", result.fit.center_err},
              {"sigma", result.fit.sigma},
              {"sigma_err", result.fit.sigma_err},
              {"offset", result.fit.offset},
              {"offset_err", result.fit.offset_err},
              {"chi2_reduced", result.fit.chi2_reduced},
              {"converged", result.fit.converged},
              {"iterations", result.fit.iterations}};
  return j.dump(2);
}

}  // namespace airysim
