#include "airysim/masks.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace airysim {

namespace {

void check_spec(const AiryMaskSpec& s) {
  if (!(s.x0 > 0.0)) throw std::invalid_argument("airy_mask: x0 must be > 0");
  if (s.a < 0.0) throw std::invalid_argument("airy_mask: a must be >= 0");
  if (s.z < 0.0) throw std::invalid_argument("airy_mask: Z must be >= 0");
  if (!(s.wavenumber > 0.0))
    throw std::invalid_argument("airy_mask: wavenumber must be > 0");
}

/// Builds exp(i phase(c)) * modulus(c) over the samples of one axis and
/// rejects the mask if more than `kBadMassTolerance` of its |t|^2 mass
/// sits where the per-sample phase step exceeds pi (the grid cannot
/// resolve the pattern there).
constexpr double kBadMassTolerance = 5e-3;

Mask sampled_phase_mask(const TransverseGrid& grid, Domain domain,
                        const std::function<double(double)>& coordinate,
                        const std::function<double(double)>& phase,
                        const std::function<double(double)>& modulus) {
  Eigen::VectorXcd t(grid.n);
  double total_mass = 0.0, bad_mass = 0.0;
  double prev_phase = 0.0, prev_weight = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    const double axis =
        domain == Domain::wavenumber ? grid.q(j) : grid.x(j);
    const double c = coordinate(axis);
    const double ph = phase(c);
    const double mod = modulus(c);
    t[j] = std::polar(mod, ph);
    const double w = mod * mod;
    total_mass += w;
    if (j > 0) {
      const double pair_w = 0.5 * (w + prev_weight);
      if (std::abs(ph - prev_phase) > std::numbers::pi) bad_mass += pair_w;
    }
    prev_phase = ph;
    prev_weight = w;
  }
  if (bad_mass > kBadMassTolerance * total_mass)
    throw std::domain_error(
        "airy_mask: grid does not resolve the cubic phase (per-sample "
        "phase step exceeds pi over the mask's support)");
  return Mask{grid, domain, std::move(t)};
}

}  // namespace

Mask make_mask(const TransverseGrid& grid, Domain domain,
               Eigen::VectorXcd transmittance) {
  if (transmittance.size() != grid.n)
    throw std::invalid_argument("make_mask: transmittance length mismatch");
  if (!transmittance.allFinite())
    throw std::invalid_argument("make_mask: NaN/Inf transmittance");
  for (int j = 0; j < grid.n; ++j)
    if (std::abs(transmittance[j]) > 1.0 + 1e-12)
      throw std::invalid_argument("make_mask: |t| must not exceed 1");
  return Mask{grid, domain, std::move(transmittance)};
}

Mask airy_mask(const AiryMaskSpec& spec, const TransverseGrid& grid) {
  check_spec(spec);
  const double x0 = spec.x0, a = spec.a;
  const double zc = spec.z / (2.0 * spec.wavenumber);
  return sampled_phase_mask(
      grid, Domain::wavenumber, [](double q) { return q; },
      [=](double q) {
        const double u = x0 * q;
        return u * u * u / 3.0 - q * q * zc;
      },
      [=](double q) {
        const double u = x0 * q;
        return std::exp(-a * u * u);
      });
}

Mask airy_slm_mask(const AiryMaskSpec& spec, const TransverseGrid& grid,
                   double readout_focal) {
  check_spec(spec);
  if (!(readout_focal > 0.0))
    throw std::invalid_argument("airy_slm_mask: readout focal must be > 0");
  const double x0 = spec.x0, a = spec.a;
  const double zc = spec.z / (2.0 * spec.wavenumber);
  const double scale = -spec.wavenumber / readout_focal;
  return sampled_phase_mask(
      grid, Domain::position, [=](double xi) { return scale * xi; },
      [=](double q) {
        const double u = x0 * q;
        return u * u * u / 3.0 - q * q * zc;
      },
      [=](double q) {
        const double u = x0 * q;
        return std::exp(-a * u * u);
      });
}

ComplexField apply_mask(const ComplexField& field, const Mask& mask) {
  if (!(field.grid == mask.grid))
    throw std::invalid_argument("apply_mask: field/mask grid mismatch");
  const Domain original = field.domain;
  ComplexField work = to_domain(field, mask.domain);
  work.values.array() *= mask.transmittance.array();
  return to_domain(work, original);
}

void write_mask_csv(const Mask& mask, std::ostream& out) {
  out << "q,re_t,im_t\n";
  char line[96];
  for (int j = 0; j < mask.grid.n; ++j) {
    const double c = mask.domain == Domain::wavenumber ? mask.grid.q(j)
                                                       : mask.grid.x(j);
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", c,
                  mask.transmittance[j].real(), mask.transmittance[j].imag());
    out << line;
  }
}

}  // namespace airysim
