#include "airysim/propagation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace airysim {

namespace {

void check_wavenumber(double k) {
  if (!(k > 0.0) || !std::isfinite(k))
    throw std::invalid_argument("propagation: wavenumber must be positive");
}

/// Largest per-sample increment of the transfer phase q^2 z / (2k); the
/// grid aliases the chirp once this exceeds pi.
double max_transfer_phase_step(const TransverseGrid& g, double z, double k) {
  const double q_edge = std::abs(g.q(0));
  return q_edge * g.dq() * z / k;
}

}  // namespace

double OpticalSystem::wavenumber() const {
  if (!(wavelength > 0.0))
    throw std::invalid_argument("OpticalSystem: wavelength must be positive");
  return 2.0 * std::numbers::pi / wavelength;
}

ComplexField propagate_free(const ComplexField& field, double distance,
                            double wavenumber) {
  check_wavenumber(wavenumber);
  if (distance < 0.0)
    throw std::invalid_argument("propagate_free: negative distance");
  if (distance == 0.0) return to_domain(field, Domain::position);

  ComplexField spec = to_domain(field, Domain::wavenumber);
  const double c = distance / (2.0 * wavenumber);
  for (int m = 0; m < spec.grid.n; ++m) {
    const double q = spec.grid.q(m);
    spec.values[m] *= std::polar(1.0, -q * q * c);
  }
  return ifft_unitary(spec);
}

ComplexField propagate_quadrature(const ComplexField& field, double distance,
                                  double wavenumber) {
  check_wavenumber(wavenumber);
  if (!(distance > 0.0))
    throw std::invalid_argument(
        "propagate_quadrature: distance must be > 0 (kernel singular)");

  const ComplexField in = to_domain(field, Domain::position);
  const TransverseGrid& g = in.grid;
  const double chirp = wavenumber / (2.0 * distance);
  const Complex prefactor =
      std::sqrt(wavenumber / (2.0 * std::numbers::pi * distance)) *
      std::polar(1.0, -std::numbers::pi / 4.0) * g.dx;

  Eigen::VectorXcd out(g.n);
  for (int i = 0; i < g.n; ++i) {
    Complex acc = 0.0;
    const double xi = g.x(i);
    for (int j = 0; j < g.n; ++j) {
      const double u = xi - g.x(j);
      acc += in.values[j] * std::polar(1.0, chirp * u * u);
    }
    out[i] = prefactor * acc;
  }
  return ComplexField{g, Domain::position, std::move(out)};
}

ComplexField fourier_lens(const ComplexField& field, double focal,
                          double wavenumber) {
  check_wavenumber(wavenumber);
  if (!(focal > 0.0))
    throw std::invalid_argument("fourier_lens: focal must be positive");

  ComplexField spec = fft_unitary(to_domain(field, Domain::position));
  const double scale = wavenumber / focal;
  TransverseGrid out_grid = make_grid(spec.grid.n, spec.grid.dq() / scale, 0.0);
  Eigen::VectorXcd values = std::sqrt(scale) * spec.values;
  return ComplexField{out_grid, Domain::position, std::move(values)};
}

ComplexField imaging(const ComplexField& field, double magnification,
                     bool invert) {
  if (magnification == 0.0 || !std::isfinite(magnification))
    throw std::invalid_argument("imaging: magnification must be nonzero");

  const ComplexField in = to_domain(field, Domain::position);
  const TransverseGrid& g = in.grid;
  const double s = invert ? -1.0 : 1.0;
  const double scale = s * magnification;
  const double amp = 1.0 / std::sqrt(std::abs(magnification));

  TransverseGrid out_grid =
      make_grid(g.n, std::abs(scale) * g.dx, scale * g.center);
  Eigen::VectorXcd values(g.n);
  if (scale > 0.0) {
    values = amp * in.values;
  } else {
    for (int j = 0; j < g.n; ++j)
      values[(g.n - j) % g.n] = amp * in.values[j];
  }
  return ComplexField{out_grid, Domain::position, std::move(values)};
}

ComplexField apply_system(const ComplexField& field,
                          const OpticalSystem& system) {
  const double k = system.wavenumber();
  ComplexField current = field;
  for (const OpticalElement& element : system.elements) {
    current = std::visit(
        [&](const auto& e) -> ComplexField {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, FreeSpace>) {
            if (max_transfer_phase_step(current.grid, e.distance, k) >
                std::numbers::pi)
              throw std::domain_error(
                  "apply_system: free-space step violates the grid's "
                  "Fresnel sampling limit");
            return propagate_free(current, e.distance, k);
          } else if constexpr (std::is_same_v<T, FourierLens>) {
            return fourier_lens(current, e.focal, k);
          } else if constexpr (std::is_same_v<T, Imaging>) {
            return imaging(current, e.magnification, e.invert);
          } else {
            return apply_mask(current, e);
          }
        },
        element);
  }
  return current;
}

}  // namespace airysim
