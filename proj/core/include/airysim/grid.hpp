#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace airysim {

using Complex = std::complex<double>;

/// Representation a sampled field is currently stored in. The grid itself
/// always describes the position-domain sampling; the conjugate axis is
/// derived from it.
enum class Domain { position, wavenumber };

/// Uniform 1D sampling of a transverse axis. Sample j sits at
/// x_j = center + (j - n/2) * dx; the conjugate axis has pitch
/// dq = 2*pi/(n*dx) and q_j = (j - n/2) * dq (always centered on zero).
struct TransverseGrid {
  int n = 0;
  double dx = 0.0;      // sample pitch [m]
  double center = 0.0;  // coordinate of sample n/2 [m]

  double dq() const;
  double span() const { return n * dx; }
  double x(int j) const { return center + (j - n / 2) * dx; }
  double q(int j) const { return (j - n / 2) * dq(); }

  std::vector<double> positions() const;
  std::vector<double> wavenumbers() const;

  /// Index of the sample closest to coordinate v on the chosen axis.
  int nearest_index(double v, Domain domain = Domain::position) const;

  bool operator==(const TransverseGrid&) const = default;
};

/// n must be a power of two >= 8, dx > 0.
TransverseGrid make_grid(int n, double dx, double center = 0.0);

/// Sampled complex amplitude on a grid. `values[j]` is the amplitude at
/// x_j (position domain) or q_j (wavenumber domain).
struct ComplexField {
  TransverseGrid grid;
  Domain domain = Domain::position;
  Eigen::VectorXcd values;

  double coord(int j) const {
    return domain == Domain::position ? grid.x(j) : grid.q(j);
  }
  /// Integration measure of the current representation (dx or dq).
  double measure() const {
    return domain == Domain::position ? grid.dx : grid.dq();
  }
};

/// Validates sizes and finiteness (NaN/Inf are rejected).
ComplexField make_field(const TransverseGrid& grid, Eigen::VectorXcd values,
                        Domain domain = Domain::position);

/// Field with all samples equal to `value` (a "plane wave" when in the
/// position domain).
ComplexField uniform_field(const TransverseGrid& grid, Complex value = 1.0,
                           Domain domain = Domain::position);

/// ||f||^2 = sum |f_j|^2 * measure.
double norm_squared(const ComplexField& field);
double norm_l2(const ComplexField& field);

/// First moment of |f|^2 along the current axis. Requires nonzero norm.
double centroid(const ComplexField& field);

/// Second central moment of |f|^2 (a variance, not a standard
/// deviation). Requires nonzero norm.
double variance(const ComplexField& field);

/// Unitary centered DFT, position -> wavenumber. Parseval holds with the
/// dx <-> dq measures; ifft_unitary(fft_unitary(f)) == f to machine
/// precision.
ComplexField fft_unitary(const ComplexField& field);
ComplexField ifft_unitary(const ComplexField& field);

/// Transform to the requested representation (no-op when already there).
ComplexField to_domain(const ComplexField& field, Domain domain);

}  // namespace airysim
