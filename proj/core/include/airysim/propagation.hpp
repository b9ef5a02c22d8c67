#pragma once

#include <variant>
#include <vector>

#include "airysim/grid.hpp"
#include "airysim/masks.hpp"

namespace airysim {

struct FreeSpace {
  double distance = 0.0;  // [m], >= 0
};

struct FourierLens {
  double focal = 0.0;  // [m], > 0
};

struct Imaging {
  double magnification = 1.0;  // != 0
  bool invert = false;
};

using OpticalElement = std::variant<FreeSpace, FourierLens, Imaging, Mask>;

/// Ordered single-arm optical train for a monochromatic field.
struct OpticalSystem {
  double wavelength = 0.0;  // [m], > 0
  std::vector<OpticalElement> elements;

  double wavenumber() const;
};

/// Fresnel free-space step: multiplies the wavenumber representation by
/// exp(-i q^2 z / (2k)) and returns the field in the position domain.
/// Exactly unitary. distance must be >= 0.
ComplexField propagate_free(const ComplexField& field, double distance,
                            double wavenumber);

/// Direct summation of the Fresnel convolution kernel
///   sqrt(k/(2 pi z)) e^{-i pi/4} exp(i k (x - xi)^2 / (2 z)).
/// Slow (O(n^2)); serves as an independent oracle for propagate_free.
/// distance must be > 0 (the kernel is singular at z = 0).
ComplexField propagate_quadrature(const ComplexField& field, double distance,
                                  double wavenumber);

/// Fourier-transforming lens: the output plane samples the spectrum at
/// q = k x / focal. The output grid has pitch dq * focal / k and center 0;
/// the norm is preserved. Applying it twice with equal focal length
/// reverses the field (parity).
ComplexField fourier_lens(const ComplexField& field, double focal,
                          double wavenumber);

/// Ideal imaging: field(x) -> field(s x / M) / sqrt|M| with s = -1 when
/// inverting. The grid pitch is rescaled by |M|; the intensity measure is
/// preserved. Inversion uses the cyclic index reversal j -> (n - j) mod n,
/// matching a double Fourier transform.
ComplexField imaging(const ComplexField& field, double magnification,
                     bool invert);

/// Folds the elements in order and returns the field in the position
/// domain. Free-space steps are checked against the grid's Fresnel
/// sampling limit (per-sample transfer-phase step < pi) and raise a
/// sampling error when violated.
ComplexField apply_system(const ComplexField& field,
                          const OpticalSystem& system);

}  // namespace airysim
