#pragma once

#include <iosfwd>

#include "airysim/grid.hpp"

namespace airysim {

/// Parameters of the accelerating-beam phase mask. In the wavenumber
/// domain the transmittance is
///   t(q) = exp(i (x0 q)^3 / 3) * exp(-a (x0 q)^2) * exp(-i q^2 Z / (2k)),
/// i.e. the flat-modulus spectrum of Ai(x/x0) (a = 0, Z = 0), a Gaussian
/// apodization making the beam finite-energy, and a quadratic phase that
/// pre-propagates the beam by the virtual distance Z.
struct AiryMaskSpec {
  double x0 = 0.0;          // Airy transverse scale [m]
  double a = 0.0;           // apodization strength [dimensionless]
  double z = 0.0;           // virtual propagation distance [m]
  double wavenumber = 0.0;  // k [1/m]
};

/// Complex transmittance sampled on one axis of a grid; passive element,
/// |t| <= 1 everywhere.
struct Mask {
  TransverseGrid grid;
  Domain domain = Domain::wavenumber;
  Eigen::VectorXcd transmittance;
};

/// Generic amplitude/phase mask (slits, attenuators, SLM patterns).
Mask make_mask(const TransverseGrid& grid, Domain domain,
               Eigen::VectorXcd transmittance);

/// Cubic-phase mask on the wavenumber axis of `grid`. Rejects masks whose
/// phase is not resolved by the grid: more than 0.5% of the |t|^2 mass may
/// not lie where the per-sample phase step exceeds pi.
Mask airy_mask(const AiryMaskSpec& spec, const TransverseGrid& grid);

/// The same mask realized as a position-domain SLM pattern,
/// m(xi) = t(-k xi / readout_focal). Placed at a source-image plane and
/// followed by a Fourier-transforming lens of focal length `readout_focal`
/// this acts identically to airy_mask applied behind that lens.
Mask airy_slm_mask(const AiryMaskSpec& spec, const TransverseGrid& grid,
                   double readout_focal);

/// Pointwise product in the mask's domain; the field is transformed there
/// and back as needed. Norm never increases. Grids must match exactly.
ComplexField apply_mask(const ComplexField& field, const Mask& mask);

/// CSV rows (q, Re t, Im t) with the mask-domain coordinate in the first
/// column.
void write_mask_csv(const Mask& mask, std::ostream& out);

}  // namespace airysim
