#pragma once

#include <iosfwd>

#include "airysim/grid.hpp"
#include "airysim/propagation.hpp"

namespace airysim {

enum class Arm { signal, idler };

/// Two-photon transverse source model. The wavenumber-domain amplitude is
///   c(q1, q2) = N exp(-(q1+q2)^2/(4 sigma_plus^2))
///                 exp(-(q1-q2)^2/(4 sigma_minus^2)).
/// ideal_epr is the delta(q1+q2) limit, regularized on the grid as
/// sigma_plus = 2 dq (the narrowest resolvable anti-correlation).
struct SourceSpec {
  enum class Kind { ideal_epr, gaussian_spdc };
  Kind kind = Kind::gaussian_spdc;
  double sigma_plus = 0.0;   // [1/m]
  double sigma_minus = 0.0;  // [1/m]
};

/// Complex amplitude c(x1, x2) on a grid pair; axis 1 (rows) is the
/// signal coordinate, axis 2 (columns) the idler coordinate.
struct BiphotonAmplitude {
  TransverseGrid grid1, grid2;
  Domain domain1 = Domain::position;
  Domain domain2 = Domain::position;
  Eigen::MatrixXcd amp;  // amp(i, j) = c(axis1_i, axis2_j)

  const TransverseGrid& grid(Arm arm) const {
    return arm == Arm::signal ? grid1 : grid2;
  }
  Domain domain(Arm arm) const {
    return arm == Arm::signal ? domain1 : domain2;
  }
};

/// Normalized coincidence probability map |c|^2 (unit sum, Eq.-(9)-style
/// post-selected state).
struct CoincidenceMap {
  TransverseGrid grid1, grid2;
  Domain domain1 = Domain::position;
  Domain domain2 = Domain::position;
  Eigen::MatrixXd prob;

  const TransverseGrid& grid(Arm arm) const {
    return arm == Arm::signal ? grid1 : grid2;
  }
  Domain domain(Arm arm) const {
    return arm == Arm::signal ? domain1 : domain2;
  }
};

/// Conditional distribution of one arm with the other held fixed.
struct ConditionalSlice {
  TransverseGrid grid;  // grid of the scanned arm
  Domain domain = Domain::position;
  Eigen::VectorXd prob;  // unit sum
  Arm fixed_arm = Arm::signal;
  int fixed_index = 0;
  double fixed_coordinate = 0.0;  // coordinate actually used
  bool off_grid_warning = false;
};

/// Builds the wavenumber-domain source amplitude, unit L2 norm. Both
/// sigmas must be resolved by >= 8 conjugate-grid samples (the ideal_epr
/// regularized sigma_plus is exempt by construction).
BiphotonAmplitude make_source(const SourceSpec& spec,
                              const TransverseGrid& grid1,
                              const TransverseGrid& grid2);

/// Applies a single-arm optical system to one index of the amplitude.
/// Linear in the state; arm applications commute. An empty system is the
/// identity; otherwise the arm is left in the position domain.
BiphotonAmplitude apply_arm(const BiphotonAmplitude& state, Arm arm,
                            const OpticalSystem& system);

/// Transforms one arm between representations without any optics.
BiphotonAmplitude arm_to_domain(const BiphotonAmplitude& state, Arm arm,
                                Domain domain);

CoincidenceMap coincidence_map(const BiphotonAmplitude& state);

/// Slice of the map at the given coordinate of `fixed_arm`, normalized to
/// unit sum. Off-grid coordinates fall back to the nearest sample and set
/// the warning flag.
ConditionalSlice conditional_slice(const CoincidenceMap& map, Arm fixed_arm,
                                   double fixed_coordinate);

/// Singular values of the amplitude (with the grid measure), descending,
/// normalized to sum(lambda^2) = 1. Invariant under lossless single-arm
/// optics.
Eigen::VectorXd schmidt_spectrum(const BiphotonAmplitude& state);

/// Schmidt number K = 1 / sum(lambda^4).
double schmidt_number(const Eigen::VectorXd& spectrum);

/// CSV rows (x1, x2, C).
void write_map_csv(const CoincidenceMap& map, std::ostream& out);

/// Binary dump: 16-byte header (magic "BIPH", u32 version = 1, u32 n1,
/// u32 n2, little-endian) followed by row-major float64 probabilities.
void write_map_binary(const CoincidenceMap& map, std::ostream& out);
CoincidenceMap read_map_binary(std::istream& in, const TransverseGrid& grid1,
                               const TransverseGrid& grid2);

}  // namespace airysim
