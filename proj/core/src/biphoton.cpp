#include "airysim/biphoton.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/SVD>

#include "fft_engine.hpp"

namespace airysim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Vector operations along one index of the amplitude matrix. Axis 0 is
/// the signal (row) index, axis 1 the idler (column) index; the per-line
/// arithmetic matches the single-field operations bit for bit.
class AxisOps {
 public:
  AxisOps(Eigen::MatrixXcd& amp, int axis) : amp_(amp), axis_(axis) {}

  int size() const {
    return static_cast<int>(axis_ == 0 ? amp_.rows() : amp_.cols());
  }

  void multiply(const Eigen::VectorXcd& v) {
    if (axis_ == 0)
      amp_.array().colwise() *= v.array();
    else
      amp_.array().rowwise() *= v.array().transpose();
  }

  void scale(Complex s) { amp_ *= s; }

  void dft(int sign) {
    const int n = size();
    if (axis_ == 0) {
      for (Eigen::Index j = 0; j < amp_.cols(); ++j)
        detail::dft_inplace(amp_.col(j).data(), n, sign);
    } else {
      Eigen::VectorXcd scratch(n);
      for (Eigen::Index i = 0; i < amp_.rows(); ++i) {
        scratch = amp_.row(i).transpose();
        detail::dft_inplace(scratch.data(), n, sign);
        amp_.row(i) = scratch.transpose();
      }
    }
  }

  void reverse_cyclic() {
    const int n = size();
    if (axis_ == 0) {
      Eigen::MatrixXcd out(amp_.rows(), amp_.cols());
      for (int i = 0; i < n; ++i) out.row((n - i) % n) = amp_.row(i);
      amp_ = std::move(out);
    } else {
      Eigen::MatrixXcd out(amp_.rows(), amp_.cols());
      for (int j = 0; j < n; ++j) out.col((n - j) % n) = amp_.col(j);
      amp_ = std::move(out);
    }
  }

 private:
  Eigen::MatrixXcd& amp_;
  int axis_;
};

Eigen::VectorXcd forward_post_vector(const TransverseGrid& g) {
  const double scale = g.dx / std::sqrt(kTwoPi);
  Eigen::VectorXcd post(g.n);
  if (g.center == 0.0) {
    for (int m = 0; m < g.n; ++m) post[m] = (m % 2 == 0) ? scale : -scale;
  } else {
    for (int m = 0; m < g.n; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      post[m] = std::polar(sign * scale, -g.q(m) * g.center);
    }
  }
  return post;
}

Eigen::VectorXcd inverse_pre_vector(const TransverseGrid& g) {
  Eigen::VectorXcd pre(g.n);
  if (g.center == 0.0) {
    for (int m = 0; m < g.n; ++m) pre[m] = (m % 2 == 0) ? 1.0 : -1.0;
  } else {
    for (int m = 0; m < g.n; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      pre[m] = std::polar(sign, g.q(m) * g.center);
    }
  }
  return pre;
}

Eigen::VectorXcd alternating_signs(int n) {
  Eigen::VectorXcd v(n);
  for (int j = 0; j < n; ++j) v[j] = (j % 2 == 0) ? 1.0 : -1.0;
  return v;
}

/// State of one arm while folding system elements.
struct ArmState {
  TransverseGrid grid;
  Domain domain;
};

void axis_fft(AxisOps& ops, ArmState& st) {
  ops.multiply(alternating_signs(st.grid.n));
  ops.dft(-1);
  ops.multiply(forward_post_vector(st.grid));
  st.domain = Domain::wavenumber;
}

void axis_ifft(AxisOps& ops, ArmState& st) {
  ops.multiply(inverse_pre_vector(st.grid));
  ops.dft(+1);
  const double scale = st.grid.dq() / std::sqrt(kTwoPi);
  Eigen::VectorXcd post(st.grid.n);
  for (int j = 0; j < st.grid.n; ++j)
    post[j] = (j % 2 == 0) ? scale : -scale;
  ops.multiply(post);
  st.domain = Domain::position;
}

void axis_to_domain(AxisOps& ops, ArmState& st, Domain want) {
  if (st.domain == want) return;
  if (want == Domain::wavenumber)
    axis_fft(ops, st);
  else
    axis_ifft(ops, st);
}

void axis_apply_element(AxisOps& ops, ArmState& st, const OpticalElement& el,
                        double k) {
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, FreeSpace>) {
          if (e.distance < 0.0)
            throw std::invalid_argument("propagate_free: negative distance");
          const double step =
              std::abs(st.grid.q(0)) * st.grid.dq() * e.distance / k;
          if (step > std::numbers::pi)
            throw std::domain_error(
                "apply_arm: free-space step violates the grid's Fresnel "
                "sampling limit");
          axis_to_domain(ops, st, Domain::wavenumber);
          const double c = e.distance / (2.0 * k);
          Eigen::VectorXcd chirp(st.grid.n);
          for (int m = 0; m < st.grid.n; ++m) {
            const double q = st.grid.q(m);
            chirp[m] = std::polar(1.0, -q * q * c);
          }
          ops.multiply(chirp);
          axis_ifft(ops, st);
        } else if constexpr (std::is_same_v<T, FourierLens>) {
          if (!(e.focal > 0.0))
            throw std::invalid_argument("fourier_lens: focal must be positive");
          axis_to_domain(ops, st, Domain::position);
          axis_fft(ops, st);
          const double scale = k / e.focal;
          ops.scale(std::sqrt(scale));
          st.grid = make_grid(st.grid.n, st.grid.dq() / scale, 0.0);
          st.domain = Domain::position;
        } else if constexpr (std::is_same_v<T, Imaging>) {
          if (e.magnification == 0.0 || !std::isfinite(e.magnification))
            throw std::invalid_argument("imaging: magnification must be nonzero");
          axis_to_domain(ops, st, Domain::position);
          const double s = e.invert ? -1.0 : 1.0;
          const double sc = s * e.magnification;
          ops.scale(1.0 / std::sqrt(std::abs(e.magnification)));
          if (sc < 0.0) ops.reverse_cyclic();
          st.grid = make_grid(st.grid.n, std::abs(sc) * st.grid.dx,
                              sc * st.grid.center);
        } else {  // Mask
          if (!(st.grid == e.grid))
            throw std::invalid_argument("apply_mask: field/mask grid mismatch");
          const Domain original = st.domain;
          axis_to_domain(ops, st, e.domain);
          ops.multiply(e.transmittance);
          axis_to_domain(ops, st, original);
        }
      },
      el);
}

}  // namespace

BiphotonAmplitude make_source(const SourceSpec& spec,
                              const TransverseGrid& grid1,
                              const TransverseGrid& grid2) {
  if (!(spec.sigma_minus > 0.0))
    throw std::invalid_argument("make_source: sigma_minus must be > 0");
  const double dq = std::max(grid1.dq(), grid2.dq());
  double sigma_plus = spec.sigma_plus;
  if (spec.kind == SourceSpec::Kind::ideal_epr) {
    sigma_plus = 2.0 * dq;
  } else {
    if (!(spec.sigma_plus > 0.0))
      throw std::invalid_argument("make_source: sigma_plus must be > 0");
    if (spec.sigma_plus < 8.0 * dq)
      throw std::domain_error(
          "make_source: sigma_plus under-resolved (< 8 samples per width)");
  }
  if (spec.sigma_minus < 8.0 * dq)
    throw std::domain_error(
        "make_source: sigma_minus under-resolved (< 8 samples per width)");

  const double cp = 1.0 / (4.0 * sigma_plus * sigma_plus);
  const double cm = 1.0 / (4.0 * spec.sigma_minus * spec.sigma_minus);
  Eigen::MatrixXcd amp(grid1.n, grid2.n);
  double norm2 = 0.0;
  for (int j = 0; j < grid2.n; ++j) {
    const double q2 = grid2.q(j);
    for (int i = 0; i < grid1.n; ++i) {
      const double q1 = grid1.q(i);
      const double sum = q1 + q2, diff = q1 - q2;
      const double v = std::exp(-cp * sum * sum - cm * diff * diff);
      amp(i, j) = v;
      norm2 += v * v;
    }
  }
  norm2 *= grid1.dq() * grid2.dq();
  if (!(norm2 > 0.0))
    throw std::domain_error("make_source: source amplitude vanished on grid");
  amp *= 1.0 / std::sqrt(norm2);
  return BiphotonAmplitude{grid1, grid2, Domain::wavenumber,
                           Domain::wavenumber, std::move(amp)};
}

BiphotonAmplitude apply_arm(const BiphotonAmplitude& state, Arm arm,
                            const OpticalSystem& system) {
  BiphotonAmplitude out = state;
  const int axis = arm == Arm::signal ? 0 : 1;
  AxisOps ops(out.amp, axis);
  ArmState st{arm == Arm::signal ? out.grid1 : out.grid2,
              arm == Arm::signal ? out.domain1 : out.domain2};
  const double k = system.wavenumber();
  for (const OpticalElement& el : system.elements)
    axis_apply_element(ops, st, el, k);
  if (arm == Arm::signal) {
    out.grid1 = st.grid;
    out.domain1 = st.domain;
  } else {
    out.grid2 = st.grid;
    out.domain2 = st.domain;
  }
  return out;
}

BiphotonAmplitude arm_to_domain(const BiphotonAmplitude& state, Arm arm,
                                Domain domain) {
  BiphotonAmplitude out = state;
  const int axis = arm == Arm::signal ? 0 : 1;
  AxisOps ops(out.amp, axis);
  ArmState st{arm == Arm::signal ? out.grid1 : out.grid2,
              arm == Arm::signal ? out.domain1 : out.domain2};
  axis_to_domain(ops, st, domain);
  if (arm == Arm::signal)
    out.domain1 = st.domain;
  else
    out.domain2 = st.domain;
  return out;
}

CoincidenceMap coincidence_map(const BiphotonAmplitude& state) {
  Eigen::MatrixXd prob = state.amp.cwiseAbs2();
  const double total = prob.sum();
  if (!(total > 0.0))
    throw std::domain_error("coincidence_map: state has zero norm");
  prob *= 1.0 / total;
  return CoincidenceMap{state.grid1, state.grid2, state.domain1,
                        state.domain2, std::move(prob)};
}

ConditionalSlice conditional_slice(const CoincidenceMap& map, Arm fixed_arm,
                                   double fixed_coordinate) {
  const TransverseGrid& fixed_grid = map.grid(fixed_arm);
  const Domain fixed_domain = map.domain(fixed_arm);
  const int idx = fixed_grid.nearest_index(fixed_coordinate, fixed_domain);
  const double used = fixed_domain == Domain::position ? fixed_grid.x(idx)
                                                       : fixed_grid.q(idx);
  const double pitch =
      fixed_domain == Domain::position ? fixed_grid.dx : fixed_grid.dq();
  const bool off_grid =
      std::abs(fixed_coordinate - used) > 0.5000001 * pitch;

  Eigen::VectorXd slice = fixed_arm == Arm::signal
                              ? Eigen::VectorXd(map.prob.row(idx))
                              : Eigen::VectorXd(map.prob.col(idx));
  const double total = slice.sum();
  if (!(total > 0.0))
    throw std::domain_error("conditional_slice: slice has zero probability");
  slice *= 1.0 / total;

  const Arm scanned = fixed_arm == Arm::signal ? Arm::idler : Arm::signal;
  return ConditionalSlice{map.grid(scanned), map.domain(scanned),
                          std::move(slice),  fixed_arm,
                          idx,               used,
                          off_grid};
}

Eigen::VectorXd schmidt_spectrum(const BiphotonAmplitude& state) {
  const double m1 =
      state.domain1 == Domain::position ? state.grid1.dx : state.grid1.dq();
  const double m2 =
      state.domain2 == Domain::position ? state.grid2.dx : state.grid2.dq();
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(state.amp);
  Eigen::VectorXd lambdas = svd.singularValues() * std::sqrt(m1 * m2);
  const double total = lambdas.squaredNorm();
  if (!(total > 0.0))
    throw std::domain_error("schmidt_spectrum: state has zero norm");
  return lambdas / std::sqrt(total);
}

double schmidt_number(const Eigen::VectorXd& spectrum) {
  const double sum4 = spectrum.array().pow(4).sum();
  return 1.0 / sum4;
}

void write_map_csv(const CoincidenceMap& map, std::ostream& out) {
  out << "x1,x2,c\n";
  char line[96];
  for (int i = 0; i < map.grid1.n; ++i) {
    const double x1 = map.domain1 == Domain::position ? map.grid1.x(i)
                                                      : map.grid1.q(i);
    for (int j = 0; j < map.grid2.n; ++j) {
      const double x2 = map.domain2 == Domain::position ? map.grid2.x(j)
                                                        : map.grid2.q(j);
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", x1, x2,
                    map.prob(i, j));
      out << line;
    }
  }
}

void write_map_binary(const CoincidenceMap& map, std::ostream& out) {
  const char magic[4] = {'B', 'I', 'P', 'H'};
  const uint32_t version = 1;
  const auto n1 = static_cast<uint32_t>(map.grid1.n);
  const auto n2 = static_cast<uint32_t>(map.grid2.n);
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&n1), 4);
  out.write(reinterpret_cast<const char*>(&n2), 4);
  std::vector<double> row(static_cast<size_t>(map.grid2.n));
  for (int i = 0; i < map.grid1.n; ++i) {
    for (int j = 0; j < map.grid2.n; ++j)
      row[static_cast<size_t>(j)] = map.prob(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
}

CoincidenceMap read_map_binary(std::istream& in, const TransverseGrid& grid1,
                               const TransverseGrid& grid2) {
  char magic[4];
  uint32_t version = 0, n1 = 0, n2 = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&n1), 4);
  in.read(reinterpret_cast<char*>(&n2), 4);
  if (!in || std::memcmp(magic, "BIPH", 4) != 0)
    throw std::runtime_error("read_map_binary: bad magic");
  if (version != 1) throw std::runtime_error("read_map_binary: bad version");
  if (n1 != static_cast<uint32_t>(grid1.n) ||
      n2 != static_cast<uint32_t>(grid2.n))
    throw std::runtime_error("read_map_binary: dimension mismatch");
  Eigen::MatrixXd prob(grid1.n, grid2.n);
  std::vector<double> row(static_cast<size_t>(grid2.n));
  for (int i = 0; i < grid1.n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) throw std::runtime_error("read_map_binary: truncated payload");
    for (int j = 0; j < grid2.n; ++j) prob(i, j) = row[static_cast<size_t>(j)];
  }
  return CoincidenceMap{grid1, grid2, Domain::position, Domain::position,
                        std::move(prob)};
}

}  // namespace airysim
