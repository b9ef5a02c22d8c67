#include <doctest.h>

#include <cstring>
#include <numbers>
#include <random>

#include "airysim/grid.hpp"
#include "test_support.hpp"

using namespace airysim;

TEST_CASE("grid coordinates follow the centered convention") {
  const TransverseGrid g = make_grid(8, 1.0, 0.0);
  const std::vector<double> xs = g.positions();
  for (int j = 0; j < 8; ++j) CHECK(xs[j] == doctest::Approx(j - 4.0));
  CHECK(g.dq() == doctest::Approx(2.0 * std::numbers::pi / 8.0));

  const TransverseGrid fine = make_grid(4096, 5e-6, 0.0);
  CHECK(fine.dq() == doctest::Approx(306.8).epsilon(1e-3));
}

TEST_CASE("grid rejects invalid parameters") {
  CHECK_THROWS_AS(make_grid(7, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(12, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(256, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(256, -1e-6), std::invalid_argument);
}

TEST_CASE("coordinate regeneration is bit-stable") {
  const TransverseGrid g = make_grid(512, 3.7e-6, 1.1e-4);
  const std::vector<double> a = g.positions();
  const std::vector<double> b = g.positions();
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  const std::vector<double> qa = g.wavenumbers();
  const std::vector<double> qb = g.wavenumbers();
  CHECK(std::memcmp(qa.data(), qb.data(), qa.size() * sizeof(double)) == 0);
}

TEST_CASE("field construction validates values") {
  const TransverseGrid g = make_grid(16, 1.0);
  CHECK_THROWS_AS(make_field(g, Eigen::VectorXcd::Zero(8)),
                  std::invalid_argument);
  Eigen::VectorXcd bad = Eigen::VectorXcd::Zero(16);
  bad[3] = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(make_field(g, bad), std::invalid_argument);
}

TEST_CASE("delta field transforms to a flat-magnitude spectrum") {
  const TransverseGrid g = make_grid(64, 0.5);
  Eigen::VectorXcd values = Eigen::VectorXcd::Zero(64);
  values[20] = 1.0;
  const ComplexField spec = fft_unitary(make_field(g, values));
  const double expected = std::abs(spec.values[0]);
  for (int m = 0; m < 64; ++m)
    CHECK(std::abs(spec.values[m]) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gaussian transforms to the analytic gaussian pair") {
  const TransverseGrid g = make_grid(512, 1.0);
  const double w = 16.0;
  const ComplexField f = testsup::gaussian_field(g, w);
  const ComplexField spec = fft_unitary(f);

  // Closed form: exp(-x^2/w^2) -> (w/sqrt(2)) exp(-q^2 w^2 / 4).
  const double amp = w / std::sqrt(2.0);
  for (int m = 0; m < g.n; ++m) {
    const double q = g.q(m);
    const double expected = amp * std::exp(-q * q * w * w / 4.0);
    CHECK(std::abs(spec.values[m] - expected) < 1e-10 * amp);
  }
  CHECK(variance(spec) == doctest::Approx(1.0 / (w * w)).epsilon(1e-6));
}

TEST_CASE("forward-inverse roundtrip is exact to 1e-12") {
  std::mt19937_64 rng(7);
  for (const double center : {0.0, 17.3}) {
    const TransverseGrid g = make_grid(256, 0.8, center);
    const ComplexField f = testsup::random_smooth_field(g, rng);
    const ComplexField back = ifft_unitary(fft_unitary(f));
    const double scale = f.values.cwiseAbs().maxCoeff();
    CHECK((back.values - f.values).cwiseAbs().maxCoeff() < 1e-12 * scale);
  }
}

TEST_CASE("parseval holds to 1e-12 relative across grid sizes") {
  std::mt19937_64 rng(11);
  for (const int n : {64, 256, 1024, 4096}) {
    const TransverseGrid g = make_grid(n, 2.3e-6, 5e-6);
    const ComplexField f = testsup::random_smooth_field(g, rng);
    const double nx = norm_squared(f);
    const double nq = norm_squared(fft_unitary(f));
    CHECK(nq == doctest::Approx(nx).epsilon(1e-12));
  }
}

TEST_CASE("uncertainty product respects the 1/4 bound") {
  std::mt19937_64 rng(13);
  const TransverseGrid g = make_grid(1024, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexField f = testsup::random_smooth_field(g, rng);
    const double product = variance(f) * variance(fft_unitary(f));
    CHECK(product >= 0.25 * 0.99);
  }
  // Gaussians saturate the bound.
  const ComplexField f = testsup::gaussian_field(g, 16.0);
  const double product = variance(f) * variance(fft_unitary(f));
  CHECK(product == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("moments of symmetric and gaussian intensities") {
  const TransverseGrid g = make_grid(512, 1.0);
  SUBCASE("symmetric field has zero centroid") {
    const ComplexField f = testsup::gaussian_field(g, 20.0);
    CHECK(std::abs(centroid(f)) < 1e-9);
  }
  SUBCASE("gaussian intensity variance equals s^2") {
    // |f|^2 ~ exp(-x^2/(2 s^2)) means amplitude exp(-x^2/(4 s^2)).
    const double s = 9.0;
    Eigen::VectorXcd values(g.n);
    for (int j = 0; j < g.n; ++j) {
      const double x = g.x(j);
      values[j] = std::exp(-x * x / (4.0 * s * s));
    }
    const ComplexField f = make_field(g, std::move(values));
    CHECK(variance(f) == doctest::Approx(s * s).epsilon(1e-8));
  }
  SUBCASE("zero field is rejected") {
    const ComplexField zero = uniform_field(g, 0.0);
    CHECK_THROWS_AS(centroid(zero), std::invalid_argument);
    CHECK_THROWS_AS(variance(zero), std::invalid_argument);
  }
}

TEST_CASE("off-center grids keep moments consistent") {
  const TransverseGrid g = make_grid(512, 1.0, 40.0);
  const ComplexField f = testsup::gaussian_field(g, 16.0, 40.0);
  CHECK(centroid(f) == doctest::Approx(40.0).epsilon(1e-9));
  // The spectrum is centered: a pure shift only adds phase.
  const ComplexField spec = fft_unitary(f);
  CHECK(std::abs(centroid(spec)) < 1e-9);
}
