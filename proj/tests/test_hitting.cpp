#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hsle/hitting.hpp"
#include "hsle/rng.hpp"
#include "test_util.hpp"

using namespace hsle;

namespace {
const HsleParams kP{6.0, 0.0, 0.5, 1.5};
}

TEST_CASE("rho_density normalizes to one") {
  // quadrature of the ratio against an independent tail oracle
  const double total = testutil::tanh_sinh_tail(
      [&](double s) { return s > kP.y ? rho_density(kP, s) : 0.0; }, kP.y);
  CHECK(std::abs(total - 1.0) < 1e-8);
  CHECK_THROWS_AS(rho_density(kP, 1.0), std::domain_error);
}

TEST_CASE("rho_density value against oracle normalization") {
  const double norm = testutil::tanh_sinh_tail(
      [&](double s) {
        return std::pow(s, -4.0 / 6.0) * std::pow(s - kP.y, 0.0) *
               std::pow(s - kP.x, -4.0 / 6.0);
      },
      kP.y);
  const double u = 2.0;
  const double ref =
      std::pow(u, -4.0 / 6.0) * std::pow(u - kP.x, -4.0 / 6.0) / norm;
  CHECK(rho_density(kP, u) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("boundary exponent regimes near y") {
  // nu < kappa-6: density blows up integrably at y+; nu > kappa-6: -> 0
  const HsleParams blow{6.0, -1.5, 0.5, 1.5};  // exponent (2nu+12-2k)/k < 0
  const HsleParams vanish{6.0, 0.5, 0.5, 1.5};
  CHECK(rho_density(blow, kP.y * (1.0 + 1e-9)) > 1e2);
  CHECK(rho_density(vanish, kP.y * (1.0 + 1e-9)) < 1e-2);
}

TEST_CASE("rho_cdf endpoints, monotonicity, consistency with the density") {
  CHECK(rho_cdf(kP, kP.y) == 0.0);
  CHECK(rho_cdf(kP, std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(rho_cdf(kP, 1e15) > 0.99);
  CHECK_THROWS_AS(rho_cdf(kP, 1.0), std::domain_error);

  double prev = 0.0;
  for (double w : {1.6, 2.0, 3.0, 5.0, 9.0, 20.0, 100.0}) {
    const double c = rho_cdf(kP, w);
    CHECK(c >= prev);
    prev = c;
  }
  // two independent algebraic routes to the same law
  for (double w : {1.7, 2.0, 3.0, 6.0, 15.0}) {
    const double cum = testutil::tanh_sinh_01([&](double t, double) {
      const double s = kP.y + (w - kP.y) * t;
      return s > kP.y ? (w - kP.y) * rho_density(kP, s) : 0.0;
    });
    CHECK(std::abs(rho_cdf(kP, w) - cum) < 1e-7);
  }
}

TEST_CASE("rho_cdf example value at the acceptance parameters") {
  // kappa=6, nu=0, x=0.5, y=1.5, w=3: frozen from the tanh-sinh oracle
  const double cum = testutil::tanh_sinh_01([&](double t, double) {
    const double s = kP.y + (3.0 - kP.y) * t;
    return s > kP.y ? (3.0 - kP.y) * rho_density(kP, s) : 0.0;
  });
  CHECK(rho_cdf(kP, 3.0) == doctest::Approx(cum).epsilon(1e-9));
  CHECK(cum == doctest::Approx(0.2334853834).epsilon(1e-6));
}

TEST_CASE("scale covariance of the hitting law") {
  const HsleParams scaled{kP.kappa, kP.nu, kP.x / kP.y, 1.0};
  for (double w : {1.55, 2.0, 4.0, 12.0}) {
    CHECK(std::abs(rho_cdf(kP, w) - rho_cdf(scaled, w / kP.y)) < 1e-10);
  }
}

TEST_CASE("sc_map_f endpoints and derivative") {
  CHECK(sc_map_f(kP, kP.y) == 0.0);
  CHECK(sc_map_f(kP, std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(sc_map_f(kP, 1e30) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(sc_map_f(kP, 1.0), std::domain_error);
  // derivative of f equals the density (finite differences at u = 2)
  const double h = 1e-5;
  const double fd = (sc_map_f(kP, 2.0 + h) - sc_map_f(kP, 2.0 - h)) / (2 * h);
  CHECK(std::abs(fd - rho_density(kP, 2.0)) < 1e-6);
  // strict monotonicity
  double prev = -1.0;
  for (double z : {1.5, 1.8, 2.5, 4.0, 10.0, 50.0}) {
    const double f = sc_map_f(kP, z);
    CHECK(f > prev);
    prev = f;
  }
  // f coincides with the cdf (both vanish at y, same derivative)
  for (double z : {1.7, 2.2, 3.0, 8.0}) {
    CHECK(std::abs(sc_map_f(kP, z) - rho_cdf(kP, z)) < 1e-8);
  }
}

TEST_CASE("partition function symmetry and positivity") {
  Philox4x32 rng(77, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const double kappa = 4.2 + 3.4 * rng.next_uniform();
    const double lo = kappa / 2.0 - 6.0;
    const double nu = lo + 0.2 + (4.0 - lo) * rng.next_uniform();
    const double x = 0.1 + 2.0 * rng.next_uniform();
    const double y = x * (1.05 + 3.0 * rng.next_uniform());
    const double z1 = partition_Z(kappa, nu, x, y);
    const double z2 = partition_Z(kappa, nu, 1.0 / y, 1.0 / x);
    CHECK(z1 > 0.0);
    CHECK(std::abs(z1 - z2) <= 1e-8 * std::abs(z1));
  }
}

TEST_CASE("partition function value against oracle") {
  const double kappa = 6.0, nu = 0.0, x = 0.5, y = 1.5;
  const double tail = testutil::tanh_sinh_tail(
      [&](double s) {
        return std::pow(s, -4.0 / kappa) *
               std::pow(s - y, (2 * nu + 12 - 2 * kappa) / kappa) *
               std::pow(s - x, -(2 * nu + 4) / kappa);
      },
      y);
  const double ref = std::pow(x, (nu + 2) / kappa) *
                     std::pow(y, (kappa - 6 - nu) / kappa) * tail;
  CHECK(partition_Z(kappa, nu, x, y) == doctest::Approx(ref).epsilon(1e-9));
  // scale invariance (the quantity is dimensionless)
  CHECK(partition_Z(kappa, nu, 2.0 * x, 2.0 * y) ==
        doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("density table sampling: inverse transform") {
  const DensityTable table = build_density_table(kP);
  CHECK(table.cdf_values.back() >= 1.0 - 2e-6);
  // monotone map
  double prev = 0.0;
  for (double q : {0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.9999}) {
    const double s = table.sample(q);
    CHECK(s > prev);
    CHECK(s > kP.y);
    prev = s;
  }
  // median
  const double med = table.sample(0.5);
  CHECK(rho_cdf(kP, med) == doctest::Approx(0.5).epsilon(1e-8));
  // round trip through the cdf
  for (double q : {0.05, 0.37, 0.81, 0.999}) {
    CHECK(rho_cdf(kP, table.sample(q)) == doctest::Approx(q).epsilon(1e-7));
  }
}

TEST_CASE("sampler KS against its own cdf at n = 1e5") {
  const DensityTable table = build_density_table(kP);
  const std::size_t n = 100000;
  std::vector<double> cs(n);
  Philox4x32 rng(2024, 7);
  for (std::size_t i = 0; i < n; ++i)
    cs[i] = rho_cdf(kP, table.sample(rng.next_uniform()));
  std::sort(cs.begin(), cs.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d = std::max(d, std::abs(cs[i] - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cs[i]));
  }
  CHECK(d < 0.006);
}

TEST_CASE("conditional sampler stays below the cap") {
  const DensityTable table = build_density_table(kP);
  Philox4x32 rng(5, 1);
  const double cap = 6.5;
  for (int i = 0; i < 2000; ++i) {
    const double u = table.sample_conditional(rng.next_uniform(), cap);
    CHECK(u > kP.y);
    CHECK(u <= cap * (1.0 + 1e-9));
  }
}
