#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hsle/quadrature.hpp"
#include "hsle/specfun.hpp"
#include "test_util.hpp"

using namespace hsle;
using testutil::tanh_sinh_01;

TEST_CASE("gauss_jacobi_01 moment-0 equals Beta(alpha+1, beta+1)") {
  for (double alpha : {-0.9, -0.6667, -0.5, 0.0, 0.75}) {
    for (double beta_e : {-0.8, -1.0 / 3.0, 0.0, 1.2}) {
      for (int n : {8, 48, 200}) {
        const auto& rule = gauss_jacobi_01(alpha, beta_e, n);
        double sum = 0.0;
        for (double w : rule.weights) sum += w;
        const double ref = beta(alpha + 1.0, beta_e + 1.0);
        CHECK(std::abs(sum - ref) <= 1e-12 * ref);
        for (double node : rule.nodes) {
          CHECK(node > 0.0);
          CHECK(node < 1.0);
        }
        for (double w : rule.weights) CHECK(w > 0.0);
      }
    }
  }
}

TEST_CASE("gauss_jacobi_01 integrates weighted monomials exactly") {
  const double alpha = -2.0 / 3.0, beta_e = -0.25;
  const auto& rule = gauss_jacobi_01(alpha, beta_e, 24);
  // x^k (1-x)^j for k + j within the design order
  for (int k = 0; k <= 6; ++k) {
    for (int j = 0; j <= 6; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * std::pow(rule.nodes[i], k) *
               std::pow(1.0 - rule.nodes[i], j);
      const double ref = beta(alpha + k + 1.0, beta_e + j + 1.0);
      CHECK(std::abs(acc - ref) <= 1e-12 * ref);
    }
  }
  CHECK_THROWS_AS(gauss_jacobi_01(-1.0, 0.0, 8), std::domain_error);
  CHECK_THROWS_AS(gauss_jacobi_01(0.0, -1.2, 8), std::domain_error);
}

TEST_CASE("three_factor_integral vs tanh-sinh across regimes") {
  struct Case {
    double a, b, g, U, Z;
  };
  const Case cases[] = {
      {-2.0 / 3.0, 0.0, -2.0 / 3.0, 1.0, 1.0 / 3.0},
      {-0.8, -0.2, -0.2, 1.0, 0.25},
      {-0.5714, 0.2857, -0.8571, 1.0, 0.9},
      {-0.6667, 0.0, -0.6667, 1.0, 0.999999},
      {-0.6667, -0.5, 0.4, 0.37, 0.0},
      {-0.9, 1.5, -1.4, 0.9999, 0.95},
      {-0.6667, 0.0, -0.6667, 0.005, 0.5},
  };
  for (const auto& c : cases) {
    const double got = three_factor_integral(c.a, c.b, c.g, c.U, c.Z);
    const double ref = testutil::ts_three_factor(c.a, c.b, c.g, c.U, c.Z);
    CHECK(got == doctest::Approx(ref).epsilon(2e-11));
    double err = 0.0;
    const double refined =
        three_factor_integral_refined(c.a, c.b, c.g, c.U, c.Z, &err);
    CHECK(std::abs(refined - ref) <= 2e-11 * std::abs(ref));
  }
}

TEST_CASE("three_factor_integral merged endpoint at Z=1") {
  // Z == 1, U == 1 merges into x^a (1-x)^(b+g)
  const double a = -0.5, b = 0.4, g = -0.9;
  const double got = three_factor_integral(a, b, g, 1.0, 1.0);
  CHECK(got == doctest::Approx(beta(a + 1.0, b + g + 1.0)).epsilon(1e-11));
  CHECK_THROWS_AS(three_factor_integral(-0.5, 0.0, -1.2, 1.0, 1.0),
                  std::domain_error);
  CHECK_THROWS_AS(three_factor_integral(-1.1, 0.0, 0.0, 1.0, 0.0),
                  std::domain_error);
  CHECK_THROWS_AS(three_factor_integral(-0.5, 0.0, 0.0, 1.5, 0.0),
                  std::domain_error);
}
