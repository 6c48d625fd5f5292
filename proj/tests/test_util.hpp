// Shared test oracles. These deliberately avoid the production quadrature
// and special-function paths: tanh-sinh integration and Stirling-series
// log-gamma give independent reference values.
#pragma once

#include <cmath>
#include <functional>

namespace testutil {

// Integral over (0,1) of f(x, 1-x) by double-exponential quadrature with
// level refinement; f receives both x and 1-x computed without cancellation
// so endpoint singularities on either side are handled.
inline double tanh_sinh_01(const std::function<double(double, double)>& f,
                           double tol = 1e-13, int max_level = 14) {
  const double pi_half = 1.5707963267948966;
  double h = 1.0;
  // node at t=0: x = 1/2
  double sum = pi_half * f(0.5, 0.5) * 0.5;  // weight pi/4 * ... times h later
  // accumulate symmetric nodes
  auto add_nodes = [&](double step, bool odd_only) {
    double acc = 0.0;
    for (int j = 1; j < 100000; ++j) {
      if (odd_only && j % 2 == 0) continue;
      const double t = j * step;
      const double u = pi_half * std::sinh(t);
      if (u > 350.0) break;
      const double eu = std::exp(-2.0 * u);
      const double x_near = eu / (1.0 + eu);      // distance to endpoint
      const double x_far = 1.0 / (1.0 + eu);      // = 1 - x_near
      const double w = pi_half * std::cosh(t) * 4.0 * eu /
                       ((1.0 + eu) * (1.0 + eu));
      const double term = w * (f(x_far, x_near) + f(x_near, x_far)) * 0.5;
      acc += term;
      if (std::abs(term) < 1e-22 * (std::abs(sum) + std::abs(acc)) && t > 3.0)
        break;
    }
    return acc;
  };
  sum += add_nodes(h, false);
  double prev = sum * h;
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    sum += add_nodes(h, true);
    const double cur = sum * h;
    if (std::abs(cur - prev) <= tol * std::abs(cur) && level >= 3) return cur;
    prev = cur;
  }
  return prev;
}

// Semi-infinite integral over (lo, inf) via s = lo / v, v in (0,1).
inline double tanh_sinh_tail(const std::function<double(double)>& f, double lo,
                             double tol = 1e-12) {
  return tanh_sinh_01(
      [&](double v, double) {
        const double s = lo / v;
        return f(s) * s / v;
      },
      tol);
}

// Reference for int_0^U x^a (1-x)^b (1-Zx)^g dx. The endpoint powers are
// absorbed exactly by the substitutions x = m s^(1/(1+a)) and
// (1-x) = (1-m) q^(1/(1+b)), which keeps double-exponential quadrature
// accurate even for exponents close to -1.
inline double ts_three_factor(double a, double b, double g, double U,
                              double Z) {
  const double m = 0.5 * U;
  // left piece: x^a dx = m^(1+a)/(1+a) ds
  const double left =
      std::pow(m, 1.0 + a) / (1.0 + a) *
      tanh_sinh_01([&](double s, double) {
        const double x = m * std::pow(s, 1.0 / (1.0 + a));
        return std::pow(1.0 - x, b) * std::pow(1.0 - Z * x, g);
      });
  // right piece: 1-x = (1-m) - (U-m) r ... handled as (1-x) power in q
  double right;
  if (U == 1.0) {
    // (1-x)^b dx = (1-m)^(1+b)/(1+b) dq with 1-x = (1-m) q^(1/(1+b))
    right = std::pow(1.0 - m, 1.0 + b) / (1.0 + b) *
            tanh_sinh_01([&](double q, double) {
              const double omx = (1.0 - m) * std::pow(q, 1.0 / (1.0 + b));
              const double x = 1.0 - omx;
              return std::pow(x, a) *
                     std::pow((1.0 - Z) + Z * omx, g);
            });
  } else {
    right = (U - m) * tanh_sinh_01([&](double r, double omr) {
              const double x = m + (U - m) * r;
              const double omx = (1.0 - U) + (U - m) * omr;
              return std::pow(x, a) * std::pow(omx, b) *
                     std::pow(1.0 - Z * x, g);
            });
  }
  return left + right;
}

// log Gamma by Stirling series pushed to large argument plus downward
// recursion; independent of the Lanczos path under test.
inline double stirling_ln_gamma(double x) {
  double shift = 0.0;
  while (x < 25.0) {
    shift -= std::log(x);
    x += 1.0;
  }
  static const double b[] = {1.0 / 12,      -1.0 / 360,     1.0 / 1260,
                             -1.0 / 1680,   1.0 / 1188,     -691.0 / 360360,
                             1.0 / 156,     -3617.0 / 122400};
  double series = 0.0, xp = x;
  for (double coef : b) {
    series += coef / xp;
    xp *= x * x;
  }
  return shift + (x - 0.5) * std::log(x) - x +
         0.91893853320467274178032973640562 + series;
}

}  // namespace testutil
