/*
 * Copyright 2026 The hsle-lab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 */
#include "hsle/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "hsle/specfun.hpp"

namespace hsle {

namespace {

// Eigenvalues and first eigenvector components of a symmetric tridiagonal
// matrix (implicit QL with Wilkinson shifts, the classic tql2 reduction).
// d: diagonal, e: subdiagonal (e[0] unused). z starts as e_1 basis vector.
void tql2_first_components(std::vector<double>& d, std::vector<double>& e,
                           std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (iter++ == 50) throw std::runtime_error("tql2: no convergence");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  // insertion sort by eigenvalue, carrying first components
  for (int i = 1; i < n; ++i) {
    const double dv = d[i], zv = z[i];
    int j = i - 1;
    while (j >= 0 && d[j] > dv) {
      d[j + 1] = d[j];
      z[j + 1] = z[j];
      --j;
    }
    d[j + 1] = dv;
    z[j + 1] = zv;
  }
}

// Golub-Welsch for the Jacobi weight (1-t)^a (1+t)^b on [-1,1].
void jacobi_rule_m11(double a, double b, int n, std::vector<double>& x,
                     std::vector<double>& w) {
  std::vector<double> diag(n), sub(n, 0.0), z(n, 0.0);
  const double ab = a + b;
  diag[0] = (b - a) / (ab + 2.0);
  for (int k = 1; k < n; ++k) {
    const double t = 2.0 * k + ab;
    diag[k] = (b * b - a * a) / (t * (t + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    const double t = 2.0 * k + ab;
    double num;
    if (k == 1) {
      num = 4.0 * (1.0 + a) * (1.0 + b) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
    } else {
      num = 4.0 * k * (k + a) * (k + b) * (k + ab) /
            (t * t * (t + 1.0) * (t - 1.0));
    }
    sub[k] = std::sqrt(num);
  }
  z[0] = 1.0;
  // reuse tql2 with subdiagonal laid out as e[i] between d[i-1], d[i]
  std::vector<double> e(n, 0.0);
  for (int i = 1; i < n; ++i) e[i] = sub[i];
  tql2_first_components(diag, e, z);
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) +
                              ln_gamma(a + 1.0) + ln_gamma(b + 1.0) -
                              ln_gamma(ab + 2.0));
  x = diag;
  w.resize(n);
  for (int i = 0; i < n; ++i) w[i] = mu0 * z[i] * z[i];
}

struct RuleKey {
  long long a_fix, b_fix;
  int n;
  bool operator<(const RuleKey& o) const {
    return std::tie(a_fix, b_fix, n) < std::tie(o.a_fix, o.b_fix, o.n);
  }
};

long long fix_of(double v) {
  return static_cast<long long>(std::llround(v * 1e12));
}

}  // namespace

const QuadratureRule& gauss_jacobi_01(double alpha, double beta, int n) {
  if (!(alpha > -1.0) || !(beta > -1.0))
    throw std::domain_error("gauss_jacobi_01: exponents must exceed -1");
  if (n < 1) throw std::domain_error("gauss_jacobi_01: n >= 1 required");

  static std::mutex mu;
  static std::map<RuleKey, QuadratureRule> cache;
  const RuleKey key{fix_of(alpha), fix_of(beta), n};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  // Map x = (1+t)/2: weight x^alpha (1-x)^beta on (0,1) corresponds to the
  // Jacobi weight (1-t)^beta (1+t)^alpha on [-1,1], scaled by 2^-(a+b+1).
  std::vector<double> t, w;
  jacobi_rule_m11(beta, alpha, n, t, w);
  QuadratureRule rule;
  rule.alpha = alpha;
  rule.beta = beta;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double scale = std::pow(2.0, -(alpha + beta + 1.0));
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = 0.5 * (1.0 + t[i]);
    rule.weights[i] = scale * w[i];
  }
  return cache.emplace(key, std::move(rule)).first->second;
}

namespace {

// Building block shared by every improper integral in the toolkit:
//   int_0^U v^a (1-v)^b (1-Z v)^g dv.
// Layout: a matched-Jacobi panel on [0, U/2], then dyadic panels in s=1-v
// down to the scale where (1-Zv) stops varying, then a final matched panel.
double three_factor_impl(double a, double b, double g, double U, double Z,
                         int n_sing, int n_leg) {
  if (!(U > 0.0) || U > 1.0) throw std::domain_error("three_factor: U in (0,1]");
  if (Z < 0.0 || Z > 1.0) throw std::domain_error("three_factor: Z in [0,1]");
  if (!(a > -1.0) || !(b > -1.0))
    throw std::domain_error("three_factor: endpoint exponent <= -1");
  if (Z == 1.0 && U == 1.0) {
    // merged right endpoint (1-v)^(b+g)
    if (!(b + g > -1.0))
      throw std::domain_error("three_factor: merged exponent <= -1");
    const auto& rule = gauss_jacobi_01(a, b + g, 2 * n_sing);
    return rule.apply([](double) { return 1.0; });
  }

  const double one_minus_Z = 1.0 - Z;
  double total = 0.0;

  // [0, U/2] with the v^a weight; the rest of the integrand is analytic here.
  {
    const auto& rule = gauss_jacobi_01(a, 0.0, n_sing);
    const double h = 0.5 * U;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double v = h * rule.nodes[i];
      acc += rule.weights[i] * std::pow(1.0 - v, b) * std::pow(1.0 - Z * v, g);
    }
    total += acc * std::pow(h, a + 1.0);
  }

  // Dyadic panels in s = 1-v from 1-U/2 down to s_stop; each panel sees at
  // most factor-2 variation in (1-v) and (1-Zv).
  const double s_lo = 1.0 - U;  // 0 when U == 1
  double s_stop;
  if (U == 1.0) {
    s_stop = (Z > 0.5) ? std::max(one_minus_Z, 1e-14) : 0.5;
  } else {
    s_stop = s_lo;
  }

  const auto& leg = gauss_jacobi_01(0.0, 0.0, n_leg);
  double s_hi = 1.0 - 0.5 * U;
  while (s_hi > s_stop * (1.0 + 1e-12)) {
    const double s_next = std::max(s_stop, 0.5 * s_hi);
    // v in [1-s_hi, 1-s_next]
    const double v0 = 1.0 - s_hi, len = s_hi - s_next;
    double acc = 0.0;
    for (std::size_t i = 0; i < leg.nodes.size(); ++i) {
      const double v = v0 + len * leg.nodes[i];
      acc += leg.weights[i] * std::pow(v, a) * std::pow(1.0 - v, b) *
             std::pow(1.0 - Z * v, g);
    }
    total += acc * len;
    s_hi = s_next;
  }

  if (U == 1.0) {
    // Final matched panel: u = (1-v)/s_hi on (0,1) with weight u^b.
    // (1-Zv) = (1-Z) + Z s_hi u varies by at most a factor of 2 here.
    const auto& rule = gauss_jacobi_01(b, 0.0, n_sing);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double u = rule.nodes[i];
      const double v = 1.0 - s_hi * u;
      acc += rule.weights[i] * std::pow(v, a) *
             std::pow(one_minus_Z + Z * s_hi * u, g);
    }
    total += acc * std::pow(s_hi, b + 1.0);
  }
  return total;
}

}  // namespace

double three_factor_integral(double a, double b, double g, double U, double Z) {
  return three_factor_impl(a, b, g, U, Z, 48, 32);
}

double three_factor_integral_refined(double a, double b, double g, double U,
                                     double Z, double* err_estimate) {
  const double coarse = three_factor_impl(a, b, g, U, Z, 48, 32);
  const double fine = three_factor_impl(a, b, g, U, Z, 72, 48);
  if (err_estimate) *err_estimate = std::abs(fine - coarse);
  return fine;
}

}  // namespace hsle
