/*
 * Copyright 2026 The hsle-lab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 */
#include "hsle/hitting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>

#include "hsle/quadrature.hpp"

namespace hsle {

namespace {

struct Exponents {
  double a;  // -4/kappa            (u and 1/u endpoint)
  double b;  // (2nu+12-2kappa)/k   (u-y factor)
  double g;  // -(2nu+4)/kappa      (u-x factor)
};

Exponents exps(const HsleParams& p) {
  return {-4.0 / p.kappa, (2.0 * p.nu + 12.0 - 2.0 * p.kappa) / p.kappa,
          -(2.0 * p.nu + 4.0) / p.kappa};
}

// Complete integral int_0^1 u^a (1-u)^b (1-(x/y)u)^g du, memoized per
// parameter set (it normalizes every quantity in this module).
double cached_complete(const HsleParams& p) {
  struct Key {
    long long k, n, x, y;
    bool operator<(const Key& o) const {
      return std::tie(k, n, x, y) < std::tie(o.k, o.n, o.x, o.y);
    }
  };
  static std::mutex mu;
  static std::map<Key, double> cache;
  const auto fix = [](double v) {
    return static_cast<long long>(std::llround(v * 1e12));
  };
  const Key key{fix(p.kappa), fix(p.nu), fix(p.x), fix(p.y)};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const auto e = exps(p);
  const double val = three_factor_integral(e.a, e.b, e.g, 1.0, p.x / p.y);
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, val).first->second;
}

}  // namespace

double rho_normalization(const HsleParams& p) {
  p.validate();
  const auto e = exps(p);
  // int_y^inf = y^(-a-1) * int_0^1 u^a (1-u)^b (1-(x/y)u)^g du  via u = y/s
  return std::pow(p.y, -(e.a + 1.0)) * cached_complete(p);
}

double rho_density(const HsleParams& p, double u) {
  p.validate();
  if (!(u > p.y)) throw std::domain_error("rho_density: u must exceed y");
  const auto e = exps(p);
  return std::pow(u, e.a) * std::pow(u - p.y, e.b) * std::pow(u - p.x, e.g) /
         rho_normalization(p);
}

double rho_cdf(const HsleParams& p, double w) {
  p.validate();
  if (w < p.y) throw std::domain_error("rho_cdf: w must be >= y");
  if (std::isinf(w)) return 1.0;
  if (w == p.y) return 0.0;
  const auto e = exps(p);
  const double z = p.x / p.y;
  const double num = three_factor_integral(e.a, e.b, e.g, p.y / w, z);
  double c = 1.0 - num / cached_complete(p);
  if (c < 0.0) c = 0.0;
  if (c > 1.0) c = 1.0;
  return c;
}

namespace {

// Incomplete integral int_y^z s^a (s-y)^b (s-x)^g ds by direct panels in
// s - y: a matched u^b panel at the singular end, then doubling panels so
// every smooth factor varies by a bounded ratio per panel.
double incomplete_tail_integral(const HsleParams& p, double z) {
  const auto e = exps(p);
  const double span = z - p.y;
  if (span <= 0.0) return 0.0;
  const auto& sing = gauss_jacobi_01(e.b, 0.0, 48);
  const auto& leg = gauss_jacobi_01(0.0, 0.0, 32);
  // panel [0, d0] in s-y with the u^b weight, d0 small against y
  const double d0 = std::min(span, 0.25 * p.y);
  double total = 0.0;
  {
    double acc = 0.0;
    for (std::size_t i = 0; i < sing.nodes.size(); ++i) {
      const double s = p.y + d0 * sing.nodes[i];
      acc += sing.weights[i] * std::pow(s, e.a) * std::pow(s - p.x, e.g);
    }
    total += acc * std::pow(d0, e.b + 1.0);
  }
  // doubling panels [d, 2d] in s-y up to span
  double d = d0;
  while (d < span * (1.0 - 1e-14)) {
    const double hi = std::min(2.0 * d, span);
    const double len = hi - d;
    double acc = 0.0;
    for (std::size_t i = 0; i < leg.nodes.size(); ++i) {
      const double s = p.y + d + len * leg.nodes[i];
      acc += leg.weights[i] * std::pow(s, e.a) * std::pow(s - p.y, e.b) *
             std::pow(s - p.x, e.g);
    }
    total += acc * len;
    d = hi;
  }
  return total;
}

}  // namespace

double sc_map_f(const HsleParams& p, double z) {
  p.validate();
  if (z < p.y) throw std::domain_error("sc_map_f: z must be >= y");
  if (std::isinf(z)) return 1.0;
  if (z == p.y) return 0.0;
  const double f = incomplete_tail_integral(p, z) / rho_normalization(p);
  return std::min(f, 1.0);
}

double partition_Z(double kappa, double nu, double x, double y) {
  const HsleParams p{kappa, nu, x, y};
  p.validate();
  return std::pow(x, (nu + 2.0) / kappa) *
         std::pow(y, (kappa - 6.0 - nu) / kappa) * rho_normalization(p);
}

double DensityTable::sample(double q) const {
  if (!(q > 0.0) || !(q < 1.0))
    throw std::domain_error("DensityTable::sample: q must lie in (0,1)");
  const double cdf_last = cdf_values.back();
  if (q > cdf_last) {
    // analytic tail inversion: 1-CDF(u) = tail_coef * u^tail_exponent
    return std::pow((1.0 - q) / tail_coef, 1.0 / tail_exponent);
  }
  auto it = std::lower_bound(cdf_values.begin(), cdf_values.end(), q);
  std::size_t j = static_cast<std::size_t>(it - cdf_values.begin());
  if (j == 0) j = 1;
  double lo = grid[j - 1], hi = grid[j];
  double w = 0.5 * (lo + hi);
  // Newton against the exact CDF with bisection safeguard
  for (int iter = 0; iter < 60; ++iter) {
    const double c = rho_cdf(params, w);
    (c < q ? lo : hi) = w;
    const double pdf = rho_density(params, w);
    double next = (pdf > 0.0) ? w - (c - q) / pdf : 0.5 * (lo + hi);
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - w) < 1e-12 * std::max(1.0, w)) return next;
    w = next;
  }
  return w;
}

double DensityTable::sample_conditional(double q, double w_cap) const {
  const double c_cap = rho_cdf(params, w_cap);
  return sample(q * c_cap);
}

void DensityTable::write_csv(std::ostream& os) const {
  os << "u,pdf,cdf,f\n";
  char buf[32];
  const auto put = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, res.ptr - buf);
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    put(grid[i]);
    os << ",";
    put(pdf_values[i]);
    os << ",";
    put(cdf_values[i]);
    os << ",";
    put(sc_map_f(params, grid[i]));
    os << "\n";
  }
}

DensityTable build_density_table(const HsleParams& p, std::size_t n_grid) {
  p.validate();
  DensityTable t;
  t.params = p;
  t.normalization = rho_normalization(p);
  t.tail_exponent = (4.0 - p.kappa) / p.kappa;

  // pin the tail coefficient at a moderate anchor, then extend the grid to
  // where the tail mass drops below 1e-6
  const double anchor = 64.0 * p.y;
  t.tail_coef = (1.0 - rho_cdf(p, anchor)) * std::pow(anchor, -t.tail_exponent);
  const double u_max =
      std::pow(1e-6 / t.tail_coef, 1.0 / t.tail_exponent);

  const double r_lo = 1e-7 * p.y;
  const double r_hi = std::max(u_max - p.y, 2.0 * p.y);
  const double ratio = std::log(r_hi / r_lo);
  t.grid.resize(n_grid);
  t.pdf_values.resize(n_grid);
  t.cdf_values.resize(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) {
    const double fr = static_cast<double>(i) / (n_grid - 1);
    const double u = p.y + r_lo * std::exp(ratio * fr);
    t.grid[i] = u;
    t.pdf_values[i] = rho_density(p, u);
    t.cdf_values[i] = rho_cdf(p, u);
  }
  // refresh the tail coefficient from the last grid point for continuity
  t.tail_coef = (1.0 - t.cdf_values.back()) *
                std::pow(t.grid.back(), -t.tail_exponent);
  return t;
}

double sample_rho(const HsleParams& p, NormalStream& rng) {
  struct Key {
    long long k, n, x, y;
    bool operator<(const Key& o) const {
      return std::tie(k, n, x, y) < std::tie(o.k, o.n, o.x, o.y);
    }
  };
  static std::mutex mu;
  static std::map<Key, DensityTable> cache;
  const auto fix = [](double v) {
    return static_cast<long long>(std::llround(v * 1e12));
  };
  const Key key{fix(p.kappa), fix(p.nu), fix(p.x), fix(p.y)};
  const DensityTable* table = nullptr;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_density_table(p)).first;
    table = &it->second;
  }
  return table->sample(rng.next_uniform());
}

}  // namespace hsle
