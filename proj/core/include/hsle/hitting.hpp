/*
 * Copyright 2026 The hsle-lab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 */
#pragma once

#include <iosfwd>
#include <vector>

#include "hsle/drivers.hpp"

namespace hsle {

// The hitting law of hSLE_kappa(nu) on (y, inf):
//   rho(u) = u^(-4/k) (u-y)^((2nu+12-2k)/k) (u-x)^(-(2nu+4)/k) / I(x,y),
// with I the tail integral from y to infinity of the same expression.
// The tail decays like u^((4-2k)/k), so the law is heavy-tailed with
// 1 - CDF(u) ~ C u^((4-k)/k).

// The normalization I(x, y), computed after the 1/s substitution that maps
// (y, inf) onto (0, 1/y) with Jacobi-type endpoints.
double rho_normalization(const HsleParams& p);

// Density at u > y.
double rho_density(const HsleParams& p, double u);

// CDF at w >= y via the ratio of incomplete to complete tail integrals
// (the E[N_0] route, computed in the 1/u variable).
double rho_cdf(const HsleParams& p, double w);

// Schwarz-Christoffel map with f(y) = 0, f(inf) = 1: ratio of the
// incomplete integral on (y, z) to the full one. The incomplete part is
// computed by direct s-space panels, independent of the rho_cdf route.
double sc_map_f(const HsleParams& p, double z);

// Partition function Z(x, y) = x^((nu+2)/k) y^((k-6-nu)/k) I(x, y):
// scale invariant and symmetric under (x, y) -> (1/y, 1/x).
double partition_Z(double kappa, double nu, double x, double y);

// Tabulated CDF for inverse-transform sampling. The grid extends to u_max
// where 1-CDF < 1e-6; beyond it samples come from the analytic power tail.
struct DensityTable {
  HsleParams params;
  std::vector<double> grid;        // u values, increasing, grid[0] ~ y
  std::vector<double> pdf_values;
  std::vector<double> cdf_values;
  double normalization = 0.0;
  double tail_exponent = 0.0;      // (4-kappa)/kappa
  double tail_coef = 0.0;          // 1-CDF(u) ~ tail_coef * u^tail_exponent

  // Inverse CDF of the uniform draw q in (0,1); bisection on the grid
  // followed by Newton refinement against the exact rho_cdf.
  double sample(double q) const;

  // Inverse restricted to (y, w_cap]: q is scaled by CDF(w_cap).
  double sample_conditional(double q, double w_cap) const;

  void write_csv(std::ostream& os) const;  // u, pdf, cdf (+ f column)
};

DensityTable build_density_table(const HsleParams& p, std::size_t n_grid = 512);

// Inverse-transform sample of the hitting law using a per-parameter cached
// table; consumes exactly one uniform from the stream.
double sample_rho(const HsleParams& p, NormalStream& rng);

}  // namespace hsle
