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

#include <functional>
#include <vector>

namespace hsle {

// Gauss-Jacobi rule for the weight x^alpha (1-x)^beta on (0,1).
// Sum of weights equals B(alpha+1, beta+1); the rule integrates
// x^alpha (1-x)^beta p(x) exactly for polynomials p of degree <= 2n-1.
struct QuadratureRule {
  std::vector<double> nodes;    // in (0,1), increasing
  std::vector<double> weights;  // positive
  double alpha = 0.0;
  double beta = 0.0;

  template <typename Fn>
  double apply(Fn&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

// Cached, thread-safe construction. alpha, beta > -1.
const QuadratureRule& gauss_jacobi_01(double alpha, double beta, int n);

// I(a,b,g,U,Z) = int_0^U v^a (1-v)^b (1-Z v)^g dv  with 0 < U <= 1,
// a,b > -1, Z in [0,1], g arbitrary (if Z == 1 and U == 1, b+g > -1 is
// required). Endpoint singularities are absorbed into matched Jacobi
// weights; the (1-Zv)^g boundary layer near v=1 is resolved by dyadic
// panels, so accuracy is uniform in Z. Relative error ~1e-12.
double three_factor_integral(double a, double b, double g, double U, double Z);

// Same value computed with ~1.5x nodes everywhere; |difference| serves as
// an error estimate (one refinement step).
double three_factor_integral_refined(double a, double b, double g, double U,
                                     double Z, double* err_estimate = nullptr);

}  // namespace hsle
