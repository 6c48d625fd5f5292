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

#include <stdexcept>

namespace hsle {

// Raised when an iteration cap or unstable numeric regime is hit, as
// distinct from a domain violation in the inputs.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameter pair (kappa, nu) of the hypergeometric drift function
//   F(z) = 2F1((2 nu + 4)/kappa, 1 - 4/kappa, (2 nu + 8)/kappa; z),
// restricted to the regime where F is bounded and positive on [0,1]:
// kappa in (4,8) and nu > kappa/2 - 6.
struct HypParams {
  double kappa;
  double nu;

  double a() const { return (2.0 * nu + 4.0) / kappa; }
  double b() const { return 1.0 - 4.0 / kappa; }
  double c() const { return (2.0 * nu + 8.0) / kappa; }

  void validate() const;
};

// log Gamma(x) for x > 0, relative error <= 1e-13.
double ln_gamma(double x);

// Gamma(x) for non-integer x of either sign, split into log-magnitude and
// sign (used by the z -> 1-z connection formula).
struct SignedLogGamma {
  double log_abs;
  int sign;
};
SignedLogGamma signed_ln_gamma(double x);

// Euler Beta function, a, b > 0.
double beta(double a, double b);

// Gauss series evaluation on [0, 1); truncates when a term falls below
// 1e-15 of the partial sum.
double hyp_F_series(const HypParams& p, double z);

// Euler-integral evaluation on [0, 1] via endpoint-matched Gauss-Jacobi
// quadrature; relative error <= 1e-10 for z <= 1 - 1e-6.
double hyp_F_integral(const HypParams& p, double z);

// dF/dz on [0, 1): termwise-differentiated series below the switchover,
// differentiation under the integral sign above it.
double hyp_F_prime(const HypParams& p, double z);

// Residual of the hypergeometric ODE
//   z(1-z)F'' + (c - (a+b+1)z)F' - ab F
// with F'' from central differences of hyp_F_prime. Small on (0,1) by
// construction of F; used as a direct correctness probe.
double ode_residual(const HypParams& p, double z);

// Fast fused evaluator of (F, F') for the SDE hot loop. Uses the direct
// series for z < 0.6 and the (1-z) connection series above, so cost and
// accuracy stay uniform as z -> 1. Constants are precomputed per (kappa,nu).
class HypEval {
 public:
  explicit HypEval(const HypParams& p);

  // z in [0, 1); for nu == -2 returns F = 1, F' = 0 exactly.
  void eval(double z, double& F, double& Fp) const;

  double value(double z) const {
    double F, Fp;
    eval(z, F, Fp);
    return F;
  }

 private:
  double a_, b_, c_;
  bool trivial_;       // nu == -2
  double sigma_;       // c - a - b
  double k1_, k2_;     // connection coefficients (signed)
  double s1c_, s2c_;   // lower parameters of the two 1-z series
};

}  // namespace hsle
