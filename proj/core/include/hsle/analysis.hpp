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
#include <limits>

#include "hsle/drivers.hpp"
#include "hsle/loewner.hpp"

namespace hsle {

// Conformally meaningful per-path summaries used for distribution
// comparison between ensembles.
struct Functionals {
  double w_hit = std::numeric_limits<double>::quiet_NaN();
  double theta_min_r = std::numeric_limits<double>::quiet_NaN();
  double theta_max_r = std::numeric_limits<double>::quiet_NaN();
  double max_height = std::numeric_limits<double>::quiet_NaN();
  double tau_capacity = std::numeric_limits<double>::quiet_NaN();
  double leftmost_contact = std::numeric_limits<double>::quiet_NaN();
  bool theta_missing = true;  // trace never met the circle |z| = r
};

// Discrete Frechet distance between two polylines (dynamic programming,
// exact for the given vertex sets).
double curve_distance(const Trace& g1, const Trace& g2);

// Pointwise z -> 1/conj(z); an initial point at the origin is dropped
// (its image is the point at infinity).
Trace apply_inversion(const Trace& tr);

// Crossing angles of the circle |z| = r (by segment-circle intersection,
// plus vertices within one local vertex spacing of the circle) and the
// maximum height of the polyline. w_hit/tau are copied from `hit` when
// given; leftmost_contact comes from tracked left-side flows if present.
Functionals trace_functionals(const Trace& tr, const DrivingRecord& rec,
                              const HsleParams& p, double r,
                              const HitSample* hit = nullptr);

// N_{t_k}(w): probability that the hit lands beyond w given the state at
// knot k, evaluated from the tracked flows of x, y and w in the record.
double mart_N(const HsleParams& p, const DrivingRecord& rec, std::size_t k,
              double w);

// M_{t_k}(z) for z > y: flow-derivative times power-law factors over F(Z);
// V'(z) by central finite differences of replayed flows.
double mart_M(const HsleParams& p, const DrivingRecord& rec, std::size_t k,
              double z);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;  // effective sample count entering the statistic
};

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 l^2).
double kolmogorov_Q(double lambda);

// One-sample KS against a continuous CDF.
KsResult ks_one_sample(std::vector<double> samples,
                       const std::function<double(double)>& cdf);

// Right-censored variant: every path is classified either as a sample
// value <= cap or as a censored observation known to lie above cap; the
// sup runs over (-inf, cap] with the full path count in the denominator.
// Stochastically dominated by the full KS statistic, so standard critical
// values are conservative.
KsResult ks_one_sample_censored(std::vector<double> samples_below_cap,
                                std::size_t n_total,
                                const std::function<double(double)>& cdf,
                                double cap);

// Two-sample KS with effective-n scaling.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Driving record with consecutive steps merged while the driving value
// stays within tol_w and the merged capacity within dt_cap: collision
// grinds collapse to single knots, which makes trace evaluation cheap
// without moving vertices by more than ~tol_w.
DrivingRecord coarsen_for_trace(const DrivingRecord& rec, double tol_w,
                                double dt_cap);

// Trace with vertices adaptively refined near the circle |z| = r and (when
// requested) near the height maximum; the budget caps the number of O(k)
// vertex evaluations. Evaluation runs on a coarsened copy of the record.
struct TraceOptions {
  std::size_t coarse = 256;
  std::size_t budget = 1400;
  bool refine_height = true;
  double coarsen_tol = 1e-3;
};
Trace refined_trace(const DrivingRecord& rec, double r,
                    const TraceOptions& opt = {});

// Largest tracked grid point in `interval` that was genuinely touched:
// swallowed at some step with the trace tip within delta_hit of the point.
// Returns NaN if none. Used by the inversion experiment's secondary check.
double largest_genuine_contact(const DrivingRecord& rec, double lo, double hi,
                               double delta_hit_rel = 1e-2);
double smallest_genuine_contact(const DrivingRecord& rec, double lo, double hi,
                                double delta_hit_rel = 1e-2);

}  // namespace hsle
