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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hsle {

// Discretized driving function of a chordal Loewner chain, sampled at
// capacity knots times[0..n], plus optionally recorded boundary flows of
// tracked points. Flows replayed from (times, w) reproduce the recorded
// ones bit for bit: each step applies the exact vertical-slit update with
// the midpoint driving value.
struct DrivingRecord {
  std::vector<double> times;  // strictly increasing, times[0] = 0
  std::vector<double> w;      // driving values at the knots, w[0] = 0

  struct MarkedFlow {
    std::string label;
    double z0 = 0.0;
    std::vector<double> v;  // same length as times (may be empty if dropped)
    std::optional<std::size_t> swallow_step;  // first knot with |v-w| < eps
    std::optional<std::size_t> closest_step;  // knot of the minimal gap
    double closest_gap = std::numeric_limits<double>::infinity();
  };
  std::vector<MarkedFlow> marked;

  double kappa = 6.0;       // sets the per-step noise quantum
  double swallow_rel = 1e-5;  // absolute collapse tolerance, relative to a
  double tol_floor = 1e-2;    // point's own scale (floored)

  // Collapse tolerance of a point initially at z0: flows of the SDE's
  // force points are declared swallowed below this gap.
  double point_tol(double z0) const {
    return swallow_rel * std::max(std::abs(z0), tol_floor);
  }

  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }

  const MarkedFlow* find(const std::string& label) const {
    for (const auto& m : marked)
      if (m.label == label) return &m;
    return nullptr;
  }
};

// Geometric trace of the chain: polyline in the closed upper half-plane
// with the half-plane capacity of each vertex.
struct Trace {
  std::vector<std::complex<double>> points;
  std::vector<double> capacities;
};

// Exact one-step update of the Loewner flow dV = 2 dt / (V - W) under
// piecewise-constant driving w_mid: returns
//   w_mid + sign(v - w_mid) sqrt((v - w_mid)^2 + 4 dt).
double slit_step(double v, double w_mid, double dt);

// Tracked-point update used identically by the SDE drivers and by every
// replay: slit_step with the midpoint driving value, with points inside the
// swallowed batch clamped to the tip and floored one slit-width away from
// the new driving value (the image of the extremal real contact).
double flow_step(double v, bool right_side, double w0, double w1, double dt);

// Swallow threshold used everywhere: one step's driving-noise quantum.
inline double swallow_eps(double kappa, double dt) {
  return 10.0 * std::sqrt(kappa * dt);
}

struct FlowResult {
  std::vector<double> values;  // V at every knot, values[0] = z
  std::optional<std::size_t> swallow_index;
};

// Flow a boundary point through the whole record. Right of the driving
// value the flow is floored at W (the image of the rightmost contact),
// symmetrically on the left.
FlowResult flow_point(const DrivingRecord& rec, double z);

// Flow values up to and including knot k_end only.
double flow_value_at(const DrivingRecord& rec, double z, std::size_t k_end);

// Trace point at a single knot: the tip preimage evaluated by composing
// inverse slit maps from step k down to 0, regularized 1e-8 above R.
std::complex<double> trace_point(const DrivingRecord& rec, std::size_t k);

// Trace points at several knots in one interleaved backward sweep; the
// independent inverse-map chains hide the sqrt latency, so this runs
// several times faster than one trace_point call per knot.
std::vector<std::complex<double>> trace_points(const DrivingRecord& rec,
                                               std::vector<std::size_t> knots);

// Full trace subsampled every `every` steps (first and last knots always
// included). Cost O(n^2 / every).
Trace extract_trace(const DrivingRecord& rec, std::size_t every);

// |flow over [0,n] - flow over [split,n] o flow over [0,split]| at z.
// Identically zero: both sides run the same arithmetic.
double capacity_semigroup_check(const DrivingRecord& rec, std::size_t split,
                                double z);

// Forward slit map of an interior point over one step (branch into H).
std::complex<double> complex_flow_step(std::complex<double> p, double w0,
                                       double w1, double dt);

// CSV round-trip: header "t,w,<labels...>", one row per knot, shortest
// round-trip decimal formatting. A leading "# kappa=..." comment carries
// the threshold scale.
void write_record_csv(const DrivingRecord& rec, std::ostream& os);
DrivingRecord read_record_csv(std::istream& is);

}  // namespace hsle
