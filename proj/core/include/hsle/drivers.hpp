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

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hsle/loewner.hpp"
#include "hsle/rng.hpp"
#include "hsle/specfun.hpp"

namespace hsle {

// Process parameters of hSLE_kappa(nu) in (H; 0, x, y, inf).
struct HsleParams {
  double kappa;
  double nu;
  double x;
  double y;

  HypParams hyp() const { return {kappa, nu}; }
  // kappa in (4,8), 0 < x < y, nu > kappa/2 - 6 (the regime in which the
  // drift function is defined and the curve hits (y, inf)).
  void validate() const;
  // Additionally nu > -2 (reversibility regime).
  void validate_reversibility() const;
};

// Marked points and weights of an SLE_kappa(rho) process. Positions on the
// right are increasing >= 0, on the left decreasing <= 0; a position equal
// to zero is read as 0^+ / 0^- according to its side.
struct RhoSpec {
  struct Point {
    double pos;
    double weight;
  };
  std::vector<Point> left;
  std::vector<Point> right;

  void validate() const;
};

// Numerical controls of one path simulation.
struct SimControls {
  double dt_max = 0.0;    // capacity step ceiling; 0 = derive from geometry
  double safety_c = 0.01; // dt <= c * gap^2 / kappa near collisions
  double t_max = 0.0;     // capacity horizon; 0 = derive (50 y^2)
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;

  void validate() const;
};

// Fills dt_max = 1e-3 (y-x)^2 and t_max = 50 y^2 where unset.
SimControls resolve_controls(const HsleParams& p, SimControls c);

struct PathFlags {
  bool hit = false;            // y swallowed (tau reached)
  bool incomplete = false;     // t_max reached before any verdict
  bool resolved = false;       // pending hit completed from the conditional
                               // law of the state at t_max
  bool threshold = false;      // rho continuation threshold reached
  bool disc_absorbed = false;  // sentinel half-disc fully swallowed
  bool dt_floored = false;
  bool numerical = false;
};

struct HitSample {
  double tau = std::numeric_limits<double>::quiet_NaN();
  double w_hit = std::numeric_limits<double>::quiet_NaN();
  std::size_t hit_step = 0;  // knot index of the detected hit
  PathFlags flags;
};

// Per-path extras beyond SimControls (plumbing for the experiments).
struct PathOptions {
  // extra boundary points whose flows are tracked, (label, position)
  std::vector<std::pair<std::string, double>> tracked;
  bool keep_marked_flows = true;  // store flow arrays in the record

  // The hitting law is heavy-tailed, so a fraction of paths cannot reach
  // tau within any workable t_max. With this flag such a path draws its
  // hit location from the exact conditional law given the state at t_max
  // (inverting the overshoot martingale in u), instead of being dropped.
  bool resolve_pending = false;

  enum class PostHit { kContinueToTmax, kStop, kUntilDiscAbsorbed };
  PostHit post_hit = PostHit::kContinueToTmax;
  double disc_radius = 1.0;

  bool locate_hit_point = true;

  // collapse tolerance of the force points relative to their scale; the
  // terminal martingale limit sharpens as the collapse is driven deeper
  double collapse_tol_rel = 1e-5;
};

struct SimResult {
  DrivingRecord record;
  HitSample hit;
};

// Generic SDE state shared by the hSLE and SLE_kappa(rho) steppers.
struct SdeState {
  double t = 0.0;
  double w = 0.0;
  double dt_prev = std::numeric_limits<double>::infinity();
  struct ForcePoint {
    double v;
    double weight;
    int side;    // +1 right, -1 left
    bool live;   // not yet flagged swallowed
    double tol;  // absolute collapse tolerance (gap below it = swallowed)
  };
  std::vector<ForcePoint> points;
  bool dt_floored = false;
};

// dt = min(dt_max, c * min_i (W - V_i)^2 / kappa) over live force points;
// the stepping loop additionally clamps growth to 4x the previous step.
double adaptive_dt(const SdeState& s, double kappa, const SimControls& c);

// One adaptive Euler-Maruyama step of the hSLE driving SDE; `normal` is the
// standard normal driving the step (reused across rejection halvings).
// state.points = {x-point, y-point}. Returns the dt taken.
double step_hsle(SdeState& s, double normal, const HsleParams& p,
                 const SimControls& c, const HypEval& F);

// Same for SLE_kappa(rho): drift sum_i rho_i / (W - V_i).
double step_rho(SdeState& s, double normal, double kappa,
                const SimControls& c);

SdeState make_hsle_state(const HsleParams& p, double collapse_tol_rel = 1e-5);
SdeState make_rho_state(const RhoSpec& spec, double kappa,
                        const SimControls& c, double collapse_tol_rel = 1e-5);

// Full hSLE path: hSLE SDE until y is swallowed (tau), standard SLE after,
// with hit location by flow bisection. RNG stream keyed by
// (controls.seed, controls.path_index).
SimResult simulate_hsle(const HsleParams& p, const SimControls& c);
SimResult simulate_hsle(const HsleParams& p, const SimControls& c,
                        const PathOptions& opt);

struct RhoOptions {
  std::vector<std::pair<std::string, double>> tracked;
  bool keep_marked_flows = true;
  // stop once the force point with this label is swallowed ("r1", "r2", ...
  // by default; see simulate_rho for the labeling)
  std::string stop_on_swallow;
  double collapse_tol_rel = 1e-5;
};

struct RhoResult {
  DrivingRecord record;
  PathFlags flags;
  double stop_time = 0.0;
  std::size_t stop_step = 0;
};

// Force points are labeled l1.. (left, inward out) and r1.. (right).
RhoResult simulate_rho(double kappa, const RhoSpec& spec, const SimControls& c);
RhoResult simulate_rho(double kappa, const RhoSpec& spec, const SimControls& c,
                       const RhoOptions& opt);

// eta(tau): supremum of u > y swallowed in the same batch as y, located by
// bisection on replayed flows; resolution 1e-4 * y.
double locate_hit(const DrivingRecord& rec, const HsleParams& p);

// Overshoot martingale N_t(w) evaluated from instantaneous state values,
// N = J(1/A, Z)/J(1, Z) with A = (V_w - W)/(V_y - W); equals the
// probability that the hit lands beyond w given the present state.
double overshoot_from_state(const HypParams& hp, double A, double Z);

// Continues the collapse of y from the given gap state through `levels`
// zoom iterations, re-zeroing clock and frame each level (the SDE only
// sees gap differences, so this is the plain domain Markov property); the
// terminal ratios sharpen far beyond what one clock can resolve.
// Returns {Z, A_1, ..., A_m} for the probe gaps gw.
std::vector<double> deep_collapse_ratios(const HsleParams& p, double gx,
                                         double gy,
                                         const std::vector<double>& gw,
                                         std::uint64_t seed,
                                         std::uint64_t stream,
                                         int levels = 2);

}  // namespace hsle
