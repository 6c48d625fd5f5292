/*
 * Copyright 2026 The hsle-lab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 */
#include "hsle/drivers.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "hsle/quadrature.hpp"

namespace hsle {

namespace {
constexpr double kDtMin = 1e-14;
constexpr int kMaxHalvings = 60;
}  // namespace

void HsleParams::validate() const {
  HypParams{kappa, nu}.validate();
  if (!(x > 0.0) || !(x < y))
    throw std::domain_error("HsleParams: need 0 < x < y");
}

void HsleParams::validate_reversibility() const {
  validate();
  if (!(nu > -2.0))
    throw std::domain_error("HsleParams: reversibility requires nu > -2");
}

void RhoSpec::validate() const {
  for (std::size_t i = 0; i < right.size(); ++i) {
    if (right[i].pos < 0.0)
      throw std::domain_error("RhoSpec: right positions must be >= 0");
    if (i > 0 && !(right[i].pos > right[i - 1].pos))
      throw std::domain_error("RhoSpec: right positions must increase");
  }
  for (std::size_t i = 0; i < left.size(); ++i) {
    if (left[i].pos > 0.0)
      throw std::domain_error("RhoSpec: left positions must be <= 0");
    if (i > 0 && !(left[i].pos < left[i - 1].pos))
      throw std::domain_error("RhoSpec: left positions must decrease");
  }
}

void SimControls::validate() const {
  if (!(safety_c > 0.0) || safety_c > 0.1)
    throw std::domain_error("SimControls: safety_c must lie in (0, 0.1]");
  if (dt_max < 0.0 || t_max < 0.0)
    throw std::domain_error("SimControls: negative dt_max or t_max");
}

SimControls resolve_controls(const HsleParams& p, SimControls c) {
  if (c.dt_max == 0.0) c.dt_max = 1e-3 * (p.y - p.x) * (p.y - p.x);
  if (c.t_max == 0.0) c.t_max = 50.0 * p.y * p.y;
  c.validate();
  return c;
}

double adaptive_dt(const SdeState& s, double kappa, const SimControls& c) {
  double dt = c.dt_max;
  for (const auto& pt : s.points) {
    if (!pt.live) continue;
    const double gap = std::abs(s.w - pt.v);
    const double cap = c.safety_c * gap * gap / kappa;
    if (cap < dt) dt = cap;
  }
  return std::max(dt, kDtMin);
}

namespace {

struct DriftCtx {
  double kappa;
  bool active = true;      // false after tau: standard SLE, empty dt rule
  bool hsle = false;
  const HypEval* F = nullptr;
};

struct StepInfo {
  double w_old;
  double w_new;
  double dt_eff;
  double eps;
};

// One adaptive EM step of dW = drift dt + sqrt(kappa) dB with exact slit
// updates of the force points. The supplied normal is reused across
// rejection halvings, so the stream consumption per accepted step is fixed.
StepInfo engine_step(SdeState& s, double normal, const SimControls& c,
                     const DriftCtx& ctx, NormalStream* bridge_rng) {
  double dt = ctx.active ? adaptive_dt(s, ctx.kappa, c) : c.dt_max;
  if (dt > 4.0 * s.dt_prev) dt = 4.0 * s.dt_prev;
  // floor against both the hard minimum and the resolution of the clock
  // (an increment below one ulp of t would freeze the capacity variable)
  const double dt_res = std::max(kDtMin, 8.0 * 2.23e-16 * s.t);
  if (dt <= dt_res) {
    dt = dt_res;
    s.dt_floored = true;
  }

  double drift = 0.0;
  if (ctx.active) {
    for (const auto& pt : s.points)
      if (pt.weight != 0.0) drift += pt.weight / (s.w - pt.v);
    if (ctx.hsle) {
      const double gx = s.points[0].v - s.w;
      const double gy = s.points[1].v - s.w;
      double z = gx / gy;
      if (z < 0.0) z = 0.0;
      if (z > 1.0 - 1e-16) z = 1.0 - 1e-16;
      double f, fp;
      ctx.F->eval(z, f, fp);
      drift -= ctx.kappa * (fp / f) * (s.points[1].v - s.points[0].v) / (gy * gy);
    }
  }

  double w_new = 0.0, t_new = 0.0, dt_eff = 0.0;
  for (int tries = 0;; ++tries) {
    const double noise = std::sqrt(ctx.kappa * dt) * normal;
    w_new = s.w + drift * dt + noise;
    t_new = s.t + dt;
    dt_eff = t_new - s.t;
    bool ok = true;
    for (const auto& pt : s.points) {
      if (!pt.live) continue;
      const double mid = 0.5 * (s.w + w_new);
      const double nv = slit_step(pt.v, mid, dt_eff);
      if (pt.side > 0 ? (nv < w_new) : (nv > w_new)) {
        ok = false;
        break;
      }
    }
    if (ok) break;
    if (tries >= kMaxHalvings)
      throw numerical_error("engine_step: step rejected at minimal dt");
    dt *= 0.5;
  }

  const double w_old = s.w;
  std::array<double, 8> g_before{};
  for (std::size_t i = 0; i < s.points.size() && i < 8; ++i)
    g_before[i] = std::abs(w_old - s.points[i].v);
  for (auto& pt : s.points)
    pt.v = flow_step(pt.v, pt.side > 0, w_old, w_new, dt_eff);
  s.w = w_new;
  s.t = t_new;
  s.dt_prev = dt;

  const double eps = swallow_eps(ctx.kappa, dt_eff);
  // gaps cannot be resolved below the slit width of one floored step, so
  // the flag tolerance degrades gracefully when the dt floor binds
  for (auto& pt : s.points) {
    const double flag_tol = std::max(pt.tol, 5.0 * std::sqrt(dt_eff));
    if (pt.live && std::abs(pt.v - s.w) < flag_tol) pt.live = false;
  }

  // Brownian-bridge crossing test: the continuous gap may have dipped to
  // the collapse tolerance inside the step even though both endpoint gaps
  // sit above it. One uniform is consumed only when the probability is
  // non-negligible, so stream use stays path-deterministic.
  if (bridge_rng) {
    for (std::size_t i = 0; i < s.points.size() && i < 8; ++i) {
      auto& pt = s.points[i];
      if (!pt.live) continue;
      const double a = g_before[i] - pt.tol;
      const double b = std::abs(s.w - pt.v) - pt.tol;
      if (a <= 0.0 || b <= 0.0) {
        pt.live = false;
        continue;
      }
      const double ex = 2.0 * a * b / (ctx.kappa * dt_eff);
      if (ex < 27.0) {  // p_cross > ~2e-12
        if (bridge_rng->next_uniform() < std::exp(-ex)) pt.live = false;
      }
    }
  }

  return {w_old, w_new, dt_eff, eps};
}

}  // namespace

double step_hsle(SdeState& s, double normal, const HsleParams& p,
                 const SimControls& c, const HypEval& F) {
  DriftCtx ctx{p.kappa, true, true, &F};
  return engine_step(s, normal, c, ctx, nullptr).dt_eff;
}

double step_rho(SdeState& s, double normal, double kappa,
                const SimControls& c) {
  DriftCtx ctx{kappa, true, false, nullptr};
  return engine_step(s, normal, c, ctx, nullptr).dt_eff;
}

namespace {

double scale_floor_of(const std::vector<SdeState::ForcePoint>& pts) {
  double m = 0.0;
  for (const auto& pt : pts) m = std::max(m, std::abs(pt.v));
  return std::max(1e-2 * m, 1e-12);
}

void assign_tols(SdeState& s, double rel) {
  const double floor = scale_floor_of(s.points);
  for (auto& pt : s.points)
    pt.tol = rel * std::max(std::abs(pt.v), floor);
}
}  // namespace

SdeState make_hsle_state(const HsleParams& p, double collapse_tol_rel) {
  p.validate();
  SdeState s;
  s.points.push_back({p.x, p.nu + 2.0, +1, true, 0.0});
  s.points.push_back({p.y, -(p.nu + 2.0), +1, true, 0.0});
  assign_tols(s, collapse_tol_rel);
  return s;
}

SdeState make_rho_state(const RhoSpec& spec, double kappa,
                        const SimControls& c, double collapse_tol_rel) {
  (void)kappa;
  (void)c;
  spec.validate();
  SdeState s;
  double scale = 1.0;
  for (const auto& pt : spec.right) scale = std::max(scale, std::abs(pt.pos));
  for (const auto& pt : spec.left) scale = std::max(scale, std::abs(pt.pos));
  const double offset = 1e-6 * scale;
  for (const auto& pt : spec.left)
    s.points.push_back(
        {pt.pos == 0.0 ? -offset : pt.pos, pt.weight, -1, true, 0.0});
  for (const auto& pt : spec.right)
    s.points.push_back(
        {pt.pos == 0.0 ? +offset : pt.pos, pt.weight, +1, true, 0.0});
  assign_tols(s, collapse_tol_rel);
  return s;
}

double overshoot_from_state(const HypParams& hp, double A, double Z) {
  const double k = hp.kappa, nu = hp.nu;
  const double a = -4.0 / k;
  const double b = (2.0 * nu + 12.0 - 2.0 * k) / k;
  const double g = -(2.0 * nu + 4.0) / k;
  if (A < 1.0) A = 1.0;
  if (Z < 0.0) Z = 0.0;
  if (Z > 1.0 - 1e-15) Z = 1.0 - 1e-15;
  const double num = three_factor_integral(a, b, g, 1.0 / A, Z);
  const double den = three_factor_integral(a, b, g, 1.0, Z);
  double n = num / den;
  if (n < 0.0) n = 0.0;
  if (n > 1.0) n = 1.0;
  return n;
}

namespace {

// Internal tracked point (marked flow or sentinel), updated with the same
// flow_step as everything else.
struct TrackedPt {
  std::string label;
  double z0;
  double v;
  bool right;
  std::optional<std::size_t> swallow_step;
  std::optional<std::size_t> closest_step;
  double closest_gap = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  bool keep_history;
};

// Once every sentinel on the circle |z| = r is engulfed by the hull, no
// later trace point can cross the circle. Arc points are declared absorbed
// when their image height collapses; the endpoints +-r are watched through
// the merging of a straddling pair of real flows (a swallowed interval's
// flows collapse onto each other, and the batch floor makes the collapse
// exact in floating point).
struct Sentinels {
  std::vector<std::complex<double>> pts;
  std::vector<bool> absorbed;
  double rp_lo = 0.0, rp_hi = 0.0;  // pair around +r
  double lp_lo = 0.0, lp_hi = 0.0;  // pair around -r
  bool left_done = false, right_done = false;
  double r = 1.0;

  static constexpr double kPairGap = 1e-4;
  static constexpr double kImAbsorbed = 2e-3;

  void init(double radius) {
    r = radius;
    pts.clear();
    absorbed.clear();
    for (int k = 1; k <= 7; ++k) {
      const double th = 3.14159265358979323846 * k / 8.0;
      pts.emplace_back(radius * std::cos(th), radius * std::sin(th));
      absorbed.push_back(false);
    }
    rp_lo = radius * (1.0 - kPairGap);
    rp_hi = radius * (1.0 + kPairGap);
    lp_lo = -rp_hi;
    lp_hi = -rp_lo;
  }

  void update(const StepInfo& si, double w_now) {
    (void)w_now;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (absorbed[i]) continue;
      pts[i] = complex_flow_step(pts[i], si.w_old, si.w_new, si.dt_eff);
      if (pts[i].imag() < kImAbsorbed * r) absorbed[i] = true;
    }
    if (!right_done) {
      rp_lo = flow_step(rp_lo, true, si.w_old, si.w_new, si.dt_eff);
      rp_hi = flow_step(rp_hi, true, si.w_old, si.w_new, si.dt_eff);
      if (rp_hi - rp_lo < 1e-10 * r) right_done = true;
    }
    if (!left_done) {
      lp_lo = flow_step(lp_lo, false, si.w_old, si.w_new, si.dt_eff);
      lp_hi = flow_step(lp_hi, false, si.w_old, si.w_new, si.dt_eff);
      if (lp_hi - lp_lo < 1e-10 * r) left_done = true;
    }
  }

  bool all_absorbed() const {
    if (!left_done || !right_done) return false;
    for (bool a : absorbed)
      if (!a) return false;
    return true;
  }
};

struct RecordKeeper {
  DrivingRecord rec;
  std::vector<TrackedPt> tracked;
  bool keep_flows;

  RecordKeeper(double kappa, bool keep, double tol_floor, double rel)
      : keep_flows(keep) {
    rec.kappa = kappa;
    rec.swallow_rel = rel;
    rec.tol_floor = tol_floor;
    rec.times.push_back(0.0);
    rec.w.push_back(0.0);
  }

  void add(const std::string& label, double z0, bool keep_hist) {
    TrackedPt tp;
    tp.label = label;
    tp.z0 = z0;
    tp.v = z0;
    tp.right = z0 >= 0.0;
    tp.keep_history = keep_hist;
    if (keep_hist) tp.history.push_back(z0);
    tracked.push_back(std::move(tp));
  }

  TrackedPt* find(const std::string& label) {
    for (auto& t : tracked)
      if (t.label == label) return &t;
    return nullptr;
  }

  void push(const SdeState& s, const StepInfo& si) {
    rec.times.push_back(s.t);
    rec.w.push_back(s.w);
    for (auto& t : tracked) {
      t.v = flow_step(t.v, t.right, si.w_old, si.w_new, si.dt_eff);
      const double gap = std::abs(t.v - s.w);
      if (!t.swallow_step && gap < si.eps)
        t.swallow_step = rec.times.size() - 1;
      if (gap < t.closest_gap) {
        t.closest_gap = gap;
        t.closest_step = rec.times.size() - 1;
      }
      if (t.keep_history) t.history.push_back(t.v);
    }
  }

  void finalize() {
    for (auto& t : tracked) {
      DrivingRecord::MarkedFlow mf;
      mf.label = t.label;
      mf.z0 = t.z0;
      mf.swallow_step = t.swallow_step;
      mf.closest_step = t.closest_step;
      mf.closest_gap = t.closest_gap;
      if (t.keep_history && keep_flows) mf.v = std::move(t.history);
      rec.marked.push_back(std::move(mf));
    }
  }
};

}  // namespace

SimResult simulate_hsle(const HsleParams& p, const SimControls& c) {
  return simulate_hsle(p, c, PathOptions{});
}

SimResult simulate_hsle(const HsleParams& p, const SimControls& controls,
                        const PathOptions& opt) {
  p.validate();
  const SimControls c = resolve_controls(p, controls);
  const HypEval F(p.hyp());
  SdeState s = make_hsle_state(p, opt.collapse_tol_rel);
  NormalStream rng(c.seed, c.path_index);

  RecordKeeper rk(p.kappa, opt.keep_marked_flows, scale_floor_of(s.points),
                  opt.collapse_tol_rel);
  for (const auto& [label, z0] : opt.tracked) rk.add(label, z0, true);

  Sentinels sent;
  const bool disc = opt.post_hit == PathOptions::PostHit::kUntilDiscAbsorbed;
  if (disc) sent.init(opt.disc_radius);

  SimResult out;
  DriftCtx ctx{p.kappa, true, true, &F};
  std::size_t step_count = 0;

  std::vector<std::vector<double>> fp_hist(2);
  std::optional<std::size_t> fp_swallow[2];
  if (opt.keep_marked_flows)
    for (int i = 0; i < 2; ++i) fp_hist[i].push_back(s.points[i].v);
  auto note_fp = [&](std::size_t knot) {
    for (int i = 0; i < 2; ++i) {
      if (opt.keep_marked_flows) fp_hist[i].push_back(s.points[i].v);
      if (!fp_swallow[i] && !s.points[i].live) fp_swallow[i] = knot;
    }
  };

  try {
    while (true) {
      if (s.t >= c.t_max) {
        out.hit.flags.incomplete = true;
        break;
      }
      const StepInfo si = engine_step(s, rng.next(), c, ctx, &rng);
      ++step_count;
      rk.push(s, si);
      note_fp(rk.rec.times.size() - 1);
      if (disc) sent.update(si, s.w);

      if (!s.points[1].live) {  // y swallowed: tau reached
        out.hit.flags.hit = true;
        out.hit.tau = s.t;
        out.hit.hit_step = rk.rec.times.size() - 1;
        break;
      }
    }
    (void)step_count;

    if (out.hit.flags.hit && opt.post_hit != PathOptions::PostHit::kStop) {
      ctx.active = false;  // standard SLE continuation
      while (s.t < c.t_max) {
        if (disc && sent.all_absorbed()) {
          out.hit.flags.disc_absorbed = true;
          break;
        }
        const StepInfo si = engine_step(s, rng.next(), c, ctx, &rng);
        rk.push(s, si);
        note_fp(rk.rec.times.size() - 1);
        if (disc) sent.update(si, s.w);
      }
      if (disc && sent.all_absorbed()) out.hit.flags.disc_absorbed = true;
    }
  } catch (const numerical_error&) {
    out.hit.flags.numerical = true;
  }

  out.hit.flags.dt_floored = s.dt_floored;
  rk.finalize();
  out.record = std::move(rk.rec);
  {
    std::vector<DrivingRecord::MarkedFlow> fps(2);
    fps[0].label = "x";
    fps[0].z0 = p.x;
    fps[1].label = "y";
    fps[1].z0 = p.y;
    for (int i = 0; i < 2; ++i) {
      fps[i].swallow_step = fp_swallow[i];
      if (opt.keep_marked_flows) fps[i].v = std::move(fp_hist[i]);
    }
    out.record.marked.insert(out.record.marked.begin(),
                             std::make_move_iterator(fps.begin()),
                             std::make_move_iterator(fps.end()));
  }
  if (out.hit.flags.hit && opt.locate_hit_point)
    out.hit.w_hit = locate_hit(out.record, p);

  if (out.hit.flags.incomplete && opt.resolve_pending &&
      !out.hit.flags.numerical) {
    // Complete the pending hit from its conditional law: solve
    // 1 - N_t(u) = q for u with one fresh uniform from the path stream.
    const double q = rng.next_uniform();
    const std::size_t k = out.record.steps();
    const double W = out.record.w[k];
    const double gy = flow_value_at(out.record, p.y, k) - W;
    const double Z = (flow_value_at(out.record, p.x, k) - W) / gy;
    const auto below_prob = [&](double u) {
      const double A = (flow_value_at(out.record, u, k) - W) / gy;
      return 1.0 - overshoot_from_state(p.hyp(), A, Z);
    };
    double lo = p.y, hi = 2.0 * p.y;
    int grow = 0;
    while (below_prob(hi) < q) {
      lo = hi;
      hi *= 4.0;
      if (++grow > 480 || hi > 1e290) break;
    }
    for (int iter = 0; iter < 80 && hi - lo > 1e-9 * hi; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (below_prob(mid) < q ? lo : hi) = mid;
    }
    out.hit.w_hit = 0.5 * (lo + hi);
    out.hit.flags.resolved = true;
  }
  return out;
}

RhoResult simulate_rho(double kappa, const RhoSpec& spec,
                       const SimControls& c) {
  return simulate_rho(kappa, spec, c, RhoOptions{});
}

RhoResult simulate_rho(double kappa, const RhoSpec& spec,
                       const SimControls& controls, const RhoOptions& opt) {
  spec.validate();
  SimControls c = controls;
  if (c.dt_max == 0.0 || c.t_max == 0.0)
    throw std::domain_error("simulate_rho: dt_max and t_max must be set");
  c.validate();

  SdeState s = make_rho_state(spec, kappa, c, opt.collapse_tol_rel);
  NormalStream rng(c.seed, c.path_index);

  RecordKeeper rk(kappa, opt.keep_marked_flows, scale_floor_of(s.points),
                  opt.collapse_tol_rel);
  std::vector<std::string> labels(s.points.size());
  {
    std::size_t nl = spec.left.size();
    for (std::size_t i = 0; i < nl; ++i) labels[i] = "l" + std::to_string(i + 1);
    for (std::size_t i = nl; i < s.points.size(); ++i)
      labels[i] = "r" + std::to_string(i - nl + 1);
  }
  int stop_idx = -1;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == opt.stop_on_swallow) stop_idx = static_cast<int>(i);
  for (const auto& [label, z0] : opt.tracked) rk.add(label, z0, true);

  RhoResult out;
  DriftCtx ctx{kappa, true, false, nullptr};

  // force-point flow histories and swallow steps
  std::vector<std::vector<double>> fp_hist(s.points.size());
  std::vector<std::optional<std::size_t>> fp_swallow(s.points.size());
  if (opt.keep_marked_flows)
    for (std::size_t i = 0; i < s.points.size(); ++i)
      fp_hist[i].push_back(s.points[i].v);

  auto threshold_reached = [&]() {
    // largest glued prefix per side with weight sum <= -2
    const std::size_t nl = spec.left.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < nl; ++i) {
      if (s.points[i].live) break;
      sum += s.points[i].weight;
      if ((i + 1 == nl || s.points[i + 1].live) && sum <= -2.0 + 1e-12)
        return true;
    }
    sum = 0.0;
    for (std::size_t i = nl; i < s.points.size(); ++i) {
      if (s.points[i].live) break;
      sum += s.points[i].weight;
      if ((i + 1 == s.points.size() || s.points[i + 1].live) &&
          sum <= -2.0 + 1e-12)
        return true;
    }
    return false;
  };

  try {
    while (true) {
      if (s.t >= c.t_max) {
        out.flags.incomplete = true;
        break;
      }
      const StepInfo si = engine_step(s, rng.next(), c, ctx, &rng);
      rk.push(s, si);
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        if (opt.keep_marked_flows) fp_hist[i].push_back(s.points[i].v);
        if (!fp_swallow[i] && !s.points[i].live)
          fp_swallow[i] = rk.rec.times.size() - 1;
      }
      if (stop_idx >= 0 && !s.points[stop_idx].live) {
        out.flags.hit = true;
        break;
      }
      if (threshold_reached()) {
        out.flags.threshold = true;
        break;
      }
    }
  } catch (const numerical_error&) {
    out.flags.numerical = true;
  }

  out.flags.dt_floored = s.dt_floored;
  out.stop_time = s.t;
  rk.finalize();
  out.record = std::move(rk.rec);
  out.stop_step = out.record.steps();
  // prepend force-point flows as marked entries
  std::vector<DrivingRecord::MarkedFlow> fps;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    DrivingRecord::MarkedFlow mf;
    mf.label = labels[i];
    mf.z0 = fp_hist[i].empty() ? s.points[i].v : fp_hist[i].front();
    mf.swallow_step = fp_swallow[i];
    if (opt.keep_marked_flows) mf.v = std::move(fp_hist[i]);
    fps.push_back(std::move(mf));
  }
  out.record.marked.insert(out.record.marked.begin(),
                           std::make_move_iterator(fps.begin()),
                           std::make_move_iterator(fps.end()));
  return out;
}

std::vector<double> deep_collapse_ratios(const HsleParams& p, double gx,
                                         double gy,
                                         const std::vector<double>& gw,
                                         std::uint64_t seed,
                                         std::uint64_t stream, int levels) {
  const HypEval F(p.hyp());
  NormalStream rng(seed, stream);
  SdeState s;
  s.points.push_back({gx, p.nu + 2.0, +1, true, 0.0});
  s.points.push_back({gy, -(p.nu + 2.0), +1, true, 0.0});
  for (double g : gw) s.points.push_back({g, 0.0, +1, true, 0.0});
  DriftCtx ctx{p.kappa, true, true, &F};
  SimControls c;
  c.safety_c = 0.01;
  for (int level = 0; level < levels; ++level) {
    // rescale so gaps are O(1): W -> (W - W0)/gy, t -> t/gy^2 (Brownian
    // scaling leaves the law invariant and restores full resolution)
    const double shift = s.w;
    const double gy0 = s.points[1].v - shift;
    if (!(gy0 > 0.0)) break;
    const double target = 1e-5;
    for (auto& pt : s.points) {
      pt.v = (pt.v - shift) / gy0;
      pt.tol = target;
      pt.live = pt.v > target;  // pre-glued points stay out of the dt rule
    }
    s.points[1].live = true;
    s.w = 0.0;
    s.t = 0.0;
    s.dt_prev = std::numeric_limits<double>::infinity();
    s.dt_floored = false;
    c.dt_max = 0.01 / p.kappa;
    c.t_max = 1e9;
    long guard = 0;
    while (s.points[1].live && guard++ < 2000000)
      engine_step(s, rng.next(), c, ctx, nullptr);
  }
  std::vector<double> out;
  const double gyf = s.points[1].v - s.w;
  out.push_back((s.points[0].v - s.w) / gyf);
  for (std::size_t i = 2; i < s.points.size(); ++i)
    out.push_back((s.points[i].v - s.w) / gyf);
  return out;
}

double locate_hit(const DrivingRecord& rec, const HsleParams& p) {
  // the y force point's flag marks the hit knot
  std::optional<std::size_t> hit_knot;
  if (const auto* my = rec.find("y"); my && my->swallow_step)
    hit_knot = my->swallow_step;
  if (!hit_knot) {
    // fall back to a replay against y's collapse tolerance
    const double tol = rec.point_tol(p.y);
    double v = p.y;
    for (std::size_t k = 0; k < rec.steps() && !hit_knot; ++k) {
      const double dt = rec.times[k + 1] - rec.times[k];
      v = flow_step(v, true, rec.w[k], rec.w[k + 1], dt);
      if (v - rec.w[k + 1] < tol) hit_knot = k + 1;
    }
  }
  if (!hit_knot)
    throw numerical_error("locate_hit: record has no step swallowing y");
  const std::size_t k = *hit_knot;
  const double wk = rec.w[k];
  // At tau the batch gaps collapse onto y's (their ratios tend to one),
  // while out-of-batch gaps stay macroscopic. The crossing test can flag
  // the hit with y's endpoint gap still a few noise quanta above the
  // tolerance, so the batch threshold tracks the recorded gap.
  const double gap_y = flow_value_at(rec, p.y, k) - wk;
  const double eps_batch =
      std::max(5.0 * rec.point_tol(p.y), 3.0 * gap_y);
  const auto in_batch = [&](double u) {
    return flow_value_at(rec, u, k) - wk < eps_batch;
  };
  double lo = p.y;
  double hi = std::max(2.0 * p.y, p.y + 1.0);
  int grow = 0;
  while (in_batch(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 200)
      throw numerical_error("locate_hit: bisection bracket failure");
  }
  const double tol = 0.5e-4 * p.y;
  while (hi - lo > tol && hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (in_batch(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace hsle
