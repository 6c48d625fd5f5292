/*
 * Copyright 2026 The hsle-lab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 */
#include "hsle/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace hsle {

double curve_distance(const Trace& g1, const Trace& g2) {
  const auto& a = g1.points;
  const auto& b = g2.points;
  if (a.empty() || b.empty())
    throw std::domain_error("curve_distance: empty trace");
  const std::size_t n = a.size(), m = b.size();
  std::vector<double> prev(m), cur(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double d = std::abs(a[0] - b[j]);
    prev[j] = (j == 0) ? d : std::max(prev[j - 1], d);
  }
  for (std::size_t i = 1; i < n; ++i) {
    cur[0] = std::max(prev[0], std::abs(a[i] - b[0]));
    for (std::size_t j = 1; j < m; ++j) {
      const double reach = std::min({prev[j], prev[j - 1], cur[j - 1]});
      cur[j] = std::max(reach, std::abs(a[i] - b[j]));
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

Trace apply_inversion(const Trace& tr) {
  Trace out;
  out.points.reserve(tr.points.size());
  out.capacities.reserve(tr.points.size());
  for (std::size_t i = 0; i < tr.points.size(); ++i) {
    const auto z = tr.points[i];
    if (z == std::complex<double>(0.0, 0.0)) {
      if (i == 0) continue;  // initial point maps to infinity, dropped
      throw numerical_error("apply_inversion: interior point at the origin");
    }
    const double n2 = std::norm(z);
    out.points.emplace_back(z.real() / n2, z.imag() / n2);
    out.capacities.push_back(tr.capacities.empty() ? 0.0 : tr.capacities[i]);
  }
  return out;
}

namespace {

inline double upper_angle(std::complex<double> z) {
  double th = std::atan2(std::max(z.imag(), 0.0), z.real());
  if (th < 0.0) th = 0.0;
  return th;
}

}  // namespace

Functionals trace_functionals(const Trace& tr, const DrivingRecord& rec,
                              const HsleParams& p, double r,
                              const HitSample* hit) {
  (void)p;
  Functionals f;
  if (tr.points.size() < 2)
    throw std::domain_error("trace_functionals: trace too short");
  double tmin = 4.0, tmax = -1.0, hmax = 0.0;
  const std::size_t n = tr.points.size();
  for (std::size_t i = 0; i < n; ++i) {
    hmax = std::max(hmax, tr.points[i].imag());
    // vertex proximity: within one local vertex spacing of the circle,
    // capped at the refined-resolution scale so coarse far-field vertices
    // cannot qualify spuriously
    double spacing = 0.0;
    if (i > 0) spacing = std::abs(tr.points[i] - tr.points[i - 1]);
    if (i + 1 < n)
      spacing = std::max(spacing, std::abs(tr.points[i + 1] - tr.points[i]));
    spacing = std::min(spacing, 0.025 * r);
    if (std::abs(std::abs(tr.points[i]) - r) <= spacing) {
      const double th = upper_angle(tr.points[i]);
      tmin = std::min(tmin, th);
      tmax = std::max(tmax, th);
    }
    if (i + 1 == n) break;
    // segment-circle intersections
    const auto a = tr.points[i];
    const auto d = tr.points[i + 1] - a;
    const double dd = std::norm(d);
    if (dd == 0.0) continue;
    const double pd = a.real() * d.real() + a.imag() * d.imag();
    const double c0 = std::norm(a) - r * r;
    const double disc = pd * pd - dd * c0;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    for (const double s : {(-pd - sq) / dd, (-pd + sq) / dd}) {
      if (s < 0.0 || s > 1.0) continue;
      const double th = upper_angle(a + s * d);
      tmin = std::min(tmin, th);
      tmax = std::max(tmax, th);
    }
  }
  f.max_height = hmax;
  if (tmax >= 0.0) {
    f.theta_min_r = tmin;
    f.theta_max_r = tmax;
    f.theta_missing = false;
  }
  if (hit) {
    f.w_hit = hit->w_hit;
    f.tau_capacity = hit->tau;
  }
  double leftmost = std::numeric_limits<double>::quiet_NaN();
  for (const auto& m : rec.marked)
    if (m.z0 < 0.0 && m.swallow_step)
      if (std::isnan(leftmost) || m.z0 < leftmost) leftmost = m.z0;
  f.leftmost_contact = leftmost;
  return f;
}

double mart_N(const HsleParams& p, const DrivingRecord& rec, std::size_t k,
              double w) {
  if (w < p.y) throw std::domain_error("mart_N: w must be >= y");
  if (k > rec.steps()) throw std::out_of_range("mart_N: knot out of range");
  const DrivingRecord::MarkedFlow* fx = rec.find("x");
  const DrivingRecord::MarkedFlow* fy = rec.find("y");
  const DrivingRecord::MarkedFlow* fw = nullptr;
  for (const auto& m : rec.marked)
    if (m.z0 == w && m.label != "x" && m.label != "y") fw = &m;
  if (!fx || !fy || !fw || fx->v.empty() || fy->v.empty() || fw->v.empty())
    throw std::domain_error("mart_N: flows for x, y, w must be tracked");
  const double W = rec.w[k];
  const double gy = fy->v[k] - W;
  const double A = (fw->v[k] - W) / gy;
  const double Z = (fx->v[k] - W) / gy;
  return overshoot_from_state(p.hyp(), A, Z);
}

double mart_M(const HsleParams& p, const DrivingRecord& rec, std::size_t k,
              double z) {
  if (!(z > p.y)) throw std::domain_error("mart_M: z must exceed y");
  if (k > rec.steps()) throw std::out_of_range("mart_M: knot out of range");
  const double delta = 1e-5 * z;
  const double vm = flow_value_at(rec, z - delta, k);
  const double vp = flow_value_at(rec, z + delta, k);
  const double W = rec.w[k];
  const double dt_k = (k == 0) ? 0.0 : rec.times[k] - rec.times[k - 1];
  if (k > 0 && vm - W < swallow_eps(rec.kappa, dt_k))
    throw numerical_error("mart_M: finite difference straddles swallowed region");
  const double vprime = (vp - vm) / (2.0 * delta);
  const double vz = flow_value_at(rec, z, k);
  const double vx = flow_value_at(rec, p.x, k);
  const double vy = flow_value_at(rec, p.y, k);
  const double kap = p.kappa, nu = p.nu;
  const HypEval F(p.hyp());
  double fz, fpz;
  F.eval((vx - W) / (vy - W), fz, fpz);
  return vprime * std::pow(vz - W, -4.0 / kap) *
         std::pow(vz - vx, -2.0 * (nu + 2.0) / kap) *
         std::pow(vz - vy, -2.0 * (kap - 6.0 - nu) / kap) *
         std::pow(vy - W, (kap - 4.0) / kap) / fz;
}

double kolmogorov_Q(double lambda) {
  if (lambda < 0.18) return 1.0;
  double q = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    q += (j % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  q *= 2.0;
  return std::clamp(q, 0.0, 1.0);
}

namespace {

KsResult ks_from_D(double D, double n_eff) {
  KsResult r;
  r.statistic = D;
  const double sn = std::sqrt(n_eff);
  r.p_value = kolmogorov_Q((sn + 0.12 + 0.11 / sn) * D);
  r.n = static_cast<std::size_t>(n_eff);
  return r;
}

}  // namespace

KsResult ks_one_sample(std::vector<double> samples,
                       const std::function<double(double)>& cdf) {
  return ks_one_sample_censored(std::move(samples), 0, cdf,
                                std::numeric_limits<double>::infinity());
}

KsResult ks_one_sample_censored(std::vector<double> samples,
                                std::size_t n_total,
                                const std::function<double(double)>& cdf,
                                double cap) {
  if (samples.empty())
    throw std::domain_error("ks_one_sample: empty sample");
  for (double s : samples)
    if (std::isnan(s)) throw std::domain_error("ks_one_sample: NaN sample");
  std::sort(samples.begin(), samples.end());
  const std::size_t m = samples.size();
  const std::size_t n = (n_total == 0) ? m : n_total;
  double D = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double F = cdf(samples[i]);
    D = std::max(D, std::abs(F - static_cast<double>(i) / n));
    D = std::max(D, std::abs(static_cast<double>(i + 1) / n - F));
  }
  if (std::isfinite(cap))
    D = std::max(D, std::abs(static_cast<double>(m) / n - cdf(cap)));
  return ks_from_D(D, static_cast<double>(n));
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::domain_error("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t na = a.size(), nb = b.size();
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < na && j < nb) {
    const double x = std::min(a[i], b[j]);
    while (i < na && a[i] <= x) ++i;
    while (j < nb && b[j] <= x) ++j;
    D = std::max(D, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  const double n_eff =
      static_cast<double>(na) * static_cast<double>(nb) / (na + nb);
  return ks_from_D(D, n_eff);
}

DrivingRecord coarsen_for_trace(const DrivingRecord& rec, double tol_w,
                                double dt_cap) {
  DrivingRecord out;
  out.kappa = rec.kappa;
  out.swallow_rel = rec.swallow_rel;
  out.tol_floor = rec.tol_floor;
  const std::size_t n = rec.steps();
  out.times.reserve(n / 4 + 2);
  out.w.reserve(n / 4 + 2);
  out.times.push_back(rec.times[0]);
  out.w.push_back(rec.w[0]);
  std::size_t k = 0;
  while (k < n) {
    double wmin = rec.w[k + 1], wmax = rec.w[k + 1];
    std::size_t j = k + 1;
    while (j < n) {
      const double wn = rec.w[j + 1];
      const double lo = std::min(wmin, wn), hi = std::max(wmax, wn);
      if (hi - lo > tol_w) break;
      if (rec.times[j + 1] - rec.times[k] > dt_cap) break;
      wmin = lo;
      wmax = hi;
      ++j;
    }
    out.times.push_back(rec.times[j]);
    out.w.push_back(rec.w[j]);
    k = j;
  }
  return out;
}

Trace refined_trace(const DrivingRecord& full, double r,
                    const TraceOptions& opt) {
  // merged windows may blur positions by ~tol_w plus sqrt(kappa dt_win);
  // cap the window capacity so the blur stays at the 0.02 r scale
  const DrivingRecord rec =
      coarsen_for_trace(full, opt.coarsen_tol * r, 4e-4 * r * r / full.kappa);
  const std::size_t n = rec.steps();
  const std::size_t coarse = opt.coarse;
  const std::size_t budget = opt.budget;
  std::map<std::size_t, std::complex<double>> pts;
  std::size_t evals = 0;
  const auto eval_batch = [&](std::vector<std::size_t> ks) {
    ks.erase(std::remove_if(ks.begin(), ks.end(),
                            [&](std::size_t k) { return pts.count(k) > 0; }),
             ks.end());
    if (ks.empty()) return;
    const auto vals = trace_points(rec, ks);
    for (std::size_t i = 0; i < ks.size(); ++i) pts.emplace(ks[i], vals[i]);
    evals += ks.size();
  };

  {
    const std::size_t n_coarse = std::min<std::size_t>(coarse, n);
    std::vector<std::size_t> ks;
    for (std::size_t j = 0; j <= n_coarse; ++j)
      ks.push_back((j * n) / std::max<std::size_t>(n_coarse, 1));
    eval_batch(std::move(ks));
  }

  // circle refinement: split adjacent pairs that could reach |z| = r
  const auto near_circle = [&](const std::complex<double>& a,
                               const std::complex<double>& b) {
    const double gap = std::abs(a - b);
    const double da = std::abs(std::abs(a) - r);
    const double db = std::abs(std::abs(b) - r);
    const bool straddle = (std::abs(a) - r) * (std::abs(b) - r) < 0.0;
    return straddle || std::min(da, db) <= gap;
  };
  bool changed = true;
  while (changed && evals < budget) {
    changed = false;
    auto it = pts.begin();
    auto prev = it++;
    std::vector<std::size_t> to_add;
    for (; it != pts.end(); prev = it++) {
      if (it->first - prev->first <= 1) continue;
      if (near_circle(prev->second, it->second))
        to_add.push_back(prev->first + (it->first - prev->first) / 2);
      if (evals + to_add.size() >= budget) break;
    }
    if (!to_add.empty()) {
      eval_batch(std::move(to_add));
      changed = true;
    }
  }

  // height refinement around the running maximum
  for (int round = 0; opt.refine_height && round < 24 && evals < budget;
       ++round) {
    double hmax = 0.0;
    for (const auto& [k, z] : pts) hmax = std::max(hmax, z.imag());
    std::vector<std::size_t> to_add;
    auto it = pts.begin();
    auto prev = it++;
    for (; it != pts.end(); prev = it++) {
      if (it->first - prev->first <= 1) continue;
      const double gap = std::abs(it->second - prev->second);
      if (std::max(prev->second.imag(), it->second.imag()) >= hmax - gap)
        to_add.push_back(prev->first + (it->first - prev->first) / 2);
    }
    if (to_add.empty()) break;
    eval_batch(std::move(to_add));
  }

  Trace tr;
  tr.points.reserve(pts.size());
  tr.capacities.reserve(pts.size());
  for (const auto& [k, z] : pts) {
    tr.points.push_back(z);
    tr.capacities.push_back(rec.times[k]);
  }
  return tr;
}

namespace {

double genuine_contact_scan(const DrivingRecord& rec, double lo, double hi,
                            double delta_hit_rel, bool want_largest) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& m : rec.marked) {
    if (!(m.z0 > lo) || !(m.z0 < hi) || !m.swallow_step) continue;
    if (!std::isnan(best) && (want_largest ? m.z0 <= best : m.z0 >= best))
      continue;
    // confirm at the closest-approach knot, not the first-flag knot
    const std::size_t k = m.closest_step.value_or(*m.swallow_step);
    const auto tip = trace_point(rec, k);
    if (std::abs(tip - std::complex<double>(m.z0, 0.0)) <
        delta_hit_rel * std::abs(m.z0))
      best = m.z0;
  }
  return best;
}

}  // namespace

double largest_genuine_contact(const DrivingRecord& rec, double lo, double hi,
                               double delta_hit_rel) {
  return genuine_contact_scan(rec, lo, hi, delta_hit_rel, true);
}

double smallest_genuine_contact(const DrivingRecord& rec, double lo, double hi,
                                double delta_hit_rel) {
  return genuine_contact_scan(rec, lo, hi, delta_hit_rel, false);
}

}  // namespace hsle
