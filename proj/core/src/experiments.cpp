/*
 * Copyright 2026 The hsle-lab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 */
#include "hsle/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "hsle/parallel.hpp"

namespace hsle {

std::string experiment_name(ExperimentId id) {
  switch (id) {
    case ExperimentId::E1: return "e1";
    case ExperimentId::E2: return "e2";
    case ExperimentId::E3: return "e3";
    case ExperimentId::E4: return "e4";
    case ExperimentId::E5: return "e5";
  }
  return "?";
}

ExperimentId parse_experiment(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), ::tolower);
  if (n == "e1") return ExperimentId::E1;
  if (n == "e2") return ExperimentId::E2;
  if (n == "e3") return ExperimentId::E3;
  if (n == "e4") return ExperimentId::E4;
  if (n == "e5") return ExperimentId::E5;
  throw std::domain_error("unknown experiment '" + name + "'");
}

double default_w_cap(const HsleParams& p, const SimControls& c) {
  // hits complete by t_max only when tau ~ w^2/kappa fits well inside it
  return std::max(2.0 * p.y, 0.25 * std::sqrt(p.kappa * c.t_max));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdicts {
  static constexpr const char* kPass = "pass";
  static constexpr const char* kFail = "fail";
  static constexpr const char* kInconclusive = "inconclusive";
};

Report base_report(const ExperimentConfig& cfg, const SimControls& rc) {
  Report r;
  r.experiment_id = experiment_name(cfg.id);
  r.n_paths = cfg.n_paths;
  r.seed = cfg.seed;
  r.params = cfg.params;
  r.controls = rc;
  r.workers = cfg.workers;
  return r;
}

}  // namespace

HitEnsemble run_hit_ensemble(const ExperimentConfig& cfg) {
  const HsleParams p = cfg.params;
  p.validate();
  SimControls rc = resolve_controls(p, cfg.controls);
  rc.seed = cfg.seed;

  HitEnsemble ens;
  ens.controls = rc;
  ens.w_cap = cfg.w_cap > 0.0 ? cfg.w_cap : default_w_cap(p, rc);

  struct Slot {
    double w = 0.0;
    int kind = 2;  // 0 = hit below cap, 1 = tail, 2 = ambiguous
    bool resolved = false;
  };
  std::vector<Slot> slots(cfg.n_paths);

  parallel_paths(cfg.n_paths, cfg.workers, [&](int i) {
    SimControls c = rc;
    c.path_index = static_cast<std::uint64_t>(i);
    PathOptions opt;
    opt.post_hit = PathOptions::PostHit::kStop;
    opt.resolve_pending = true;
    opt.keep_marked_flows = false;
    const SimResult res = simulate_hsle(p, c, opt);
    Slot s;
    s.resolved = res.hit.flags.resolved;
    if ((res.hit.flags.hit || res.hit.flags.resolved) &&
        std::isfinite(res.hit.w_hit)) {
      if (res.hit.w_hit <= ens.w_cap) {
        s.kind = 0;
        s.w = res.hit.w_hit;
      } else {
        s.kind = 1;
      }
    } else {
      s.kind = 2;
    }
    slots[i] = s;
  });

  for (const Slot& s : slots) {
    if (s.resolved) ++ens.n_resolved;
    if (s.kind == 0) {
      ens.w_below.push_back(s.w);
      ++ens.n_classified;
    } else if (s.kind == 1) {
      ++ens.n_tail;
      ++ens.n_classified;
    } else {
      ++ens.n_ambiguous;
    }
  }
  return ens;
}

Report run_e1(const ExperimentConfig& cfg, const HitEnsemble* shared) {
  const auto t0 = Clock::now();
  HitEnsemble local;
  if (!shared) {
    local = run_hit_ensemble(cfg);
    shared = &local;
  }
  Report r = base_report(cfg, shared->controls);
  r.w_cap = shared->w_cap;
  r.tail_fraction = static_cast<double>(shared->n_tail) / cfg.n_paths;
  r.expected_tail = 1.0 - rho_cdf(cfg.params, shared->w_cap);
  r.resolved_fraction = static_cast<double>(shared->n_resolved) / cfg.n_paths;
  r.ambiguous_fraction = static_cast<double>(shared->n_ambiguous) / cfg.n_paths;

  const HsleParams p = cfg.params;
  const auto res = ks_one_sample_censored(
      shared->w_below, shared->n_classified,
      [&](double w) { return rho_cdf(p, w); }, shared->w_cap);
  r.statistic = res.statistic;
  r.p_value = res.p_value;
  ReportComponent comp{"ks_w_hit", res.statistic, res.p_value,
                       shared->w_below.size(), shared->n_classified,
                       res.statistic <= cfg.ks_bar, true};
  r.components.push_back(comp);
  if (r.ambiguous_fraction > 0.20)
    r.verdict = Verdicts::kInconclusive;
  else
    r.verdict = comp.pass && r.ambiguous_fraction <= 0.02 ? Verdicts::kPass
                                                          : Verdicts::kFail;
  r.wall_time_seconds = seconds_since(t0);
  return r;
}

Report run_e2(const ExperimentConfig& cfg, const HitEnsemble* shared) {
  const auto t0 = Clock::now();
  HitEnsemble local;
  if (!shared) {
    local = run_hit_ensemble(cfg);
    shared = &local;
  }
  Report r = base_report(cfg, shared->controls);
  r.w_cap = shared->w_cap;
  r.tail_fraction = static_cast<double>(shared->n_tail) / cfg.n_paths;
  r.expected_tail = 1.0 - rho_cdf(cfg.params, shared->w_cap);
  r.resolved_fraction = static_cast<double>(shared->n_resolved) / cfg.n_paths;
  r.ambiguous_fraction = static_cast<double>(shared->n_ambiguous) / cfg.n_paths;

  // the Schwarz-Christoffel image of the hit should be Uniform[0,1]
  const HsleParams p = cfg.params;
  std::vector<double> q;
  q.reserve(shared->w_below.size());
  for (double w : shared->w_below) q.push_back(sc_map_f(p, w));
  const double q_cap = sc_map_f(p, shared->w_cap);
  const auto res = ks_one_sample_censored(
      q, shared->n_classified, [](double v) { return std::clamp(v, 0.0, 1.0); },
      q_cap);
  r.statistic = res.statistic;
  r.p_value = res.p_value;
  ReportComponent comp{"ks_uniform_f", res.statistic, res.p_value, q.size(),
                       shared->n_classified, res.statistic <= cfg.ks_bar, true};
  r.components.push_back(comp);
  if (r.ambiguous_fraction > 0.20)
    r.verdict = Verdicts::kInconclusive;
  else
    r.verdict = comp.pass && r.ambiguous_fraction <= 0.02 ? Verdicts::kPass
                                                          : Verdicts::kFail;
  r.wall_time_seconds = seconds_since(t0);
  return r;
}

namespace {

struct AngleSample {
  double theta_min = 0.0, theta_max = 0.0;
  double inv_hit = 0.0;      // 1/w_hit (side A) or largest contact (side B)
  bool ok = false;           // angles usable
  bool final = false;        // circle fully enclosed: no future crossings
  bool secondary_ok = false;
};

Report run_e3(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  const HsleParams pa = cfg.params;
  pa.validate_reversibility();
  const HsleParams pb{pa.kappa, pa.nu, 1.0 / pa.y, 1.0 / pa.x};

  // both sides run with one pinned dt so the angle discretization matches;
  // the horizon only bounds the residual crossing error of pending paths
  // (their angle sets freeze by enclosure long before full absorption), so
  // a moderate value serves better than the heavy-tailed absorption time
  SimControls rc = resolve_controls(pa, cfg.controls);
  if (cfg.controls.t_max == 0.0)
    rc.t_max = std::max(66.0 * pa.y * pa.y, 13.5 * pb.y * pb.y);
  rc.seed = cfg.seed;
  Report r = base_report(cfg, rc);

  const int n = cfg.n_paths;
  std::vector<AngleSample> a_samp(n), b_samp(n);

  // Contact grids for the secondary check: side B detects its largest
  // genuine contact in (0, 1/y); side A detects its smallest genuine
  // contact in (y, inf) on the psi-image of the same grid, so the grid
  // quantization cancels between the sides.
  std::vector<std::pair<std::string, double>> grid_b, grid_a;
  {
    const double hi = (1.0 / pa.y) * (1.0 - 1e-9);
    const double lo = (1.0 / pa.y) * 1e-4;
    const int m = 48;
    for (int j = 0; j < m; ++j) {
      const double g = lo * std::pow(hi / lo, static_cast<double>(j) / (m - 1));
      grid_b.emplace_back("g" + std::to_string(j + 1), g);
      grid_a.emplace_back("h" + std::to_string(j + 1), 1.0 / g);
    }
  }

  parallel_paths(2 * n, cfg.workers, [&](int idx) {
    const bool side_b = idx >= n;
    const int i = side_b ? idx - n : idx;
    const HsleParams& p = side_b ? pb : pa;
    SimControls c = rc;
    c.path_index = static_cast<std::uint64_t>(idx);
    PathOptions opt;
    opt.post_hit = PathOptions::PostHit::kUntilDiscAbsorbed;
    opt.disc_radius = cfg.circle_radius;
    opt.keep_marked_flows = false;
    opt.locate_hit_point = false;
    opt.tracked = side_b ? grid_b : grid_a;
    const SimResult res = simulate_hsle(p, c, opt);
    AngleSample s;
    if (!res.hit.flags.numerical) {
      TraceOptions topt;
      topt.refine_height = false;
      Trace tr = refined_trace(res.record, cfg.circle_radius, topt);
      if (side_b) tr = apply_inversion(tr);
      const Functionals f =
          trace_functionals(tr, res.record, p, cfg.circle_radius, &res.hit);
      if (!f.theta_missing) {
        s.ok = true;
        s.theta_min = f.theta_min_r;
        s.theta_max = f.theta_max_r;
        s.final = res.hit.flags.disc_absorbed;
      }
    }
    if (side_b) {
      const double contact =
          largest_genuine_contact(res.record, 0.0, 1.0 / pa.y);
      if (!std::isnan(contact)) {
        s.inv_hit = contact;
        s.secondary_ok = true;
      }
      b_samp[i] = s;
    } else {
      const double contact = smallest_genuine_contact(
          res.record, pa.y * (1.0 + 1e-9), 1e300);
      if (!std::isnan(contact)) {
        s.inv_hit = 1.0 / contact;
        s.secondary_ok = true;
      }
      a_samp[i] = s;
    }
  });

  std::vector<double> tmin_a, tmax_a, tmin_b, tmax_b, sec_a, sec_b;
  for (const auto& s : a_samp) {
    if (s.ok) {
      tmin_a.push_back(s.theta_min);
      tmax_a.push_back(s.theta_max);
    }
    if (s.secondary_ok) sec_a.push_back(s.inv_hit);
  }
  for (const auto& s : b_samp) {
    if (s.ok) {
      tmin_b.push_back(s.theta_min);
      tmax_b.push_back(s.theta_max);
    }
    if (s.secondary_ok) sec_b.push_back(s.inv_hit);
  }
  r.missing_fraction_a = 1.0 - static_cast<double>(tmin_a.size()) / n;
  r.missing_fraction_b = 1.0 - static_cast<double>(tmin_b.size()) / n;
  {
    std::size_t fin_a = 0, fin_b = 0;
    for (const auto& s : a_samp) fin_a += s.ok && s.final;
    for (const auto& s : b_samp) fin_b += s.ok && s.final;
    r.notes = "circle fully enclosed for " + std::to_string(fin_a) + "/" +
              std::to_string(tmin_a.size()) + " (A) and " +
              std::to_string(fin_b) + "/" + std::to_string(tmin_b.size()) +
              " (B) angle samples";
  }

  bool pass = true;
  const auto add = [&](const std::string& name, std::vector<double> sa,
                       std::vector<double> sb, bool gating) {
    const auto ks = ks_two_sample(sa, sb);
    ReportComponent comp{name,      ks.statistic, ks.p_value, sa.size(),
                         sb.size(), ks.p_value > cfg.alpha, gating};
    if (gating) pass = pass && comp.pass;
    r.components.push_back(comp);
    if (gating) {
      r.statistic = std::max(r.statistic, ks.statistic);
      r.p_value = std::min(r.p_value, ks.p_value);
    }
  };
  add("ks_theta_min", tmin_a, tmin_b, true);
  add("ks_theta_max", tmax_a, tmax_b, true);
  if (!sec_a.empty() && !sec_b.empty())
    add("ks_inverted_hit_contact", sec_a, sec_b, false);

  if (r.missing_fraction_a > 0.20 || r.missing_fraction_b > 0.20)
    r.verdict = Verdicts::kInconclusive;
  else
    r.verdict = pass ? Verdicts::kPass : Verdicts::kFail;
  r.wall_time_seconds = seconds_since(t0);
  return r;
}

Report run_e4(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  const HsleParams p = cfg.params;
  p.validate();
  SimControls rc = resolve_controls(p, cfg.controls);
  rc.seed = cfg.seed;
  Report r = base_report(cfg, rc);
  const double w_cap = cfg.w_cap > 0.0 ? cfg.w_cap : default_w_cap(p, rc);
  r.w_cap = w_cap;

  std::vector<double> cps = cfg.checkpoints;
  if (cps.empty()) {
    const double y2 = p.y * p.y;
    cps = {0.02 * y2, 0.06 * y2, 0.15 * y2, 0.4 * y2, 1.0 * y2};
  }
  const auto& probes = cfg.probes;
  const std::size_t n_cp = cps.size(), n_pr = probes.size();

  struct PathVals {
    std::vector<double> n_at_cp;  // n_pr * n_cp values, any stopped path
    std::vector<double> n_term;   // n_pr values, completed paths only
    std::vector<int> indicator;
    bool usable = false;
    bool completed = false;  // tau reached: terminal limit attained
  };
  std::vector<PathVals> vals(cfg.n_paths);

  parallel_paths(cfg.n_paths, cfg.workers, [&](int i) {
    SimControls c = rc;
    c.path_index = static_cast<std::uint64_t>(i);
    PathOptions opt;
    opt.post_hit = PathOptions::PostHit::kStop;
    opt.keep_marked_flows = true;
    for (std::size_t j = 0; j < n_pr; ++j)
      opt.tracked.emplace_back("n" + std::to_string(j + 1), probes[j]);
    const SimResult res = simulate_hsle(p, c, opt);
    PathVals pv;
    if (res.hit.flags.numerical) {
      vals[i] = pv;
      return;
    }
    pv.usable = true;
    pv.completed = res.hit.flags.hit;
    const auto& times = res.record.times;
    const std::size_t last = res.record.steps();
    for (std::size_t j = 0; j < n_pr; ++j) {
      for (std::size_t q = 0; q < n_cp; ++q) {
        std::size_t k = static_cast<std::size_t>(
            std::lower_bound(times.begin(), times.end(), cps[q]) -
            times.begin());
        if (k > last) k = last;
        pv.n_at_cp.push_back(mart_N(p, res.record, k, probes[j]));
      }
    }
    if (pv.completed) {
      // terminal ratios sharpened by zoom continuation of the collapse
      const double W = res.record.w[last];
      const double gx = res.record.find("x")->v[last] - W;
      const double gy = res.record.find("y")->v[last] - W;
      std::vector<double> gws;
      for (std::size_t j = 0; j < n_pr; ++j)
        gws.push_back(
            res.record.find("n" + std::to_string(j + 1))->v[last] - W);
      const auto ratios = deep_collapse_ratios(
          p, gx, gy, gws, rc.seed,
          (1ull << 40) + static_cast<std::uint64_t>(i), 4);
      for (std::size_t j = 0; j < n_pr; ++j) {
        pv.n_term.push_back(
            overshoot_from_state(p.hyp(), ratios[1 + j], ratios[0]));
        // the deep ratio dichotomy (near 1 on the overshoot side, huge on
        // the undershoot side) realizes the hit-side indicator
        pv.indicator.push_back(ratios[1 + j] < 3.0 ? 1 : 0);
      }
    }
    vals[i] = pv;
  });

  std::size_t n_use = 0, n_done = 0;
  for (const auto& pv : vals) {
    if (pv.usable) ++n_use;
    if (pv.completed) ++n_done;
  }
  r.ambiguous_fraction = 1.0 - static_cast<double>(n_use) / cfg.n_paths;
  r.notes = "terminal check over " + std::to_string(n_done) +
            " completed paths; stopped-at-t_max values enter the means";

  // The stopped value N_{t ^ tau ^ t_max} is a bounded martingale sample at
  // every checkpoint, so pending paths contribute to the means too.
  bool pass = true;
  double max_abs_z = 0.0;
  for (std::size_t j = 0; j < n_pr; ++j) {
    const double n0 = 1.0 - rho_cdf(p, probes[j]);
    for (std::size_t q = 0; q < n_cp; ++q) {
      double sum = 0.0, sum2 = 0.0;
      for (const auto& pv : vals) {
        if (!pv.usable) continue;
        const double v = pv.n_at_cp[j * n_cp + q];
        sum += v;
        sum2 += v * v;
      }
      const double mean = sum / n_use;
      const double var = std::max(sum2 / n_use - mean * mean, 1e-300);
      const double se = std::sqrt(var / n_use);
      const double z = (mean - n0) / se;
      max_abs_z = std::max(max_abs_z, std::abs(z));
      ReportComponent comp{"N_w" + std::to_string(j + 1) + "_cp" +
                               std::to_string(q + 1),
                           z,
                           std::erfc(std::abs(z) / std::sqrt(2.0)),
                           n_use,
                           0,
                           std::abs(z) < 3.0,
                           true};
      pass = pass && comp.pass;
      r.components.push_back(comp);
    }
  }
  // terminal indicator agreement on paths that actually reached tau
  std::size_t term_ok = 0, term_all = 0;
  for (const auto& pv : vals) {
    if (!pv.completed) continue;
    for (std::size_t j = 0; j < n_pr; ++j) {
      ++term_all;
      if (std::abs(pv.n_term[j] - pv.indicator[j]) < 0.05) ++term_ok;
    }
  }
  const double term_frac =
      term_all ? static_cast<double>(term_ok) / term_all : 0.0;
  ReportComponent tcomp{"terminal_indicator", term_frac, 1.0, term_all, 0,
                        term_frac >= 0.95, true};
  pass = pass && tcomp.pass;
  r.components.push_back(tcomp);

  r.statistic = max_abs_z;
  r.p_value = std::erfc(max_abs_z / std::sqrt(2.0));
  if (r.ambiguous_fraction > 0.20 ||
      n_done < std::max<std::size_t>(100, cfg.n_paths / 4))
    r.verdict = Verdicts::kInconclusive;
  else
    r.verdict = pass ? Verdicts::kPass : Verdicts::kFail;
  r.wall_time_seconds = seconds_since(t0);
  return r;
}

Report run_e5(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  const HsleParams p = cfg.params;
  p.validate();
  SimControls rc = resolve_controls(p, cfg.controls);
  rc.seed = cfg.seed;
  Report r = base_report(cfg, rc);
  const double w_cap = cfg.w_cap > 0.0 ? cfg.w_cap : default_w_cap(p, rc);
  r.w_cap = w_cap;

  const int n = cfg.n_paths;
  struct Fval {
    double tau = 0.0, height = 0.0, theta = 0.0;
    bool ok = false;
  };
  std::vector<Fval> fa(n), fb(n);
  const DensityTable table = build_density_table(p);

  parallel_paths(2 * n, cfg.workers, [&](int idx) {
    const bool side_b = idx >= n;
    const int i = side_b ? idx - n : idx;
    SimControls c = rc;
    c.path_index = static_cast<std::uint64_t>(idx);
    Fval f;
    if (!side_b) {
      PathOptions opt;
      opt.post_hit = PathOptions::PostHit::kStop;
      opt.keep_marked_flows = false;
      const SimResult res = simulate_hsle(p, c, opt);
      if (res.hit.flags.hit && res.hit.w_hit <= w_cap) {
        const Trace tr = refined_trace(res.record, cfg.circle_radius);
        const Functionals fn =
            trace_functionals(tr, res.record, p, cfg.circle_radius, &res.hit);
        if (!fn.theta_missing) {
          f.ok = true;
          f.tau = res.hit.tau;
          f.height = fn.max_height;
          f.theta = fn.theta_min_r;
        }
      }
      fa[i] = f;
    } else {
      // conditioned hit location, then the conditional process to it
      Philox4x32 urng(rc.seed, (1ull << 32) + static_cast<std::uint64_t>(i));
      const double u = table.sample_conditional(urng.next_uniform(), w_cap);
      RhoSpec spec;
      spec.right = {{p.x, p.nu + 2.0},
                    {p.y, p.kappa - 6.0 - p.nu},
                    {u, -4.0}};
      RhoOptions opt;
      opt.stop_on_swallow = "r3";
      opt.keep_marked_flows = false;
      const RhoResult res = simulate_rho(p.kappa, spec, c, opt);
      if (res.flags.hit) {
        const Trace tr = refined_trace(res.record, cfg.circle_radius);
        HsleParams dummy = p;
        const Functionals fn =
            trace_functionals(tr, res.record, dummy, cfg.circle_radius);
        if (!fn.theta_missing) {
          f.ok = true;
          f.tau = res.stop_time;
          f.height = fn.max_height;
          f.theta = fn.theta_min_r;
        }
      }
      fb[i] = f;
    }
  });

  std::vector<double> tau_a, tau_b, h_a, h_b, th_a, th_b;
  for (const auto& f : fa)
    if (f.ok) {
      tau_a.push_back(f.tau);
      h_a.push_back(f.height);
      th_a.push_back(f.theta);
    }
  for (const auto& f : fb)
    if (f.ok) {
      tau_b.push_back(f.tau);
      h_b.push_back(f.height);
      th_b.push_back(f.theta);
    }
  r.missing_fraction_a = 1.0 - static_cast<double>(tau_a.size()) / n;
  r.missing_fraction_b = 1.0 - static_cast<double>(tau_b.size()) / n;

  bool pass = true;
  const auto add = [&](const std::string& name, std::vector<double>& sa,
                       std::vector<double>& sb) {
    const auto ks = ks_two_sample(sa, sb);
    ReportComponent comp{name,      ks.statistic,           ks.p_value,
                         sa.size(), sb.size(),              ks.p_value > cfg.alpha,
                         true};
    pass = pass && comp.pass;
    r.components.push_back(comp);
    r.statistic = std::max(r.statistic, ks.statistic);
    r.p_value = std::min(r.p_value, ks.p_value);
  };
  add("ks_tau_capacity", tau_a, tau_b);
  add("ks_max_height", h_a, h_b);
  add("ks_theta_min", th_a, th_b);

  // side A discards its tail (conditioning); only unresolved paths gate
  if (r.missing_fraction_b > 0.20)
    r.verdict = Verdicts::kInconclusive;
  else
    r.verdict = pass ? Verdicts::kPass : Verdicts::kFail;
  r.wall_time_seconds = seconds_since(t0);
  return r;
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.id) {
    case ExperimentId::E1: return run_e1(cfg, nullptr);
    case ExperimentId::E2: return run_e2(cfg, nullptr);
    case ExperimentId::E3: return run_e3(cfg);
    case ExperimentId::E4: return run_e4(cfg);
    case ExperimentId::E5: return run_e5(cfg);
  }
  throw std::logic_error("run_experiment: bad id");
}

std::string Report::to_json() const {
  nlohmann::ordered_json j;
  j["experiment_id"] = experiment_id;
  j["n_paths"] = n_paths;
  j["statistic"] = statistic;
  j["p_value"] = p_value;
  j["verdict"] = verdict;
  j["seed"] = seed;
  j["controls"] = {{"kappa", params.kappa},
                   {"nu", params.nu},
                   {"x", params.x},
                   {"y", params.y},
                   {"dt_max", controls.dt_max},
                   {"safety_c", controls.safety_c},
                   {"t_max", controls.t_max},
                   {"workers", workers},
                   {"w_cap", w_cap}};
  j["wall_time_seconds"] = wall_time_seconds;
  j["tail_fraction"] = tail_fraction;
  j["expected_tail"] = expected_tail;
  j["resolved_fraction"] = resolved_fraction;
  j["ambiguous_fraction"] = ambiguous_fraction;
  j["missing_fraction_a"] = missing_fraction_a;
  j["missing_fraction_b"] = missing_fraction_b;
  auto comps = nlohmann::ordered_json::array();
  for (const auto& c : components) {
    comps.push_back({{"name", c.name},
                     {"statistic", c.statistic},
                     {"p_value", c.p_value},
                     {"n_a", c.n_a},
                     {"n_b", c.n_b},
                     {"pass", c.pass},
                     {"gating", c.gating}});
  }
  j["components"] = comps;
  if (!notes.empty()) j["notes"] = notes;
  return j.dump(2) + "\n";
}

}  // namespace hsle
