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

#include <string>
#include <vector>

#include "hsle/analysis.hpp"
#include "hsle/drivers.hpp"
#include "hsle/hitting.hpp"

namespace hsle {

enum class ExperimentId { E1, E2, E3, E4, E5 };

std::string experiment_name(ExperimentId id);
ExperimentId parse_experiment(const std::string& name);

struct ExperimentConfig {
  ExperimentId id = ExperimentId::E1;
  HsleParams params{6.0, 0.0, 0.5, 1.5};
  int n_paths = 2000;
  std::uint64_t seed = 1;
  SimControls controls;  // dt_max / t_max of 0 are resolved from params
  int workers = 0;

  // E1/E2/E5: censoring cap for the heavy hitting tail (0 = derived from
  // the capacity horizon).
  double w_cap = 0.0;
  double ks_bar = 0.05;  // E1/E2 verdict threshold on the statistic

  // E3/E5
  double circle_radius = 1.0;
  double alpha = 0.01;

  // E4
  std::vector<double> checkpoints;          // empty = derived from y
  std::vector<double> probes = {2.0, 3.0};  // w values for N_t(w)
};

// Hits at capacity t_max cannot realize locations beyond ~sqrt(kappa t):
// the comparison window (y, w_cap] where completion is near-certain.
double default_w_cap(const HsleParams& p, const SimControls& c);

struct ReportComponent {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0, n_b = 0;
  bool pass = true;
  bool gating = true;
};

struct Report {
  std::string experiment_id;
  int n_paths = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  std::string verdict;  // pass | fail | inconclusive
  std::uint64_t seed = 0;
  double wall_time_seconds = 0.0;
  HsleParams params{};
  SimControls controls{};
  int workers = 0;
  double w_cap = 0.0;
  double tail_fraction = 0.0;
  double expected_tail = 0.0;
  double resolved_fraction = 0.0;
  double ambiguous_fraction = 0.0;
  double missing_fraction_a = 0.0;
  double missing_fraction_b = 0.0;
  std::vector<ReportComponent> components;
  std::string notes;

  bool passed() const { return verdict == "pass"; }
  std::string to_json() const;
};

// Classified hitting ensemble shared between the density and uniformity
// experiments (identical seeds produce identical paths).
struct HitEnsemble {
  std::vector<double> w_below;   // hit locations <= w_cap, by path order
  std::size_t n_classified = 0;  // every path with a located hit
  std::size_t n_tail = 0;        // located beyond w_cap
  std::size_t n_resolved = 0;    // completed from the conditional law
  std::size_t n_ambiguous = 0;   // numerical failures only
  double w_cap = 0.0;
  SimControls controls;
};

HitEnsemble run_hit_ensemble(const ExperimentConfig& cfg);

Report run_experiment(const ExperimentConfig& cfg);
// Variants that reuse a precomputed ensemble (acceptance runs E1+E2 on one).
Report run_e1(const ExperimentConfig& cfg, const HitEnsemble* shared);
Report run_e2(const ExperimentConfig& cfg, const HitEnsemble* shared);

}  // namespace hsle
