/*
 * Copyright 2026 The ppbo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "ppbo/bo.hpp"
#include "ppbo/latent.hpp"
#include "ppbo/physics.hpp"
#include "ppbo/policy_store.hpp"
#include "ppbo/tasks.hpp"

namespace ppbo {

/// BO without any prior: cfg.cold_start uniform draws, then cfg.iterations EI proposals.
SearchHistory no_prior_search(const Objective& objective, const LatentBounds& bounds, const SearchConfig& cfg);
SearchHistory no_prior_search(const PolicyTable& table, const TaskSet& tasks, const EnvironmentSetting& real,
                              const SearchConfig& cfg);

/// Interpolated scores averaged over `samples` uniform latent draws.
Eigen::MatrixXd domain_randomized_scores(const PolicyTable& table, int samples, std::uint64_t seed);
/// The single latent-independent policy ranked by domain_randomized_scores.
RankedPolicy domain_randomized_policy(const PolicyTable& table, int samples, std::uint64_t seed);

struct Probe {
  Task task;
  Action action;
  Trajectory observed;
};

/// Rolls `actions_per_task` uniform random actions on every task in `setting` and keeps the trajectories.
std::vector<Probe> record_probes(const TaskSet& tasks, const EnvironmentSetting& setting, int actions_per_task,
                                 std::uint64_t seed);

/// Mean squared position gap per step between each probe and an undamped simulation at
/// theta, averaged over probes. The shorter trajectory is held at its final resting position.
double trajectory_residual(const LatentVector& theta, const std::vector<Probe>& probes);

struct CemConfig {
  int population = 50;
  int elites = 10;
  int iterations = 10;
  /// Empty means the bounds midpoint / a quarter of the range.
  LatentVector init_mean;
  Eigen::VectorXd init_std;
  int probe_actions = 5;
  /// Leading train tasks that get probed.
  int probe_tasks = 5;

  void validate(const LatentBounds& bounds) const;
};

struct CemResult {
  LatentVector estimate;
  /// Mean elite residual per iteration.
  std::vector<double> elite_trace;
};

using Residual = std::function<double(const LatentVector&)>;

/// Gaussian cross-entropy minimization of `residual` within bounds. Each round's elites
/// compete again in the next round, so the elite trace never increases.
CemResult estimate_latents_cem(const Residual& residual, const CemConfig& cfg, const LatentBounds& bounds,
                               std::uint64_t seed);
CemResult estimate_latents_cem(const std::vector<Probe>& probes, const CemConfig& cfg, const LatentBounds& bounds,
                               std::uint64_t seed);

}  // namespace ppbo
