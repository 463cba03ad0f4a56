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
#include <filesystem>
#include <functional>
#include <vector>

#include "ppbo/gp.hpp"
#include "ppbo/latent.hpp"
#include "ppbo/physics.hpp"
#include "ppbo/policy_store.hpp"
#include "ppbo/prior.hpp"
#include "ppbo/rng.hpp"
#include "ppbo/tasks.hpp"

namespace ppbo {

struct SearchConfig {
  int iterations = 20;  // T
  /// Uniform random evaluations before the first proposal; only used without a prior
  /// unless cold_start_with_prior is set.
  int cold_start = 3;
  bool cold_start_with_prior = false;
  double ei_xi = 0.0;
  int restarts = 10;
  int screen_points = 1024;
  std::uint64_t seed = 50;
  /// Low-fidelity attempts per task for each real evaluation.
  int top_k = 5;
  bool reoptimize_hyper = true;
  double sim2real = 0.01;
  double real_noise_var = 1e-4;
  double initial_lengthscale = 0.2;  // in unit-cube coordinates
  double initial_signal_variance = 1.0;
  gp::OptimizeOptions hyper_opt{};

  void validate() const;
};

struct SearchEntry {
  int iteration = 0;  // 1-based, cold-start evaluations included
  LatentVector x;
  double objective = 0.0;
  double best_so_far = 0.0;
  long long interactions = 0;  // cumulative real-world attempts
  bool cold_start = false;
};

struct SearchHistory {
  std::vector<SearchEntry> entries;
  LatentVector best_x;
  double best_y = 0.0;

  [[nodiscard]] long long interactions() const { return entries.empty() ? 0 : entries.back().interactions; }
};

struct ObjectiveValue {
  double value = 0.0;
  long long interactions = 0;
};
using Objective = std::function<ObjectiveValue(const LatentVector&)>;

/// Expected improvement for maximization.
double expected_improvement(double mean, double variance, double best, double xi = 0.0);

/// Incumbent used by EI: the best real observation, or, before any real observation,
/// the largest posterior mean over the prior inputs.
double incumbent(const gp::GpModel<double>& model, const gp::ObservationSet<double>& obs);

/// Maximizes EI over the unit cube. A shifted Halton screen of `screen_points` points
/// seeds `restarts` coordinate-wise golden-section ascents; the best point found is
/// returned in unit-cube coordinates.
Eigen::VectorXd propose_unit(const gp::GpModel<double>& model, double best, double xi, int restarts, Rng& rng,
                             int screen_points = 1024);

/// propose_unit for a model fit on bounds.to_unit(...) inputs, mapped back to latent space.
LatentVector propose(const gp::GpModel<double>& model, const LatentBounds& bounds, double best, double xi,
                     int restarts, Rng& rng, int screen_points = 1024);

/// Prior-augmented GP-EI search of `objective`. Prior records go in as synthetic
/// observations with their own variances; they are never counted as interactions.
SearchHistory search(const Objective& objective, const std::vector<PriorObservation>& prior,
                     const LatentBounds& bounds, const SearchConfig& cfg);

/// The objective used against the table: mean task success on `tasks` in `real`,
/// attempting the top_k actions of the policy conditioned at theta.
Objective policy_objective(const PolicyTable& table, const TaskSet& tasks, const EnvironmentSetting& real, int top_k);

SearchHistory search(const PolicyTable& table, const std::vector<PriorObservation>& prior, const TaskSet& tasks,
                     const EnvironmentSetting& real, const SearchConfig& cfg);

/// Appends (trial_seed, iter, theta_1..theta_d, objective, best_so_far, interactions) rows;
/// writes the header when `with_header`.
void write_history_csv(std::ostream& out, std::uint64_t trial_seed, const SearchHistory& history, bool with_header);

struct HistoryRow {
  std::uint64_t trial_seed = 0;
  int iteration = 0;
  LatentVector x;
  double objective = 0.0;
  double best_so_far = 0.0;
  long long interactions = 0;
};
std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path);

}  // namespace ppbo
