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
#include <span>
#include <vector>

#include "ppbo/latent.hpp"
#include "ppbo/physics.hpp"
#include "ppbo/policy_store.hpp"
#include "ppbo/tasks.hpp"

namespace ppbo {

/// One synthetic observation: how the policy conditioned at x fares across simulated settings.
struct PriorObservation {
  LatentVector x;
  double mean = 0.0;
  double var = 0.0;
  double p_value = 0.0;
  bool kept = false;
};

struct PriorConfig {
  int samples = 100;      // N
  int settings = 10;      // E
  double min_p_value = 0.1;  // gamma
  LatentBounds bounds = LatentBounds::friction_restitution();
  int eval_top_k = 5;

  void validate() const;
};

std::vector<LatentVector> sample_latents(int n, const LatentBounds& bounds, std::uint64_t seed);

/// Undamped simulated settings at uniformly drawn latents.
std::vector<EnvironmentSetting> sample_settings(int n, const LatentBounds& bounds, std::uint64_t seed);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test of `samples` against Normal(mu, var).
/// Throws DegenerateDistribution when var == 0.
KsResult ks_test(std::span<const double> samples, double mu, double var);

/// Asymptotic Kolmogorov tail probability P(K > lambda).
double kolmogorov_tail(double lambda);

/// Conditions the table at N uniform latents, evaluates each policy on `tasks` in E
/// uniform simulated settings, and records mean, unbiased variance and KS p-value.
/// Every sample is returned; `kept` marks the ones that pass the Gaussianity filter.
std::vector<PriorObservation> build_prior(const PolicyTable& table, const TaskSet& tasks, const PriorConfig& cfg,
                                          std::uint64_t seed);

/// Filters to the kept records.
std::vector<PriorObservation> kept_only(const std::vector<PriorObservation>& prior);

void write_prior_csv(const std::filesystem::path& path, const std::vector<PriorObservation>& prior);
std::vector<PriorObservation> read_prior_csv(const std::filesystem::path& path);

}  // namespace ppbo
