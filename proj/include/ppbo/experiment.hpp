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
#include <ostream>
#include <string>
#include <vector>

#include "ppbo/actions.hpp"
#include "ppbo/baselines.hpp"
#include "ppbo/bo.hpp"
#include "ppbo/latent.hpp"
#include "ppbo/physics.hpp"
#include "ppbo/prior.hpp"
#include "ppbo/tasks.hpp"

namespace ppbo {

inline constexpr const char* kMethods[] = {"policy_prior", "no_prior", "dr", "estimated"};

struct ExperimentConfig {
  std::uint64_t task_seed = 7;
  /// "default" or "tall_walls"; picks the TaskGenConfig base before fold overrides.
  std::string variant = "default";
  TaskGenConfig tasks;
  int lattice_res = 4;
  int angle_steps = 30;
  int speed_steps = 30;
  LatentBounds bounds = LatentBounds::friction_restitution();
  PriorConfig prior;
  std::uint64_t prior_seed = 1;
  bool filter_prior = true;
  SearchConfig search;
  int top_k_jumpstart = 100;
  double real_damping = physics::kDefaultRealDamping;
  LatentVector real_latent = LatentVector::Zero(0);
  std::vector<std::uint64_t> trial_seeds{50, 100, 150, 500, 1000};
  std::vector<std::string> methods{"policy_prior", "no_prior", "dr", "estimated"};
  int dr_samples = 16;
  CemConfig cem;

  ExperimentConfig();
  void validate() const;
  [[nodiscard]] ActionSet action_set() const { return ActionSet(angle_steps, speed_steps); }
  [[nodiscard]] EnvironmentSetting real_setting() const { return EnvironmentSetting::real(real_latent, real_damping); }
};

/// Reads a JSON config; absent keys keep their defaults, unknown keys are rejected.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text);

struct JumpStart {
  std::uint64_t trial_seed = 0;
  LatentVector x;
  double auccess = 0.0;
  double objective = 0.0;
  long long interactions = 0;
  long long probe_interactions = 0;
};

struct TrialResult {
  SearchHistory history;
  JumpStart jump;
};

/// One trial of `method` with everything already loaded.
TrialResult run_trial(const ExperimentConfig& cfg, const std::string& method, std::uint64_t trial_seed,
                      const PolicyTable& table, const TaskFolds& folds, const std::vector<PriorObservation>& prior);

// Subcommands. Each reads its inputs from and writes its outputs to `dir`.
void cmd_train_upn(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log);
void cmd_build_prior(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log);
void cmd_search(const ExperimentConfig& cfg, const std::string& method, const std::filesystem::path& dir,
                std::ostream& log);
void cmd_report(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log);

void write_jumpstart_csv(const std::filesystem::path& path, const std::vector<JumpStart>& rows);
std::vector<JumpStart> read_jumpstart_csv(const std::filesystem::path& path);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};
/// Sample mean and sample standard deviation over sqrt(n); stderr is 0 for a single value.
MeanStderr mean_stderr(const std::vector<double>& values);

/// First 1-based position at which `best_so_far` reaches `fraction` of its final value.
int iterations_to_fraction(const std::vector<double>& best_so_far, double fraction = 0.95);

/// Best-so-far over the last `iterations` entries, padded with the final value when shorter.
std::vector<double> search_curve(const std::vector<double>& best_so_far, int iterations);

}  // namespace ppbo
