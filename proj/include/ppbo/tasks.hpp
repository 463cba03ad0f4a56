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
#include <string>
#include <vector>

#include "ppbo/actions.hpp"
#include "ppbo/physics.hpp"

namespace ppbo {

using TaskSet = std::vector<Task>;

struct TaskFolds {
  TaskSet train;
  TaskSet validation;
  TaskSet test;

  [[nodiscard]] TaskSet all() const;
};

struct TaskGenConfig {
  int train = 15;
  int validation = 5;
  int test = 5;
  double left_min = 2.0;
  double left_max = 8.0;
  double cup_width = 0.6;
  double wall_height = 0.4;
  Eigen::Vector2d launch_origin = Eigen::Vector2d(0.0, 1.0);
  bool requires_bounce = false;

  /// Tall-wall family: 1.5 m cups behind 1 m walls with a mandatory floor bounce, so
  /// every task is unsolvable once restitution drops below 0.3.
  static TaskGenConfig tall_walls() {
    TaskGenConfig c;
    c.cup_width = 1.5;
    c.wall_height = 1.0;
    c.requires_bounce = true;
    return c;
  }
};

/// Draws cup positions uniformly, rejecting any cup that no action of `actions`
/// solves in simulation at `check_latent`. Deterministic per seed.
TaskFolds generate_tasks(const TaskGenConfig& cfg, std::uint64_t seed, const ActionSet& actions,
                         const LatentVector& check_latent);

/// True if any action in the grid scores reward 1.
bool solvable(const Task& task, const ActionSet& actions, const EnvironmentSetting& setting);

void write_tasks(const std::filesystem::path& path, const TaskFolds& folds);
TaskFolds read_tasks(const std::filesystem::path& path);

}  // namespace ppbo
