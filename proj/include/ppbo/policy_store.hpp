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
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ppbo/actions.hpp"
#include "ppbo/latent.hpp"
#include "ppbo/physics.hpp"
#include "ppbo/tasks.hpp"

namespace ppbo {

/// Simulated per-action rewards for every (lattice node, task) pair.
///
/// Lattice nodes form a regular res^d grid over the bounds, dimension 0 varying
/// fastest. Scores are stored with one row per (node, task), node-major.
class PolicyTable {
 public:
  PolicyTable() = default;
  PolicyTable(LatentBounds bounds, int lattice_res, ActionSet actions, std::vector<int> task_ids,
              Eigen::MatrixXd scores);

  [[nodiscard]] const LatentBounds& bounds() const { return bounds_; }
  [[nodiscard]] int lattice_res() const { return lattice_res_; }
  [[nodiscard]] const ActionSet& actions() const { return actions_; }
  [[nodiscard]] const std::vector<int>& task_ids() const { return task_ids_; }
  [[nodiscard]] const Eigen::MatrixXd& scores() const { return scores_; }

  [[nodiscard]] int num_nodes() const;
  [[nodiscard]] int num_tasks() const { return static_cast<int>(task_ids_.size()); }
  [[nodiscard]] LatentVector node_latent(int node) const;
  /// Row index of task `id`, or -1.
  [[nodiscard]] int task_row(int id) const;

  [[nodiscard]] auto node_scores(int node, int task_row) const {
    return scores_.row(static_cast<Eigen::Index>(node) * num_tasks() + task_row);
  }

  /// Interpolated scores at `theta`: one row per table task, one column per action.
  [[nodiscard]] Eigen::MatrixXd interpolate(const LatentVector& theta) const;

  bool operator==(const PolicyTable& o) const {
    return lattice_res_ == o.lattice_res_ && actions_ == o.actions_ && task_ids_ == o.task_ids_ &&
           bounds_.lo == o.bounds_.lo && bounds_.hi == o.bounds_.hi && scores_ == o.scores_;
  }

 private:
  LatentBounds bounds_;
  int lattice_res_ = 0;
  ActionSet actions_;
  std::vector<int> task_ids_;
  Eigen::MatrixXd scores_;
};

/// Per-task action orderings, best first; ties broken by ascending action index.
struct RankedPolicy {
  ActionSet actions;
  std::vector<int> task_ids;
  std::vector<std::vector<int>> order;

  [[nodiscard]] const std::vector<int>& for_task(int id) const;
};

struct EvalResult {
  double objective = 0.0;
  std::vector<std::optional<int>> first_success;
  double auccess = 0.0;
  /// Actions actually attempted, summed over tasks.
  long long interactions = 0;
};

/// Exhaustive simulated training over lattice nodes x tasks x actions (damping 0).
PolicyTable train(const TaskSet& tasks, const LatentBounds& bounds, const ActionSet& actions, int lattice_res);

/// Ranks every action of every task by `scores` (rows follow `task_ids`).
RankedPolicy rank_scores(const ActionSet& actions, const std::vector<int>& task_ids, const Eigen::MatrixXd& scores);

/// Conditions the table at `theta` by multilinear interpolation of the surrounding nodes.
RankedPolicy condition(const PolicyTable& table, const LatentVector& theta);

/// Tries each task's ranked actions in order, up to top_k, stopping at the first success.
EvalResult evaluate(const RankedPolicy& policy, const TaskSet& tasks, const EnvironmentSetting& setting, int top_k);

/// Attempt-weighted success with w_k = ln(k+1) - ln(k), k = 1..K.
double auccess(const std::vector<std::optional<int>>& first_success, int K = 100);

void save_policy_table(const std::filesystem::path& path, const PolicyTable& table);

/// Loads and checks internal consistency; throws FormatError on any shape mismatch.
PolicyTable load_policy_table(const std::filesystem::path& path);

/// As above, additionally requiring the given lattice, task ids and action grid.
PolicyTable load_policy_table(const std::filesystem::path& path, int lattice_res, const std::vector<int>& task_ids,
                              const ActionSet& actions);

}  // namespace ppbo
