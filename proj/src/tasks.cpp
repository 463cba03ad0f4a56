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

#include "ppbo/tasks.hpp"

#include <fstream>

#include "ppbo/csv.hpp"
#include "ppbo/rng.hpp"

namespace ppbo {

namespace {
constexpr const char* kTaskHeader =
    "fold,id,cup_left_x,cup_right_x,cup_floor_y,cup_wall_height,launch_x,launch_y,requires_bounce";
constexpr int kMaxDrawsPerTask = 1000;
}  // namespace

TaskSet TaskFolds::all() const {
  TaskSet out = train;
  out.insert(out.end(), validation.begin(), validation.end());
  out.insert(out.end(), test.begin(), test.end());
  return out;
}

bool solvable(const Task& task, const ActionSet& actions, const EnvironmentSetting& setting) {
  for (const auto& a : actions.actions())
    if (rollout_reward(task, a, setting) > 0.5) return true;
  return false;
}

TaskFolds generate_tasks(const TaskGenConfig& cfg, std::uint64_t seed, const ActionSet& actions,
                         const LatentVector& check_latent) {
  if (cfg.train < 1 || cfg.validation < 1 || cfg.test < 1) throw InvalidInput("generate_tasks: empty fold");
  if (!(cfg.left_min <= cfg.left_max) || !(cfg.cup_width > 2.0 * physics::kBallRadius))
    throw InvalidInput("generate_tasks: bad cup placement range");

  Rng rng(seed, "tasks");
  const auto check = EnvironmentSetting::simulated(check_latent);
  const int total = cfg.train + cfg.validation + cfg.test;

  TaskSet tasks;
  for (int id = 0; id < total; ++id) {
    bool placed = false;
    for (int draw = 0; draw < kMaxDrawsPerTask && !placed; ++draw) {
      Task t;
      t.id = id;
      t.cup_left_x = rng.uniform(cfg.left_min, cfg.left_max);
      t.cup_right_x = t.cup_left_x + cfg.cup_width;
      t.cup_floor_y = 0.0;
      t.cup_wall_height = cfg.wall_height;
      t.launch_origin = cfg.launch_origin;
      t.requires_bounce = cfg.requires_bounce;
      if (solvable(t, actions, check)) {
        tasks.push_back(t);
        placed = true;
      }
    }
    if (!placed) throw InvalidInput("generate_tasks: could not place a solvable cup");
  }

  TaskFolds folds;
  folds.train.assign(tasks.begin(), tasks.begin() + cfg.train);
  folds.validation.assign(tasks.begin() + cfg.train, tasks.begin() + cfg.train + cfg.validation);
  folds.test.assign(tasks.begin() + cfg.train + cfg.validation, tasks.end());
  return folds;
}

void write_tasks(const std::filesystem::path& path, const TaskFolds& folds) {
  auto out = csv::open_out(path);
  out << kTaskHeader << '\n';
  auto emit = [&](const char* fold, const TaskSet& ts) {
    for (const auto& t : ts)
      out << csv::row(std::string(fold), csv::num(t.id), csv::num(t.cup_left_x), csv::num(t.cup_right_x),
                      csv::num(t.cup_floor_y), csv::num(t.cup_wall_height), csv::num(t.launch_origin.x()),
                      csv::num(t.launch_origin.y()), std::string(t.requires_bounce ? "1" : "0"))
          << '\n';
  };
  emit("train", folds.train);
  emit("validation", folds.validation);
  emit("test", folds.test);
}

TaskFolds read_tasks(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  if (table.header != csv::split(kTaskHeader)) throw FormatError(path.string() + ": not a task file");
  TaskFolds folds;
  for (const auto& r : table.rows) {
    Task t;
    t.id = static_cast<int>(csv::parse_int(r[1]));
    t.cup_left_x = csv::parse_double(r[2]);
    t.cup_right_x = csv::parse_double(r[3]);
    t.cup_floor_y = csv::parse_double(r[4]);
    t.cup_wall_height = csv::parse_double(r[5]);
    t.launch_origin = Eigen::Vector2d(csv::parse_double(r[6]), csv::parse_double(r[7]));
    t.requires_bounce = r[8] == "1";
    t.validate();
    if (r[0] == "train")
      folds.train.push_back(t);
    else if (r[0] == "validation")
      folds.validation.push_back(t);
    else if (r[0] == "test")
      folds.test.push_back(t);
    else
      throw FormatError(path.string() + ": unknown fold '" + r[0] + "'");
  }
  return folds;
}

}  // namespace ppbo
