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

#include "ppbo/physics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "ppbo/csv.hpp"

namespace ppbo {

namespace {

std::atomic<std::uint64_t> g_sim_rollouts{0};
std::atomic<std::uint64_t> g_real_rollouts{0};

void count_rollout(const EnvironmentSetting& setting) {
  if (setting.role == SettingRole::Real)
    g_real_rollouts.fetch_add(1, std::memory_order_relaxed);
  else
    g_sim_rollouts.fetch_add(1, std::memory_order_relaxed);
}

// The ball can never reach the cup again: it is beside the cup and moving away,
// and nothing outside the cup can turn its horizontal velocity around.
bool escaped(const BallState& s, const Task& task) {
  const double x = s.position.x();
  const double vx = s.velocity.x();
  return (x < task.cup_left_x - physics::kBallRadius && vx < 0.0) ||
         (x > task.cup_right_x + physics::kBallRadius && vx > 0.0);
}

template <bool Record>
Trajectory simulate(const Task& task, const Action& action, const EnvironmentSetting& setting, int horizon) {
  if (horizon <= 0) throw InvalidInput("rollout: horizon must be positive");
  if (!action.in_bounds()) throw InvalidInput("rollout: action outside bounds");
  task.validate();
  setting.validate();
  count_rollout(setting);

  BallState s;
  s.position = task.launch_origin;
  s.velocity = Eigen::Vector2d(action.speed * std::cos(action.angle), action.speed * std::sin(action.angle));

  Trajectory traj;
  if constexpr (Record) {
    traj.states.reserve(256);
    traj.states.push_back(s);
  }

  bool bounced_outside = false;
  bool done = false;
  int n = 0;
  while (n < horizon && !done) {
    s = step(s, task, setting);
    ++n;
    if constexpr (Record) traj.states.push_back(s);

    const bool over_cup = s.position.x() >= task.cup_left_x && s.position.x() <= task.cup_right_x;
    if (s.floor_contact && !over_cup) bounced_outside = true;
    const bool inside = task.inside_cup(s.position);

    if (inside && task.requires_bounce && !bounced_outside) {
      done = true;  // direct entry is a miss
    } else if (s.at_rest) {
      traj.reward = inside ? 1.0 : 0.0;
      done = true;
    } else if (escaped(s, task)) {
      done = true;
    } else if (n == horizon) {
      traj.reward = inside ? 1.0 : 0.0;
    }
  }
  traj.steps = n;
  return traj;
}

}  // namespace

void EnvironmentSetting::validate() const {
  if (latent.size() != 2 || !latent.allFinite()) throw InvalidInput("EnvironmentSetting: latent must be 2 finite values");
  if (!std::isfinite(damping) || damping < 0.0) throw InvalidInput("EnvironmentSetting: damping must be >= 0");
  if (role == SettingRole::Simulated && damping != 0.0)
    throw InvalidInput("EnvironmentSetting: simulated settings are undamped");
  if (role == SettingRole::Real && !(damping > 0.0))
    throw InvalidInput("EnvironmentSetting: real settings need positive damping");
}

void Task::validate() const {
  if (!(cup_left_x < cup_right_x)) throw InvalidInput("Task: cup_left_x must be < cup_right_x");
  if (!(cup_wall_height > 0.0)) throw InvalidInput("Task: wall height must be positive");
  if (inside_cup(launch_origin)) throw InvalidInput("Task: launch origin inside the cup");
}

BallState resolve_contact(const BallState& state, const Eigen::Vector2d& normal, const LatentVector& latent,
                          double penetration) {
  const double friction = latent(0);
  const double restitution = latent(1);

  BallState out = state;
  const double vn = state.velocity.dot(normal);
  if (vn < 0.0) {
    const Eigen::Vector2d vt = state.velocity - vn * normal;
    const double vt_norm = vt.norm();
    const double impulse = std::min(vt_norm, friction * (1.0 + restitution) * std::abs(vn));
    Eigen::Vector2d vt_new = vt;
    if (vt_norm > 0.0) vt_new -= (impulse / vt_norm) * vt;
    out.velocity = -restitution * vn * normal + vt_new;
    // Mirror the penetration as a bounce would have, scaled by restitution.
    if (penetration > 0.0) out.position += restitution * penetration * normal;
  }
  if (penetration > 0.0) out.position += penetration * normal;
  return out;
}

BallState step(const BallState& state, const Task& task, const EnvironmentSetting& setting, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("step: dt must be positive");
  if (!state.position.allFinite() || !state.velocity.allFinite()) throw InvalidInput("step: non-finite state");
  if (state.at_rest) return state;

  constexpr double r = physics::kBallRadius;
  const Eigen::Vector2d gravity(0.0, -physics::kGravity);

  BallState s = state;
  s.floor_contact = false;
  s.velocity += dt * (gravity - setting.damping * s.velocity);
  s.position += dt * s.velocity;

  const double gap = s.position.y() - task.cup_floor_y;
  if (gap <= r) {
    s = resolve_contact(s, Eigen::Vector2d(0.0, 1.0), setting.latent, r - gap);
    s.floor_contact = true;
  }

  const double wall_bottom = task.cup_floor_y;
  const double wall_top = task.cup_floor_y + task.cup_wall_height;
  for (double wx : {task.cup_left_x, task.cup_right_x}) {
    const Eigen::Vector2d closest(wx, std::clamp(s.position.y(), wall_bottom, wall_top));
    const Eigen::Vector2d d = s.position - closest;
    const double dist = d.norm();
    if (dist < r) {
      Eigen::Vector2d n = dist > 0.0 ? Eigen::Vector2d(d / dist)
                                     : Eigen::Vector2d(s.velocity.x() > 0.0 ? -1.0 : 1.0, 0.0);
      s = resolve_contact(s, n, setting.latent, r - dist);
    }
  }

  if (s.floor_contact && s.velocity.norm() < physics::kRestSpeed)
    ++s.slow_contact_steps;
  else
    s.slow_contact_steps = 0;
  if (s.slow_contact_steps >= physics::kRestSteps) {
    s.at_rest = true;
    s.velocity.setZero();
  }
  return s;
}

Trajectory rollout(const Task& task, const Action& action, const EnvironmentSetting& setting, int horizon) {
  return simulate<true>(task, action, setting, horizon);
}

double rollout_reward(const Task& task, const Action& action, const EnvironmentSetting& setting, int horizon) {
  return simulate<false>(task, action, setting, horizon).reward;
}

RolloutCounts rollout_counts() {
  return {g_sim_rollouts.load(std::memory_order_relaxed), g_real_rollouts.load(std::memory_order_relaxed)};
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = csv::open_out(path);
  out << "step,x,y,vx,vy\n";
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const auto& s = traj.states[i];
    out << csv::row(csv::num(static_cast<long long>(i)), csv::num(s.position.x()), csv::num(s.position.y()),
                    csv::num(s.velocity.x()), csv::num(s.velocity.y()))
        << '\n';
  }
}

}  // namespace ppbo
