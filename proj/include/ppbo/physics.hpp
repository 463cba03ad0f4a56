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

#include <Eigen/Core>

#include "ppbo/latent.hpp"

namespace ppbo {

namespace physics {
inline constexpr double kDt = 1.0 / 240.0;
inline constexpr double kGravity = 9.81;
inline constexpr double kBallRadius = 0.1;
inline constexpr double kRestSpeed = 0.05;
inline constexpr int kRestSteps = 10;
inline constexpr int kDefaultHorizon = 2400;
inline constexpr double kDefaultRealDamping = 0.8;
}  // namespace physics

enum class SettingRole { Simulated, Real };

struct EnvironmentSetting {
  LatentVector latent;
  double damping = 0.0;
  SettingRole role = SettingRole::Simulated;

  static EnvironmentSetting simulated(LatentVector latent) {
    return {std::move(latent), 0.0, SettingRole::Simulated};
  }
  static EnvironmentSetting real(LatentVector latent, double damping = physics::kDefaultRealDamping) {
    return {std::move(latent), damping, SettingRole::Real};
  }
  /// Simulated needs zero damping, Real needs positive damping.
  void validate() const;
};

/// A cup of two vertical walls standing on the floor, and a fixed launch point.
struct Task {
  int id = 0;
  double cup_left_x = 0.0;
  double cup_right_x = 0.0;
  double cup_floor_y = 0.0;
  double cup_wall_height = 0.0;
  Eigen::Vector2d launch_origin = Eigen::Vector2d(0.0, 1.0);
  /// When set, entering the cup only counts after the ball touched the floor outside it.
  bool requires_bounce = false;

  void validate() const;
  [[nodiscard]] bool inside_cup(const Eigen::Vector2d& p) const {
    return p.x() > cup_left_x && p.x() < cup_right_x && p.y() < cup_floor_y + cup_wall_height;
  }
};

struct Action {
  double angle = 0.0;  // radians
  double speed = 0.0;  // m/s

  static constexpr double kMinAngle = 10.0 * 3.14159265358979323846 / 180.0;
  static constexpr double kMaxAngle = 80.0 * 3.14159265358979323846 / 180.0;
  static constexpr double kMinSpeed = 1.0;
  static constexpr double kMaxSpeed = 15.0;

  [[nodiscard]] bool in_bounds() const {
    return angle >= kMinAngle && angle <= kMaxAngle && speed >= kMinSpeed && speed <= kMaxSpeed;
  }
};

struct BallState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  bool at_rest = false;
  /// Consecutive slow steps spent in floor contact; at_rest latches at kRestSteps.
  int slow_contact_steps = 0;
  /// Set by step() when the floor was touched during that step.
  bool floor_contact = false;

  bool operator==(const BallState&) const = default;
};

struct Trajectory {
  std::vector<BallState> states;
  double reward = 0.0;
  int steps = 0;
};

/// Applies restitution and Coulomb friction for a contact with unit `normal`,
/// then pushes the ball `penetration` metres out along the normal.
/// Velocity is left alone when already separating.
BallState resolve_contact(const BallState& state, const Eigen::Vector2d& normal, const LatentVector& latent,
                          double penetration = 0.0);

/// One semi-implicit Euler step with gravity, linear drag and contacts against the
/// floor and both cup walls. A ball that is at rest stays put.
BallState step(const BallState& state, const Task& task, const EnvironmentSetting& setting,
               double dt = physics::kDt);

/// Launch, simulate and score. Reward is 1 iff the ball settles inside the cup,
/// or is inside it when the horizon runs out.
Trajectory rollout(const Task& task, const Action& action, const EnvironmentSetting& setting,
                   int horizon = physics::kDefaultHorizon);

/// Same outcome as rollout(...).reward without recording states.
double rollout_reward(const Task& task, const Action& action, const EnvironmentSetting& setting,
                      int horizon = physics::kDefaultHorizon);

/// Process-wide rollout tallies, split by setting role. Diagnostics only.
struct RolloutCounts {
  std::uint64_t simulated = 0;
  std::uint64_t real = 0;
};
RolloutCounts rollout_counts();

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace ppbo
