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

#include <cstddef>
#include <vector>

#include "ppbo/physics.hpp"

namespace ppbo {

/// Regular angle x speed grid of launch actions, row-major (angle-major) so that
/// index = angle_index * speed_steps + speed_index.
class ActionSet {
 public:
  ActionSet() = default;
  ActionSet(int angle_steps, int speed_steps, double angle_lo = Action::kMinAngle, double angle_hi = Action::kMaxAngle,
            double speed_lo = Action::kMinSpeed, double speed_hi = Action::kMaxSpeed);

  [[nodiscard]] std::size_t size() const { return actions_.size(); }
  [[nodiscard]] bool empty() const { return actions_.empty(); }
  const Action& operator[](std::size_t i) const { return actions_[i]; }
  [[nodiscard]] const std::vector<Action>& actions() const { return actions_; }

  [[nodiscard]] int angle_steps() const { return angle_steps_; }
  [[nodiscard]] int speed_steps() const { return speed_steps_; }
  [[nodiscard]] double angle_lo() const { return angle_lo_; }
  [[nodiscard]] double angle_hi() const { return angle_hi_; }
  [[nodiscard]] double speed_lo() const { return speed_lo_; }
  [[nodiscard]] double speed_hi() const { return speed_hi_; }

  bool operator==(const ActionSet& o) const {
    return angle_steps_ == o.angle_steps_ && speed_steps_ == o.speed_steps_ && angle_lo_ == o.angle_lo_ &&
           angle_hi_ == o.angle_hi_ && speed_lo_ == o.speed_lo_ && speed_hi_ == o.speed_hi_;
  }

 private:
  int angle_steps_ = 0;
  int speed_steps_ = 0;
  double angle_lo_ = 0.0, angle_hi_ = 0.0, speed_lo_ = 0.0, speed_hi_ = 0.0;
  std::vector<Action> actions_;
};

}  // namespace ppbo
