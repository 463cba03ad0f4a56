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

#include "ppbo/actions.hpp"

namespace ppbo {

ActionSet::ActionSet(int angle_steps, int speed_steps, double angle_lo, double angle_hi, double speed_lo,
                     double speed_hi)
    : angle_steps_(angle_steps),
      speed_steps_(speed_steps),
      angle_lo_(angle_lo),
      angle_hi_(angle_hi),
      speed_lo_(speed_lo),
      speed_hi_(speed_hi) {
  if (angle_steps < 1 || speed_steps < 1) throw InvalidInput("ActionSet: grid must be non-empty");
  if (angle_lo < Action::kMinAngle || angle_hi > Action::kMaxAngle || angle_lo > angle_hi ||
      speed_lo < Action::kMinSpeed || speed_hi > Action::kMaxSpeed || speed_lo > speed_hi)
    throw InvalidInput("ActionSet: grid exceeds action bounds");

  auto lerp = [](double lo, double hi, int i, int n) { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); };
  actions_.reserve(static_cast<std::size_t>(angle_steps) * speed_steps);
  for (int a = 0; a < angle_steps; ++a)
    for (int s = 0; s < speed_steps; ++s)
      actions_.push_back({lerp(angle_lo, angle_hi, a, angle_steps), lerp(speed_lo, speed_hi, s, speed_steps)});
}

}  // namespace ppbo
