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

#include <Eigen/Core>

#include "ppbo/errors.hpp"

namespace ppbo {

/// Latent dynamics factors; index 0 is friction, index 1 restitution.
using LatentVector = Eigen::VectorXd;

/// Axis-aligned box over latent space.
struct LatentBounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  /// Friction in [0, 3], restitution in [0, 1].
  static LatentBounds friction_restitution() {
    LatentBounds b{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(3.0, 1.0)};
    return b;
  }

  [[nodiscard]] Eigen::Index dims() const { return lo.size(); }
  [[nodiscard]] Eigen::VectorXd range() const { return hi - lo; }
  [[nodiscard]] LatentVector midpoint() const { return 0.5 * (lo + hi); }

  void validate() const {
    if (lo.size() == 0 || lo.size() != hi.size()) throw InvalidInput("LatentBounds: dimension mismatch");
    if (!(lo.array() < hi.array()).all()) throw InvalidInput("LatentBounds: lo must be < hi");
  }

  [[nodiscard]] bool contains(const LatentVector& x) const {
    return x.size() == lo.size() && x.allFinite() && (x.array() >= lo.array()).all() &&
           (x.array() <= hi.array()).all();
  }

  void require_contains(const LatentVector& x, const char* who) const {
    if (!contains(x)) throw InvalidInput(std::string(who) + ": latent vector outside bounds");
  }

  [[nodiscard]] LatentVector clamp(const LatentVector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

  /// Map into [0, 1]^d.
  [[nodiscard]] Eigen::VectorXd to_unit(const LatentVector& x) const {
    return ((x - lo).array() / (hi - lo).array()).matrix();
  }
  [[nodiscard]] LatentVector from_unit(const Eigen::VectorXd& u) const {
    return lo + (u.array() * (hi - lo).array()).matrix();
  }
};

}  // namespace ppbo
