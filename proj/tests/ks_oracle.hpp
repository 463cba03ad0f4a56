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

#include <cmath>
#include <vector>

namespace oracle {

inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Standard normal quantile by bisection on the CDF.
inline double phi_inv(double u) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Samples whose empirical CDF sits exactly D above the standard normal CDF on the right tail.
inline std::vector<double> samples_with_statistic(int n, double d) {
  std::vector<double> x;
  const int first = static_cast<int>(std::ceil(d * n)) + 1;
  const double floor_u = static_cast<double>(first) / n - d;
  for (int i = 1; i < first; ++i) x.push_back(phi_inv((i - 0.5) * floor_u / (first - 1)));
  for (int i = first; i <= n; ++i) x.push_back(phi_inv(static_cast<double>(i) / n - d));
  return x;
}

}  // namespace oracle
