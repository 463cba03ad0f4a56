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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include <doctest.h>

#include "ppbo/errors.hpp"
#include "ppbo/prior.hpp"
#include "ks_oracle.hpp"

using namespace ppbo;
using oracle::phi_inv;
using oracle::samples_with_statistic;

namespace {

Task cup(int id, double left) {
  Task t;
  t.id = id;
  t.cup_left_x = left;
  t.cup_right_x = left + 0.6;
  t.cup_wall_height = 0.4;
  return t;
}

}  // namespace

TEST_CASE("uniform latent samples") {
  LatentBounds unit;
  unit.lo = Eigen::Vector2d(0, 0);
  unit.hi = Eigen::Vector2d(1, 1);
  const auto one = sample_latents(1, unit, 50);
  REQUIRE(one.size() == 1);
  CHECK(unit.contains(one[0]));
  CHECK(sample_latents(1, unit, 50)[0] == one[0]);

  const auto b = LatentBounds::friction_restitution();
  const int n = 10000;
  const auto xs = sample_latents(n, b, 50);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& x : xs) {
    CHECK(b.contains(x));
    mean += x;
  }
  mean /= n;
  for (int d = 0; d < 2; ++d) {
    const double se = b.range()(d) / std::sqrt(12.0 * n);
    CHECK(std::abs(mean(d) - b.midpoint()(d)) < 3.0 * se);
  }

  const auto settings = sample_settings(n, b, 50);
  Eigen::Vector2d smean = Eigen::Vector2d::Zero();
  for (const auto& s : settings) {
    CHECK(s.role == SettingRole::Simulated);
    CHECK(s.damping == 0.0);
    CHECK(b.contains(s.latent));
    smean += s.latent;
  }
  smean /= n;
  for (int d = 0; d < 2; ++d) CHECK(std::abs(smean(d) - b.midpoint()(d)) < 3.0 * b.range()(d) / std::sqrt(12.0 * n));
  CHECK(sample_settings(3, b, 9)[2].latent == sample_settings(3, b, 9)[2].latent);
  CHECK_THROWS_AS(sample_latents(0, b, 1), InvalidInput);
}

TEST_CASE("ks statistic at normal quantiles") {
  for (int n : {10, 50, 100}) {
    std::vector<double> x;
    for (int i = 1; i <= n; ++i) x.push_back(phi_inv((i - 0.5) / n));
    const auto r = ks_test(x, 0.0, 1.0);
    CHECK(r.statistic == doctest::Approx(0.5 / n).epsilon(1e-9));
    CHECK(r.p_value > 0.999);
  }
}

TEST_CASE("ks p-value at the classical ten percent critical value") {
  const auto x = samples_with_statistic(100, 0.121);
  const auto r = ks_test(x, 0.0, 1.0);
  CHECK(r.statistic == doctest::Approx(0.121).epsilon(1e-9));
  CHECK(r.p_value >= 0.08);
  CHECK(r.p_value <= 0.12);
}

TEST_CASE("ks is invariant to consistent affine maps") {
  const auto x = samples_with_statistic(40, 0.17);
  const auto base = ks_test(x, 0.1, 1.3);
  for (double c : {0.01, 2.5, 1e3}) {
    std::vector<double> y;
    for (double v : x) y.push_back(c * v - 7.0);
    const auto r = ks_test(y, c * 0.1 - 7.0, c * c * 1.3);
    CHECK(std::abs(r.statistic - base.statistic) < 1e-12);
    CHECK(std::abs(r.p_value - base.p_value) < 1e-12);
  }
}

TEST_CASE("ks preconditions") {
  const std::vector<double> c{0.5, 0.5, 0.5, 0.5};
  CHECK_THROWS_AS(ks_test(c, 0.5, 0.0), DegenerateDistribution);
  const std::vector<double> two{0.1, 0.2};
  CHECK_THROWS_AS(ks_test(two, 0.15, 0.01), InvalidInput);
}

TEST_CASE("kolmogorov tail") {
  CHECK(kolmogorov_tail(0.0) == 1.0);
  CHECK(kolmogorov_tail(-1.0) == 1.0);
  CHECK(kolmogorov_tail(5.0) < 1e-20);
  // tabulated values of the Kolmogorov distribution
  CHECK(kolmogorov_tail(1.2238) == doctest::Approx(0.10).epsilon(2e-3));
  CHECK(kolmogorov_tail(1.3581) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(kolmogorov_tail(1.6276) == doctest::Approx(0.01).epsilon(5e-3));
  double prev = 1.0;
  for (int i = 1; i <= 400; ++i) {
    const double p = kolmogorov_tail(i * 0.01);
    CHECK(p <= prev + 1e-12);
    CHECK(p >= 0.0);
    prev = p;
  }
  CHECK(std::abs(kolmogorov_tail(0.2 - 1e-12) - kolmogorov_tail(0.2)) < 1e-9);
}

TEST_CASE("prior construction") {
  const TaskSet tasks{cup(0, 2.5), cup(1, 4.0), cup(2, 5.5), cup(3, 7.0)};
  const auto table = train(tasks, LatentBounds::friction_restitution(), ActionSet(12, 12), 3);
  PriorConfig cfg;
  cfg.samples = 20;

  SUBCASE("only simulation is used and every record obeys the filter rule") {
    const auto before = rollout_counts();
    const auto prior = build_prior(table, tasks, cfg, 1);
    CHECK(rollout_counts().real == before.real);
    REQUIRE(prior.size() == 20);
    for (const auto& p : prior) {
      CHECK(p.kept == (p.p_value >= cfg.min_p_value && p.var > 0.0));
      CHECK(p.var >= 0.0);
      CHECK(p.p_value >= 0.0);
      CHECK(p.p_value <= 1.0);
      CHECK(cfg.bounds.contains(p.x));
    }
    const auto again = build_prior(table, tasks, cfg, 1);
    for (std::size_t i = 0; i < prior.size(); ++i) {
      CHECK(again[i].x == prior[i].x);
      CHECK(again[i].mean == prior[i].mean);
      CHECK(again[i].p_value == prior[i].p_value);
    }
    CHECK(kept_only(prior).size() == static_cast<std::size_t>(std::count_if(
                                         prior.begin(), prior.end(), [](const auto& p) { return p.kept; })));
  }
  SUBCASE("identical settings leave nothing to keep") {
    cfg.bounds.lo = Eigen::Vector2d(1.0, 0.5);
    cfg.bounds.hi = Eigen::Vector2d(1.0 + 1e-12, 0.5 + 1e-12);
    for (const auto& p : build_prior(table, tasks, cfg, 1)) {
      CHECK(p.var == 0.0);
      CHECK_FALSE(p.kept);
    }
  }
  SUBCASE("a zero threshold keeps every non-degenerate record") {
    cfg.min_p_value = 0.0;
    for (const auto& p : build_prior(table, tasks, cfg, 1)) CHECK(p.kept == (p.var > 0.0));
  }
  SUBCASE("csv round trip") {
    const auto prior = build_prior(table, tasks, cfg, 4);
    const auto path = std::filesystem::temp_directory_path() / "ppbo_prior_test.csv";
    write_prior_csv(path, prior);
    const auto back = read_prior_csv(path);
    REQUIRE(back.size() == prior.size());
    for (std::size_t i = 0; i < prior.size(); ++i) {
      CHECK(back[i].x == prior[i].x);
      CHECK(back[i].mean == prior[i].mean);
      CHECK(back[i].var == prior[i].var);
      CHECK(back[i].p_value == prior[i].p_value);
      CHECK(back[i].kept == prior[i].kept);
    }
    std::filesystem::remove(path);
  }
  CHECK_THROWS_AS(build_prior(table, {}, cfg, 1), InvalidInput);
}
