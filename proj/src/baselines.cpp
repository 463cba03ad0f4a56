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

#include "ppbo/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ppbo/errors.hpp"
#include "ppbo/parallel.hpp"
#include "ppbo/rng.hpp"

namespace ppbo {

SearchHistory no_prior_search(const Objective& objective, const LatentBounds& bounds, const SearchConfig& cfg) {
  return search(objective, {}, bounds, cfg);
}

SearchHistory no_prior_search(const PolicyTable& table, const TaskSet& tasks, const EnvironmentSetting& real,
                              const SearchConfig& cfg) {
  return search(table, {}, tasks, real, cfg);
}

Eigen::MatrixXd domain_randomized_scores(const PolicyTable& table, int samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidInput("domain_randomized_scores: need at least one sample");
  const auto& b = table.bounds();
  Rng rng(seed, "dr.latents");
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(table.num_tasks(), table.actions().size());
  LatentVector theta(b.dims());
  for (int m = 0; m < samples; ++m) {
    for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) = rng.uniform(b.lo(k), b.hi(k));
    sum += table.interpolate(theta);
  }
  return sum / samples;
}

RankedPolicy domain_randomized_policy(const PolicyTable& table, int samples, std::uint64_t seed) {
  return rank_scores(table.actions(), table.task_ids(), domain_randomized_scores(table, samples, seed));
}

std::vector<Probe> record_probes(const TaskSet& tasks, const EnvironmentSetting& setting, int actions_per_task,
                                 std::uint64_t seed) {
  if (actions_per_task < 1) throw InvalidInput("record_probes: need at least one action per task");
  if (tasks.empty()) throw InvalidInput("record_probes: no tasks");
  setting.validate();
  Rng rng(seed, "estimated.probes");
  std::vector<Probe> probes;
  for (const auto& task : tasks) {
    for (int a = 0; a < actions_per_task; ++a) {
      Action act;
      act.angle = rng.uniform(Action::kMinAngle, Action::kMaxAngle);
      act.speed = rng.uniform(Action::kMinSpeed, Action::kMaxSpeed);
      probes.push_back({task, act, {}});
    }
  }
  parallel_for(probes.size(), [&](std::size_t i) { probes[i].observed = rollout(probes[i].task, probes[i].action, setting); });
  return probes;
}

double trajectory_residual(const LatentVector& theta, const std::vector<Probe>& probes) {
  if (probes.empty()) throw InvalidInput("trajectory_residual: no probes");
  const auto sim = EnvironmentSetting::simulated(theta);
  double total = 0.0;
  for (const auto& p : probes) {
    const auto traj = rollout(p.task, p.action, sim);
    const auto& a = traj.states;
    const auto& b = p.observed.states;
    if (a.empty() || b.empty()) throw InvalidInput("trajectory_residual: empty trajectory");
    // A trajectory that stopped early ended at rest, so it holds its last position.
    const std::size_t n = std::max(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += (a[std::min(i, a.size() - 1)].position - b[std::min(i, b.size() - 1)].position).squaredNorm();
    total += s / static_cast<double>(n);
  }
  return total / static_cast<double>(probes.size());
}

void CemConfig::validate(const LatentBounds& bounds) const {
  if (population < 2 || elites < 1 || elites >= population) throw InvalidInput("CemConfig: need 1 <= elites < population");
  if (iterations < 1) throw InvalidInput("CemConfig: iterations must be >= 1");
  if (probe_actions < 1) throw InvalidInput("CemConfig: probe_actions must be >= 1");
  if (probe_tasks < 1) throw InvalidInput("CemConfig: probe_tasks must be >= 1");
  if (init_mean.size() != 0 && init_mean.size() != bounds.dims()) throw InvalidInput("CemConfig: init_mean dimension");
  if (init_std.size() != 0 && (init_std.size() != bounds.dims() || !(init_std.array() > 0.0).all()))
    throw InvalidInput("CemConfig: init_std must be positive per dimension");
}

CemResult estimate_latents_cem(const Residual& residual, const CemConfig& cfg, const LatentBounds& bounds,
                               std::uint64_t seed) {
  bounds.validate();
  cfg.validate(bounds);
  constexpr double kStdFloor = 1e-3;
  const Eigen::Index d = bounds.dims();
  LatentVector mean = cfg.init_mean.size() ? bounds.clamp(cfg.init_mean) : bounds.midpoint();
  Eigen::VectorXd sd = cfg.init_std.size() ? cfg.init_std : Eigen::VectorXd(bounds.range() / 4.0);
  Rng rng(seed, "estimated.cem");

  CemResult result;
  // Fresh samples first, then the previous elites with their scores.
  std::vector<LatentVector> pop(cfg.population, LatentVector(d));
  std::vector<double> score(cfg.population);
  std::vector<int> order;
  for (int it = 0; it < cfg.iterations; ++it) {
    for (int i = 0; i < cfg.population; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) pop[i](k) = mean(k) + sd(k) * rng.normal();
      pop[i] = bounds.clamp(pop[i]);
    }
    parallel_for(static_cast<std::size_t>(cfg.population), [&](std::size_t i) { score[i] = residual(pop[i]); });
    order.resize(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[a] < score[b]; });

    std::vector<LatentVector> elites(cfg.elites);
    std::vector<double> elite_scores(cfg.elites);
    LatentVector m = LatentVector::Zero(d);
    double elite_score = 0.0;
    for (int e = 0; e < cfg.elites; ++e) {
      elites[e] = pop[order[e]];
      elite_scores[e] = score[order[e]];
      m += elites[e];
      elite_score += elite_scores[e];
    }
    m /= cfg.elites;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    for (const auto& x : elites) v += (x - m).array().square().matrix();
    v /= cfg.elites;
    mean = m;
    sd = v.cwiseSqrt().cwiseMax(kStdFloor);
    result.elite_trace.push_back(elite_score / cfg.elites);

    pop.resize(cfg.population);
    score.resize(cfg.population);
    pop.insert(pop.end(), elites.begin(), elites.end());
    score.insert(score.end(), elite_scores.begin(), elite_scores.end());
  }
  result.estimate = bounds.clamp(mean);
  return result;
}

CemResult estimate_latents_cem(const std::vector<Probe>& probes, const CemConfig& cfg, const LatentBounds& bounds,
                               std::uint64_t seed) {
  if (probes.empty()) throw InvalidInput("estimate_latents_cem: no probes");
  return estimate_latents_cem([&](const LatentVector& theta) { return trajectory_residual(theta, probes); }, cfg,
                              bounds, seed);
}

}  // namespace ppbo
