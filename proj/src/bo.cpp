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

#include "ppbo/bo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

#include "ppbo/csv.hpp"

namespace ppbo {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
constexpr int kGoldenIterations = 14;
constexpr double kInitialStep = 0.25;
constexpr double kMinStep = 1e-4;

double radical_inverse(int i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * (i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

gp::ObservationSet<double> observations_from_prior(const std::vector<PriorObservation>& prior,
                                                   const LatentBounds& bounds, const SearchConfig& cfg) {
  gp::ObservationSet<double> obs(bounds.dims());
  obs.sim2real = cfg.sim2real;
  obs.real_noise_var = cfg.real_noise_var;
  for (const auto& p : prior) {
    bounds.require_contains(p.x, "search: prior input");
    obs.add_prior(bounds.to_unit(p.x), p.mean, p.var);
  }
  return obs;
}

}  // namespace

void SearchConfig::validate() const {
  if (iterations < 1) throw InvalidInput("SearchConfig: T must be >= 1");
  if (cold_start < 0) throw InvalidInput("SearchConfig: cold_start must be >= 0");
  if (ei_xi < 0.0) throw InvalidInput("SearchConfig: xi must be >= 0");
  if (restarts < 1 || screen_points < restarts) throw InvalidInput("SearchConfig: need restarts <= screen points");
  if (top_k < 1) throw InvalidInput("SearchConfig: top_k must be >= 1");
  if (!(real_noise_var > 0.0) || sim2real < 0.0) throw InvalidInput("SearchConfig: bad noise settings");
  if (!(initial_lengthscale > 0.0) || !(initial_signal_variance > 0.0))
    throw InvalidInput("SearchConfig: initial hyperparameters must be positive");
}

double expected_improvement(double mean, double variance, double best, double xi) {
  if (!(variance >= 0.0)) throw InvalidInput("expected_improvement: negative variance");
  const double sigma = std::sqrt(variance);
  const double gain = mean - best - xi;
  if (sigma < 1e-12) return std::max(gain, 0.0);
  const double z = gain / sigma;
  return std::max(0.0, gain * normal_cdf(z) + sigma * normal_pdf(z));
}

double incumbent(const gp::GpModel<double>& model, const gp::ObservationSet<double>& obs) {
  if (obs.num_real() > 0) return obs.real_y.maxCoeff();
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < obs.num_prior(); ++i) best = std::max(best, model.predict(obs.prior_x.row(i)).mean);
  return best;
}

Eigen::VectorXd propose_unit(const gp::GpModel<double>& model, double best, double xi, int restarts, Rng& rng,
                             int screen_points) {
  const Eigen::Index d = model.inputs().cols();
  if (d > static_cast<Eigen::Index>(std::size(kPrimes))) throw InvalidInput("propose: too many dimensions");
  if (restarts < 1 || screen_points < restarts) throw InvalidInput("propose: need 1 <= restarts <= screen points");
  auto ei = [&](const Eigen::VectorXd& u) {
    const auto p = model.predict(u);
    return expected_improvement(p.mean, p.variance, best, xi);
  };

  Eigen::VectorXd shift(d);
  for (Eigen::Index k = 0; k < d; ++k) shift(k) = rng.uniform();
  std::vector<Eigen::VectorXd> screen(screen_points, Eigen::VectorXd(d));
  std::vector<double> score(screen_points);
  for (int i = 0; i < screen_points; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double h = radical_inverse(i + 1, kPrimes[k]) + shift(k);
      screen[i](k) = h - std::floor(h);
    }
    score[i] = ei(screen[i]);
  }
  std::vector<int> order(screen_points);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[a] > score[b]; });

  Eigen::VectorXd best_u = screen[order[0]];
  double best_ei = score[order[0]];
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd u = screen[order[r]];
    double f = score[order[r]];
    for (double step = kInitialStep; step >= kMinStep; step *= 0.5) {
      for (Eigen::Index k = 0; k < d; ++k) {
        double a = std::max(0.0, u(k) - step), b = std::min(1.0, u(k) + step);
        Eigen::VectorXd probe = u;
        auto at = [&](double t) {
          probe(k) = t;
          return ei(probe);
        };
        double c = b - kInvPhi * (b - a), e = a + kInvPhi * (b - a);
        double fc = at(c), fe = at(e);
        for (int it = 0; it < kGoldenIterations; ++it) {
          if (fc >= fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - kInvPhi * (b - a);
            fc = at(c);
          } else {
            a = c;
            c = e;
            fc = fe;
            e = a + kInvPhi * (b - a);
            fe = at(e);
          }
        }
        const double t = fc >= fe ? c : e;
        const double ft = std::max(fc, fe);
        if (ft > f) {
          u(k) = t;
          f = ft;
        }
      }
    }
    if (f > best_ei) {
      best_ei = f;
      best_u = u;
    }
  }
  return best_u;
}

LatentVector propose(const gp::GpModel<double>& model, const LatentBounds& bounds, double best, double xi,
                     int restarts, Rng& rng, int screen_points) {
  return bounds.clamp(bounds.from_unit(propose_unit(model, best, xi, restarts, rng, screen_points)));
}

SearchHistory search(const Objective& objective, const std::vector<PriorObservation>& prior,
                     const LatentBounds& bounds, const SearchConfig& cfg) {
  cfg.validate();
  bounds.validate();
  Rng rng(cfg.seed, "bo.search");
  auto obs = observations_from_prior(prior, bounds, cfg);
  auto hyper = gp::KernelHyper<double>::from(Eigen::VectorXd::Constant(bounds.dims(), cfg.initial_lengthscale),
                                             cfg.initial_signal_variance);

  SearchHistory history;
  history.best_y = -std::numeric_limits<double>::infinity();
  long long interactions = 0;
  auto record = [&](const LatentVector& x, bool cold) {
    const auto result = objective(x);
    interactions += result.interactions;
    obs.add_real(bounds.to_unit(x), result.value);
    if (result.value > history.best_y) {
      history.best_y = result.value;
      history.best_x = x;
    }
    history.entries.push_back({static_cast<int>(history.entries.size()) + 1, x, result.value, history.best_y,
                               interactions, cold});
  };

  if (prior.empty() || cfg.cold_start_with_prior) {
    Rng cold = rng.split("cold_start");
    for (int c = 0; c < cfg.cold_start; ++c) {
      LatentVector x(bounds.dims());
      for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = cold.uniform(bounds.lo(k), bounds.hi(k));
      record(x, true);
    }
  }

  for (int i = 1; i <= cfg.iterations; ++i) {
    Rng step_rng = rng.split("iteration." + std::to_string(i));
    if (obs.size() == 0) {
      LatentVector x(bounds.dims());
      for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = step_rng.uniform(bounds.lo(k), bounds.hi(k));
      record(x, false);
      continue;
    }
    if (cfg.reoptimize_hyper && obs.size() >= 2) {
      auto opt = cfg.hyper_opt;
      opt.seed = Rng::mix(cfg.seed ^ Rng::fnv1a("gp.hyper")) + static_cast<std::uint64_t>(i);
      hyper = gp::optimize_hyper(obs, hyper, {}, opt);
    }
    const auto model = gp::GpModel<double>::fit(obs, hyper);
    const double best = incumbent(model, obs);
    record(propose(model, bounds, best, cfg.ei_xi, cfg.restarts, step_rng, cfg.screen_points), false);
  }
  return history;
}

Objective policy_objective(const PolicyTable& table, const TaskSet& tasks, const EnvironmentSetting& real, int top_k) {
  return [&table, &tasks, real, top_k](const LatentVector& theta) {
    const auto r = evaluate(condition(table, theta), tasks, real, top_k);
    return ObjectiveValue{r.objective, r.interactions};
  };
}

SearchHistory search(const PolicyTable& table, const std::vector<PriorObservation>& prior, const TaskSet& tasks,
                     const EnvironmentSetting& real, const SearchConfig& cfg) {
  if (real.role != SettingRole::Real) throw InvalidInput("search: target setting must be the real world");
  real.validate();
  return search(policy_objective(table, tasks, real, cfg.top_k), prior, table.bounds(), cfg);
}

void write_history_csv(std::ostream& out, std::uint64_t trial_seed, const SearchHistory& history, bool with_header) {
  const Eigen::Index d = history.entries.empty() ? 0 : history.entries.front().x.size();
  if (with_header) {
    out << "trial_seed,iter";
    for (Eigen::Index k = 0; k < d; ++k) out << ",theta_" << (k + 1);
    out << ",objective,best_so_far,interactions\n";
  }
  for (const auto& e : history.entries) {
    out << trial_seed << ',' << e.iteration;
    for (Eigen::Index k = 0; k < d; ++k) out << ',' << csv::num(e.x(k));
    out << ',' << csv::row(csv::num(e.objective), csv::num(e.best_so_far), csv::num(e.interactions)) << '\n';
  }
}

std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto cols = table.header.size();
  if (cols < 6 || table.header[0] != "trial_seed" || table.header[cols - 1] != "interactions")
    throw FormatError(path.string() + ": not a history file");
  const auto d = static_cast<Eigen::Index>(cols - 5);
  std::vector<HistoryRow> rows;
  for (const auto& r : table.rows) {
    HistoryRow h;
    h.trial_seed = static_cast<std::uint64_t>(csv::parse_int(r[0]));
    h.iteration = static_cast<int>(csv::parse_int(r[1]));
    h.x.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) h.x(k) = csv::parse_double(r[2 + k]);
    h.objective = csv::parse_double(r[2 + d]);
    h.best_so_far = csv::parse_double(r[3 + d]);
    h.interactions = csv::parse_int(r[4 + d]);
    rows.push_back(std::move(h));
  }
  return rows;
}

}  // namespace ppbo
