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

#include "ppbo/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ppbo/csv.hpp"
#include "ppbo/parallel.hpp"
#include "ppbo/rng.hpp"

namespace ppbo {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

void PriorConfig::validate() const {
  bounds.validate();
  if (samples < 1) throw InvalidInput("PriorConfig: N must be >= 1");
  if (settings < 3) throw InvalidInput("PriorConfig: E must be >= 3");
  if (!(min_p_value >= 0.0 && min_p_value < 1.0)) throw InvalidInput("PriorConfig: gamma must lie in [0, 1)");
  if (eval_top_k < 1) throw InvalidInput("PriorConfig: eval_top_k must be >= 1");
}

std::vector<LatentVector> sample_latents(int n, const LatentBounds& bounds, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("sample_latents: N must be >= 1");
  bounds.validate();
  Rng rng(seed, "prior.latents");
  std::vector<LatentVector> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    LatentVector x(bounds.dims());
    for (Eigen::Index d = 0; d < x.size(); ++d) x(d) = rng.uniform(bounds.lo(d), bounds.hi(d));
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<EnvironmentSetting> sample_settings(int n, const LatentBounds& bounds, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("sample_settings: E must be >= 1");
  bounds.validate();
  Rng rng(seed, "prior.settings");
  std::vector<EnvironmentSetting> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    LatentVector x(bounds.dims());
    for (Eigen::Index d = 0; d < x.size(); ++d) x(d) = rng.uniform(bounds.lo(d), bounds.hi(d));
    out.push_back(EnvironmentSetting::simulated(std::move(x)));
  }
  return out;
}

double kolmogorov_tail(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 0.2) {
    // The alternating series needs O(1/lambda) terms here; its Jacobi-theta dual converges in one or two.
    const double l2 = lambda * lambda;
    double cdf = 0.0;
    for (int j = 1; j <= 5; ++j) {
      const double k = 2.0 * j - 1.0;
      cdf += std::exp(-k * k * std::numbers::pi * std::numbers::pi / (8.0 * l2));
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int j = 1;; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-10) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> samples, double mu, double var) {
  if (samples.size() < 3) throw InvalidInput("ks_test: need at least 3 samples");
  if (!std::isfinite(mu) || !std::isfinite(var) || var < 0.0) throw InvalidInput("ks_test: bad reference parameters");
  if (var == 0.0) throw DegenerateDistribution("ks_test: zero variance");

  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double sd = std::sqrt(var);
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf((x[i] - mu) / sd);
    const double d_plus = (static_cast<double>(i) + 1.0) / n - f;
    const double d_minus = f - static_cast<double>(i) / n;
    d = std::max({d, d_plus, d_minus});
  }
  const double sqrt_n = std::sqrt(n);
  const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
  return {d, kolmogorov_tail(lambda)};
}

std::vector<PriorObservation> build_prior(const PolicyTable& table, const TaskSet& tasks, const PriorConfig& cfg,
                                          std::uint64_t seed) {
  cfg.validate();
  if (tasks.empty()) throw InvalidInput("build_prior: empty task set");
  const auto latents = sample_latents(cfg.samples, cfg.bounds, seed);
  const auto settings = sample_settings(cfg.settings, cfg.bounds, seed);

  std::vector<PriorObservation> out(latents.size());
  parallel_for(latents.size(), [&](std::size_t n) {
    const auto policy = condition(table, latents[n]);
    std::vector<double> y(settings.size());
    for (std::size_t e = 0; e < settings.size(); ++e) y[e] = evaluate(policy, tasks, settings[e], cfg.eval_top_k).objective;

    PriorObservation& obs = out[n];
    obs.x = latents[n];
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    obs.mean = mean;
    obs.var = ss / static_cast<double>(y.size() - 1);
    if (obs.var > 0.0) {
      obs.p_value = ks_test(y, obs.mean, obs.var).p_value;
      obs.kept = obs.p_value >= cfg.min_p_value;
    } else {
      obs.p_value = 0.0;
      obs.kept = false;
    }
  });
  return out;
}

std::vector<PriorObservation> kept_only(const std::vector<PriorObservation>& prior) {
  std::vector<PriorObservation> out;
  std::copy_if(prior.begin(), prior.end(), std::back_inserter(out), [](const auto& p) { return p.kept; });
  return out;
}

void write_prior_csv(const std::filesystem::path& path, const std::vector<PriorObservation>& prior) {
  if (prior.empty()) throw InvalidInput("write_prior_csv: empty prior");
  auto out = csv::open_out(path);
  const auto d = prior.front().x.size();
  for (Eigen::Index k = 0; k < d; ++k) out << "theta_" << (k + 1) << ',';
  out << "mu,var,p_value,kept\n";
  for (const auto& p : prior) {
    for (Eigen::Index k = 0; k < d; ++k) out << csv::num(p.x(k)) << ',';
    out << csv::row(csv::num(p.mean), csv::num(p.var), csv::num(p.p_value), std::string(p.kept ? "1" : "0")) << '\n';
  }
}

std::vector<PriorObservation> read_prior_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto cols = table.header.size();
  if (cols < 5 || table.header[cols - 4] != "mu" || table.header[cols - 1] != "kept")
    throw FormatError(path.string() + ": not a prior file");
  const auto d = static_cast<Eigen::Index>(cols - 4);
  std::vector<PriorObservation> out;
  for (const auto& r : table.rows) {
    PriorObservation p;
    p.x.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) p.x(k) = csv::parse_double(r[k]);
    p.mean = csv::parse_double(r[d]);
    p.var = csv::parse_double(r[d + 1]);
    p.p_value = csv::parse_double(r[d + 2]);
    p.kept = r[d + 3] == "1";
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ppbo
