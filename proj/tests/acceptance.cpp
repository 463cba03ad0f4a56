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

// Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gp_oracle.hpp"
#include "ks_oracle.hpp"
#include "ppbo/bo.hpp"
#include "ppbo/experiment.hpp"
#include "ppbo/gp.hpp"
#include "ppbo/physics.hpp"
#include "ppbo/policy_store.hpp"
#include "ppbo/prior.hpp"

using namespace ppbo;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ppbo_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void run_pipeline(const ExperimentConfig& cfg, const fs::path& dir) {
  std::ostringstream log;
  cmd_train_upn(cfg, dir, log);
  cmd_build_prior(cfg, dir, log);
  for (const auto& m : cfg.methods) cmd_search(cfg, m, dir, log);
  cmd_report(cfg, dir, log);
}

// best_so_far column per trial seed, in file order.
std::map<std::uint64_t, std::vector<double>> best_by_seed(const fs::path& history) {
  std::map<std::uint64_t, std::vector<double>> out;
  for (const auto& r : read_history_csv(history)) out[r.trial_seed].push_back(r.best_so_far);
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

gp::ObservationSet<double> mixed_obs(std::uint64_t seed, int n_prior, int n_real) {
  Rng rng(seed, "acceptance.obs");
  gp::ObservationSet<double> obs(2);
  for (int i = 0; i < n_prior; ++i)
    obs.add_prior(Eigen::Vector2d(rng.uniform(), rng.uniform()), rng.uniform(-1, 1), rng.uniform(0.0, 0.2));
  for (int i = 0; i < n_real; ++i) obs.add_real(Eigen::Vector2d(rng.uniform(), rng.uniform()), rng.uniform(-1, 1));
  return obs;
}

Task far_cup() {
  Task t;
  t.cup_left_x = 1000.0;
  t.cup_right_x = 1000.6;
  t.cup_wall_height = 0.4;
  return t;
}

BallState flying(double x, double y, double vx, double vy) {
  BallState s;
  s.position = {x, y};
  s.velocity = {vx, vy};
  return s;
}

void gp_oracle_equivalence(Verdict& v) {
  double worst = 0.0, slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto obs = mixed_obs(seed, 3, 5);
    const auto h = gp::KernelHyper<double>::from(Eigen::Vector2d(0.3, 0.5), 1.5);
    const auto t0 = Clock::now();
    const auto model = gp::GpModel<double>::fit(obs, h);
    Rng rng(seed, "acceptance.queries");
    std::vector<gp::Prediction<double>> got;
    std::vector<Eigen::Vector2d> qs;
    for (int q = 0; q < 50; ++q) {
      qs.emplace_back(rng.uniform(), rng.uniform());
      got.push_back(model.predict(qs.back()));
    }
    slowest = std::max(slowest, seconds_since(t0));
    const oracle::Posterior o(obs, h);
    for (std::size_t q = 0; q < qs.size(); ++q) {
      const auto e = o.predict(qs[q]);
      worst = std::max({worst, std::abs(got[q].mean - e.mean), std::abs(got[q].variance - e.variance)});
    }
  }
  v.detail << "max |diff| " << worst << ", fit+50 predictions " << slowest << " s";
  v.require(worst <= 1e-8, "diff <= 1e-8");
  v.require(slowest < 1.0, "runtime < 1 s");
}

void augmented_cov(Verdict& v) {
  gp::ObservationSet<double> obs(2);
  obs.sim2real = 0.01;
  obs.real_noise_var = 1e-4;
  obs.add_prior(Eigen::Vector2d(0.0, 0.0), 0.3, 0.2);
  obs.add_prior(Eigen::Vector2d(0.5, 0.0), 0.1, 0.05);
  obs.add_real(Eigen::Vector2d(0.0, 0.5), 0.7);
  const auto h = gp::KernelHyper<double>::from(Eigen::Vector2d(0.5, 0.25), 2.0);
  const double k01 = 2.0 * std::exp(-0.5), k02 = 2.0 * std::exp(-2.0), k12 = 2.0 * std::exp(-2.5);
  Eigen::Matrix3d hand;
  hand << 2.0 + 0.2 + 0.01, k01, k02,
          k01, 2.0 + 0.05 + 0.01, k12,
          k02, k12, 2.0 + 1e-4;
  const double diff = (gp::build_augmented_cov(obs, h) - hand).cwiseAbs().maxCoeff();
  v.detail << "max entry diff " << diff;
  v.require(diff <= 1e-12, "entries within 1e-12");
}

void expected_improvement_check(Verdict& v) {
  const double ei = expected_improvement(0.0, 1.0, 0.0, 0.0);
  Rng rng(2024, "acceptance.ei");
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::max(rng.normal(), 0.0);
  const double mc = sum / n;
  v.detail << "closed form " << ei << ", monte carlo " << mc;
  v.require(std::abs(ei - 0.398942) <= 1e-6, "0.398942 +- 1e-6");
  v.require(std::abs(mc - ei) <= 1e-3, "monte carlo within 1e-3");
}

void ks_calibration(Verdict& v) {
  const auto x = oracle::samples_with_statistic(100, 0.121);
  const auto r = ks_test(x, 0.0, 1.0);
  double drift = 0.0;
  const auto base = ks_test(oracle::samples_with_statistic(40, 0.17), 0.1, 1.3);
  for (double c : {0.01, 2.5, 1e3}) {
    std::vector<double> y;
    for (double s : oracle::samples_with_statistic(40, 0.17)) y.push_back(c * s - 7.0);
    const auto a = ks_test(y, c * 0.1 - 7.0, c * c * 1.3);
    drift = std::max({drift, std::abs(a.statistic - base.statistic), std::abs(a.p_value - base.p_value)});
  }
  v.detail << "D " << r.statistic << ", p " << r.p_value << ", affine drift " << drift;
  v.require(std::abs(r.statistic - 0.121) < 1e-9, "D = 0.121");
  v.require(r.p_value >= 0.08 && r.p_value <= 0.12, "p in [0.08, 0.12]");
  v.require(drift <= 1e-12, "affine invariance 1e-12");
}

void auccess_check(Verdict& v) {
  double wsum = 0.0;
  for (int k = 1; k <= 100; ++k) wsum += std::log(k + 1.0) - std::log(static_cast<double>(k));
  const double all_first = auccess({1, 1, 1, 1, 1});
  const double last = auccess({100});
  v.detail << "sum w " << wsum << ", all at 1 " << all_first << ", only at 100 " << last;
  v.require(std::abs(wsum - std::log(101.0)) <= 1e-12, "telescoping");
  v.require(std::abs(all_first - 1.0) <= 1e-12, "all solved at 1");
  v.require(std::abs(last - std::log(1.01) / std::log(101.0)) <= 1e-9, "solved only at 100");
}

void physics_sanity(Verdict& v) {
  const auto elastic = EnvironmentSetting::simulated(Eigen::Vector2d(0.0, 1.0));
  BallState s = flying(0.0, 2.0, 0.0, 0.0);
  std::vector<double> apex;
  double prev_vy = 0.0;
  for (int i = 0; i < 200000 && apex.size() < 10; ++i) {
    s = step(s, far_cup(), elastic);
    if (prev_vy > 0.0 && s.velocity.y() <= 0.0) apex.push_back(s.position.y());
    prev_vy = s.velocity.y();
  }
  double drift = 0.0;
  for (double h : apex) drift = std::max(drift, std::abs(h - 2.0) / 2.0);

  const auto sim = EnvironmentSetting::simulated(Eigen::Vector2d(0.0, 0.5));
  double worst_ratio = 0.0;
  for (double deg : {20.0, 45.0, 70.0}) {
    for (double speed : {4.0, 9.0}) {
      const double th = deg * std::numbers::pi / 180.0;
      BallState b = flying(0.0, 1.0, speed * std::cos(th), speed * std::sin(th));
      double px = b.position.x(), py = b.position.y();
      while (!(b.velocity.y() < 0.0 && b.position.y() <= 1.0)) {
        px = b.position.x();
        py = b.position.y();
        b = step(b, far_cup(), sim);
      }
      const double t = (py - 1.0) / (py - b.position.y());
      const double x = px + t * (b.position.x() - px);
      const double expect = speed * speed * std::sin(2.0 * th) / physics::kGravity;
      worst_ratio = std::max(worst_ratio, std::abs(x - expect) / (b.velocity.norm() * physics::kDt));
    }
  }
  v.detail << apex.size() << " apexes, max drift " << drift * 100.0 << "%, range error " << worst_ratio
           << " step displacements";
  v.require(apex.size() == 10, "ten bounces");
  v.require(drift < 0.01, "apex drift < 1%");
  v.require(worst_ratio <= 1.0, "range within one step");
}

void qualitative_ordering(Verdict& v, const fs::path& dir, double seconds) {
  std::map<std::string, double> med, jump;
  for (const std::string m : {"policy_prior", "no_prior"}) {
    std::vector<double> iters;
    for (const auto& [seed, best] : best_by_seed(dir / ("history_" + m + ".csv")))
      iters.push_back(iterations_to_fraction(best, 0.95));
    med[m] = median(iters);
    std::vector<double> a;
    for (const auto& j : read_jumpstart_csv(dir / ("jumpstart_" + m + ".csv"))) a.push_back(j.auccess);
    jump[m] = mean_stderr(a).mean;
  }
  v.detail << "median iterations to 95%: policy_prior " << med["policy_prior"] << ", no_prior " << med["no_prior"]
           << "; jump-start AUCCESS: policy_prior " << jump["policy_prior"] << ", no_prior " << jump["no_prior"]
           << "; full run " << seconds << " s";
  v.require(med["policy_prior"] <= med["no_prior"], "median iterations policy_prior <= no_prior");
  v.require(jump["policy_prior"] >= jump["no_prior"] - 0.02, "jump start within 0.02");
  v.require(seconds < 600.0, "full run < 10 min");
}

void filter_ablation(Verdict& v) {
  const auto cfg = load_config(PPBO_CONFIG_DIR "/tall_walls.json");
  const auto dir = scratch("tall_filtered");
  std::ostringstream log;
  cmd_train_upn(cfg, dir, log);
  cmd_build_prior(cfg, dir, log);

  // every task is out of reach below restitution 0.3, whatever the friction
  const auto tasks = read_tasks(dir / "tasks.csv").all();
  const auto actions = cfg.action_set();
  int solvable_low = 0, checked = 0;
  for (double e : {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.299})
    for (double f : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0})
      for (const auto& t : tasks) {
        ++checked;
        solvable_low += solvable(t, actions, EnvironmentSetting::simulated(Eigen::Vector2d(f, e)));
      }

  const auto unfiltered_dir = scratch("tall_unfiltered");
  fs::create_directories(unfiltered_dir);
  for (const char* f : {"tasks.csv", "upn.txt", "prior.csv"}) fs::copy_file(dir / f, unfiltered_dir / f);
  auto unfiltered = cfg;
  unfiltered.filter_prior = false;
  cmd_search(cfg, "policy_prior", dir, log);
  cmd_search(unfiltered, "policy_prior", unfiltered_dir, log);

  auto mean_final = [](const fs::path& history) {
    std::vector<double> finals;
    for (const auto& [seed, best] : best_by_seed(history)) finals.push_back(best.back());
    return mean_stderr(finals).mean;
  };
  const double filtered_best = mean_final(dir / "history_policy_prior.csv");
  const double unfiltered_best = mean_final(unfiltered_dir / "history_policy_prior.csv");
  const auto prior = read_prior_csv(dir / "prior.csv");
  const auto kept = kept_only(prior).size();
  v.detail << solvable_low << " of " << checked << " (task, latent) pairs with restitution < 0.3 solvable; prior kept "
           << kept << " of " << prior.size() << "; mean final best filtered " << filtered_best << ", unfiltered "
           << unfiltered_best;
  v.require(solvable_low == 0, "unsolvable below restitution 0.3");
  v.require(filtered_best >= unfiltered_best, "filtered >= unfiltered");
  fs::remove_all(dir);
  fs::remove_all(unfiltered_dir);
}

void graceful_degradation(Verdict& v) {
  Rng rng(9, "acceptance.degrade");
  gp::ObservationSet<double> with(2), without(2);
  for (int i = 0; i < 6; ++i) {
    const Eigen::Vector2d x(rng.uniform(), rng.uniform());
    with.add_prior(x, rng.uniform(-1, 1), 1e12);
  }
  for (int i = 0; i < 5; ++i) {
    const Eigen::Vector2d x(rng.uniform(), rng.uniform());
    const double y = rng.uniform(-1, 1);
    with.add_real(x, y);
    without.add_real(x, y);
  }
  const auto h = gp::KernelHyper<double>::from(Eigen::Vector2d(0.3, 0.3), 1.0);
  const auto a = gp::GpModel<double>::fit(with, h);
  const auto b = gp::GpModel<double>::fit(without, h);
  double worst = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 4; ++j) {
      const Eigen::Vector2d x((i + 0.5) / 8.0, (j + 0.5) / 4.0);
      const auto p = a.predict(x), q = b.predict(x);
      worst = std::max({worst, std::abs(p.mean - q.mean), std::abs(p.variance - q.variance)});
    }
  v.detail << "max |diff| over 32 points " << worst;
  v.require(worst <= 1e-3, "within 1e-3");
}

void determinism(Verdict& v, const ExperimentConfig& cfg, const fs::path& first) {
  const auto second = scratch("determinism");
  run_pipeline(cfg, second);
  int files = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(first)) {
    const auto ext = e.path().extension();
    if (ext != ".csv" && ext != ".txt") continue;
    ++files;
    if (!fs::exists(second / e.path().filename()) || slurp(e.path()) != slurp(second / e.path().filename())) {
      ++differ;
      v.detail << " differs: " << e.path().filename().string();
    }
  }
  v.detail << files << " output files compared, " << differ << " differ";
  v.require(files > 0 && differ == 0, "byte-identical outputs");
  fs::remove_all(second);
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const char* name, const std::function<void(Verdict&)>& body) {
    Verdict v;
    const auto t0 = Clock::now();
    try {
      body(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    failures += !v.pass;
    std::printf("criterion %2d %s: %s (%s; %.1f s)\n", n, v.pass ? "PASS" : "FAIL", name, v.detail.str().c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  };

  report(1, "GP oracle equivalence", gp_oracle_equivalence);
  report(2, "augmented covariance assembly", augmented_cov);
  report(3, "expected improvement", expected_improvement_check);
  report(4, "KS calibration", ks_calibration);
  report(5, "AUCCESS", auccess_check);
  report(6, "physics sanity", physics_sanity);

  const auto cfg = load_config(PPBO_CONFIG_DIR "/default.json");
  const auto main_run = scratch("default");
  double pipeline_seconds = 0.0;
  std::string pipeline_error;
  try {
    const auto t0 = Clock::now();
    run_pipeline(cfg, main_run);
    pipeline_seconds = seconds_since(t0);
  } catch (const std::exception& e) {
    pipeline_error = e.what();
  }
  auto needs_pipeline = [&](auto fn) {
    return [&, fn](Verdict& v) {
      if (!pipeline_error.empty()) throw std::runtime_error("default pipeline: " + pipeline_error);
      fn(v);
    };
  };
  report(7, "policy prior ahead of no prior", needs_pipeline([&](Verdict& v) { qualitative_ordering(v, main_run, pipeline_seconds); }));
  report(8, "Gaussianity filter ablation", filter_ablation);
  report(9, "graceful degradation", graceful_degradation);
  report(10, "determinism", needs_pipeline([&](Verdict& v) { determinism(v, cfg, main_run); }));
  fs::remove_all(main_run);

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
