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

#include "ppbo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ppbo/csv.hpp"
#include "ppbo/errors.hpp"
#include "ppbo/parallel.hpp"
#include "ppbo/policy_store.hpp"

namespace ppbo {

namespace {

using nlohmann::json;

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidInput("config: " + where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw InvalidInput("config: unknown key '" + where + "." + k + "'");
}

template <typename T>
void get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

LatentVector vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::filesystem::path history_path(const std::filesystem::path& dir, const std::string& m) {
  return dir / ("history_" + m + ".csv");
}
std::filesystem::path jumpstart_path(const std::filesystem::path& dir, const std::string& m) {
  return dir / ("jumpstart_" + m + ".csv");
}

TaskFolds load_tasks(const std::filesystem::path& dir) {
  const auto p = dir / "tasks.csv";
  if (!std::filesystem::exists(p)) throw InvalidInput("missing " + p.string() + "; run train-upn first");
  return read_tasks(p);
}

PolicyTable load_table(const ExperimentConfig& cfg, const std::filesystem::path& dir, const TaskFolds& folds) {
  const auto p = dir / "upn.txt";
  if (!std::filesystem::exists(p)) throw InvalidInput("missing " + p.string() + "; run train-upn first");
  std::vector<int> ids;
  for (const auto& t : folds.all()) ids.push_back(t.id);
  return load_policy_table(p, cfg.lattice_res, ids, cfg.action_set());
}

SearchHistory single_evaluation(const LatentVector& x, const EvalResult& r, long long extra_interactions) {
  SearchHistory h;
  h.best_x = x;
  h.best_y = r.objective;
  h.entries.push_back({1, x, r.objective, r.objective, r.interactions + extra_interactions, false});
  return h;
}

}  // namespace

ExperimentConfig::ExperimentConfig() : real_latent(Eigen::Vector2d(0.1, 0.8)) {}

void ExperimentConfig::validate() const {
  if (variant != "default" && variant != "tall_walls") throw InvalidInput("config: unknown variant " + variant);
  if (lattice_res < 2) throw InvalidInput("config: lattice_res must be >= 2");
  if (angle_steps < 1 || speed_steps < 1) throw InvalidInput("config: empty action grid");
  bounds.validate();
  prior.validate();
  search.validate();
  cem.validate(bounds);
  if (prior.bounds.lo != bounds.lo || prior.bounds.hi != bounds.hi) throw InvalidInput("config: prior bounds differ");
  if (top_k_jumpstart < 1) throw InvalidInput("config: top_k_jumpstart must be >= 1");
  if (dr_samples < 1) throw InvalidInput("config: dr_samples must be >= 1");
  real_setting().validate();
  bounds.require_contains(real_latent, "config: real latent");
  if (trial_seeds.empty()) throw InvalidInput("config: trial_seeds is empty");
  if (std::set(trial_seeds.begin(), trial_seeds.end()).size() != trial_seeds.size())
    throw InvalidInput("config: trial_seeds must be distinct");
  for (const auto& m : methods)
    if (std::find(std::begin(kMethods), std::end(kMethods), m) == std::end(kMethods))
      throw InvalidInput("config: unknown method " + m);
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  try {
    only_keys(j,
              {"task_seed", "variant", "folds", "tasks", "lattice_res", "actions", "bounds", "prior", "search",
               "top_k_jumpstart", "real", "trial_seeds", "methods", "dr_samples", "cem"},
              "");
    get(j, "task_seed", c.task_seed);
    get(j, "variant", c.variant);
    if (c.variant == "tall_walls") c.tasks = TaskGenConfig::tall_walls();
    if (j.contains("folds")) {
      const auto& f = j["folds"];
      only_keys(f, {"train", "validation", "test"}, "folds");
      get(f, "train", c.tasks.train);
      get(f, "validation", c.tasks.validation);
      get(f, "test", c.tasks.test);
    }
    if (j.contains("tasks")) {
      const auto& t = j["tasks"];
      only_keys(t, {"left_min", "left_max", "cup_width", "wall_height", "requires_bounce"}, "tasks");
      get(t, "left_min", c.tasks.left_min);
      get(t, "left_max", c.tasks.left_max);
      get(t, "cup_width", c.tasks.cup_width);
      get(t, "wall_height", c.tasks.wall_height);
      get(t, "requires_bounce", c.tasks.requires_bounce);
    }
    get(j, "lattice_res", c.lattice_res);
    if (j.contains("actions")) {
      only_keys(j["actions"], {"angle_steps", "speed_steps"}, "actions");
      get(j["actions"], "angle_steps", c.angle_steps);
      get(j["actions"], "speed_steps", c.speed_steps);
    }
    if (j.contains("bounds")) {
      only_keys(j["bounds"], {"lo", "hi"}, "bounds");
      c.bounds.lo = vec(j["bounds"].at("lo"));
      c.bounds.hi = vec(j["bounds"].at("hi"));
    }
    c.prior.bounds = c.bounds;
    if (j.contains("prior")) {
      const auto& p = j["prior"];
      only_keys(p, {"samples", "settings", "min_p_value", "eval_top_k", "seed", "filter"}, "prior");
      get(p, "samples", c.prior.samples);
      get(p, "settings", c.prior.settings);
      get(p, "min_p_value", c.prior.min_p_value);
      get(p, "eval_top_k", c.prior.eval_top_k);
      get(p, "seed", c.prior_seed);
      get(p, "filter", c.filter_prior);
    }
    if (j.contains("search")) {
      const auto& s = j["search"];
      only_keys(s,
                {"iterations", "cold_start", "ei_xi", "restarts", "screen_points", "top_k", "reoptimize_hyper",
                 "sim2real", "real_noise_var", "initial_lengthscale", "initial_signal_variance", "hyper_restarts",
                 "hyper_iterations"},
                "search");
      get(s, "iterations", c.search.iterations);
      get(s, "cold_start", c.search.cold_start);
      get(s, "ei_xi", c.search.ei_xi);
      get(s, "restarts", c.search.restarts);
      get(s, "screen_points", c.search.screen_points);
      get(s, "top_k", c.search.top_k);
      get(s, "reoptimize_hyper", c.search.reoptimize_hyper);
      get(s, "sim2real", c.search.sim2real);
      get(s, "real_noise_var", c.search.real_noise_var);
      get(s, "initial_lengthscale", c.search.initial_lengthscale);
      get(s, "initial_signal_variance", c.search.initial_signal_variance);
      get(s, "hyper_restarts", c.search.hyper_opt.restarts);
      get(s, "hyper_iterations", c.search.hyper_opt.iterations);
    }
    get(j, "top_k_jumpstart", c.top_k_jumpstart);
    if (j.contains("real")) {
      only_keys(j["real"], {"damping", "latent"}, "real");
      get(j["real"], "damping", c.real_damping);
      if (j["real"].contains("latent")) c.real_latent = vec(j["real"]["latent"]);
    }
    get(j, "trial_seeds", c.trial_seeds);
    get(j, "methods", c.methods);
    get(j, "dr_samples", c.dr_samples);
    if (j.contains("cem")) {
      const auto& m = j["cem"];
      only_keys(m, {"population", "elites", "iterations", "probe_actions", "probe_tasks", "init_mean", "init_std"}, "cem");
      get(m, "population", c.cem.population);
      get(m, "elites", c.cem.elites);
      get(m, "iterations", c.cem.iterations);
      get(m, "probe_actions", c.cem.probe_actions);
      get(m, "probe_tasks", c.cem.probe_tasks);
      if (m.contains("init_mean")) c.cem.init_mean = vec(m["init_mean"]);
      if (m.contains("init_std")) c.cem.init_std = vec(m["init_std"]);
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

TrialResult run_trial(const ExperimentConfig& cfg, const std::string& method, std::uint64_t trial_seed,
                      const PolicyTable& table, const TaskFolds& folds, const std::vector<PriorObservation>& prior) {
  const auto real = cfg.real_setting();
  auto s = cfg.search;
  s.seed = trial_seed;
  TrialResult out;
  RankedPolicy policy;
  if (method == "policy_prior") {
    const auto used = cfg.filter_prior ? kept_only(prior) : prior;
    out.history = search(table, used, folds.validation, real, s);
    out.jump.x = out.history.best_x;
    policy = condition(table, out.jump.x);
  } else if (method == "no_prior") {
    out.history = no_prior_search(table, folds.validation, real, s);
    out.jump.x = out.history.best_x;
    policy = condition(table, out.jump.x);
  } else if (method == "dr") {
    policy = domain_randomized_policy(table, cfg.dr_samples, trial_seed);
    out.jump.x = LatentVector::Constant(cfg.bounds.dims(), std::numeric_limits<double>::quiet_NaN());
    out.history = single_evaluation(out.jump.x, evaluate(policy, folds.validation, real, s.top_k), 0);
  } else if (method == "estimated") {
    const auto n = std::min(folds.train.size(), static_cast<std::size_t>(cfg.cem.probe_tasks));
    const TaskSet probed(folds.train.begin(), folds.train.begin() + static_cast<std::ptrdiff_t>(n));
    const auto probes = record_probes(probed, real, cfg.cem.probe_actions, trial_seed);
    out.jump.x = estimate_latents_cem(probes, cfg.cem, cfg.bounds, trial_seed).estimate;
    out.jump.probe_interactions = static_cast<long long>(probes.size());
    policy = condition(table, out.jump.x);
    out.history = single_evaluation(out.jump.x, evaluate(policy, folds.validation, real, s.top_k),
                                    out.jump.probe_interactions);
  } else {
    throw InvalidInput("unknown method " + method);
  }
  const auto js = evaluate(policy, folds.test, real, cfg.top_k_jumpstart);
  out.jump.trial_seed = trial_seed;
  out.jump.auccess = js.auccess;
  out.jump.objective = js.objective;
  out.jump.interactions = out.history.interactions();
  return out;
}

void cmd_train_upn(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  cfg.validate();
  const auto actions = cfg.action_set();
  const auto folds = generate_tasks(cfg.tasks, cfg.task_seed, actions, cfg.real_latent);
  std::filesystem::create_directories(dir);
  write_tasks(dir / "tasks.csv", folds);
  const auto table = train(folds.all(), cfg.bounds, actions, cfg.lattice_res);
  save_policy_table(dir / "upn.txt", table);
  log << "tasks " << folds.train.size() << '/' << folds.validation.size() << '/' << folds.test.size()
      << ", table " << table.num_nodes() << " nodes x " << table.num_tasks() << " tasks x " << actions.size()
      << " actions\n";
}

void cmd_build_prior(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  cfg.validate();
  const auto folds = load_tasks(dir);
  const auto table = load_table(cfg, dir, folds);
  const auto prior = build_prior(table, folds.train, cfg.prior, cfg.prior_seed);
  write_prior_csv(dir / "prior.csv", prior);
  const auto kept = kept_only(prior).size();
  log << "prior: kept " << kept << " of " << prior.size() << " observations (filtered out " << prior.size() - kept
      << ")\n";
}

void cmd_search(const ExperimentConfig& cfg, const std::string& method, const std::filesystem::path& dir,
                std::ostream& log) {
  cfg.validate();
  if (std::find(std::begin(kMethods), std::end(kMethods), method) == std::end(kMethods))
    throw InvalidInput("unknown method " + method);
  const auto folds = load_tasks(dir);
  const auto table = load_table(cfg, dir, folds);
  std::vector<PriorObservation> prior;
  if (method == "policy_prior") {
    const auto p = dir / "prior.csv";
    if (!std::filesystem::exists(p)) throw InvalidInput("missing " + p.string() + "; run build-prior first");
    prior = read_prior_csv(p);
    for (const auto& o : prior) cfg.bounds.require_contains(o.x, "search: prior record");
  }

  std::vector<TrialResult> results(cfg.trial_seeds.size());
  parallel_for(results.size(), [&](std::size_t i) {
    try {
      results[i] = run_trial(cfg, method, cfg.trial_seeds[i], table, folds, prior);
    } catch (const std::exception& e) {
      throw std::runtime_error(method + " trial seed " + std::to_string(cfg.trial_seeds[i]) + ": " + e.what());
    }
  });

  auto out = csv::open_out(history_path(dir, method));
  std::vector<JumpStart> jumps;
  for (std::size_t i = 0; i < results.size(); ++i) {
    write_history_csv(out, cfg.trial_seeds[i], results[i].history, i == 0);
    jumps.push_back(results[i].jump);
    log << method << " seed " << cfg.trial_seeds[i] << ": best " << csv::num(results[i].history.best_y)
        << ", jump-start AUCCESS " << csv::num(results[i].jump.auccess) << ", interactions "
        << results[i].jump.interactions << '\n';
  }
  write_jumpstart_csv(jumpstart_path(dir, method), jumps);
}

void write_jumpstart_csv(const std::filesystem::path& path, const std::vector<JumpStart>& rows) {
  auto out = csv::open_out(path);
  const Eigen::Index d = rows.empty() ? 0 : rows.front().x.size();
  out << "trial_seed";
  for (Eigen::Index k = 0; k < d; ++k) out << ",theta_" << (k + 1);
  out << ",auccess,objective,interactions,probe_interactions\n";
  for (const auto& r : rows) {
    out << r.trial_seed;
    for (Eigen::Index k = 0; k < d; ++k) out << ',' << csv::num(r.x(k));
    out << ',' << csv::row(csv::num(r.auccess), csv::num(r.objective), csv::num(r.interactions),
                           csv::num(r.probe_interactions))
        << '\n';
  }
}

std::vector<JumpStart> read_jumpstart_csv(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto cols = t.header.size();
  if (cols < 5 || t.header[0] != "trial_seed" || t.header[cols - 4] != "auccess")
    throw FormatError(path.string() + ": not a jump-start file");
  const auto d = static_cast<Eigen::Index>(cols - 5);
  std::vector<JumpStart> rows;
  for (const auto& r : t.rows) {
    JumpStart j;
    j.trial_seed = static_cast<std::uint64_t>(csv::parse_int(r[0]));
    j.x.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) j.x(k) = csv::parse_double(r[1 + k]);
    j.auccess = csv::parse_double(r[1 + d]);
    j.objective = csv::parse_double(r[2 + d]);
    j.interactions = csv::parse_int(r[3 + d]);
    j.probe_interactions = csv::parse_int(r[4 + d]);
    rows.push_back(j);
  }
  return rows;
}

MeanStderr mean_stderr(const std::vector<double>& v) {
  if (v.empty()) throw InvalidInput("mean_stderr: no values");
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double delta = v[k] - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (v[k] - mean);
  }
  const double n = static_cast<double>(v.size());
  if (v.size() == 1) return {mean, 0.0};
  return {mean, std::sqrt(m2 / (n - 1.0)) / std::sqrt(n)};
}

int iterations_to_fraction(const std::vector<double>& best, double fraction) {
  if (best.empty()) throw InvalidInput("iterations_to_fraction: empty history");
  const double target = fraction * best.back();
  for (std::size_t i = 0; i < best.size(); ++i)
    if (best[i] >= target) return static_cast<int>(i) + 1;
  return static_cast<int>(best.size());
}

std::vector<double> search_curve(const std::vector<double>& best, int iterations) {
  if (best.empty() || iterations < 1) throw InvalidInput("search_curve: empty history");
  const std::size_t T = static_cast<std::size_t>(iterations);
  std::vector<double> c(best.end() - static_cast<std::ptrdiff_t>(std::min(T, best.size())), best.end());
  c.resize(T, best.back());
  return c;
}

void cmd_report(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  cfg.validate();
  const int T = cfg.search.iterations;
  std::ostringstream txt;
  txt << std::left << std::setw(14) << "method" << std::setw(22) << "jump-start AUCCESS" << std::setw(16)
      << "final best" << std::setw(14) << "iters to 95%" << std::setw(14) << "interactions"
      << "probe interactions\n";
  auto report = csv::open_out(dir / "report.csv");
  report << "method,auccess_mean,auccess_stderr,interactions_mean\n";
  int found = 0;
  for (const auto& m : cfg.methods) {
    if (!std::filesystem::exists(history_path(dir, m)) || !std::filesystem::exists(jumpstart_path(dir, m))) continue;
    ++found;
    const auto rows = read_history_csv(history_path(dir, m));
    const auto jumps = read_jumpstart_csv(jumpstart_path(dir, m));
    if (jumps.empty()) throw FormatError(jumpstart_path(dir, m).string() + ": no trials");

    std::vector<std::uint64_t> seeds;
    std::map<std::uint64_t, std::vector<double>> best;
    for (const auto& r : rows) {
      if (!best.count(r.trial_seed)) seeds.push_back(r.trial_seed);
      best[r.trial_seed].push_back(r.best_so_far);
    }
    std::vector<double> auc, inter, probes, finals, iters;
    for (const auto& j : jumps) {
      auc.push_back(j.auccess);
      inter.push_back(static_cast<double>(j.interactions));
      probes.push_back(static_cast<double>(j.probe_interactions));
    }
    std::vector<std::vector<double>> curves;
    for (auto s : seeds) {
      finals.push_back(best[s].back());
      iters.push_back(iterations_to_fraction(best[s]));
      curves.push_back(search_curve(best[s], T));
    }
    std::sort(iters.begin(), iters.end());
    const double median = iters.size() % 2 ? iters[iters.size() / 2]
                                           : 0.5 * (iters[iters.size() / 2 - 1] + iters[iters.size() / 2]);
    const auto a = mean_stderr(auc);
    const auto f = mean_stderr(finals);
    const auto n = mean_stderr(inter);
    report << csv::row(m, csv::num(a.mean), csv::num(a.stderr_), csv::num(n.mean)) << '\n';

    auto curve = csv::open_out(dir / ("curve_" + m + ".csv"));
    curve << "iteration,mean,stderr\n";
    for (int i = 0; i < T; ++i) {
      std::vector<double> col;
      for (const auto& c : curves) col.push_back(c[static_cast<std::size_t>(i)]);
      const auto ms = mean_stderr(col);
      curve << csv::row(csv::num(i + 1), csv::num(ms.mean), csv::num(ms.stderr_)) << '\n';
    }

    std::ostringstream js, fb;
    js << std::fixed << std::setprecision(4) << a.mean << " +/- " << a.stderr_;
    fb << std::fixed << std::setprecision(4) << f.mean;
    txt << std::setw(14) << m << std::setw(22) << js.str() << std::setw(16) << fb.str() << std::setw(14) << median
        << std::setw(14) << n.mean << mean_stderr(probes).mean << '\n';
  }
  if (found == 0) throw InvalidInput("report: no results in " + dir.string());
  auto out = csv::open_out(dir / "report.txt");
  out << txt.str();
  log << txt.str();
}

}  // namespace ppbo
