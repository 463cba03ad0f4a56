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

#include "ppbo/policy_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ppbo/csv.hpp"
#include "ppbo/parallel.hpp"

namespace ppbo {

namespace {

constexpr const char* kMagic = "ppbo-policy-table";
constexpr int kFormatVersion = 1;

int int_pow(int base, Eigen::Index exp) {
  int out = 1;
  for (Eigen::Index i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace

PolicyTable::PolicyTable(LatentBounds bounds, int lattice_res, ActionSet actions, std::vector<int> task_ids,
                         Eigen::MatrixXd scores)
    : bounds_(std::move(bounds)),
      lattice_res_(lattice_res),
      actions_(std::move(actions)),
      task_ids_(std::move(task_ids)),
      scores_(std::move(scores)) {
  bounds_.validate();
  if (lattice_res_ < 2) throw InvalidInput("PolicyTable: lattice_res must be >= 2");
  if (actions_.empty() || task_ids_.empty()) throw InvalidInput("PolicyTable: no tasks or actions");
  if (scores_.rows() != static_cast<Eigen::Index>(num_nodes()) * num_tasks() ||
      scores_.cols() != static_cast<Eigen::Index>(actions_.size()))
    throw InvalidInput("PolicyTable: score tensor shape mismatch");
  if ((scores_.array() < 0.0).any() || (scores_.array() > 1.0).any())
    throw InvalidInput("PolicyTable: scores must lie in [0, 1]");
}

int PolicyTable::num_nodes() const { return int_pow(lattice_res_, bounds_.dims()); }

LatentVector PolicyTable::node_latent(int node) const {
  const Eigen::Index d = bounds_.dims();
  LatentVector theta(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const int i = node % lattice_res_;
    node /= lattice_res_;
    // Exact endpoints, so that a node on the boundary reproduces the bound bit-for-bit.
    theta(k) = i == lattice_res_ - 1
                   ? bounds_.hi(k)
                   : bounds_.lo(k) + (bounds_.hi(k) - bounds_.lo(k)) * i / (lattice_res_ - 1);
  }
  return theta;
}

int PolicyTable::task_row(int id) const {
  auto it = std::find(task_ids_.begin(), task_ids_.end(), id);
  return it == task_ids_.end() ? -1 : static_cast<int>(it - task_ids_.begin());
}

Eigen::MatrixXd PolicyTable::interpolate(const LatentVector& theta) const {
  bounds_.require_contains(theta, "condition");
  const Eigen::Index d = bounds_.dims();
  std::vector<int> cell(d);
  std::vector<double> frac(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double u = (theta(k) - bounds_.lo(k)) / (bounds_.hi(k) - bounds_.lo(k)) * (lattice_res_ - 1);
    const int i = std::min(static_cast<int>(std::floor(u)), lattice_res_ - 2);
    cell[k] = i;
    frac[k] = u - i;
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(num_tasks(), static_cast<Eigen::Index>(actions_.size()));
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    int node = 0;
    int stride = 1;
    for (Eigen::Index k = 0; k < d; ++k) {
      const bool upper = (corner >> k) & 1;
      w *= upper ? frac[k] : 1.0 - frac[k];
      node += (cell[k] + (upper ? 1 : 0)) * stride;
      stride *= lattice_res_;
    }
    if (w == 0.0) continue;
    out += w * scores_.middleRows(static_cast<Eigen::Index>(node) * num_tasks(), num_tasks());
  }
  return out;
}

const std::vector<int>& RankedPolicy::for_task(int id) const {
  for (std::size_t i = 0; i < task_ids.size(); ++i)
    if (task_ids[i] == id) return order[i];
  throw InvalidInput("RankedPolicy: unknown task id " + std::to_string(id));
}

PolicyTable train(const TaskSet& tasks, const LatentBounds& bounds, const ActionSet& actions, int lattice_res) {
  bounds.validate();
  if (lattice_res < 2) throw InvalidInput("train: lattice_res must be >= 2");
  if (tasks.empty() || actions.empty()) throw InvalidInput("train: no tasks or actions");

  std::vector<int> ids;
  for (const auto& t : tasks) ids.push_back(t.id);
  const int nodes = int_pow(lattice_res, bounds.dims());
  const auto n_tasks = static_cast<Eigen::Index>(tasks.size());
  const auto n_actions = static_cast<Eigen::Index>(actions.size());

  // Placeholder table to reuse node_latent().
  PolicyTable layout(bounds, lattice_res, actions, ids, Eigen::MatrixXd::Zero(nodes * n_tasks, n_actions));
  Eigen::MatrixXd scores(nodes * n_tasks, n_actions);

  parallel_for(static_cast<std::size_t>(nodes * n_tasks), [&](std::size_t row) {
    const int node = static_cast<int>(row / n_tasks);
    const auto& task = tasks[row % n_tasks];
    const auto setting = EnvironmentSetting::simulated(layout.node_latent(node));
    for (Eigen::Index a = 0; a < n_actions; ++a)
      scores(static_cast<Eigen::Index>(row), a) = rollout_reward(task, actions[a], setting);
  });
  return PolicyTable(bounds, lattice_res, actions, std::move(ids), std::move(scores));
}

RankedPolicy rank_scores(const ActionSet& actions, const std::vector<int>& task_ids, const Eigen::MatrixXd& scores) {
  if (scores.rows() != static_cast<Eigen::Index>(task_ids.size()) ||
      scores.cols() != static_cast<Eigen::Index>(actions.size()))
    throw InvalidInput("rank_scores: score matrix shape mismatch");
  RankedPolicy policy;
  policy.actions = actions;
  policy.task_ids = task_ids;
  policy.order.resize(task_ids.size());
  for (Eigen::Index t = 0; t < scores.rows(); ++t) {
    auto& idx = policy.order[t];
    idx.resize(scores.cols());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return scores(t, a) > scores(t, b); });
  }
  return policy;
}

RankedPolicy condition(const PolicyTable& table, const LatentVector& theta) {
  return rank_scores(table.actions(), table.task_ids(), table.interpolate(theta));
}

EvalResult evaluate(const RankedPolicy& policy, const TaskSet& tasks, const EnvironmentSetting& setting, int top_k) {
  if (top_k < 1) throw InvalidInput("evaluate: top_k must be >= 1");
  if (tasks.empty()) throw InvalidInput("evaluate: empty task set");
  EvalResult result;
  result.first_success.resize(tasks.size());
  int solved = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& order = policy.for_task(tasks[i].id);
    const int attempts = std::min<int>(top_k, static_cast<int>(order.size()));
    for (int j = 0; j < attempts; ++j) {
      ++result.interactions;
      if (rollout_reward(tasks[i], policy.actions[order[j]], setting) > 0.5) {
        result.first_success[i] = j + 1;
        ++solved;
        break;
      }
    }
  }
  result.objective = static_cast<double>(solved) / static_cast<double>(tasks.size());

  constexpr int kAuccessAttempts = 100;
  auto clipped = result.first_success;
  for (auto& f : clipped)
    if (f && *f > kAuccessAttempts) f.reset();
  result.auccess = auccess(clipped, kAuccessAttempts);
  return result;
}

double auccess(const std::vector<std::optional<int>>& first_success, int K) {
  if (K < 1) throw InvalidInput("auccess: K must be >= 1");
  if (first_success.empty()) throw InvalidInput("auccess: empty task list");
  for (const auto& f : first_success)
    if (f && (*f < 1 || *f > K)) throw InvalidInput("auccess: attempt index outside [1, K]");

  const double n = static_cast<double>(first_success.size());
  double num = 0.0;
  double den = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double w = std::log(k + 1.0) - std::log(static_cast<double>(k));
    const auto solved = std::count_if(first_success.begin(), first_success.end(),
                                      [k](const std::optional<int>& f) { return f && *f <= k; });
    num += w * (static_cast<double>(solved) / n);
    den += w;
  }
  return num / den;
}

void save_policy_table(const std::filesystem::path& path, const PolicyTable& table) {
  auto out = csv::open_out(path);
  const auto& b = table.bounds();
  const auto& a = table.actions();
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "dims " << b.dims() << '\n';
  out << "bounds";
  for (Eigen::Index k = 0; k < b.dims(); ++k) out << ' ' << csv::num(b.lo(k)) << ' ' << csv::num(b.hi(k));
  out << '\n';
  out << "lattice_res " << table.lattice_res() << '\n';
  out << "actions " << a.angle_steps() << ' ' << a.speed_steps() << ' ' << csv::num(a.angle_lo()) << ' '
      << csv::num(a.angle_hi()) << ' ' << csv::num(a.speed_lo()) << ' ' << csv::num(a.speed_hi()) << '\n';
  out << "tasks " << table.num_tasks();
  for (int id : table.task_ids()) out << ' ' << id;
  out << '\n';
  const auto& s = table.scores();
  out << "scores " << s.rows() << ' ' << s.cols() << '\n';
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
      if (c) out << ' ';
      out << csv::num(s(r, c));
    }
    out << '\n';
  }
}

PolicyTable load_policy_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  auto fail = [&](const std::string& what) { return FormatError(path.string() + ": " + what); };
  auto expect_key = [&](const char* key) {
    std::string k;
    if (!(in >> k) || k != key) throw fail(std::string("expected '") + key + "'");
  };
  auto read_double = [&] {
    std::string tok;
    if (!(in >> tok)) throw fail("truncated");
    return csv::parse_double(tok);
  };
  auto read_int = [&] {
    std::string tok;
    if (!(in >> tok)) throw fail("truncated");
    return csv::parse_int(tok);
  };

  expect_key(kMagic);
  if (read_int() != kFormatVersion) throw fail("unsupported version");
  expect_key("dims");
  const auto dims = read_int();
  if (dims < 1 || dims > 8) throw fail("bad dimensionality");
  expect_key("bounds");
  LatentBounds bounds{Eigen::VectorXd(dims), Eigen::VectorXd(dims)};
  for (Eigen::Index k = 0; k < dims; ++k) {
    bounds.lo(k) = read_double();
    bounds.hi(k) = read_double();
  }
  expect_key("lattice_res");
  const int res = static_cast<int>(read_int());
  expect_key("actions");
  const int na = static_cast<int>(read_int());
  const int ns = static_cast<int>(read_int());
  const double alo = read_double(), ahi = read_double(), slo = read_double(), shi = read_double();
  expect_key("tasks");
  const auto n_tasks = read_int();
  if (n_tasks < 1) throw fail("no tasks");
  std::vector<int> ids(n_tasks);
  for (auto& id : ids) id = static_cast<int>(read_int());
  expect_key("scores");
  const auto rows = read_int();
  const auto cols = read_int();
  if (res < 2 || rows != static_cast<long long>(int_pow(res, dims)) * n_tasks ||
      cols != static_cast<long long>(na) * ns)
    throw fail("score tensor dimensions do not match header");
  Eigen::MatrixXd scores(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) scores(r, c) = read_double();
  std::string extra;
  if (in >> extra) throw fail("trailing data");

  try {
    return PolicyTable(bounds, res, ActionSet(na, ns, alo, ahi, slo, shi), std::move(ids), std::move(scores));
  } catch (const InvalidInput& e) {
    throw fail(e.what());
  }
}

PolicyTable load_policy_table(const std::filesystem::path& path, int lattice_res, const std::vector<int>& task_ids,
                              const ActionSet& actions) {
  auto table = load_policy_table(path);
  if (table.lattice_res() != lattice_res) throw FormatError(path.string() + ": lattice resolution mismatch");
  if (table.task_ids() != task_ids) throw FormatError(path.string() + ": task ids mismatch");
  if (!(table.actions() == actions)) throw FormatError(path.string() + ": action grid mismatch");
  return table;
}

}  // namespace ppbo
