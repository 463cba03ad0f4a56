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

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ppbo/experiment.hpp"

namespace {

ppbo::ExperimentConfig config_from(const std::string& path) {
  return path.empty() ? ppbo::ExperimentConfig{} : ppbo::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy-prior Bayesian optimization over latent physics factors"};
  app.require_subcommand(1);

  std::string config, out = "results", method;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON experiment config (defaults when omitted)")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Artifact and result directory")->capture_default_str();
  };

  auto* train = app.add_subcommand("train-upn", "Generate tasks and train the simulated policy table");
  auto* prior = app.add_subcommand("build-prior", "Build the policy prior from the trained table");
  auto* search = app.add_subcommand("search", "Run every trial seed of one method");
  auto* report = app.add_subcommand("report", "Aggregate persisted trials into tables and curves");
  for (auto* sub : {train, prior, search, report}) add_common(sub);
  search->add_option("--method", method, "policy_prior | no_prior | dr | estimated")
      ->required()
      ->check(CLI::IsMember({"policy_prior", "no_prior", "dr", "estimated"}));

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = config_from(config);
    const std::filesystem::path dir(out);
    if (*train) ppbo::cmd_train_upn(cfg, dir, std::cout);
    if (*prior) ppbo::cmd_build_prior(cfg, dir, std::cout);
    if (*search) ppbo::cmd_search(cfg, method, dir, std::cout);
    if (*report) ppbo::cmd_report(cfg, dir, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
