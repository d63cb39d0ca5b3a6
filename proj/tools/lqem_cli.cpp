// Copyright 2026 The lqem Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lqem/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Lanczos-inspired error mitigation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> theta;
  bool exact = false;
  int threads = 1;
  std::vector<std::string> inputs;

  const std::vector<std::pair<std::string, std::string>> verbs{
      {"run-vqe", "Optimize the ansatz and write theta_opt.json plus traces"},
      {"mitigate", "Apply every mitigation estimator to the optimal circuit"},
      {"sweep", "Sweep couplings or Hamiltonian files with the level-distance table"},
      {"histogram", "Repeat the measurement protocol and tabulate the estimates"},
      {"zne", "Fold CZ gates, extrapolate to zero noise and compare budgets"},
      {"scaling", "Count Pauli strings of H, H^2, H^3 for Hamiltonian files"}};
  for (const auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "Master seed, overrides the config");
    sub->add_option("--out", out_dir, "Output directory, overrides the config");
    sub->add_flag("--exact", exact, "Infinite-shot estimates");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    if (name == "mitigate" || name == "histogram" || name == "zne") {
      sub->add_option("--theta", theta, "theta_opt.json to evaluate");
    }
    if (name == "scaling") sub->add_option("files", inputs, "Hamiltonian files");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto config = lqem::ExperimentConfig::load(config_path);
    lqem::RunOptions options;
    options.seed = seed;
    if (out_dir) options.out_dir = *out_dir;
    if (theta) options.theta_file = *theta;
    options.exact = exact;
    options.threads = threads;
    options.inputs = inputs;
    const auto result = lqem::run_command(app.get_subcommands().front()->get_name(), config, options);
    for (const auto& f : result.files) std::cout << f.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return lqem::exit_code_for(e);
  }
  return 0;
}
