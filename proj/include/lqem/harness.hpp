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

#ifndef LQEM_HARNESS_HPP
#define LQEM_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lqem/krylov.hpp"
#include "lqem/models.hpp"
#include "lqem/simulator.hpp"
#include "lqem/variational.hpp"
#include "lqem/zne.hpp"

namespace lqem {

inline constexpr int kConfigSchemaVersion = 1;

struct MitigationSettings {
  int order = 2;
  std::optional<std::uint64_t> n_shots = 8192;
  std::optional<double> sigma_max;    // cap for the constrained fixed-ratio estimate
  std::optional<double> fixed_ratio;  // explicit a0/a1 instead of the cap
  int n_repeat = 5;                   // independent moment sets for the WLS average
  int n_bootstrap = 2000;
  std::vector<Method> estimators{Method::Bare, Method::Lanczos, Method::CubeRoot, Method::Wls,
                                 Method::FixedRatio};
};

struct ZneSettings {
  ZneConfig zne{{1, 3, 5, 7}, 1, 8192, 1};
  std::vector<ZneEstimator> estimators{ZneEstimator::Bare, ZneEstimator::Lanczos};
  int n_repetitions = 1;
  bool budget_compare = true;
};

struct SweepSettings {
  std::vector<double> values;            // J'/J grid for the tetrahedron
  std::vector<std::string> files;        // or one Hamiltonian file per point
  std::vector<double> sigma_max_grid;    // derived from the data when empty
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::optional<std::uint64_t> seed;
  ModelSpec model;
  int n_entangling_layers = 1;
  VqeConfig vqe;
  bool vqe_with_noise = true;
  std::optional<NoiseModel> noise;
  MitigationSettings mitigation;
  ZneSettings zne;
  int histogram_repetitions = 200;
  SweepSettings sweep;
  std::vector<std::string> scaling_files;
  std::optional<std::string> theta_file;
  std::string output_dir = "out";
  std::string canonical;  // normalized JSON text the hash is taken over

  /// Paths in the document are resolved against `base_dir`. Throws ParseError
  /// on malformed input, unknown schema versions and missing files.
  static ExperimentConfig parse(const std::string& text,
                                const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);

  /// FNV-1a of the canonical document, 16 hex digits.
  std::string hash() const;
  bool any_sampling() const;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::optional<std::filesystem::path> out_dir;
  bool exact = false;  // infinite-shot estimates everywhere
  int threads = 1;
  std::optional<std::filesystem::path> theta_file;
  std::vector<std::string> inputs;  // extra positional files (scaling)
  std::ostream* log = nullptr;
};

struct CommandResult {
  std::vector<std::filesystem::path> files;
};

CommandResult cmd_run_vqe(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_mitigate(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_sweep(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_histogram(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_zne(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_scaling(const ExperimentConfig& config, const RunOptions& options);

/// Dispatches a CLI verb; unknown verbs raise ContractError.
CommandResult run_command(const std::string& verb, const ExperimentConfig& config,
                          const RunOptions& options);

/// 0 success, 2 configuration or parse error, 3 numerical invariant breach,
/// 1 anything else.
int exit_code_for(const std::exception& e);

/// Reads the theta vector written by run-vqe.
Eigen::VectorXd read_theta_file(const std::filesystem::path& path);

}  // namespace lqem

#endif  // LQEM_HARNESS_HPP
