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

#ifndef LQEM_VARIATIONAL_HPP
#define LQEM_VARIATIONAL_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lqem/common.hpp"
#include "lqem/pauli.hpp"
#include "lqem/simulator.hpp"

namespace lqem {

/// RyRz hardware-efficient ansatz: one RY+RZ pair per qubit, then
/// `n_entangling_layers` blocks of a linear CZ chain followed by RY+RZ pairs.
struct AnsatzSpec {
  int n_qubits = 1;
  int n_entangling_layers = 0;

  std::size_t parameter_count() const;
};

/// Theta layout: block b (0 = initial rotations), qubit q uses
/// theta[2 (b n + q)] for RY and theta[2 (b n + q) + 1] for RZ.
Circuit build_ansatz(const AnsatzSpec& spec, std::span<const double> theta,
                     int cz_fold_factor = 1);
Circuit build_ansatz(const AnsatzSpec& spec, const Eigen::VectorXd& theta,
                     int cz_fold_factor = 1);

/// Per-call context handed to an objective. Implementations must be reentrant
/// and derive all randomness from `seed`.
struct Evaluation {
  std::uint64_t seed = 0;
  int shot_multiplier = 1;
};

using Objective = std::function<ShotEstimate(const Eigen::VectorXd&, const Evaluation&)>;

/// <H> of the ansatz state, noisy when `noise` is given, sampled when `n_shots` is.
Objective energy_objective(PauliSum h, AnsatzSpec spec, std::optional<NoiseModel> noise = {},
                           std::optional<std::uint64_t> n_shots = {});

struct SpsaConfig {
  int n_steps = 200;
  std::optional<double> a;  // calibrated when absent
  double c = 0.1;
  std::optional<double> A;  // 0.1 * n_steps when absent
  double alpha = 0.602;
  double gamma = 0.101;
  int n_calibration = 10;
  double target_step = 0.1;  // mean first-step size per parameter, radians
  int n_final = 10;
  int final_shot_multiplier = 5;
};

struct TraceRow {
  int step = 0;
  double energy = 0.0;     // mean of the two perturbed evaluations
  double std_error = 0.0;
  double best = 0.0;       // lowest energy so far
};

struct SpsaResult {
  Eigen::VectorXd theta_opt;
  ShotEstimate energy;  // final re-evaluation of theta_opt
  std::vector<TraceRow> trace;
  double a = 0.0;  // gain actually used
};

SpsaResult spsa_minimize(const Objective& f, const Eigen::VectorXd& theta0,
                         const SpsaConfig& config, std::uint64_t seed);

struct VqeConfig {
  int n_init = 5;
  int n_vqe = 1;
  std::optional<std::uint64_t> n_shots;
  SpsaConfig spsa;
  std::uint64_t seed = 0;
  int n_threads = 1;

  void validate() const;
};

struct VqeRestart {
  Eigen::VectorXd theta_start;
  ShotEstimate start_energy;
  SpsaResult result;
};

struct VqeResult {
  Eigen::VectorXd theta_opt;
  ShotEstimate energy;
  std::size_t best_restart = 0;
  std::vector<VqeRestart> restarts;
};

/// Multistart VQE; restarts run on up to `n_threads` threads with seeds split
/// from the master seed, so results do not depend on the thread count.
VqeResult run_vqe(const Objective& f, std::size_t n_parameters, const VqeConfig& config);
VqeResult run_vqe(const PauliSum& h, const AnsatzSpec& spec, const VqeConfig& config,
                  std::optional<NoiseModel> noise = {});

/// step,energy,stderr,best
void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace);

}  // namespace lqem

#endif  // LQEM_VARIATIONAL_HPP
