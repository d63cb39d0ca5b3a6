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

#include "lqem/variational.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

namespace lqem {

std::size_t AnsatzSpec::parameter_count() const {
  if (n_qubits < 1 || n_entangling_layers < 0) {
    throw ContractError("AnsatzSpec: need n_qubits >= 1 and n_entangling_layers >= 0");
  }
  return 2 * static_cast<std::size_t>(n_qubits) *
         static_cast<std::size_t>(n_entangling_layers + 1);
}

Circuit build_ansatz(const AnsatzSpec& spec, std::span<const double> theta, int cz_fold_factor) {
  const std::size_t count = spec.parameter_count();
  if (theta.size() != count) {
    throw DimensionError("build_ansatz: expected " + std::to_string(count) + " parameters, got " +
                         std::to_string(theta.size()));
  }
  const int n = spec.n_qubits;
  Circuit c(n, cz_fold_factor);
  auto rotations = [&](int block) {
    for (int q = 0; q < n; ++q) {
      const std::size_t i = 2 * static_cast<std::size_t>(block * n + q);
      c.ry(q, theta[i]);
      c.rz(q, theta[i + 1]);
    }
  };
  rotations(0);
  for (int layer = 1; layer <= spec.n_entangling_layers; ++layer) {
    for (int q = 0; q + 1 < n; ++q) c.cz(q, q + 1);
    rotations(layer);
  }
  return c;
}

Circuit build_ansatz(const AnsatzSpec& spec, const Eigen::VectorXd& theta, int cz_fold_factor) {
  return build_ansatz(spec, std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())),
                      cz_fold_factor);
}

Objective energy_objective(PauliSum h, AnsatzSpec spec, std::optional<NoiseModel> noise,
                           std::optional<std::uint64_t> n_shots) {
  if (h.n_qubits() != spec.n_qubits) {
    throw DimensionError("energy_objective: Hamiltonian and ansatz qubit counts differ");
  }
  if (noise) noise->validate(spec.n_qubits);
  return [h = std::move(h), spec, noise = std::move(noise), n_shots](
             const Eigen::VectorXd& theta, const Evaluation& ev) {
    const Circuit c = build_ansatz(spec, theta);
    const DensityMatrix rho = noise ? run_circuit(c, *noise) : run_circuit(c);
    std::span<const ReadoutError> readout;
    if (noise) readout = noise->readout;
    std::optional<std::uint64_t> shots = n_shots;
    if (shots) *shots *= static_cast<std::uint64_t>(std::max(1, ev.shot_multiplier));
    return sampled_expectation(rho, h, shots, readout, ev.seed);
  };
}

SpsaResult spsa_minimize(const Objective& f, const Eigen::VectorXd& theta0,
                         const SpsaConfig& config, std::uint64_t seed) {
  if (config.n_steps < 0 || config.n_final < 1 || config.final_shot_multiplier < 1) {
    throw ContractError("spsa_minimize: invalid step or re-evaluation counts");
  }
  const Eigen::Index d = theta0.size();
  const double A = config.A.value_or(0.1 * config.n_steps);
  std::mt19937_64 rng(split_seed(seed, 0));
  std::uint64_t eval_index = 1;
  auto evaluate = [&](const Eigen::VectorXd& theta, int multiplier) {
    return f(theta, Evaluation{split_seed(seed, eval_index++), multiplier});
  };
  auto rademacher = [&]() {
    Eigen::VectorXd delta(d);
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index i = 0; i < d; ++i) delta(i) = coin(rng) ? 1.0 : -1.0;
    return delta;
  };

  SpsaResult out;
  Eigen::VectorXd theta = theta0;
  if (config.a) {
    out.a = *config.a;
  } else if (config.n_steps > 0) {
    double mean_abs = 0.0;
    for (int i = 0; i < config.n_calibration; ++i) {
      const Eigen::VectorXd delta = rademacher();
      const double up = evaluate(theta + config.c * delta, 1).value;
      const double down = evaluate(theta - config.c * delta, 1).value;
      mean_abs += std::abs(up - down) / (2 * config.c);
    }
    mean_abs /= std::max(1, config.n_calibration);
    const double scale = std::pow(1.0 + A, config.alpha);
    out.a = mean_abs > 0.0 ? config.target_step * scale / mean_abs : config.target_step * scale;
  }

  std::vector<Eigen::VectorXd> history{theta};
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < config.n_steps; ++k) {
    const double ak = out.a / std::pow(k + 1 + A, config.alpha);
    const double ck = config.c / std::pow(k + 1, config.gamma);
    const Eigen::VectorXd delta = rademacher();
    const ShotEstimate up = evaluate(theta + ck * delta, 1);
    const ShotEstimate down = evaluate(theta - ck * delta, 1);
    theta -= ak * (up.value - down.value) / (2 * ck) * delta;
    const double energy = 0.5 * (up.value + down.value);
    best = std::min(best, energy);
    out.trace.push_back({k, energy, 0.5 * std::hypot(up.std_error, down.std_error), best});
    history.push_back(theta);
  }

  const std::size_t first =
      history.size() > static_cast<std::size_t>(config.n_final) ? history.size() - config.n_final : 0;
  bool have = false;
  for (std::size_t i = first; i < history.size(); ++i) {
    const ShotEstimate e = evaluate(history[i], config.final_shot_multiplier);
    if (!have || e.value < out.energy.value) {
      out.energy = e;
      out.theta_opt = history[i];
      have = true;
    }
  }
  return out;
}

void VqeConfig::validate() const {
  if (n_init < 1) throw ContractError("VqeConfig: n_init must be >= 1");
  if (n_vqe < 1) throw ContractError("VqeConfig: n_vqe must be >= 1");
  if (spsa.n_steps < 0) throw ContractError("VqeConfig: n_steps must be >= 0");
  if (n_shots && *n_shots == 0) throw ContractError("VqeConfig: n_shots must be positive");
  if (n_threads < 1) throw ContractError("VqeConfig: n_threads must be >= 1");
}

VqeResult run_vqe(const Objective& f, std::size_t n_parameters, const VqeConfig& config) {
  config.validate();
  const auto n_restarts = static_cast<std::size_t>(config.n_vqe);
  std::vector<VqeRestart> restarts(n_restarts);

  auto run_one = [&](std::size_t r) {
    const std::uint64_t seed = split_seed(config.seed, r);
    std::mt19937_64 rng(split_seed(seed, 0));
    std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
    VqeRestart& out = restarts[r];
    for (int i = 0; i < config.n_init; ++i) {
      Eigen::VectorXd theta(static_cast<Eigen::Index>(n_parameters));
      for (Eigen::Index j = 0; j < theta.size(); ++j) theta(j) = angle(rng);
      const ShotEstimate e = f(theta, Evaluation{split_seed(seed, 1 + static_cast<std::uint64_t>(i)), 1});
      if (i == 0 || e.value < out.start_energy.value) {
        out.theta_start = theta;
        out.start_energy = e;
      }
    }
    out.result = spsa_minimize(f, out.theta_start, config.spsa, split_seed(seed, 1u << 20));
  };

  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.n_threads), n_restarts);
  if (n_threads <= 1) {
    for (std::size_t r = 0; r < n_restarts; ++r) run_one(r);
  } else {
    std::vector<std::exception_ptr> errors(n_threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t r = t; r < n_restarts; r += n_threads) run_one(r);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  VqeResult out;
  for (std::size_t r = 0; r < n_restarts; ++r) {
    if (r == 0 || restarts[r].result.energy.value < out.energy.value) {
      out.best_restart = r;
      out.energy = restarts[r].result.energy;
      out.theta_opt = restarts[r].result.theta_opt;
    }
  }
  out.restarts = std::move(restarts);
  return out;
}

VqeResult run_vqe(const PauliSum& h, const AnsatzSpec& spec, const VqeConfig& config,
                  std::optional<NoiseModel> noise) {
  return run_vqe(energy_objective(h, spec, std::move(noise), config.n_shots),
                 spec.parameter_count(), config);
}

void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace) {
  os << "step,energy,stderr,best\n" << std::setprecision(17);
  for (const auto& row : trace) {
    os << row.step << ',' << row.energy << ',' << row.std_error << ',' << row.best << '\n';
  }
}

}  // namespace lqem
