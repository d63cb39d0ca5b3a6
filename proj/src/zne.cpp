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

#include "lqem/zne.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace lqem {

void ZneConfig::validate() const {
  if (fold_factors.empty()) throw ContractError("ZneConfig: no fold factors");
  for (std::size_t i = 0; i < fold_factors.size(); ++i) {
    const int f = fold_factors[i];
    if (f < 1 || f % 2 == 0) throw ContractError("ZneConfig: fold factors must be odd and >= 1");
    if (i > 0 && f <= fold_factors[i - 1]) {
      throw ContractError("ZneConfig: fold factors must be strictly increasing");
    }
  }
  if (degree < 0) throw ContractError("ZneConfig: degree must be >= 0");
  if (fold_factors.size() <= static_cast<std::size_t>(degree)) {
    throw ContractError("ZneConfig: need more fold factors than the fit degree");
  }
  if (n_shots && *n_shots == 0) throw ContractError("ZneConfig: n_shots must be positive");
  if (shot_multiplier < 1) throw ContractError("ZneConfig: shot multiplier must be >= 1");
}

std::string to_string(ZneEstimator e) { return e == ZneEstimator::Bare ? "bare" : "lanczos"; }

std::vector<FoldedState> prepare_folds(const Circuit& circuit, const PauliSum& h,
                                       const NoiseModel& noise, std::span<const int> fold_factors,
                                       ZneEstimator estimator) {
  if (h.n_qubits() != circuit.n_qubits()) {
    throw DimensionError("prepare_folds: Hamiltonian and circuit qubit counts differ");
  }
  noise.validate(circuit.n_qubits());
  const MomentOperators ops = moment_operators(h, estimator == ZneEstimator::Lanczos ? 2 : 1);
  std::vector<FoldedState> out;
  for (const int f : fold_factors) {
    const DensityMatrix rho = run_circuit(circuit.with_fold_factor(f), noise);
    out.push_back({f, moment_expectations(rho, ops, noise.readout)});
  }
  return out;
}

std::vector<ZnePoint> sample_folds(std::span<const FoldedState> folds, ZneEstimator estimator,
                                   std::optional<std::uint64_t> n_shots, std::uint64_t seed,
                                   const BootstrapOptions& bootstrap) {
  std::vector<ZnePoint> out;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    const std::uint64_t s = split_seed(seed, i);
    const MomentSet ms = sample_moments(folds[i].moments, n_shots, s);
    ZnePoint p;
    p.fold_factor = folds[i].fold_factor;
    p.method = to_string(estimator);
    if (estimator == ZneEstimator::Lanczos) {
      BootstrapOptions b = bootstrap;
      b.seed = split_seed(bootstrap.seed ^ s, 1);
      p.energy = lanczos_m2(ms, b).energy;
    } else {
      p.energy = ms.bare();
    }
    out.push_back(p);
  }
  return out;
}

std::vector<ZnePoint> fold_and_measure(const Circuit& circuit, const PauliSum& h,
                                       const NoiseModel& noise, const ZneConfig& config,
                                       ZneEstimator estimator, std::uint64_t seed,
                                       const BootstrapOptions& bootstrap) {
  config.validate();
  const auto folds = prepare_folds(circuit, h, noise, config.fold_factors, estimator);
  std::optional<std::uint64_t> shots = config.n_shots;
  if (shots) *shots *= static_cast<std::uint64_t>(config.shot_multiplier);
  return sample_folds(folds, estimator, shots, seed, bootstrap);
}

Extrapolation extrapolate(std::span<const ZnePoint> points, int degree) {
  if (degree < 0) throw ContractError("extrapolate: degree must be >= 0");
  if (points.size() <= static_cast<std::size_t>(degree)) {
    throw ContractError("extrapolate: need more points than the fit degree");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  const Eigen::Index p = degree + 1;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n), var(n);
  bool weighted = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = points[static_cast<std::size_t>(i)];
    double pow = 1.0;
    for (Eigen::Index j = 0; j < p; ++j, pow *= pt.fold_factor) x(i, j) = pow;
    y(i) = pt.energy.value;
    var(i) = pt.energy.std_error * pt.energy.std_error;
    if (!(pt.energy.std_error > 0.0)) weighted = false;
  }
  const Eigen::VectorXd w = weighted ? Eigen::VectorXd(var.cwiseInverse())
                                     : Eigen::VectorXd::Ones(n);
  const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
  const Eigen::MatrixXd normal = xtw * x;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  lu.setThreshold(1e-12);
  if (lu.rank() < p) throw ContractError("extrapolate: degenerate design matrix (repeated fold factors?)");
  const Eigen::MatrixXd a = lu.solve(xtw);

  Extrapolation out;
  out.weighted = weighted;
  out.coefficients = a * y;
  out.covariance = a * var.asDiagonal() * a.transpose();
  std::optional<std::uint64_t> shots;
  for (const auto& pt : points) {
    if (pt.energy.shots) shots = shots.value_or(0) + *pt.energy.shots;
  }
  out.intercept = {out.coefficients(0), std::sqrt(std::max(0.0, out.covariance(0, 0))), shots};
  return out;
}

BudgetPlan plan_budget(const std::array<std::size_t, 3>& lanczos_strings,
                       std::size_t n_fold_factors, std::uint64_t n_shots) {
  if (n_fold_factors == 0 || n_shots == 0) throw ContractError("plan_budget: empty budget");
  BudgetPlan plan;
  plan.lanczos_strings = lanczos_strings;
  const std::uint64_t strings =
      std::accumulate(lanczos_strings.begin(), lanczos_strings.end(), std::uint64_t{0});
  plan.lanczos_shots = n_shots;
  plan.lanczos_budget = strings * n_shots;
  plan.zne_strings = lanczos_strings[0] * n_fold_factors;
  const std::uint64_t per_multiple = plan.zne_strings * n_shots;
  plan.zne_shot_multiplier = static_cast<int>(
      std::max<std::uint64_t>(2, (plan.lanczos_budget + per_multiple - 1) / per_multiple));
  plan.zne_shots = n_shots * static_cast<std::uint64_t>(plan.zne_shot_multiplier);
  plan.zne_budget = plan.zne_strings * plan.zne_shots;
  return plan;
}

BudgetPlan plan_budget(const PauliSum& h, std::size_t n_fold_factors, std::uint64_t n_shots) {
  const MomentOperators ops = moment_operators(h, 2);
  return plan_budget({ops.powers[1].size(), ops.powers[2].size(), ops.powers[3].size()},
                     n_fold_factors, n_shots);
}

double BudgetComparison::mean(std::span<const double> v) const {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double BudgetComparison::std_dev(std::span<const double> v) const {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

BudgetComparison budget_matched_compare(const Circuit& circuit, const PauliSum& h,
                                        const NoiseModel& noise, const ZneConfig& config,
                                        std::uint64_t n_shots, int n_repetitions,
                                        std::uint64_t seed, const BootstrapOptions& bootstrap) {
  config.validate();
  if (n_repetitions < 1) throw ContractError("budget_matched_compare: n_repetitions must be >= 1");
  BudgetComparison out;
  out.plan = plan_budget(h, config.fold_factors.size(), n_shots);
  const int one = 1;
  const auto base = prepare_folds(circuit, h, noise, std::span<const int>(&one, 1), ZneEstimator::Lanczos);
  const auto folds = prepare_folds(circuit, h, noise, config.fold_factors, ZneEstimator::Bare);
  for (int r = 0; r < n_repetitions; ++r) {
    const std::uint64_t s = split_seed(seed, static_cast<std::uint64_t>(r));
    const MomentSet ms = sample_moments(base.front().moments, n_shots, split_seed(s, 0));
    out.bare.push_back(ms.value(1));
    BootstrapOptions b = bootstrap;
    b.seed = split_seed(s, 1);
    out.lanczos.push_back(lanczos_m2(ms, b).energy.value);
    const auto points = sample_folds(folds, ZneEstimator::Bare, out.plan.zne_shots, split_seed(s, 2));
    out.zne.push_back(extrapolate(points, config.degree).intercept.value);
  }
  return out;
}

void write_zne_csv(std::ostream& os, std::span<const ZnePoint> points) {
  os << "factor,energy,stderr,method\n" << std::setprecision(17);
  for (const auto& p : points) {
    os << p.fold_factor << ',' << p.energy.value << ',' << p.energy.std_error << ',' << p.method
       << '\n';
  }
}

}  // namespace lqem
