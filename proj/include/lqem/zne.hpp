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

#ifndef LQEM_ZNE_HPP
#define LQEM_ZNE_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lqem/common.hpp"
#include "lqem/krylov.hpp"
#include "lqem/pauli.hpp"
#include "lqem/simulator.hpp"

namespace lqem {

struct ZneConfig {
  std::vector<int> fold_factors{1, 3, 5, 7};
  int degree = 1;
  std::optional<std::uint64_t> n_shots;
  int shot_multiplier = 1;

  /// Factors odd, positive and strictly increasing; more points than the degree.
  void validate() const;
  /// Polynomial through every point.
  static int richardson_degree(std::size_t n_points) { return static_cast<int>(n_points) - 1; }
};

enum class ZneEstimator { Bare, Lanczos };

std::string to_string(ZneEstimator e);

struct ZnePoint {
  int fold_factor = 1;
  ShotEstimate energy;
  std::string method;
};

/// Exact string expectations of the moments needed by `estimator` for each
/// fold factor; sampling them repeatedly is cheap.
struct FoldedState {
  int fold_factor = 1;
  MomentExpectations moments;
};

std::vector<FoldedState> prepare_folds(const Circuit& circuit, const PauliSum& h,
                                       const NoiseModel& noise, std::span<const int> fold_factors,
                                       ZneEstimator estimator);

std::vector<ZnePoint> sample_folds(std::span<const FoldedState> folds, ZneEstimator estimator,
                                   std::optional<std::uint64_t> n_shots, std::uint64_t seed,
                                   const BootstrapOptions& bootstrap = {});

/// Folds every CZ, simulates and applies the chosen estimator per factor.
std::vector<ZnePoint> fold_and_measure(const Circuit& circuit, const PauliSum& h,
                                       const NoiseModel& noise, const ZneConfig& config,
                                       ZneEstimator estimator, std::uint64_t seed,
                                       const BootstrapOptions& bootstrap = {});

struct Extrapolation {
  ShotEstimate intercept;
  Eigen::VectorXd coefficients;  // ascending powers of the fold factor
  Eigen::MatrixXd covariance;
  bool weighted = false;         // false when some point carried zero stderr
};

/// Least-squares polynomial in the raw fold factor, weights 1/stderr^2 when all
/// stderrs are positive; the intercept is the zero-noise estimate.
Extrapolation extrapolate(std::span<const ZnePoint> points, int degree);

/// Measurement accounting for one Lanczos (order 2) evaluation against a ZNE
/// run on the bare Hamiltonian.
struct BudgetPlan {
  std::array<std::size_t, 3> lanczos_strings{};  // keys of H, H^2, H^3, identity included
  std::uint64_t lanczos_shots = 0;
  std::uint64_t lanczos_budget = 0;
  std::size_t zne_strings = 0;  // keys of H times number of fold factors
  int zne_shot_multiplier = 1;
  std::uint64_t zne_shots = 0;
  std::uint64_t zne_budget = 0;
};

/// The ZNE shot multiplier is the smallest integer >= 2 whose budget covers
/// the Lanczos one.
BudgetPlan plan_budget(const PauliSum& h, std::size_t n_fold_factors, std::uint64_t n_shots);
/// Same accounting from string counts of H, H^2, H^3.
BudgetPlan plan_budget(const std::array<std::size_t, 3>& lanczos_strings,
                       std::size_t n_fold_factors, std::uint64_t n_shots);

struct BudgetComparison {
  BudgetPlan plan;
  std::vector<double> bare;      // fold factor 1, plain shots
  std::vector<double> lanczos;   // fold factor 1, order 2
  std::vector<double> zne;       // extrapolated bare values, multiplied shots
  double mean(std::span<const double> v) const;
  double std_dev(std::span<const double> v) const;
};

BudgetComparison budget_matched_compare(const Circuit& circuit, const PauliSum& h,
                                        const NoiseModel& noise, const ZneConfig& config,
                                        std::uint64_t n_shots, int n_repetitions,
                                        std::uint64_t seed, const BootstrapOptions& bootstrap = {});

/// factor,energy,stderr,method
void write_zne_csv(std::ostream& os, std::span<const ZnePoint> points);

}  // namespace lqem

#endif  // LQEM_ZNE_HPP
