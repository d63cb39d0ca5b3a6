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

#ifndef LQEM_KRYLOV_HPP
#define LQEM_KRYLOV_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lqem/common.hpp"
#include "lqem/pauli.hpp"
#include "lqem/simulator.hpp"

namespace lqem {

/// Estimates of <H^l> for l = 0 .. 2m-1. <H^0> is exactly 1.
class MomentSet {
 public:
  MomentSet() = default;
  /// `moments[l-1]` holds <H^l>; the count must be odd (2m - 1), m >= 1.
  explicit MomentSet(std::vector<ShotEstimate> moments);
  /// Exact or noisy moments from plain values; `std_errors` may be empty.
  static MomentSet from_values(std::span<const double> values,
                               std::span<const double> std_errors = {});

  int order() const { return order_; }
  int max_power() const { return static_cast<int>(moments_.size()) - 1; }
  const ShotEstimate& operator[](int l) const { return moments_.at(static_cast<std::size_t>(l)); }
  double value(int l) const { return (*this)[l].value; }
  double std_error(int l) const { return (*this)[l].std_error; }
  /// Values l = 0 .. 2m-1.
  Eigen::VectorXd values() const;
  Eigen::VectorXd std_errors() const;
  ShotEstimate bare() const { return (*this)[1]; }
  /// Leading moments as an order-m set (m <= order()).
  MomentSet truncated(int m) const;

 private:
  int order_ = 0;
  std::vector<ShotEstimate> moments_;
};

/// H^l for l = 0 .. 2m-1, built once per Hamiltonian.
struct MomentOperators {
  int order = 0;
  std::vector<PauliSum> powers;

  /// Pauli keys over H^1 .. H^{2m-1} (identity included), the measurement
  /// count per shot setting.
  std::size_t string_count() const;
};

MomentOperators moment_operators(const PauliSum& h, int m,
                                 double prune_tol = kDefaultPruneTol);

/// Exact post-readout string expectations for each power; reusable across
/// repeated samplings of the same state.
struct MomentExpectations {
  int order = 0;
  std::vector<StringExpectations> per_power;  // index l-1
};

MomentExpectations moment_expectations(const DensityMatrix& rho, const MomentOperators& ops,
                                       std::span<const ReadoutError> readout = {});

/// Samples each power with its own stream split from `seed`.
MomentSet sample_moments(const MomentExpectations& e, std::optional<std::uint64_t> n_shots,
                         std::uint64_t seed);

MomentSet measure_moments(const DensityMatrix& rho, const MomentOperators& ops,
                          std::optional<std::uint64_t> n_shots,
                          std::span<const ReadoutError> readout, std::uint64_t seed);
MomentSet measure_moments(const DensityMatrix& rho, const PauliSum& h, int m,
                          std::optional<std::uint64_t> n_shots = std::nullopt,
                          std::span<const ReadoutError> readout = {}, std::uint64_t seed = 0);

enum class Method { Bare, Lanczos, CubeRoot, Wls, FixedRatio };

std::string to_string(Method m);

struct MitigatedEstimate {
  ShotEstimate energy;
  Method method = Method::Bare;
  int order = 2;
  // Optimal (a0, a1) of (a0 - a1 H), unit-normalized; absent where the method
  // has no such parametrization.
  std::optional<double> a0;
  std::optional<double> a1;
  std::optional<double> condition_value;
  bool degenerate = false;  // Krylov space collapsed; energy is the bare <H>
  bool discard = false;     // cube root above the bare value
  bool infeasible = false;  // stderr cap unreachable; energy is the bare <H>

  /// a0 / a1; +inf when a1 == 0.
  std::optional<double> ratio() const;
};

struct BootstrapOptions {
  int n_resamples = 2000;
  std::uint64_t seed = 0;
};

/// Energy as a function of the moment vector (index l = power).
using EnergyMap = std::function<double(const Eigen::VectorXd&)>;

/// Parametric bootstrap: each moment resampled from N(value, stderr)
/// independently; returns the sample standard deviation of the mapped
/// energies. Resample seeds are split from `opts.seed` by index.
double propagate_uncertainty(const MomentSet& ms, const EnergyMap& f,
                             const BootstrapOptions& opts = {});

/// First-order propagation by central finite differences, for cross-checks
/// away from degeneracy.
double propagate_uncertainty_linear(const MomentSet& ms, const EnergyMap& f);

// Energy maps used by the estimators and their bootstraps.
double bare_energy(const Eigen::VectorXd& moments);
double lanczos_m2_energy(const Eigen::VectorXd& moments);
double lanczos_energy(const Eigen::VectorXd& moments, int m);
double cube_root_energy(const Eigen::VectorXd& moments);
/// Falls back to <H> when the norm r^2 - 2 r <H> + <H^2> is not positive.
double fixed_ratio_energy(const Eigen::VectorXd& moments, double ratio);

/// Order-2 estimate from the analytic 2x2 Krylov matrix.
MitigatedEstimate lanczos_m2(const MomentSet& ms, const BootstrapOptions& opts = {});

/// Order-m estimate from the Hankel pencil with rank truncation.
MitigatedEstimate lanczos_general(const MomentSet& ms, int m, const BootstrapOptions& opts = {});

/// Sign-preserving cube root of <H^3>.
MitigatedEstimate cube_root(const MomentSet& ms, const BootstrapOptions& opts = {});

/// Inverse-variance weighted mean. Zero-stderr inputs dominate when present.
MitigatedEstimate wls_average(std::span<const MitigatedEstimate> estimates);

/// E(r) at fixed r = a0 / a1 (r = +inf gives the bare value).
MitigatedEstimate fixed_ratio_estimate(const MomentSet& ms, double ratio,
                                       const BootstrapOptions& opts = {});

/// Lowest E(r) whose bootstrap stderr stays below `sigma_max`.
MitigatedEstimate constrained_select(const MomentSet& ms, double sigma_max,
                                     const BootstrapOptions& opts = {});

/// Number of r values scanned on the way from the optimum to the bare limit.
inline constexpr int kConstrainedGridSize = 200;

struct ConditionResult {
  double value = 1.0;
  std::optional<bool> ratio_above_energy;  // a0/a1 > E_L, when a1 != 0
  bool degenerate = false;
};

/// (a0 - a1 E)^2 / Tr[rho (a0 - a1 H)^2]; exceeding 1 (with a0/a1 > E)
/// implies the ground-state overlap improved.
ConditionResult overlap_condition(const MomentSet& ms, const MitigatedEstimate& estimate);

struct SweepPoint {
  double parameter = 0.0;
  MomentSet moments;
};

struct DeltaHRow {
  double sigma_max = 0.0;
  double delta = 0.0;           // sum_h |E_h - E_{h+delta}|
  double mean_std_error = 0.0;  // averaged over the sweep
  std::size_t n_infeasible = 0;
};

struct DeltaHProfile {
  std::vector<DeltaHRow> rows;
  double bare_delta = 0.0;
  std::optional<double> recommended_sigma_max;
  /// Constrained estimates at the recommended cap, in sweep order.
  std::vector<MitigatedEstimate> recommended;
};

/// Level-distance criterion over a parameter sweep for each candidate cap. The
/// recommended cap minimizes the distance among caps feasible at every point.
/// Points are ordered by parameter first. Fewer than two points give an empty
/// table.
DeltaHProfile delta_h_profile(std::vector<SweepPoint> sweep,
                              std::span<const double> sigma_max_grid,
                              const BootstrapOptions& opts = {});

struct SpectralWeights {
  Eigen::VectorXd energies;  // ascending
  Eigen::VectorXd before;    // <i|rho|i>
  Eigen::VectorXd after;     // reweighted by (a0 - a1 E_i)^2

  /// Summed weight on eigenstates within `tol` of the lowest energy.
  double ground_before(double tol = 1e-9) const;
  double ground_after(double tol = 1e-9) const;
};

SpectralWeights spectral_weights(const DensityMatrix& rho, const PauliSum& h, double a0,
                                 double a1);

}  // namespace lqem

#endif  // LQEM_KRYLOV_HPP
