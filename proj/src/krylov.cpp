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

#include "lqem/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "lqem/krylov_core.hpp"

namespace lqem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_order(const MomentSet& ms, int m, const char* who) {
  if (ms.order() < m) {
    throw ContractError(std::string(who) + ": needs moments up to <H^" +
                        std::to_string(2 * m - 1) + ">");
  }
}

bool all_exact(const MomentSet& ms) {
  for (int l = 1; l <= ms.max_power(); ++l) {
    if (ms.std_error(l) != 0.0) return false;
  }
  return true;
}

std::optional<std::uint64_t> min_shots(const MomentSet& ms) {
  std::optional<std::uint64_t> out;
  for (int l = 1; l <= ms.max_power(); ++l) {
    const auto& s = ms[l].shots;
    if (s && (!out || *s < *out)) out = s;
  }
  return out;
}

ShotEstimate with_error(const MomentSet& ms, double value, double err) {
  return {value, err, min_shots(ms)};
}

bool moments_degenerate(const MomentSet& ms) {
  return core::lanczos_2x2(ms.value(1), ms.value(2), ms.value(3)).degenerate;
}

MitigatedEstimate bare_estimate(const MomentSet& ms) {
  MitigatedEstimate e;
  e.energy = ms.bare();
  e.method = Method::Bare;
  e.a0 = 1.0;
  e.a1 = 0.0;
  e.condition_value = 1.0;
  return e;
}

void normalize(double& a0, double& a1) {
  const double n = std::hypot(a0, a1);
  a0 /= n;
  a1 /= n;
  if (a0 < 0 || (a0 == 0 && a1 < 0)) {
    a0 = -a0;
    a1 = -a1;
  }
}

}  // namespace

MomentSet::MomentSet(std::vector<ShotEstimate> moments) {
  if (moments.empty() || moments.size() % 2 == 0) {
    throw ContractError("MomentSet needs 2m-1 moments <H^1>..<H^{2m-1}>");
  }
  order_ = static_cast<int>(moments.size() + 1) / 2;
  moments_.reserve(moments.size() + 1);
  moments_.push_back(ShotEstimate::exact(1.0));
  for (auto& m : moments) {
    if (!(m.std_error >= 0.0) || !std::isfinite(m.value)) {
      throw ContractError("MomentSet: moments need finite values and stderr >= 0");
    }
    moments_.push_back(m);
  }
}

MomentSet MomentSet::from_values(std::span<const double> values,
                                 std::span<const double> std_errors) {
  if (!std_errors.empty() && std_errors.size() != values.size()) {
    throw DimensionError("MomentSet::from_values: stderr count differs");
  }
  std::vector<ShotEstimate> m;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double e = std_errors.empty() ? 0.0 : std_errors[i];
    m.push_back(e == 0.0 ? ShotEstimate::exact(values[i])
                         : ShotEstimate{values[i], e, std::nullopt});
  }
  return MomentSet(std::move(m));
}

Eigen::VectorXd MomentSet::values() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(moments_.size()));
  for (std::size_t i = 0; i < moments_.size(); ++i) v(static_cast<Eigen::Index>(i)) = moments_[i].value;
  return v;
}

Eigen::VectorXd MomentSet::std_errors() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(moments_.size()));
  for (std::size_t i = 0; i < moments_.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = moments_[i].std_error;
  }
  return v;
}

MomentSet MomentSet::truncated(int m) const {
  if (m < 1 || m > order_) throw ContractError("MomentSet::truncated: bad order");
  return MomentSet(std::vector<ShotEstimate>(moments_.begin() + 1, moments_.begin() + 2 * m));
}

std::size_t MomentOperators::string_count() const {
  std::size_t n = 0;
  for (std::size_t l = 1; l < powers.size(); ++l) n += powers[l].size();
  return n;
}

MomentOperators moment_operators(const PauliSum& h, int m, double prune_tol) {
  if (m < 1) throw ContractError("moment_operators: order must be >= 1");
  if (!h.is_hermitian()) throw ContractError("moment_operators: H is not Hermitian");
  MomentOperators ops;
  ops.order = m;
  ops.powers.push_back(PauliSum::identity(h.n_qubits()));
  for (int l = 1; l <= 2 * m - 1; ++l) {
    ops.powers.push_back(multiply_sums(ops.powers.back(), h, prune_tol));
  }
  return ops;
}

MomentExpectations moment_expectations(const DensityMatrix& rho, const MomentOperators& ops,
                                       std::span<const ReadoutError> readout) {
  MomentExpectations e;
  e.order = ops.order;
  for (std::size_t l = 1; l < ops.powers.size(); ++l) {
    e.per_power.push_back(string_expectations(rho, ops.powers[l], readout));
  }
  return e;
}

MomentSet sample_moments(const MomentExpectations& e, std::optional<std::uint64_t> n_shots,
                         std::uint64_t seed) {
  std::vector<ShotEstimate> m;
  for (std::size_t i = 0; i < e.per_power.size(); ++i) {
    m.push_back(sample_strings(e.per_power[i], n_shots, split_seed(seed, i + 1)));
  }
  return MomentSet(std::move(m));
}

MomentSet measure_moments(const DensityMatrix& rho, const MomentOperators& ops,
                          std::optional<std::uint64_t> n_shots,
                          std::span<const ReadoutError> readout, std::uint64_t seed) {
  return sample_moments(moment_expectations(rho, ops, readout), n_shots, seed);
}

MomentSet measure_moments(const DensityMatrix& rho, const PauliSum& h, int m,
                          std::optional<std::uint64_t> n_shots,
                          std::span<const ReadoutError> readout, std::uint64_t seed) {
  return measure_moments(rho, moment_operators(h, m), n_shots, readout, seed);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Bare: return "bare";
    case Method::Lanczos: return "lanczos";
    case Method::CubeRoot: return "cube_root";
    case Method::Wls: return "wls";
    case Method::FixedRatio: return "fixed_ratio";
  }
  return "unknown";
}

std::optional<double> MitigatedEstimate::ratio() const {
  if (!a0 || !a1) return std::nullopt;
  if (*a1 == 0.0) return kInf;
  return *a0 / *a1;
}

double propagate_uncertainty(const MomentSet& ms, const EnergyMap& f,
                             const BootstrapOptions& opts) {
  if (all_exact(ms)) return 0.0;
  if (opts.n_resamples < 2) throw ContractError("bootstrap needs at least 2 resamples");
  const Eigen::VectorXd mean = ms.values();
  const Eigen::VectorXd err = ms.std_errors();
  for (Eigen::Index l = 0; l < err.size(); ++l) {
    if (!std::isfinite(err(l))) throw ContractError("bootstrap: non-finite moment stderr");
  }
  std::vector<double> samples(static_cast<std::size_t>(opts.n_resamples));
  Eigen::VectorXd draw(mean.size());
  for (int i = 0; i < opts.n_resamples; ++i) {
    std::mt19937_64 rng(split_seed(opts.seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> normal(0.0, 1.0);
    draw(0) = 1.0;
    for (Eigen::Index l = 1; l < mean.size(); ++l) draw(l) = mean(l) + err(l) * normal(rng);
    samples[static_cast<std::size_t>(i)] = f(draw);
  }
  const double avg = std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
  double ss = 0.0;
  for (double s : samples) ss += (s - avg) * (s - avg);
  return std::sqrt(ss / static_cast<double>(samples.size() - 1));
}

double propagate_uncertainty_linear(const MomentSet& ms, const EnergyMap& f) {
  Eigen::VectorXd x = ms.values();
  const Eigen::VectorXd err = ms.std_errors();
  double var = 0.0;
  for (Eigen::Index l = 1; l < x.size(); ++l) {
    if (err(l) == 0.0) continue;
    const double h = 1e-6 * std::max(1.0, std::abs(x(l)));
    const double keep = x(l);
    x(l) = keep + h;
    const double up = f(x);
    x(l) = keep - h;
    const double down = f(x);
    x(l) = keep;
    const double grad = (up - down) / (2 * h);
    var += grad * grad * err(l) * err(l);
  }
  return std::sqrt(var);
}

double bare_energy(const Eigen::VectorXd& moments) { return moments(1); }

double lanczos_m2_energy(const Eigen::VectorXd& moments) {
  return core::lanczos_2x2(moments(1), moments(2), moments(3)).energy;
}

double lanczos_energy(const Eigen::VectorXd& moments, int m) {
  const core::Vector<long double> v = moments.head(2 * m).cast<long double>();
  return static_cast<double>(core::krylov_ground<long double>(v, m).energy);
}

double cube_root_energy(const Eigen::VectorXd& moments) { return std::cbrt(moments(3)); }

double fixed_ratio_energy(const Eigen::VectorXd& moments, double ratio) {
  const double h1 = moments(1), h2 = moments(2), h3 = moments(3);
  if (std::isinf(ratio)) return h1;
  if (!(core::ratio_norm(h1, h2, ratio) > 0.0)) return h1;
  return core::ratio_energy(h1, h2, h3, ratio);
}

MitigatedEstimate lanczos_m2(const MomentSet& ms, const BootstrapOptions& opts) {
  require_order(ms, 2, "lanczos_m2");
  const auto sol = core::lanczos_2x2(ms.value(1), ms.value(2), ms.value(3));
  MitigatedEstimate e;
  e.method = Method::Lanczos;
  e.order = 2;
  e.degenerate = sol.degenerate;
  e.a0 = sol.a0;
  e.a1 = sol.a1;
  const double err = propagate_uncertainty(ms, lanczos_m2_energy, opts);
  e.energy = sol.degenerate ? ms.bare() : with_error(ms, sol.energy, err);
  e.condition_value = overlap_condition(ms, e).value;
  return e;
}

MitigatedEstimate lanczos_general(const MomentSet& ms, int m, const BootstrapOptions& opts) {
  if (m < 2) throw ContractError("lanczos_general: order must be >= 2");
  require_order(ms, m, "lanczos_general");
  const core::Vector<long double> v = ms.values().head(2 * m).cast<long double>();
  const auto sol = core::krylov_ground<long double>(v, m);
  MitigatedEstimate e;
  e.method = Method::Lanczos;
  e.order = m;
  e.degenerate = sol.degenerate;
  if (sol.degenerate) {
    e.energy = ms.bare();
    e.a0 = 1.0;
    e.a1 = 0.0;
    e.condition_value = 1.0;
    return e;
  }
  const double err =
      propagate_uncertainty(ms, [m](const Eigen::VectorXd& x) { return lanczos_energy(x, m); }, opts);
  e.energy = with_error(ms, static_cast<double>(sol.energy), err);
  if (m == 2) {
    double a0 = static_cast<double>(sol.coefficients(0));
    double a1 = -static_cast<double>(sol.coefficients(1));
    normalize(a0, a1);
    e.a0 = a0;
    e.a1 = a1;
    e.condition_value = overlap_condition(ms, e).value;
  }
  return e;
}

MitigatedEstimate cube_root(const MomentSet& ms, const BootstrapOptions& opts) {
  require_order(ms, 2, "cube_root");
  const double h3 = ms.value(3);
  MitigatedEstimate e;
  e.method = Method::CubeRoot;
  e.degenerate = moments_degenerate(ms);
  const double value = std::cbrt(h3);
  double err = 0.0;
  if (ms.std_error(3) > 0.0) {
    // First-order propagation is singular at <H^3> = 0.
    err = std::abs(h3) > 1e-8 ? ms.std_error(3) / (3.0 * std::cbrt(h3 * h3))
                              : propagate_uncertainty(ms, cube_root_energy, opts);
  }
  e.energy = with_error(ms, value, err);
  e.discard = value > ms.value(1);
  return e;
}

MitigatedEstimate wls_average(std::span<const MitigatedEstimate> estimates) {
  if (estimates.empty()) throw ContractError("wls_average: no estimates");
  MitigatedEstimate out;
  out.method = Method::Wls;
  out.order = estimates.front().order;
  out.degenerate = std::all_of(estimates.begin(), estimates.end(),
                               [](const MitigatedEstimate& e) { return e.degenerate; });
  std::optional<std::uint64_t> shots;
  double exact_sum = 0.0;
  std::size_t exact_count = 0;
  double num = 0.0;
  double den = 0.0;
  for (const auto& e : estimates) {
    if (e.energy.shots) shots = shots ? *shots + *e.energy.shots : *e.energy.shots;
    const double s = e.energy.std_error;
    if (!(s >= 0.0)) throw ContractError("wls_average: negative stderr");
    if (s == 0.0) {
      exact_sum += e.energy.value;
      ++exact_count;
      continue;
    }
    num += e.energy.value / (s * s);
    den += 1.0 / (s * s);
  }
  if (exact_count > 0) {
    out.energy = {exact_sum / static_cast<double>(exact_count), 0.0, std::nullopt};
    return out;
  }
  out.energy = {num / den, 1.0 / std::sqrt(den), shots};
  return out;
}

MitigatedEstimate fixed_ratio_estimate(const MomentSet& ms, double ratio,
                                       const BootstrapOptions& opts) {
  require_order(ms, 2, "fixed_ratio_estimate");
  if (std::isnan(ratio)) throw ContractError("fixed_ratio_estimate: ratio is NaN");
  MitigatedEstimate e;
  e.method = Method::FixedRatio;
  e.degenerate = moments_degenerate(ms);
  if (std::isinf(ratio)) {
    e.energy = ms.bare();
    e.a0 = 1.0;
    e.a1 = 0.0;
    e.condition_value = 1.0;
    return e;
  }
  const double h1 = ms.value(1), h2 = ms.value(2), h3 = ms.value(3);
  const double norm = core::ratio_norm(h1, h2, ratio);
  if (!(norm > 1e-10 * std::max(1.0, ratio * ratio + std::abs(h2)))) {
    throw ContractError("fixed_ratio_estimate: a0/a1 = " + std::to_string(ratio) +
                        " makes Tr[rho (a0 - a1 H)^2] vanish; this ratio sits where the "
                        "state is projected out (near an eigenvalue carrying the weight)");
  }
  const double value = core::ratio_energy(h1, h2, h3, ratio);
  const double err = propagate_uncertainty(
      ms, [ratio](const Eigen::VectorXd& x) { return fixed_ratio_energy(x, ratio); }, opts);
  e.energy = with_error(ms, value, err);
  double a0 = ratio, a1 = 1.0;
  normalize(a0, a1);
  e.a0 = a0;
  e.a1 = a1;
  e.condition_value = overlap_condition(ms, e).value;
  return e;
}

MitigatedEstimate constrained_select(const MomentSet& ms, double sigma_max,
                                     const BootstrapOptions& opts) {
  require_order(ms, 2, "constrained_select");
  if (!(sigma_max >= 0.0)) throw ContractError("constrained_select: sigma_max must be >= 0");
  MitigatedEstimate best = lanczos_m2(ms, opts);
  best.method = Method::FixedRatio;
  if (best.energy.std_error <= sigma_max) return best;

  if (ms.std_error(1) > sigma_max) {
    MitigatedEstimate e = bare_estimate(ms);
    e.method = Method::FixedRatio;
    e.infeasible = true;
    e.degenerate = best.degenerate;
    return e;
  }
  const double h1 = ms.value(1), h2 = ms.value(2), h3 = ms.value(3);
  const auto sol = core::lanczos_2x2(h1, h2, h3);
  MitigatedEstimate bare = bare_estimate(ms);
  bare.method = Method::FixedRatio;
  bare.degenerate = sol.degenerate;
  if (sol.degenerate || sol.a1 == 0.0) return bare;

  // E(r) rises monotonically from E_L to <H> along the arc from r* to infinity
  // that avoids the ratio of the upper eigenvector.
  const double r_opt = sol.a0 / sol.a1;
  const double r_top = sol.a1_max == 0.0 ? kInf : sol.a0_max / sol.a1_max;
  const double dir = (std::isfinite(r_top) && r_top > r_opt) ? -1.0 : 1.0;
  const double scale = std::max({1.0, std::abs(r_opt), std::sqrt(std::abs(h2))});
  const double lo = std::log(1e-4 * scale);
  const double hi = std::log(1e6 * scale);
  for (int k = 0; k < kConstrainedGridSize; ++k) {
    const double d = std::exp(lo + (hi - lo) * k / (kConstrainedGridSize - 1));
    const double r = r_opt + dir * d;
    if (!(core::ratio_norm(h1, h2, r) > 0.0)) continue;
    const double err = propagate_uncertainty(
        ms, [r](const Eigen::VectorXd& x) { return fixed_ratio_energy(x, r); }, opts);
    if (err <= sigma_max) {
      MitigatedEstimate e;
      e.method = Method::FixedRatio;
      e.energy = with_error(ms, core::ratio_energy(h1, h2, h3, r), err);
      double a0 = r, a1 = 1.0;
      normalize(a0, a1);
      e.a0 = a0;
      e.a1 = a1;
      e.condition_value = overlap_condition(ms, e).value;
      return e;
    }
  }
  return bare;
}

ConditionResult overlap_condition(const MomentSet& ms, const MitigatedEstimate& estimate) {
  require_order(ms, 2, "overlap_condition");
  ConditionResult out;
  if (estimate.degenerate || !estimate.a0 || !estimate.a1) {
    out.degenerate = true;
    return out;
  }
  const double a0 = *estimate.a0, a1 = *estimate.a1;
  const double e = estimate.energy.value;
  const double norm = a0 * a0 - 2 * a0 * a1 * ms.value(1) + a1 * a1 * ms.value(2);
  out.value = (a0 - a1 * e) * (a0 - a1 * e) / norm;
  if (a1 != 0.0) out.ratio_above_energy = a0 / a1 > e;
  return out;
}

DeltaHProfile delta_h_profile(std::vector<SweepPoint> sweep,
                              std::span<const double> sigma_max_grid,
                              const BootstrapOptions& opts) {
  DeltaHProfile out;
  if (sweep.size() < 2) return out;
  std::stable_sort(sweep.begin(), sweep.end(),
                   [](const SweepPoint& a, const SweepPoint& b) { return a.parameter < b.parameter; });
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    out.bare_delta += std::abs(sweep[i].moments.value(1) - sweep[i - 1].moments.value(1));
  }
  std::vector<std::vector<MitigatedEstimate>> per_sigma;
  for (const double sigma : sigma_max_grid) {
    DeltaHRow row;
    row.sigma_max = sigma;
    std::vector<MitigatedEstimate> est;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      BootstrapOptions o = opts;
      o.seed = split_seed(opts.seed, i);
      est.push_back(constrained_select(sweep[i].moments, sigma, o));
      row.mean_std_error += est.back().energy.std_error;
      if (est.back().infeasible) ++row.n_infeasible;
      if (i > 0) row.delta += std::abs(est[i].energy.value - est[i - 1].energy.value);
    }
    row.mean_std_error /= static_cast<double>(sweep.size());
    out.rows.push_back(row);
    per_sigma.push_back(std::move(est));
  }
  // Caps where some point fell back to the bare value only compete when no cap
  // is feasible everywhere.
  const bool any_feasible = std::any_of(out.rows.begin(), out.rows.end(),
                                        [](const DeltaHRow& r) { return r.n_infeasible == 0; });
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    if (any_feasible && out.rows[i].n_infeasible > 0) continue;
    const double d = out.rows[i].delta;
    if (!best) {
      best = i;
      continue;
    }
    const double b = out.rows[*best].delta;
    const bool smaller = d < b - 1e-12 * std::max(1.0, b);
    const bool tie = !smaller && std::abs(d - b) <= 1e-12 * std::max(1.0, b);
    if (smaller || (tie && out.rows[i].sigma_max < out.rows[*best].sigma_max)) best = i;
  }
  if (best) {
    out.recommended_sigma_max = out.rows[*best].sigma_max;
    out.recommended = per_sigma[*best];
  }
  return out;
}

double SpectralWeights::ground_before(double tol) const {
  double w = 0.0;
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    if (energies(i) <= energies(0) + tol) w += before(i);
  }
  return w;
}

double SpectralWeights::ground_after(double tol) const {
  double w = 0.0;
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    if (energies(i) <= energies(0) + tol) w += after(i);
  }
  return w;
}

SpectralWeights spectral_weights(const DensityMatrix& rho, const PauliSum& h, double a0,
                                 double a1) {
  if (h.n_qubits() != rho.n_qubits()) throw DimensionError("spectral_weights: qubit counts differ");
  if (h.n_qubits() > 6) throw DimensionError("spectral_weights: dense diagnostics need <= 6 qubits");
  if (!h.is_hermitian()) throw ContractError("spectral_weights: H is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_dense(h));
  SpectralWeights w;
  w.energies = es.eigenvalues();
  const Eigen::MatrixXcd& v = es.eigenvectors();
  w.before = (v.adjoint() * rho.matrix() * v).diagonal().real();
  w.after = w.before;
  double norm = 0.0;
  for (Eigen::Index i = 0; i < w.after.size(); ++i) {
    const double f = a0 - a1 * w.energies(i);
    w.after(i) = w.before(i) * f * f;
    norm += w.after(i);
  }
  if (!(norm > 0.0)) throw ContractError("spectral_weights: Tr[rho (a0 - a1 H)^2] vanishes");
  w.after /= norm;
  return w;
}

}  // namespace lqem
