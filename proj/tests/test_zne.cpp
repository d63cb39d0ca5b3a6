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

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lqem/models.hpp"
#include "lqem/variational.hpp"
#include "lqem/zne.hpp"

using namespace lqem;

namespace {

std::vector<ZnePoint> points(const std::vector<std::pair<int, double>>& v, double err = 0.0) {
  std::vector<ZnePoint> out;
  for (auto [f, e] : v) out.push_back({f, {e, err, std::nullopt}, "bare"});
  return out;
}

Circuit test_circuit() {
  const AnsatzSpec spec{4, 2};
  Eigen::VectorXd theta(static_cast<Eigen::Index>(spec.parameter_count()));
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = 0.4 + 0.37 * static_cast<double>(i);
  return build_ansatz(spec, theta);
}

NoiseModel depolarizing_cz(double p) {
  NoiseModel n;
  n.p_depol_2q = p;
  return n;
}

}  // namespace

TEST_CASE("extrapolation of exact polynomials") {
  const auto line = extrapolate(points({{1, -0.95}, {3, -0.85}, {5, -0.75}, {7, -0.65}}), 1);
  CHECK(std::abs(line.intercept.value + 1.0) < 1e-12);
  CHECK(line.intercept.std_error == 0.0);
  CHECK(std::abs(line.coefficients(1) - 0.05) < 1e-12);

  const auto flat = extrapolate(points({{1, 0.3}, {3, 0.3}, {5, 0.3}}, 0.01), 1);
  CHECK(std::abs(flat.intercept.value - 0.3) < 1e-12);
  CHECK(std::abs(flat.coefficients(1)) < 1e-12);
  CHECK(flat.weighted);

  // Richardson through a quadratic.
  auto q = [](double x) { return 0.2 - 0.1 * x + 0.03 * x * x; };
  const auto rich = extrapolate(points({{1, q(1)}, {3, q(3)}, {5, q(5)}}), ZneConfig::richardson_degree(3));
  CHECK(std::abs(rich.intercept.value - 0.2) < 1e-12);

  CHECK_THROWS_AS(extrapolate(points({{1, 0.0}}), 1), ContractError);
  CHECK_THROWS_AS(extrapolate(points({{1, 0.0}, {1, 0.1}}), 1), ContractError);
}

TEST_CASE("weighted intercept stderr against the closed form") {
  // Straight-line WLS: Var(b0) = S_xx / (S S_xx - S_x^2) with S = sum w.
  const std::vector<std::pair<int, double>> raw{{1, -0.9}, {3, -0.7}, {5, -0.66}, {7, -0.5}};
  std::vector<ZnePoint> p;
  const double errs[] = {0.01, 0.02, 0.015, 0.03};
  for (std::size_t i = 0; i < raw.size(); ++i) p.push_back({raw[i].first, {raw[i].second, errs[i], 1000}, "bare"});
  double s = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (const auto& pt : p) {
    const double w = 1.0 / (pt.energy.std_error * pt.energy.std_error);
    s += w;
    sx += w * pt.fold_factor;
    sxx += w * pt.fold_factor * pt.fold_factor;
    sy += w * pt.energy.value;
    sxy += w * pt.fold_factor * pt.energy.value;
  }
  const double det = s * sxx - sx * sx;
  const auto fit = extrapolate(p, 1);
  CHECK(std::abs(fit.intercept.value - (sxx * sy - sx * sxy) / det) < 1e-12);
  CHECK(std::abs(fit.intercept.std_error - std::sqrt(sxx / det)) < 1e-12);
}

TEST_CASE("extrapolation coverage on noisy synthetic lines") {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> g(0.0, 0.01);
  int covered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ZnePoint> p;
    for (int f : {1, 3, 5, 7}) p.push_back({f, {-1.0 + 0.04 * f + g(rng), 0.01, 1000}, "bare"});
    const auto fit = extrapolate(p, 1);
    if (std::abs(fit.intercept.value + 1.0) <= 3 * fit.intercept.std_error) ++covered;
  }
  CHECK(covered >= 95);
}

TEST_CASE("folding is neutral without noise") {
  const PauliSum h = build_tetrahedron(1.0, 1.0);
  ZneConfig cfg;
  const auto pts = fold_and_measure(test_circuit(), h, NoiseModel{}, cfg, ZneEstimator::Bare, 1);
  REQUIRE(pts.size() == 4);
  for (const auto& p : pts) CHECK(std::abs(p.energy.value - pts.front().energy.value) < 1e-10);
}

TEST_CASE("depolarizing noise grows with the fold factor") {
  const PauliSum h = build_tetrahedron(1.0, 1.0);
  const Circuit c = test_circuit();
  const double clean = exact_expectation(run_circuit(c), h);
  ZneConfig cfg;
  cfg.n_shots = 20000;
  const auto pts = fold_and_measure(c, h, depolarizing_cz(0.03), cfg, ZneEstimator::Bare, 8);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double prev = std::abs(pts[i - 1].energy.value - clean);
    const double cur = std::abs(pts[i].energy.value - clean);
    CHECK(cur > prev - 3 * std::hypot(pts[i].energy.std_error, pts[i - 1].energy.std_error));
  }
  CHECK(std::abs(pts.back().energy.value - clean) > std::abs(pts.front().energy.value - clean));
}

TEST_CASE("lanczos points lie below bare points in exact mode") {
  const PauliSum h = build_tetrahedron(1.0, 1.0);
  ZneConfig cfg;
  const Circuit c = test_circuit();
  const auto bare = fold_and_measure(c, h, depolarizing_cz(0.05), cfg, ZneEstimator::Bare, 0);
  const auto lan = fold_and_measure(c, h, depolarizing_cz(0.05), cfg, ZneEstimator::Lanczos, 0);
  for (std::size_t i = 0; i < bare.size(); ++i) {
    CHECK(lan[i].energy.value <= bare[i].energy.value + 1e-12);
    CHECK(lan[i].method == "lanczos");
  }
}

TEST_CASE("config validation") {
  ZneConfig c;
  c.fold_factors = {1, 2, 3};
  CHECK_THROWS_AS(c.validate(), ContractError);
  c.fold_factors = {3, 1};
  CHECK_THROWS_AS(c.validate(), ContractError);
  c.fold_factors = {1};
  CHECK_THROWS_AS(c.validate(), ContractError);
  c.fold_factors = {1, 3};
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("budget accounting") {
  const BudgetPlan counted = plan_budget({15, 32, 32}, 4, 8192);
  CHECK(counted.lanczos_budget == 79u * 8192u);
  CHECK(counted.zne_strings == 60);
  CHECK(counted.zne_shot_multiplier == 2);
  CHECK(counted.zne_shots == 2u * 8192u);
  CHECK(counted.zne_budget >= counted.lanczos_budget);

  const PauliSum h = build_tetrahedron(1.0, 1.0);
  const BudgetPlan tet = plan_budget(h, 4, 1000);
  CHECK(tet.lanczos_strings[0] == 18);
  CHECK(tet.lanczos_strings[1] == power(h, 2).size());
  CHECK(tet.zne_budget >= tet.lanczos_budget);
  CHECK((tet.zne_shot_multiplier - 1) * tet.zne_strings * 1000 < tet.lanczos_budget);
}

TEST_CASE("budget comparison without noise") {
  const PauliSum h = build_tetrahedron(1.0, 1.0);
  const Circuit c = test_circuit();
  ZneConfig cfg;
  const BudgetComparison cmp = budget_matched_compare(c, h, NoiseModel{}, cfg, 4096, 20, 5, {200, 0});
  const double clean = exact_expectation(run_circuit(c), h);
  const double se_z = cmp.std_dev(cmp.zne) / std::sqrt(20.0);
  const double se_b = cmp.std_dev(cmp.bare) / std::sqrt(20.0);
  CHECK(std::abs(cmp.mean(cmp.zne) - clean) < 4 * se_z);
  CHECK(std::abs(cmp.mean(cmp.bare) - clean) < 4 * se_b);
  CHECK(cmp.lanczos.size() == 20);
}

TEST_CASE("more shots shrink the spread but not the bias") {
  const PauliSum h = build_tetrahedron(1.0, 1.0);
  const Circuit c = test_circuit();
  const NoiseModel noise = depolarizing_cz(0.04);
  const auto folds = prepare_folds(c, h, noise, std::vector<int>{1, 3, 5, 7}, ZneEstimator::Bare);
  auto ensemble = [&](std::uint64_t shots) {
    std::vector<double> v;
    for (std::uint64_t r = 0; r < 200; ++r) v.push_back(extrapolate(sample_folds(folds, ZneEstimator::Bare, shots, r), 1).intercept.value);
    return v;
  };
  const BudgetComparison stats;
  const auto lo = ensemble(4096), hi = ensemble(16384);
  const double var_ratio = std::pow(stats.std_dev(hi) / stats.std_dev(lo), 2);
  CHECK(var_ratio == doctest::Approx(0.25).epsilon(0.35));
  const auto exact = extrapolate(sample_folds(folds, ZneEstimator::Bare, std::nullopt, 0), 1).intercept.value;
  CHECK(std::abs(stats.mean(lo) - exact) < 4 * stats.std_dev(lo) / std::sqrt(200.0));
  CHECK(std::abs(stats.mean(hi) - exact) < 4 * stats.std_dev(hi) / std::sqrt(200.0));
}

TEST_CASE("zne csv") {
  std::ostringstream os;
  write_zne_csv(os, points({{1, -0.5}, {3, -0.25}}));
  CHECK(os.str() == "factor,energy,stderr,method\n1,-0.5,0,bare\n3,-0.25,0,bare\n");
}
