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
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "lqem/models.hpp"
#include "lqem/variational.hpp"
#include "oracles.hpp"

using namespace lqem;

namespace {

PauliSum zz() {
  PauliSum s(2);
  s.add(PauliTerm::from_label("ZZ"));
  return s;
}

}  // namespace

TEST_CASE("ansatz layout") {
  CHECK(AnsatzSpec{4, 1}.parameter_count() == 16);
  CHECK(AnsatzSpec{2, 1}.parameter_count() == 8);
  for (int n = 1; n <= 8; ++n) {
    for (int l = 0; l <= 4; ++l) {
      CHECK(AnsatzSpec{n, l}.parameter_count() == static_cast<std::size_t>(2 * n * (l + 1)));
    }
  }
  const Eigen::VectorXd t16 = Eigen::VectorXd::Zero(16);
  CHECK(build_ansatz({4, 1}, t16).count_cz() == 3);
  CHECK(build_ansatz({2, 1}, Eigen::VectorXd::Zero(8)).count_cz() == 1);
  CHECK_THROWS_AS(build_ansatz({4, 1}, Eigen::VectorXd::Zero(15)), DimensionError);

  const auto rho = run_circuit(build_ansatz({3, 2}, Eigen::VectorXd::Zero(18)));
  CHECK(std::abs(rho.matrix()(0, 0).real() - 1.0) < 1e-15);
}

TEST_CASE("ansatz matches the gate-by-gate oracle") {
  const AnsatzSpec spec{3, 2};
  Eigen::VectorXd theta(static_cast<Eigen::Index>(spec.parameter_count()));
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = 0.3 + 0.17 * static_cast<double>(i);
  oracle::Mat u = oracle::Mat::Identity(8, 8);
  auto rotations = [&](int block) {
    for (int q = 0; q < 3; ++q) {
      const Eigen::Index i = 2 * (block * 3 + q);
      u = oracle::embed(oracle::ry(theta(i)), q, 3) * u;
      u = oracle::embed(oracle::rz(theta(i + 1)), q, 3) * u;
    }
  };
  rotations(0);
  for (int layer = 1; layer <= 2; ++layer) {
    u = oracle::cz(0, 1, 3) * u;
    u = oracle::cz(1, 2, 3) * u;
    rotations(layer);
  }
  oracle::Mat rho0 = oracle::Mat::Zero(8, 8);
  rho0(0, 0) = 1;
  CHECK((run_circuit(build_ansatz(spec, theta)).matrix() - u * rho0 * u.adjoint()).norm() < 1e-12);
}

TEST_CASE("spsa converges on a quadratic bowl") {
  const Objective bowl = [](const Eigen::VectorXd& t, const Evaluation&) {
    return ShotEstimate::exact((t.array() - 1.0).square().sum());
  };
  SpsaConfig cfg;
  cfg.n_steps = 200;
  const SpsaResult r = spsa_minimize(bowl, Eigen::VectorXd::Zero(4), cfg, 1);
  CHECK((r.theta_opt.array() - 1.0).abs().maxCoeff() < 0.05);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].best <= r.trace[i - 1].best);
  CHECK(r.trace.size() == 200);
}

TEST_CASE("spsa with zero steps returns the start") {
  const Objective f = [](const Eigen::VectorXd& t, const Evaluation&) {
    return ShotEstimate::exact(t.squaredNorm());
  };
  SpsaConfig cfg;
  cfg.n_steps = 0;
  const Eigen::VectorXd start = Eigen::VectorXd::Constant(3, 0.7);
  const SpsaResult r = spsa_minimize(f, start, cfg, 4);
  CHECK(r.theta_opt == start);
  CHECK(r.trace.empty());
}

TEST_CASE("two-qubit ZZ reaches its minimum") {
  const AnsatzSpec spec{2, 1};
  int good = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    VqeConfig cfg;
    cfg.spsa.n_steps = 300;
    cfg.seed = seed;
    if (run_vqe(zz(), spec, cfg).energy.value <= -0.99) ++good;
  }
  CHECK(good >= 8);
}

TEST_CASE("multistart keeps the best restart and is deterministic") {
  const AnsatzSpec spec{2, 1};
  VqeConfig cfg;
  cfg.n_vqe = 3;
  cfg.spsa.n_steps = 40;
  cfg.seed = 11;
  const VqeResult a = run_vqe(zz(), spec, cfg);
  for (const auto& r : a.restarts) CHECK(a.energy.value <= r.result.energy.value);
  cfg.n_threads = 3;
  const VqeResult b = run_vqe(zz(), spec, cfg);
  CHECK(a.theta_opt == b.theta_opt);
  CHECK(a.energy.value == b.energy.value);

  // Each restart starts from the lowest of its n_init samples.
  for (const auto& r : a.restarts) {
    CHECK(r.theta_start.size() == static_cast<Eigen::Index>(spec.parameter_count()));
  }
}

TEST_CASE("noisy optimum is not below its noiseless re-evaluation") {
  const PauliSum h = build_tetrahedron(1.0, 1.0);
  const AnsatzSpec spec{4, 1};
  NoiseModel noise;
  noise.p_depol_1q = 0.002;
  noise.p_depol_2q = 0.03;
  noise.readout.assign(4, ReadoutError::symmetric(0.02));
  VqeConfig cfg;
  cfg.spsa.n_steps = 60;
  cfg.n_shots = 2048;
  cfg.seed = 3;
  const VqeResult r = run_vqe(h, spec, cfg, noise);
  const double clean = exact_expectation(run_circuit(build_ansatz(spec, r.theta_opt)), h);
  CHECK(r.energy.value >= clean - 3 * r.energy.std_error);
}

TEST_CASE("trace csv") {
  std::vector<TraceRow> rows{{0, -1.0, 0.1, -1.0}, {1, -1.5, 0.1, -1.5}};
  std::ostringstream os;
  write_trace_csv(os, rows);
  CHECK(os.str() == "step,energy,stderr,best\n0,-1,0.10000000000000001,-1\n1,-1.5,0.10000000000000001,-1.5\n");
}

TEST_CASE("noiseless tetrahedron with three layers") {
  VqeConfig cfg;
  cfg.n_vqe = 4;
  cfg.spsa.n_steps = 2000;
  cfg.seed = 2026;
  const VqeResult r = run_vqe(build_tetrahedron(1.0, 1.0), {4, 3}, cfg);
  CHECK(r.energy.value <= -6.0 + 0.15);
  CHECK(r.energy.value >= -6.0 - 1e-9);
}
