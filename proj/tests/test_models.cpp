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

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lqem/models.hpp"
#include "lqem/simulator.hpp"
#include "oracles.hpp"

using namespace lqem;

namespace {

Eigen::VectorXd spectrum(const PauliSum& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_dense(h));
  return es.eigenvalues();
}

// Sum over the six pairs of sigma.sigma, written out label by label.
Eigen::MatrixXcd tetrahedron_oracle(double j, double jp) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(16, 16);
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      for (char c : std::string("XYZ")) {
        std::string l(4, 'I');
        l[static_cast<std::size_t>(a)] = c;
        l[static_cast<std::size_t>(b)] = c;
        h += (a == 0 && b == 1 ? jp : j) * oracle::dense(l);
      }
    }
  }
  return h;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("tetrahedron matches the bond-sum oracle") {
  for (double jp : {0.0, 0.6, 1.0, 1.4}) {
    const PauliSum h = build_tetrahedron(1.0, jp);
    CHECK((to_dense(h) - tetrahedron_oracle(1.0, jp)).norm() < 1e-13);
    CHECK(h.is_hermitian());
  }
  CHECK(build_tetrahedron(1.0, 1.0).size() == 18);
  CHECK(build_tetrahedron(1.0, 0.0).size() == 15);
}

TEST_CASE("tetrahedron spectrum at equal couplings") {
  const Eigen::VectorXd e = spectrum(build_tetrahedron(1.0, 1.0));
  CHECK(e(0) == doctest::Approx(-6.0).epsilon(1e-13));
  CHECK(e(1) == doctest::Approx(-6.0).epsilon(1e-13));
  CHECK(e(2) > -5.0);
  CHECK(e(15) == doctest::Approx(6.0).epsilon(1e-13));

  const Eigen::VectorXd doubled = spectrum(build_tetrahedron(2.0, 2.0));
  CHECK((doubled - 2.0 * e).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("level crossing at equal couplings") {
  auto gap = [](double jp) {
    const Eigen::VectorXd e = spectrum(build_tetrahedron(1.0, jp));
    return e(1) - e(0);
  };
  CHECK(gap(1.0) < 1e-10);
  CHECK(gap(0.6) > 0.1);
  CHECK(gap(1.4) > 0.1);
}

TEST_CASE("two-qubit example") {
  const PauliSum h = build_two_qubit_example();
  const Eigen::VectorXd e = spectrum(h);
  CHECK(e(0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(e(1) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(e(2) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(e(3) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(std::abs(to_dense(h).trace()) < 1e-15);
  CHECK(exact_expectation(DensityMatrix::zero_state(2), h) == doctest::Approx(-1.0));
}

TEST_CASE("pauli files") {
  const auto zz = write_temp("lqem_model_zz.txt", "ZZ 1\n");
  const PauliSum h = load_pauli_file(zz.string());
  CHECK(h.n_qubits() == 2);
  CHECK(h.size() == 1);
  CHECK(h.coefficient(PauliTerm::from_label("ZZ").key()) == Complex(1, 0));

  const auto dup = write_temp("lqem_model_dup.json",
                              R"([{"label":"XI","coeff_re":0.25,"coeff_im":0},{"label":"XI","coeff_re":0.5}])");
  CHECK(load_pauli_file(dup.string()).coefficient(PauliTerm::from_label("XI").key()) == Complex(0.75, 0));

  const auto imag = write_temp("lqem_model_imag.json", R"([{"label":"ZX","coeff_re":1,"coeff_im":0.5}])");
  CHECK_THROWS_AS(load_pauli_file(imag.string()), ParseError);
  CHECK_THROWS_AS(load_pauli_file("/nonexistent/lqem.json"), ParseError);

  ModelSpec spec;
  spec.kind = ModelSpec::Kind::PauliFile;
  spec.path = zz.string();
  CHECK(build_model(spec).size() == 1);
  for (const auto& p : {zz, dup, imag}) std::filesystem::remove(p);
}
