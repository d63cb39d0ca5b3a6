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

#include "lqem/models.hpp"

#include <string>

namespace lqem {

namespace {

void add_heisenberg_bond(PauliSum& h, int a, int b, double coupling) {
  const int n = h.n_qubits();
  const std::uint64_t mask = (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
  h.add(PauliTerm(n, mask, 0, coupling));     // XX
  h.add(PauliTerm(n, mask, mask, coupling));  // YY
  h.add(PauliTerm(n, 0, mask, coupling));     // ZZ
}

}  // namespace

PauliSum build_tetrahedron(double J, double J_prime) {
  PauliSum h(4);
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      add_heisenberg_bond(h, a, b, (a == 0 && b == 1) ? J_prime : J);
    }
  }
  return h;
}

PauliSum build_two_qubit_example() {
  PauliSum h(2);
  add_heisenberg_bond(h, 0, 1, -1.0);
  return h;
}

PauliSum load_pauli_file(const std::string& path) {
  PauliSum h = read_pauli_file(path);
  if (!h.is_hermitian(1e-12)) {
    throw ParseError(path + ": operator is not Hermitian (non-real coefficient)");
  }
  return h.real_part();
}

PauliSum build_model(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelSpec::Kind::HeisenbergTetrahedron:
      return build_tetrahedron(spec.J, spec.J_prime);
    case ModelSpec::Kind::PauliFile:
      return load_pauli_file(spec.path);
  }
  throw ContractError("unknown model kind");
}

}  // namespace lqem
