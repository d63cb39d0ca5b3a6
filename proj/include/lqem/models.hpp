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

#ifndef LQEM_MODELS_HPP
#define LQEM_MODELS_HPP

#include <string>

#include "lqem/pauli.hpp"

namespace lqem {

struct ModelSpec {
  enum class Kind { HeisenbergTetrahedron, PauliFile };

  Kind kind = Kind::HeisenbergTetrahedron;
  double J = 1.0;
  double J_prime = 1.0;  // coupling of bond (0, 1)
  std::string path;      // PauliFile only
};

/// J * sum over the six bonds of (XX + YY + ZZ) on 4 qubits; bond (0, 1)
/// carries J_prime instead of J.
PauliSum build_tetrahedron(double J, double J_prime);

/// -(XX + YY + ZZ) on 2 qubits; spectrum {-1, -1, -1, 3}.
PauliSum build_two_qubit_example();

/// Reads a Pauli file and requires a Hermitian operator; the result has real
/// coefficients.
PauliSum load_pauli_file(const std::string& path);

PauliSum build_model(const ModelSpec& spec);

}  // namespace lqem

#endif  // LQEM_MODELS_HPP
