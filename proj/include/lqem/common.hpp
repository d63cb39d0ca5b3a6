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

#ifndef LQEM_COMMON_HPP
#define LQEM_COMMON_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace lqem {

using Complex = std::complex<double>;

/// Operand shapes disagree (qubit counts, vector lengths).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition on an argument's value does not hold.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical invariant was breached (trace drift, non-Hermitian state).
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or configuration.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A measured (or exactly computed) expectation value.
///
/// `shots == std::nullopt` is the infinite-shot mode; its `std_error` is 0.
struct ShotEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::optional<std::uint64_t> shots;

  static ShotEstimate exact(double v) { return {v, 0.0, std::nullopt}; }
  bool is_exact() const { return !shots.has_value(); }
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the `index`-th independent stream derived from `master`.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ index);
}

}  // namespace lqem

#endif  // LQEM_COMMON_HPP
