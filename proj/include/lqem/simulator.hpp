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

#ifndef LQEM_SIMULATOR_HPP
#define LQEM_SIMULATOR_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lqem/common.hpp"
#include "lqem/pauli.hpp"

namespace lqem {

inline constexpr int kMaxSimQubits = 8;

/// Dense density matrix. Basis index bit n-1-q holds qubit q, so qubit 0 is the
/// leftmost tensor factor (same convention as Pauli labels).
class DensityMatrix {
 public:
  using Matrix = Eigen::MatrixXcd;

  static DensityMatrix zero_state(int n_qubits);
  static DensityMatrix maximally_mixed(int n_qubits);
  static DensityMatrix from_pure(const Eigen::VectorXcd& psi);
  /// Validates hermiticity, unit trace and PSD within `tol`.
  static DensityMatrix from_matrix(Matrix m, double tol = 1e-10);

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return data_.rows(); }
  const Matrix& matrix() const { return data_; }

  /// Throws ConsistencyError if hermiticity/trace/PSD are violated.
  void check_invariants(double tol = 1e-10, double psd_tol = 1e-9) const;

 private:
  DensityMatrix(int n_qubits, Matrix data) : n_qubits_(n_qubits), data_(std::move(data)) {}
  friend class StateEvolver;

  int n_qubits_;
  Matrix data_;
};

struct Gate {
  enum class Kind { RY, RZ, CZ };

  Kind kind = Kind::RY;
  std::array<int, 2> qubits{0, 0};
  double theta = 0.0;  // radians; unused for CZ

  static Gate ry(int q, double theta) { return {Kind::RY, {q, q}, theta}; }
  static Gate rz(int q, double theta) { return {Kind::RZ, {q, q}, theta}; }
  static Gate cz(int a, int b) { return {Kind::CZ, {a, b}, 0.0}; }
  bool is_two_qubit() const { return kind == Kind::CZ; }
};

class Circuit {
 public:
  explicit Circuit(int n_qubits, int cz_fold_factor = 1);

  Circuit& add(const Gate& g);
  Circuit& ry(int q, double theta) { return add(Gate::ry(q, theta)); }
  Circuit& rz(int q, double theta) { return add(Gate::rz(q, theta)); }
  Circuit& cz(int a, int b) { return add(Gate::cz(a, b)); }

  int n_qubits() const { return n_qubits_; }
  int cz_fold_factor() const { return cz_fold_factor_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t count_cz() const;

  /// Same gates with every CZ repeated `factor` times (odd, >= 1).
  Circuit with_fold_factor(int factor) const;

 private:
  int n_qubits_;
  int cz_fold_factor_;
  std::vector<Gate> gates_;
};

/// Per-qubit readout confusion: p(1|0) and p(0|1).
struct ReadoutError {
  double p1_given_0 = 0.0;
  double p0_given_1 = 0.0;

  static ReadoutError symmetric(double p) { return {p, p}; }
  bool is_symmetric(double tol = 1e-12) const;
};

struct NoiseModel {
  double p_depol_1q = 0.0;
  double p_depol_2q = 0.0;
  double tau1 = std::numeric_limits<double>::infinity();  // phase-flip constant
  double tau2 = std::numeric_limits<double>::infinity();  // damping constant
  double gate_time_1q = 0.0;
  double gate_time_2q = 0.0;
  double thermal_population = 1.0;  // weight of the ground-state-seeking Kraus pair
  std::vector<ReadoutError> readout;  // empty, or one entry per qubit

  void validate(int n_qubits) const;
  /// 1 - exp(-t / tau), with tau = 0 meaning instantaneous decay.
  static double decay_probability(double t, double tau);
};

using Kraus1 = std::vector<Eigen::Matrix2cd>;

Kraus1 depolarizing_kraus(double gamma);
Kraus1 phase_flip_kraus(double p_flip);
Kraus1 amplitude_damping_kraus(double gamma, double thermal_population);

/// Sum_k K_k rho K_k^dagger with K acting on `qubit`.
DensityMatrix apply_single_qubit_channel(const DensityMatrix& rho, int qubit,
                                         const Kraus1& kraus);

DensityMatrix apply_gate(const DensityMatrix& rho, const Gate& gate);
/// Unitary, then on each involved qubit: depolarizing, phase flip, generalized
/// amplitude damping.
DensityMatrix apply_gate(const DensityMatrix& rho, const Gate& gate,
                         const NoiseModel& noise);

/// Evolves |0...0><0...0|; every CZ is applied cz_fold_factor times, each copy
/// with its own noise. Readout noise is not applied here.
DensityMatrix run_circuit(const Circuit& c);
DensityMatrix run_circuit(const Circuit& c, const NoiseModel& noise);

/// Tr[rho P] for a single Pauli string (coefficient ignored).
Complex pauli_expectation(const DensityMatrix& rho, const PauliKey& key);

/// Tr[rho O] for Hermitian O.
double exact_expectation(const DensityMatrix& rho, const PauliSum& o);

/// Symmetric readout error as a channel on rho: sigma -> (1-2p) sigma + p Tr(sigma) 1
/// per qubit. Asymmetric confusion has no such form and is rejected.
DensityMatrix apply_readout_channel(const DensityMatrix& rho,
                                    std::span<const ReadoutError> readout);

/// Exact post-confusion expectation of each measured string of `o`.
struct StringExpectations {
  double constant = 0.0;             // identity coefficient
  std::vector<double> coefficients;  // real coefficient per string
  std::vector<double> values;        // <P>_r.e. per string
  std::size_t size() const { return values.size(); }
};

StringExpectations string_expectations(const DensityMatrix& rho, const PauliSum& o,
                                       std::span<const ReadoutError> readout = {});

/// Samples every string independently with `n_shots` (nullopt: infinite-shot).
ShotEstimate sample_strings(const StringExpectations& s,
                            std::optional<std::uint64_t> n_shots, std::uint64_t seed);

/// Shot-sampled <O> with optional per-qubit readout confusion.
ShotEstimate sampled_expectation(const DensityMatrix& rho, const PauliSum& o,
                                 std::optional<std::uint64_t> n_shots,
                                 std::span<const ReadoutError> readout,
                                 std::uint64_t seed);

/// Smallest eigenvalue of a Hermitian Pauli sum by dense diagonalization.
double ground_energy(const PauliSum& h);

}  // namespace lqem

#endif  // LQEM_SIMULATOR_HPP
