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

#include "lqem/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>

namespace lqem {

namespace {

void check_sim_width(int n) {
  if (n < 1 || n > kMaxSimQubits) {
    throw DimensionError("simulator supports 1.." + std::to_string(kMaxSimQubits) +
                         " qubits, got " + std::to_string(n));
  }
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ContractError(std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

using Matrix = DensityMatrix::Matrix;

// Bit of the basis index that holds `qubit`.
std::uint64_t qubit_bit(int n, int qubit) { return std::uint64_t{1} << (n - 1 - qubit); }

// Applies rho -> sum_k K rho K^dagger on one qubit, block by block.
void channel_in_place(Matrix& rho, int n, int qubit, const Kraus1& kraus) {
  const auto m = qubit_bit(n, qubit);
  const auto dim = static_cast<std::uint64_t>(rho.rows());
  Eigen::Matrix2cd block;
  Eigen::Matrix2cd out;
  for (std::uint64_t r = 0; r < dim; ++r) {
    if (r & m) continue;
    for (std::uint64_t c = 0; c < dim; ++c) {
      if (c & m) continue;
      const auto r0 = static_cast<Eigen::Index>(r), r1 = static_cast<Eigen::Index>(r | m);
      const auto c0 = static_cast<Eigen::Index>(c), c1 = static_cast<Eigen::Index>(c | m);
      block << rho(r0, c0), rho(r0, c1), rho(r1, c0), rho(r1, c1);
      out.setZero();
      for (const auto& k : kraus) out.noalias() += k * block * k.adjoint();
      rho(r0, c0) = out(0, 0);
      rho(r0, c1) = out(0, 1);
      rho(r1, c0) = out(1, 0);
      rho(r1, c1) = out(1, 1);
    }
  }
}

void cz_in_place(Matrix& rho, int n, int a, int b) {
  const auto mask = qubit_bit(n, a) | qubit_bit(n, b);
  const Eigen::Index dim = rho.rows();
  for (Eigen::Index c = 0; c < dim; ++c) {
    const bool sc = (static_cast<std::uint64_t>(c) & mask) == mask;
    for (Eigen::Index r = 0; r < dim; ++r) {
      const bool sr = (static_cast<std::uint64_t>(r) & mask) == mask;
      if (sr != sc) rho(r, c) = -rho(r, c);
    }
  }
}

Eigen::Matrix2cd ry_matrix(double theta) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  Eigen::Matrix2cd u;
  u << c, -s, s, c;
  return u;
}

Eigen::Matrix2cd rz_matrix(double theta) {
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
  u(0, 0) = std::polar(1.0, -theta / 2);
  u(1, 1) = std::polar(1.0, theta / 2);
  return u;
}

void check_gate(const Gate& g, int n) {
  auto valid = [n](int q) { return q >= 0 && q < n; };
  if (!valid(g.qubits[0]) || (g.is_two_qubit() && !valid(g.qubits[1]))) {
    throw ContractError("gate qubit index out of range");
  }
  if (g.is_two_qubit() && g.qubits[0] == g.qubits[1]) {
    throw ContractError("CZ needs two distinct qubits");
  }
}

void check_trace(const Matrix& rho) {
  const double drift = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (drift > 1e-8) {
    throw ConsistencyError("trace drift " + std::to_string(drift) + " after noisy gate");
  }
}

}  // namespace

// Owns a state while a sequence of in-place updates is applied.
class StateEvolver {
 public:
  explicit StateEvolver(DensityMatrix rho) : rho_(std::move(rho)) {}
  int n() const { return rho_.n_qubits_; }
  Matrix& data() { return rho_.data_; }
  DensityMatrix release() { return std::move(rho_); }

  void unitary(const Gate& g) {
    switch (g.kind) {
      case Gate::Kind::RY: channel_in_place(data(), n(), g.qubits[0], {ry_matrix(g.theta)}); break;
      case Gate::Kind::RZ: channel_in_place(data(), n(), g.qubits[0], {rz_matrix(g.theta)}); break;
      case Gate::Kind::CZ: cz_in_place(data(), n(), g.qubits[0], g.qubits[1]); break;
    }
  }

  void noise(const Gate& g, const NoiseModel& nm) {
    const bool two = g.is_two_qubit();
    const double p_dep = two ? nm.p_depol_2q : nm.p_depol_1q;
    const double t = two ? nm.gate_time_2q : nm.gate_time_1q;
    const double p_flip = NoiseModel::decay_probability(t, nm.tau1);
    const double gamma = NoiseModel::decay_probability(t, nm.tau2);
    const int count = two ? 2 : 1;
    for (int i = 0; i < count; ++i) {
      const int q = g.qubits[i];
      if (p_dep > 0) channel_in_place(data(), n(), q, depolarizing_kraus(p_dep));
      if (p_flip > 0) channel_in_place(data(), n(), q, phase_flip_kraus(p_flip));
      if (gamma > 0) {
        channel_in_place(data(), n(), q, amplitude_damping_kraus(gamma, nm.thermal_population));
      }
    }
    check_trace(data());
  }

 private:
  DensityMatrix rho_;
};

DensityMatrix DensityMatrix::zero_state(int n_qubits) {
  check_sim_width(n_qubits);
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  Matrix m = Matrix::Zero(dim, dim);
  m(0, 0) = 1.0;
  return {n_qubits, std::move(m)};
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits) {
  check_sim_width(n_qubits);
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  return {n_qubits, Matrix::Identity(dim, dim) / static_cast<double>(dim)};
}

DensityMatrix DensityMatrix::from_pure(const Eigen::VectorXcd& psi) {
  const auto dim = static_cast<std::uint64_t>(psi.size());
  if (dim < 2 || !std::has_single_bit(dim)) {
    throw DimensionError("state vector length must be a power of two");
  }
  const int n = std::countr_zero(dim);
  check_sim_width(n);
  const double norm = psi.norm();
  if (norm == 0.0) throw ContractError("zero state vector");
  const Eigen::VectorXcd v = psi / norm;
  return {n, v * v.adjoint()};
}

DensityMatrix DensityMatrix::from_matrix(Matrix m, double tol) {
  const auto dim = static_cast<std::uint64_t>(m.rows());
  if (m.rows() != m.cols() || dim < 2 || !std::has_single_bit(dim)) {
    throw DimensionError("density matrix must be square with power-of-two size");
  }
  const int n = std::countr_zero(dim);
  check_sim_width(n);
  DensityMatrix rho(n, std::move(m));
  try {
    rho.check_invariants(tol, std::max(tol, 1e-9));
  } catch (const ConsistencyError& e) {
    throw ContractError(e.what());
  }
  return rho;
}

void DensityMatrix::check_invariants(double tol, double psd_tol) const {
  if ((data_ - data_.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw ConsistencyError("density matrix is not Hermitian");
  }
  if (std::abs(data_.trace() - Complex(1.0, 0.0)) > tol) {
    throw ConsistencyError("density matrix trace differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(data_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -psd_tol) {
    throw ConsistencyError("density matrix has a negative eigenvalue");
  }
}

Circuit::Circuit(int n_qubits, int cz_fold_factor)
    : n_qubits_(n_qubits), cz_fold_factor_(cz_fold_factor) {
  check_sim_width(n_qubits);
  if (cz_fold_factor < 1 || cz_fold_factor % 2 == 0) {
    throw ContractError("cz_fold_factor must be an odd positive integer");
  }
}

Circuit& Circuit::add(const Gate& g) {
  check_gate(g, n_qubits_);
  gates_.push_back(g);
  return *this;
}

std::size_t Circuit::count_cz() const {
  return static_cast<std::size_t>(
      std::count_if(gates_.begin(), gates_.end(), [](const Gate& g) { return g.is_two_qubit(); }));
}

Circuit Circuit::with_fold_factor(int factor) const {
  Circuit c(n_qubits_, factor);
  c.gates_ = gates_;
  return c;
}

bool ReadoutError::is_symmetric(double tol) const {
  return std::abs(p1_given_0 - p0_given_1) <= tol;
}

void NoiseModel::validate(int n_qubits) const {
  check_probability(p_depol_1q, "p_depol_1q");
  check_probability(p_depol_2q, "p_depol_2q");
  check_probability(thermal_population, "thermal_population");
  if (!(tau1 >= 0.0) || !(tau2 >= 0.0)) throw ContractError("tau1/tau2 must be >= 0");
  if (!(gate_time_1q >= 0.0) || !(gate_time_2q >= 0.0)) {
    throw ContractError("gate times must be >= 0");
  }
  if (!readout.empty() && static_cast<int>(readout.size()) != n_qubits) {
    throw DimensionError("readout needs one entry per qubit");
  }
  for (const auto& r : readout) {
    check_probability(r.p1_given_0, "readout p(1|0)");
    check_probability(r.p0_given_1, "readout p(0|1)");
  }
}

double NoiseModel::decay_probability(double t, double tau) {
  if (t <= 0.0 || std::isinf(tau)) return 0.0;
  if (tau == 0.0) return 1.0;
  return -std::expm1(-t / tau);
}

Kraus1 depolarizing_kraus(double gamma) {
  check_probability(gamma, "depolarizing gamma");
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity(), x, y, z;
  x << 0, 1, 1, 0;
  y << 0, -i, i, 0;
  z << 1, 0, 0, -1;
  const double a = std::sqrt(1.0 - 3.0 * gamma / 4.0);
  const double b = std::sqrt(gamma / 4.0);
  return {a * id, b * x, b * y, b * z};
}

Kraus1 phase_flip_kraus(double p_flip) {
  check_probability(p_flip, "phase flip probability");
  Eigen::Matrix2cd z;
  z << 1, 0, 0, -1;
  return {std::sqrt(1.0 - p_flip / 2.0) * Eigen::Matrix2cd::Identity(),
          std::sqrt(p_flip / 2.0) * z};
}

Kraus1 amplitude_damping_kraus(double gamma, double p) {
  check_probability(gamma, "damping gamma");
  check_probability(p, "thermal population");
  const double s = std::sqrt(1.0 - gamma);
  const double g = std::sqrt(gamma);
  Eigen::Matrix2cd k0, k1, k2, k3;
  k0 << 1, 0, 0, s;
  k1 << 0, g, 0, 0;
  k2 << s, 0, 0, 1;
  k3 << 0, 0, g, 0;
  const double a = std::sqrt(p);
  const double b = std::sqrt(1.0 - p);
  return {a * k0, a * k1, b * k2, b * k3};
}

DensityMatrix apply_single_qubit_channel(const DensityMatrix& rho, int qubit,
                                         const Kraus1& kraus) {
  if (qubit < 0 || qubit >= rho.n_qubits()) throw ContractError("qubit out of range");
  StateEvolver ev(rho);
  channel_in_place(ev.data(), ev.n(), qubit, kraus);
  return ev.release();
}

DensityMatrix apply_gate(const DensityMatrix& rho, const Gate& gate) {
  check_gate(gate, rho.n_qubits());
  StateEvolver ev(rho);
  ev.unitary(gate);
  return ev.release();
}

DensityMatrix apply_gate(const DensityMatrix& rho, const Gate& gate, const NoiseModel& noise) {
  check_gate(gate, rho.n_qubits());
  noise.validate(rho.n_qubits());
  StateEvolver ev(rho);
  ev.unitary(gate);
  ev.noise(gate, noise);
  return ev.release();
}

namespace {

DensityMatrix run(const Circuit& c, const NoiseModel* noise) {
  if (noise) noise->validate(c.n_qubits());
  StateEvolver ev(DensityMatrix::zero_state(c.n_qubits()));
  for (const auto& g : c.gates()) {
    const int copies = g.is_two_qubit() ? c.cz_fold_factor() : 1;
    for (int k = 0; k < copies; ++k) {
      ev.unitary(g);
      if (noise) ev.noise(g, *noise);
    }
  }
  return ev.release();
}

}  // namespace

DensityMatrix run_circuit(const Circuit& c) { return run(c, nullptr); }
DensityMatrix run_circuit(const Circuit& c, const NoiseModel& noise) { return run(c, &noise); }

Complex pauli_expectation(const DensityMatrix& rho, const PauliKey& key) {
  const int n = rho.n_qubits();
  const std::uint64_t xi = index_mask(key.x, n);
  const std::uint64_t zi = index_mask(key.z, n);
  const auto& m = rho.matrix();
  Complex acc{};
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    const auto uj = static_cast<std::uint64_t>(j);
    const Complex v = m(j, static_cast<Eigen::Index>(uj ^ xi));
    acc += (std::popcount(zi & uj) & 1) ? -v : v;
  }
  return acc * i_pow(std::popcount(key.x & key.z));
}

double exact_expectation(const DensityMatrix& rho, const PauliSum& o) {
  if (o.n_qubits() != rho.n_qubits()) throw DimensionError("exact_expectation: qubit counts differ");
  if (!o.is_hermitian()) throw ContractError("exact_expectation: operator is not Hermitian");
  Complex acc{};
  for (const auto& [key, c] : o.terms()) acc += c * pauli_expectation(rho, key);
  const double tol = 1e-9 * std::max(1.0, std::abs(acc));
  if (std::abs(acc.imag()) > tol) {
    throw ConsistencyError("exact_expectation: imaginary residue " + std::to_string(acc.imag()));
  }
  return acc.real();
}

DensityMatrix apply_readout_channel(const DensityMatrix& rho,
                                    std::span<const ReadoutError> readout) {
  if (readout.empty()) return rho;
  if (static_cast<int>(readout.size()) != rho.n_qubits()) {
    throw DimensionError("readout needs one entry per qubit");
  }
  for (const auto& r : readout) {
    check_probability(r.p1_given_0, "readout p(1|0)");
    check_probability(r.p0_given_1, "readout p(0|1)");
    if (!r.is_symmetric()) {
      throw ContractError(
          "asymmetric readout error has no channel form on the state; "
          "use sampled_expectation with the confusion probabilities instead");
    }
  }
  StateEvolver ev(rho);
  Matrix& m = ev.data();
  const int n = rho.n_qubits();
  const auto dim = static_cast<std::uint64_t>(m.rows());
  for (int q = 0; q < n; ++q) {
    const double p = readout[q].p1_given_0;
    if (p == 0.0) continue;
    const auto b = qubit_bit(n, q);
    for (std::uint64_t r = 0; r < dim; ++r) {
      if (r & b) continue;
      for (std::uint64_t c = 0; c < dim; ++c) {
        if (c & b) continue;
        const auto r0 = static_cast<Eigen::Index>(r), r1 = static_cast<Eigen::Index>(r | b);
        const auto c0 = static_cast<Eigen::Index>(c), c1 = static_cast<Eigen::Index>(c | b);
        const Complex tr = m(r0, c0) + m(r1, c1);
        m(r0, c0) = (1 - 2 * p) * m(r0, c0) + p * tr;
        m(r1, c1) = (1 - 2 * p) * m(r1, c1) + p * tr;
        m(r0, c1) *= (1 - 2 * p);
        m(r1, c0) *= (1 - 2 * p);
      }
    }
  }
  return ev.release();
}

StringExpectations string_expectations(const DensityMatrix& rho, const PauliSum& o,
                                       std::span<const ReadoutError> readout) {
  if (o.n_qubits() != rho.n_qubits()) throw DimensionError("qubit counts differ");
  if (!o.is_hermitian()) throw ContractError("measured operator is not Hermitian");
  if (!readout.empty() && static_cast<int>(readout.size()) != rho.n_qubits()) {
    throw DimensionError("readout needs one entry per qubit");
  }
  // Per measured site the reported sign has mean A + B s' for true sign s', with
  // A = p(0|1) - p(1|0) and B = 1 - p(1|0) - p(0|1). Expanding the product over
  // the support gives a sum of expectations of sub-strings.
  StringExpectations out;
  for (const auto& [key, c] : o.terms()) {
    if (key.is_identity()) {
      out.constant += c.real();
      continue;
    }
    double value = 0.0;
    if (readout.empty()) {
      value = pauli_expectation(rho, key).real();
    } else {
      const std::uint64_t support = key.x | key.z;
      // Iterate every sub-mask of the support, including the empty one.
      std::uint64_t sub = support;
      while (true) {
        double weight = 1.0;
        for (std::uint64_t rest = support; rest; rest &= rest - 1) {
          const int q = std::countr_zero(rest);
          const auto& r = readout[q];
          weight *= ((sub >> q) & 1U) ? (1.0 - r.p1_given_0 - r.p0_given_1)
                                       : (r.p0_given_1 - r.p1_given_0);
        }
        if (weight != 0.0) {
          const PauliKey part{key.x & sub, key.z & sub};
          value += weight * (part.is_identity() ? 1.0 : pauli_expectation(rho, part).real());
        }
        if (sub == 0) break;
        sub = (sub - 1) & support;
      }
    }
    out.coefficients.push_back(c.real());
    out.values.push_back(std::clamp(value, -1.0, 1.0));
  }
  return out;
}

ShotEstimate sample_strings(const StringExpectations& s, std::optional<std::uint64_t> n_shots,
                            std::uint64_t seed) {
  if (!n_shots) {
    double v = s.constant;
    for (std::size_t i = 0; i < s.size(); ++i) v += s.coefficients[i] * s.values[i];
    return ShotEstimate::exact(v);
  }
  if (*n_shots == 0) throw ContractError("n_shots must be positive");
  const double n = static_cast<double>(*n_shots);
  std::mt19937_64 rng(seed);
  double value = s.constant;
  double var = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double p_plus = std::clamp((1.0 + s.values[i]) / 2.0, 0.0, 1.0);
    std::binomial_distribution<std::uint64_t> draw(*n_shots, p_plus);
    const auto k = draw(rng);
    const double est = 2.0 * static_cast<double>(k) / n - 1.0;
    // Add-one smoothed frequency.
    const double p_s = (static_cast<double>(k) + 1.0) / (n + 2.0);
    const double var_i = 4.0 * p_s * (1.0 - p_s) / n;
    value += s.coefficients[i] * est;
    var += s.coefficients[i] * s.coefficients[i] * var_i;
  }
  return {value, std::sqrt(var), n_shots};
}

ShotEstimate sampled_expectation(const DensityMatrix& rho, const PauliSum& o,
                                 std::optional<std::uint64_t> n_shots,
                                 std::span<const ReadoutError> readout, std::uint64_t seed) {
  return sample_strings(string_expectations(rho, o, readout), n_shots, seed);
}

double ground_energy(const PauliSum& h) {
  if (!h.is_hermitian()) throw ContractError("ground_energy: operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_dense(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace lqem
