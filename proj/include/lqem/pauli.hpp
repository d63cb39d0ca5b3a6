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

#ifndef LQEM_PAULI_HPP
#define LQEM_PAULI_HPP

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lqem/common.hpp"

namespace lqem {

inline constexpr int kMaxPauliQubits = 64;
inline constexpr double kDefaultPruneTol = 1e-12;

/// Symplectic bit pair of a Pauli string. Bit q of `x`/`z` belongs to qubit q.
/// Site letters: (0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z.
struct PauliKey {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  bool is_identity() const { return (x | z) == 0; }
  friend bool operator==(const PauliKey&, const PauliKey&) = default;
};

/// Canonical order: lexicographic on (z, x).
struct CanonicalOrder {
  bool operator()(const PauliKey& a, const PauliKey& b) const {
    return a.z != b.z ? a.z < b.z : a.x < b.x;
  }
};

/// Exponent k in {0,1,2,3} with P_a * P_b = i^k * P_{a^b}, where P denotes the
/// Hermitian Pauli string (Y letters, not XZ products).
inline int product_phase(const PauliKey& a, const PauliKey& b) {
  const int ya = std::popcount(a.x & a.z);
  const int yb = std::popcount(b.x & b.z);
  const int yc = std::popcount((a.x ^ b.x) & (a.z ^ b.z));
  const int swap = std::popcount(a.z & b.x);
  return ((ya + yb + 2 * swap - yc) % 4 + 4) % 4;
}

inline Complex i_pow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

/// A weighted Pauli string c * (sigma_0 ⊗ sigma_1 ⊗ ...).
class PauliTerm {
 public:
  PauliTerm(int n_qubits, std::uint64_t x_mask, std::uint64_t z_mask,
            Complex coefficient = 1.0);

  /// Parses a label over {I,X,Y,Z}; character 0 is qubit 0.
  static PauliTerm from_label(std::string_view label, Complex coefficient = 1.0);

  int n_qubits() const { return n_qubits_; }
  std::uint64_t x_mask() const { return key_.x; }
  std::uint64_t z_mask() const { return key_.z; }
  const PauliKey& key() const { return key_; }
  Complex coefficient() const { return coefficient_; }
  bool is_identity() const { return key_.is_identity(); }

  char letter(int qubit) const;
  std::string label() const;

 private:
  int n_qubits_;
  PauliKey key_;
  Complex coefficient_;
};

/// Exact product including the {±1, ±i} phase.
PauliTerm multiply_terms(const PauliTerm& a, const PauliTerm& b);

/// Weighted sum of Pauli strings with like terms combined.
class PauliSum {
 public:
  using TermMap = std::map<PauliKey, Complex, CanonicalOrder>;

  explicit PauliSum(int n_qubits);

  static PauliSum identity(int n_qubits, Complex coefficient = 1.0);
  static PauliSum from_terms(int n_qubits, const std::vector<PauliTerm>& terms,
                             double prune_tol = kDefaultPruneTol);

  /// Accumulates `t` into the sum; entries that cancel below `prune_tol` are
  /// erased.
  void add(const PauliTerm& t, double prune_tol = kDefaultPruneTol);

  int n_qubits() const { return n_qubits_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const TermMap& terms() const { return terms_; }
  std::vector<PauliTerm> term_list() const;

  Complex coefficient(const PauliKey& key) const;
  std::size_t count_non_identity() const;

  /// Hermitian iff every coefficient is real; |Im c| <= tol * max(1, |c|).
  bool is_hermitian(double tol = 1e-10) const;
  PauliSum adjoint() const;
  PauliSum pruned(double prune_tol) const;
  /// Drops imaginary parts. Only meaningful after an is_hermitian() check.
  PauliSum real_part() const;
  double max_abs_coefficient() const;

  PauliSum& operator+=(const PauliSum& other);
  PauliSum& operator*=(Complex s);

 private:
  int n_qubits_;
  TermMap terms_;
};

PauliSum operator+(PauliSum a, const PauliSum& b);
PauliSum operator-(PauliSum a, const PauliSum& b);
PauliSum operator*(Complex s, PauliSum a);

/// Distributive product; combined coefficients below `prune_tol` are dropped.
PauliSum multiply_sums(const PauliSum& a, const PauliSum& b,
                       double prune_tol = kDefaultPruneTol);
PauliSum operator*(const PauliSum& a, const PauliSum& b);

/// h^k by repeated multiplication. k == 0 gives the identity.
PauliSum power(const PauliSum& h, int k, double prune_tol = kDefaultPruneTol);

/// Term counts for H, H^2, H^3 and the fitted exponents y with n_q^y = n_pt.
///
/// Counting convention: every distinct (x, z) key is one term, the identity
/// included when present. `measured` excludes the identity.
struct TermCountReport {
  int n_qubits = 0;
  std::array<std::size_t, 3> counts{};
  std::array<std::size_t, 3> measured{};
  std::array<std::optional<double>, 3> exponents{};
};

TermCountReport count_terms_report(const PauliSum& h,
                                   double prune_tol = kDefaultPruneTol);

/// Greedy qubit-wise commuting partition in canonical term order.
std::vector<std::vector<PauliTerm>> group_qubitwise_commuting(const PauliSum& h);

/// True if a and b use a compatible measurement basis on every site.
bool qubitwise_commute(const PauliKey& a, const PauliKey& b);

/// Reverses the low `n_qubits` bits: qubit q maps to basis-index bit n-1-q, so
/// label character 0 is the most significant tensor factor.
inline std::uint64_t index_mask(std::uint64_t mask, int n_qubits) {
  std::uint64_t out = 0;
  for (int q = 0; q < n_qubits; ++q) {
    if ((mask >> q) & 1U) out |= std::uint64_t{1} << (n_qubits - 1 - q);
  }
  return out;
}

/// Dense matrix of a Pauli sum (2^n x 2^n).
template <typename Scalar = Complex>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> to_dense(const PauliSum& s) {
  if (s.n_qubits() > 14) throw DimensionError("to_dense: more than 14 qubits");
  const int n = s.n_qubits();
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(dim, dim);
  for (const auto& [key, c] : s.terms()) {
    const std::uint64_t xi = index_mask(key.x, n);
    const std::uint64_t zi = index_mask(key.z, n);
    const Complex base = c * i_pow(std::popcount(key.x & key.z));
    for (Eigen::Index col = 0; col < dim; ++col) {
      const auto j = static_cast<std::uint64_t>(col);
      const Complex v = (std::popcount(zi & j) & 1) ? -base : base;
      m(static_cast<Eigen::Index>(j ^ xi), col) += Scalar(v);
    }
  }
  return m;
}

// Serialization. JSON: [{"label": "XZ", "coeff_re": 1.0, "coeff_im": 0.0}, ...].
// Text: one "LABEL re [im]" per line, '#' starts a comment.

/// Canonically ordered JSON document.
std::string to_json_string(const PauliSum& s);
/// Parses either format; n_qubits is the common label length.
PauliSum parse_pauli_sum(std::string_view text);
PauliSum read_pauli_file(const std::string& path);
void write_pauli_file(const PauliSum& s, const std::string& path);

}  // namespace lqem

#endif  // LQEM_PAULI_HPP
