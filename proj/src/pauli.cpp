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

#include "lqem/pauli.hpp"

#include <cmath>
#include <unordered_map>

namespace lqem {

namespace {

void check_width(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxPauliQubits) {
    throw DimensionError("Pauli string width must be in [1, 64], got " +
                         std::to_string(n_qubits));
  }
}

std::uint64_t width_mask(int n_qubits) {
  return n_qubits == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n_qubits) - 1);
}

struct KeyHash {
  std::size_t operator()(const PauliKey& k) const noexcept {
    return static_cast<std::size_t>(mix64(k.x ^ mix64(k.z)));
  }
};

}  // namespace

PauliTerm::PauliTerm(int n_qubits, std::uint64_t x_mask, std::uint64_t z_mask,
                     Complex coefficient)
    : n_qubits_(n_qubits), key_{x_mask, z_mask}, coefficient_(coefficient) {
  check_width(n_qubits);
  if (((x_mask | z_mask) & ~width_mask(n_qubits)) != 0) {
    throw DimensionError("Pauli mask has bits beyond n_qubits");
  }
}

PauliTerm PauliTerm::from_label(std::string_view label, Complex coefficient) {
  const int n = static_cast<int>(label.size());
  check_width(n);
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  for (int q = 0; q < n; ++q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    switch (label[q]) {
      case 'I': break;
      case 'X': x |= bit; break;
      case 'Y': x |= bit; z |= bit; break;
      case 'Z': z |= bit; break;
      default:
        throw ParseError("invalid Pauli letter '" + std::string(1, label[q]) +
                         "' in label \"" + std::string(label) + "\"");
    }
  }
  return PauliTerm(n, x, z, coefficient);
}

char PauliTerm::letter(int qubit) const {
  const bool xb = (key_.x >> qubit) & 1U;
  const bool zb = (key_.z >> qubit) & 1U;
  if (xb) return zb ? 'Y' : 'X';
  return zb ? 'Z' : 'I';
}

std::string PauliTerm::label() const {
  std::string s(static_cast<std::size_t>(n_qubits_), 'I');
  for (int q = 0; q < n_qubits_; ++q) s[q] = letter(q);
  return s;
}

PauliTerm multiply_terms(const PauliTerm& a, const PauliTerm& b) {
  if (a.n_qubits() != b.n_qubits()) {
    throw DimensionError("multiply_terms: qubit counts differ (" +
                         std::to_string(a.n_qubits()) + " vs " +
                         std::to_string(b.n_qubits()) + ")");
  }
  const int k = product_phase(a.key(), b.key());
  return PauliTerm(a.n_qubits(), a.x_mask() ^ b.x_mask(), a.z_mask() ^ b.z_mask(),
                   a.coefficient() * b.coefficient() * i_pow(k));
}

PauliSum::PauliSum(int n_qubits) : n_qubits_(n_qubits) { check_width(n_qubits); }

PauliSum PauliSum::identity(int n_qubits, Complex coefficient) {
  PauliSum s(n_qubits);
  s.add(PauliTerm(n_qubits, 0, 0, coefficient));
  return s;
}

PauliSum PauliSum::from_terms(int n_qubits, const std::vector<PauliTerm>& terms,
                              double prune_tol) {
  PauliSum s(n_qubits);
  for (const auto& t : terms) s.add(t, prune_tol);
  return s;
}

void PauliSum::add(const PauliTerm& t, double prune_tol) {
  if (t.n_qubits() != n_qubits_) {
    throw DimensionError("PauliSum::add: qubit counts differ");
  }
  auto [it, inserted] = terms_.try_emplace(t.key(), t.coefficient());
  if (!inserted) it->second += t.coefficient();
  if (std::abs(it->second) < prune_tol) terms_.erase(it);
}

std::vector<PauliTerm> PauliSum::term_list() const {
  std::vector<PauliTerm> out;
  out.reserve(terms_.size());
  for (const auto& [k, c] : terms_) out.emplace_back(n_qubits_, k.x, k.z, c);
  return out;
}

Complex PauliSum::coefficient(const PauliKey& key) const {
  const auto it = terms_.find(key);
  return it == terms_.end() ? Complex{} : it->second;
}

std::size_t PauliSum::count_non_identity() const {
  return terms_.size() - (terms_.count(PauliKey{}) ? 1 : 0);
}

bool PauliSum::is_hermitian(double tol) const {
  for (const auto& [k, c] : terms_) {
    if (std::abs(c.imag()) > tol * std::max(1.0, std::abs(c))) return false;
  }
  return true;
}

PauliSum PauliSum::adjoint() const {
  PauliSum out(n_qubits_);
  for (const auto& [k, c] : terms_) out.terms_.emplace(k, std::conj(c));
  return out;
}

PauliSum PauliSum::pruned(double prune_tol) const {
  PauliSum out(n_qubits_);
  for (const auto& [k, c] : terms_) {
    if (std::abs(c) >= prune_tol) out.terms_.emplace(k, c);
  }
  return out;
}

PauliSum PauliSum::real_part() const {
  PauliSum out(n_qubits_);
  for (const auto& [k, c] : terms_) {
    if (c.real() != 0.0) out.terms_.emplace(k, Complex(c.real(), 0.0));
  }
  return out;
}

double PauliSum::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
  if (other.n_qubits_ != n_qubits_) {
    throw DimensionError("PauliSum +: qubit counts differ");
  }
  for (const auto& [k, c] : other.terms_) add(PauliTerm(n_qubits_, k.x, k.z, c));
  return *this;
}

PauliSum& PauliSum::operator*=(Complex s) {
  if (s == Complex{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [k, c] : terms_) c *= s;
  return *this;
}

PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }

PauliSum operator-(PauliSum a, const PauliSum& b) {
  PauliSum nb = b;
  nb *= -1.0;
  return a += nb;
}

PauliSum operator*(Complex s, PauliSum a) { return a *= s; }

PauliSum multiply_sums(const PauliSum& a, const PauliSum& b, double prune_tol) {
  if (a.n_qubits() != b.n_qubits()) {
    throw DimensionError("multiply_sums: qubit counts differ (" +
                         std::to_string(a.n_qubits()) + " vs " +
                         std::to_string(b.n_qubits()) + ")");
  }
  if (prune_tol < 0.0) throw ContractError("multiply_sums: prune_tol < 0");

  // Accumulation order is the canonical order of both operands, so the result
  // is deterministic.
  std::unordered_map<PauliKey, Complex, KeyHash> acc;
  acc.reserve(a.size() * b.size());
  for (const auto& [ka, ca] : a.terms()) {
    for (const auto& [kb, cb] : b.terms()) {
      const PauliKey kc{ka.x ^ kb.x, ka.z ^ kb.z};
      acc[kc] += ca * cb * i_pow(product_phase(ka, kb));
    }
  }
  PauliSum out(a.n_qubits());
  for (const auto& [k, c] : acc) {
    if (std::abs(c) >= prune_tol) out.add(PauliTerm(a.n_qubits(), k.x, k.z, c), 0.0);
  }
  return out;
}

PauliSum operator*(const PauliSum& a, const PauliSum& b) { return multiply_sums(a, b); }

PauliSum power(const PauliSum& h, int k, double prune_tol) {
  if (k < 0) throw ContractError("power: negative exponent");
  PauliSum out = PauliSum::identity(h.n_qubits());
  for (int i = 0; i < k; ++i) out = multiply_sums(out, h, prune_tol);
  return k == 0 ? out : out.pruned(prune_tol);
}

TermCountReport count_terms_report(const PauliSum& h, double prune_tol) {
  TermCountReport r;
  r.n_qubits = h.n_qubits();
  PauliSum p = h.pruned(prune_tol);
  for (int k = 0; k < 3; ++k) {
    if (k > 0) p = multiply_sums(p, h, prune_tol);
    r.counts[k] = p.size();
    r.measured[k] = p.count_non_identity();
    if (r.n_qubits > 1 && r.counts[k] > 0) {
      r.exponents[k] = std::log(static_cast<double>(r.counts[k])) /
                       std::log(static_cast<double>(r.n_qubits));
    }
  }
  return r;
}

bool qubitwise_commute(const PauliKey& a, const PauliKey& b) {
  // On sites where both act non-trivially the letters must be equal.
  const std::uint64_t both = (a.x | a.z) & (b.x | b.z);
  return ((a.x ^ b.x) & both) == 0 && ((a.z ^ b.z) & both) == 0;
}

std::vector<std::vector<PauliTerm>> group_qubitwise_commuting(const PauliSum& h) {
  std::vector<std::vector<PauliTerm>> groups;
  std::vector<PauliKey> basis;  // merged measurement basis per group
  for (const auto& t : h.term_list()) {
    bool placed = false;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (qubitwise_commute(basis[g], t.key())) {
        groups[g].push_back(t);
        basis[g].x |= t.x_mask();
        basis[g].z |= t.z_mask();
        placed = true;
        break;
      }
    }
    if (!placed) {
      groups.push_back({t});
      basis.push_back(t.key());
    }
  }
  return groups;
}

}  // namespace lqem
