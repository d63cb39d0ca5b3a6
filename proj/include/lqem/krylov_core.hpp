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

#ifndef LQEM_KRYLOV_CORE_HPP
#define LQEM_KRYLOV_CORE_HPP

// Scalar-generic kernels shared by the estimators. Inputs are raw moments
// <H^l>; nothing here knows about shot noise.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace lqem::core {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// beta_2^2 below this marks |psi> as numerically an eigenstate.
template <typename Scalar>
Scalar degeneracy_threshold(Scalar h2) {
  return Scalar(1e-10) * std::max(Scalar(1), h2);
}

/// Order-2 Krylov problem in the orthonormal basis {psi, (H - alpha1) psi / beta2}.
template <typename Scalar>
struct Lanczos2 {
  Scalar alpha1{};
  Scalar alpha2{};
  Scalar beta2{};
  Scalar energy{};      // smaller eigenvalue
  Scalar energy_max{};  // larger eigenvalue
  // Ground state = (a0 - a1 H) psi, unit-normalized with a0 >= 0.
  Scalar a0{1};
  Scalar a1{0};
  // Same for the larger eigenvalue.
  Scalar a0_max{1};
  Scalar a1_max{0};
  bool degenerate = true;
};

template <typename Scalar>
Lanczos2<Scalar> lanczos_2x2(Scalar h1, Scalar h2, Scalar h3) {
  using std::sqrt;
  Lanczos2<Scalar> out;
  out.alpha1 = h1;
  out.energy = h1;
  out.energy_max = h1;
  const Scalar beta_sq = h2 - h1 * h1;
  if (!(beta_sq >= degeneracy_threshold(h2))) return out;

  out.degenerate = false;
  out.beta2 = sqrt(beta_sq);
  out.alpha2 = (h3 - 2 * h2 * h1 + h1 * h1 * h1) / beta_sq;
  const Scalar mean = (out.alpha1 + out.alpha2) / 2;
  const Scalar half = (out.alpha1 - out.alpha2) / 2;
  const Scalar rad = sqrt(half * half + beta_sq);
  out.energy = mean - rad;
  out.energy_max = mean + rad;

  // Eigenvector (u1, u2) in the Krylov basis, mapped back to (a0, a1).
  auto coefficients = [&](Scalar e, Scalar& a0, Scalar& a1) {
    Scalar u1 = out.beta2, u2 = e - out.alpha1;
    const Scalar v1 = e - out.alpha2, v2 = out.beta2;
    if (u1 * u1 + u2 * u2 < v1 * v1 + v2 * v2) {
      u1 = v1;
      u2 = v2;
    }
    a0 = u1 - u2 * out.alpha1 / out.beta2;
    a1 = -u2 / out.beta2;
    const Scalar norm = sqrt(a0 * a0 + a1 * a1);
    a0 /= norm;
    a1 /= norm;
    if (a0 < 0 || (a0 == 0 && a1 < 0)) {
      a0 = -a0;
      a1 = -a1;
    }
  };
  coefficients(out.energy, out.a0, out.a1);
  coefficients(out.energy_max, out.a0_max, out.a1_max);
  return out;
}

/// Tr[rho H (r - H)^2] / Tr[rho (r - H)^2], i.e. the fixed a0/a1 = r energy.
/// An infinite r is the bare <H>.
template <typename Scalar>
Scalar ratio_energy(Scalar h1, Scalar h2, Scalar h3, Scalar r) {
  using std::isinf;
  if (isinf(r)) return h1;
  return (r * r * h1 - 2 * r * h2 + h3) / (r * r - 2 * r * h1 + h2);
}

template <typename Scalar>
Scalar ratio_norm(Scalar h1, Scalar h2, Scalar r) {
  return r * r - 2 * r * h1 + h2;
}

template <typename Scalar>
struct KrylovSolution {
  Scalar energy{};
  Vector<Scalar> coefficients;  // ground state proportional to sum_i c_i H^i psi
  Eigen::Index rank = 0;        // dimension kept after truncation
  bool degenerate = true;
};

/// Smallest eigenvalue of H on the order-m Krylov space from moments
/// <H^0> .. <H^{2m-1}>: the pencil K v = E S v with Hankel S_ij = <H^{i+j}> and
/// K_ij = <H^{i+j+1}>. Directions of S with eigenvalue below
/// 1e-10 * trace(S) / m are projected out.
template <typename Scalar>
KrylovSolution<Scalar> krylov_ground(const Vector<Scalar>& moments, int m) {
  using std::sqrt;
  KrylovSolution<Scalar> out;
  out.energy = moments(1);
  out.coefficients = Vector<Scalar>::Zero(m);
  out.coefficients(0) = 1;

  Matrix<Scalar> s(m, m), k(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      s(i, j) = moments(i + j);
      k(i, j) = moments(i + j + 1);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(s);
  const Scalar cut = Scalar(1e-10) * s.trace() / Scalar(m);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (es.eigenvalues()(i) > cut) keep.push_back(i);
  }
  out.rank = static_cast<Eigen::Index>(keep.size());
  if (keep.size() <= 1) {
    out.rank = std::min<Eigen::Index>(out.rank, 1);
    return out;
  }

  Matrix<Scalar> w(m, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    w.col(static_cast<Eigen::Index>(c)) =
        es.eigenvectors().col(keep[c]) / sqrt(es.eigenvalues()(keep[c]));
  }
  Matrix<Scalar> reduced = w.transpose() * k * w;
  reduced = (reduced + reduced.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> rs(reduced);
  const Scalar e = rs.eigenvalues()(0);

  // The bare state (c = e_0) always lies in the space, so <H> bounds the answer.
  if (!(e < moments(1))) return out;
  out.degenerate = false;
  out.energy = e;
  out.coefficients = w * rs.eigenvectors().col(0);
  return out;
}

}  // namespace lqem::core

#endif  // LQEM_KRYLOV_CORE_HPP
