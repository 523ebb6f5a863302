#pragma once

// Test-only dense oracle: assembles the cube operator into a dense Hermitian
// matrix and diagonalizes it by cyclic complex Jacobi rotations. Independent
// of the iterative solver path it cross-checks.

#include <vector>

#include "magspec/eigen.hpp"

namespace oracle {

using magspec::cplx;

inline std::vector<double> dense_eigenvalues(std::vector<std::vector<cplx>> A) {
  const std::size_t n = A.size();
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      diag += std::abs(A[p][p]);
      for (std::size_t q = p + 1; q < n; ++q) off += std::abs(A[p][q]);
    }
    if (off <= 1e-13 * std::max(1.0, diag)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = A[p][q];
        if (std::abs(apq) == 0.0) continue;
        const double app = A[p][p].real(), aqq = A[q][q].real();
        const double absg = std::abs(apq);
        const cplx phase = apq / absg;
        const double tau = (app - aqq) / (2.0 * absg);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // unitary U = [[c, -s], [s e^{-i phi}, c e^{-i phi}]] zeroes A'_pq
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = A[k][p], akq = A[k][q];
          A[k][p] = c * akp + s * std::conj(phase) * akq;
          A[k][q] = -s * akp + c * std::conj(phase) * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = A[p][k], aqk = A[q][k];
          A[p][k] = c * apk + s * phase * aqk;
          A[q][k] = -s * apk + c * phase * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = A[i][i].real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Smallest generalized eigenvalue of the discrete H_{a,V} on the cube, by
// dense diagonalization of B^{-1/2} A B^{-1/2} over the free nodes.
inline double smallest_eigenvalue_dense(const magspec::Grid& g, const magspec::MagneticPotential& a,
                                        const magspec::ScalarPotential& V,
                                        magspec::BottomKind kind,
                                        const magspec::DomainMask* mask = nullptr) {
  magspec::detail::CubeOperator op(g, a, V, kind, mask);
  const std::size_t n = g.node_count();
  std::vector<std::size_t> free_ids;
  for (std::size_t i = 0; i < n; ++i)
    if (op.is_free(i)) free_ids.push_back(i);
  const std::size_t nf = free_ids.size();
  if (nf == 0) throw std::logic_error("dense oracle: no free nodes");

  std::vector<std::vector<cplx>> M(nf, std::vector<cplx>(nf, cplx(0, 0)));
  std::vector<cplx> e(n), y(n);
  const auto& B = op.mass();
  for (std::size_t col = 0; col < nf; ++col) {
    std::fill(e.begin(), e.end(), cplx(0, 0));
    e[free_ids[col]] = cplx(1.0 / std::sqrt(B[free_ids[col]]), 0.0);
    op.apply(e, y);
    for (std::size_t row = 0; row < nf; ++row)
      M[row][col] = y[free_ids[row]] / std::sqrt(B[free_ids[row]]);
  }
  auto ev = dense_eigenvalues(std::move(M));
  return ev.front() + op.vmin();
}

}  // namespace oracle
