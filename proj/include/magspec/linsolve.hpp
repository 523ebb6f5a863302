#pragma once

// Matrix-free preconditioned conjugate gradients for SPD / Hermitian PD
// operators on structured grids.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace magspec {

template <typename T>
double re_dot(const std::vector<T>& a, const std::vector<T>& b) {
  double s = 0.0;
  if constexpr (std::is_same_v<T, double>) {
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  } else {
    for (std::size_t i = 0; i < a.size(); ++i)
      s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  }
  return s;
}

template <typename T>
double norm2(const std::vector<T>& a) {
  return std::sqrt(re_dot(a, a));
}

struct CgStats {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Solves A x = b with Jacobi preconditioning. `apply` must be Hermitian
// positive definite; `diag` holds its (real, positive) diagonal.
template <typename T>
CgStats cg_solve(const std::function<void(const std::vector<T>&, std::vector<T>&)>& apply,
                 const std::vector<double>& diag, const std::vector<T>& b, std::vector<T>& x,
                 double rel_tol, int max_iter) {
  const std::size_t n = b.size();
  std::vector<T> r(n), z(n), p(n), ap(n);
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  const double bnorm = norm2(b);
  CgStats st;
  if (bnorm == 0.0) {
    x.assign(n, T(0));
    st.converged = true;
    return st;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = re_dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    st.rel_residual = norm2(r) / bnorm;
    if (st.rel_residual <= rel_tol) {
      st.converged = true;
      st.iterations = it;
      return st;
    }
    apply(p, ap);
    const double pap = re_dot(p, ap);
    if (!(pap > 0.0)) break;  // lost positive-definiteness or stagnated
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_new = re_dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    st.iterations = it + 1;
  }
  st.rel_residual = norm2(r) / bnorm;
  st.converged = st.rel_residual <= rel_tol;
  return st;
}

}  // namespace magspec
