#pragma once

// Bottoms of the Dirichlet and Neumann spectra of the discrete H_{a,V} on a
// cube, plus the local magnetic energy mu_0 = mu(Q_d; H_{a,0}).
//
// The solver is inexact inverse iteration on the generalized problem
// A u = theta B u (A = stiffness + potential, B = trapezoid mass), shifted by
// the potential minimum so large constant offsets do not stall convergence.
// Dirichlet conditions eliminate boundary nodes, which keeps mu <= lambda
// exact at the matrix level.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>

#include "magspec/core.hpp"
#include "magspec/fields.hpp"
#include "magspec/forms.hpp"
#include "magspec/linsolve.hpp"

namespace magspec {

enum class BottomKind { dirichlet, neumann };

struct SpectralBottom {
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;  // total operator applications
  BottomKind kind = BottomKind::neumann;
};

struct EigenOptions {
  double tol = 1e-8;
  std::uint64_t seed = 0x5eed0001u;
};

struct LocalEnergy {
  double mu0 = 0.0;
  double mu0_tilde = 0.0;
  SpectralBottom detail;
};

namespace detail {

// Assembled matrix-free cube operator restricted to its free nodes.
class CubeOperator {
 public:
  CubeOperator(const Grid& g, const MagneticPotential& a, const ScalarPotential& V,
               BottomKind kind, const DomainMask* mask)
      : grid_(g), a_(a), kind_(kind) {
    if (!g.same_layout(a.grid)) throw std::invalid_argument("eigen: a on a different grid");
    if (mask && !g.same_layout(mask->grid)) throw std::invalid_argument("eigen: mask on a different grid");
    const std::size_t n = g.node_count();
    free_.assign(n, 1);
    if (kind == BottomKind::dirichlet) {
      for (std::size_t i = 0; i < n; ++i)
        if (g.on_boundary(g.node_coords(i))) free_[i] = 0;
    }
    if (mask) {
      for (std::size_t i = 0; i < n; ++i)
        if (!mask->node_inside[i]) free_[i] = 0;
    }
    n_free_ = 0;
    for (auto f : free_) n_free_ += f;

    mass_.resize(n);
    for (std::size_t i = 0; i < n; ++i) mass_[i] = g.node_weight(g.node_coords(i));

    // Potential diagonal from per-cell samples, shifted by the cell minimum.
    diag_pot_.assign(n, 0.0);
    vmin_ = 0.0;
    if (!V.is_zero()) {
      const std::size_t nc = g.cell_count();
      std::vector<double> vc(nc);
      vmin_ = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < nc; ++c) {
        vc[c] = V.cell_value(g, c);
        vmin_ = std::min(vmin_, vc[c]);
      }
      const double vol = g.cell_volume();
      const double inv_corners = 1.0 / static_cast<double>(1 << g.dim());
      std::size_t corner[8];
      const int corners = 1 << g.dim();
      for (std::size_t c = 0; c < nc; ++c) {
        const double w = vol * (vc[c] - vmin_) * inv_corners;
        if (w == 0.0) continue;
        g.cell_corner_nodes(c, corner);
        for (int s = 0; s < corners; ++s) diag_pot_[corner[s]] += w;
      }
    }

    // Stiffness diagonal for the Jacobi preconditioner.
    diag_stiff_.assign(n, 0.0);
    const double vol = g.cell_volume();
    const double invh2 = 1.0 / (g.h * g.h);
    for (int ax = 0; ax < g.dim(); ++ax) {
      const std::size_t nl = g.link_count(ax);
      for (std::size_t l = 0; l < nl; ++l) {
        auto c = g.link_coords(ax, l);
        const double lw = g.link_share(ax, c) * vol * invh2;
        const std::size_t i = g.node_index(c[0], c[1], c[2]);
        auto cj = c;
        cj[ax] += 1;
        const std::size_t j = g.node_index(cj[0], cj[1], cj[2]);
        diag_stiff_[i] += lw;
        diag_stiff_[j] += lw;
      }
    }
  }

  const Grid& grid() const { return grid_; }
  std::size_t n_free() const { return n_free_; }
  double vmin() const { return vmin_; }
  const std::vector<double>& mass() const { return mass_; }
  bool is_free(std::size_t i) const { return free_[i] != 0; }

  void zero_pinned(std::vector<cplx>& x) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!free_[i]) x[i] = cplx(0.0, 0.0);
  }

  // y = (A - vmin B) x on free nodes; x must vanish on pinned nodes.
  void apply(const std::vector<cplx>& x, std::vector<cplx>& y) const {
    const Grid& g = grid_;
    y.assign(x.size(), cplx(0.0, 0.0));
    const double vol = g.cell_volume();
    const double invh2 = 1.0 / (g.h * g.h);
    for (int ax = 0; ax < g.dim(); ++ax) {
      const std::size_t nl = g.link_count(ax);
      for (std::size_t l = 0; l < nl; ++l) {
        auto c = g.link_coords(ax, l);
        const double lw = g.link_share(ax, c) * vol * invh2;
        const std::size_t i = g.node_index(c[0], c[1], c[2]);
        auto cj = c;
        cj[ax] += 1;
        const std::size_t j = g.node_index(cj[0], cj[1], cj[2]);
        const double th = a_.link_phase[ax][l];
        const cplx ph = std::exp(cplx(0.0, th));
        y[i] += lw * (x[i] - ph * x[j]);
        y[j] += lw * (x[j] - std::conj(ph) * x[i]);
      }
    }
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += diag_pot_[i] * x[i];
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!free_[i]) y[i] = cplx(0.0, 0.0);
  }

  std::vector<double> shifted_diag(double sigma) const {
    std::vector<double> d(diag_stiff_.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] = free_[i] ? diag_stiff_[i] + diag_pot_[i] + sigma * mass_[i] : 1.0;
    }
    return d;
  }

 private:
  Grid grid_;
  MagneticPotential a_;
  BottomKind kind_;
  std::vector<std::uint8_t> free_;
  std::size_t n_free_ = 0;
  std::vector<double> mass_;
  std::vector<double> diag_pot_;
  std::vector<double> diag_stiff_;
  double vmin_ = 0.0;
};

inline SpectralBottom smallest_bottom(const CubeOperator& op, BottomKind kind,
                                      const EigenOptions& opts) {
  const Grid& g = op.grid();
  if (op.n_free() == 0) throw std::domain_error("eigen: empty test space (all nodes pinned)");
  const std::size_t n = g.node_count();
  const double d = g.cube.edge;
  const double sigma = 1.0 / (d * d);
  const double scale_floor = 1.0 / (d * d);
  const long max_applies = 10l * static_cast<long>(n) + 20000l;

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<cplx> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = cplx(uni(rng), uni(rng));
  op.zero_pinned(x);

  const auto& B = op.mass();
  auto b_norm = [&](const std::vector<cplx>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += B[i] * std::norm(v[i]);
    return std::sqrt(s);
  };
  {
    const double nx = b_norm(x);
    for (auto& v : x) v /= nx;
  }

  long applies = 0;
  std::vector<cplx> y(n), r(n), rhs(n), z(n);
  const auto diag = op.shifted_diag(sigma);
  std::function<void(const std::vector<cplx>&, std::vector<cplx>&)> shifted_apply =
      [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
        op.apply(in, out);
        for (std::size_t i = 0; i < n; ++i)
          if (op.is_free(i)) out[i] += sigma * B[i] * in[i];
        ++applies;
      };

  SpectralBottom result;
  result.kind = kind;
  double theta = 0.0, res_rel = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < 600; ++outer) {
    op.apply(x, y);
    ++applies;
    double xay = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      xay += y[i].real() * x[i].real() + y[i].imag() * x[i].imag();
    theta = xay;  // x is B-normalized
    double rn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = y[i] - theta * B[i] * x[i];
      rn += std::norm(r[i]) / B[i];
    }
    res_rel = std::sqrt(rn) / std::max(std::abs(theta), scale_floor);
    if (res_rel <= opts.tol) {
      result.value = theta + op.vmin();
      result.residual = res_rel;
      result.iterations = static_cast<int>(applies);
      return result;
    }
    if (applies >= max_applies) break;
    for (std::size_t i = 0; i < n; ++i) rhs[i] = B[i] * x[i];
    op.zero_pinned(rhs);
    z = x;  // warm start
    const double inner_tol = std::clamp(0.05 * res_rel, 1e-13, 1e-2);
    const int inner_cap = static_cast<int>(std::min<long>(max_applies - applies, 200000));
    cg_solve<cplx>(shifted_apply, diag, rhs, z, inner_tol, inner_cap);
    op.zero_pinned(z);
    const double nz = b_norm(z);
    if (!(nz > 0.0)) break;
    for (std::size_t i = 0; i < n; ++i) x[i] = z[i] / nz;
  }
  throw ConvergenceError("eigen: inverse iteration did not reach tolerance", res_rel,
                         static_cast<int>(applies));
}

}  // namespace detail

inline SpectralBottom dirichlet_bottom(const Grid& g, const MagneticPotential& a,
                                       const ScalarPotential& V,
                                       const DomainMask* mask = nullptr,
                                       const EigenOptions& opts = {}) {
  detail::CubeOperator op(g, a, V, BottomKind::dirichlet, mask);
  return detail::smallest_bottom(op, BottomKind::dirichlet, opts);
}

inline SpectralBottom neumann_bottom(const Grid& g, const MagneticPotential& a,
                                     const ScalarPotential& V, const DomainMask* mask = nullptr,
                                     const EigenOptions& opts = {}) {
  detail::CubeOperator op(g, a, V, BottomKind::neumann, mask);
  return detail::smallest_bottom(op, BottomKind::neumann, opts);
}

// mu_0(Q_d; a) and its dimensionless normalization mu_0 d^2. Round-off below
// 1e-12 is clamped to zero.
inline LocalEnergy local_energy(const Grid& g, const MagneticPotential& a,
                                const DomainMask* mask = nullptr, const EigenOptions& opts = {}) {
  LocalEnergy e;
  e.detail = neumann_bottom(g, a, ScalarPotential::zero(), mask, opts);
  e.mu0 = e.detail.value;
  if (e.mu0 < 0.0 && e.mu0 > -1e-12) e.mu0 = 0.0;
  e.mu0_tilde = e.mu0 * g.cube.edge * g.cube.edge;
  return e;
}

}  // namespace magspec
