#pragma once

// The discrete quadratic form of H_{a,V} and the quadratures behind it.
//
// Gradient terms live on links weighted by cell-volume shares; the potential
// and mass terms use trapezoid weights, written per cell so that closed-form
// and per-cell-table potentials share one code path. The link-phase gradient
// makes gauge invariance and the diamagnetic inequality exact on the lattice.

#include "magspec/core.hpp"
#include "magspec/fields.hpp"

namespace magspec {

struct LinkField {
  Grid grid;
  std::array<std::vector<cplx>, 3> link;  // per axis, indexed like MagneticPotential
};

// (u_j e^{i theta(i->j)} - u_i)/h per directed link.
inline LinkField magnetic_gradient(const GridFunction& u, const MagneticPotential& a) {
  if (!u.grid.same_layout(a.grid)) throw std::invalid_argument("magnetic_gradient: grid mismatch");
  const Grid& g = u.grid;
  LinkField out;
  out.grid = g;
  const double invh = 1.0 / g.h;
  for (int ax = 0; ax < g.dim(); ++ax) {
    const std::size_t n = g.link_count(ax);
    out.link[ax].resize(n);
    for (std::size_t l = 0; l < n; ++l) {
      auto c = g.link_coords(ax, l);
      const std::size_t i = g.node_index(c[0], c[1], c[2]);
      auto cj = c;
      cj[ax] += 1;
      const std::size_t j = g.node_index(cj[0], cj[1], cj[2]);
      const double th = a.link_phase[ax][l];
      out.link[ax][l] = (u.values[j] * std::exp(cplx(0.0, th)) - u.values[i]) * invh;
    }
  }
  return out;
}

// Kinetic part sum_links w |D u|^2 with w = share * h^n.
inline double kinetic_energy(const GridFunction& u, const MagneticPotential& a) {
  if (!u.grid.same_layout(a.grid)) throw std::invalid_argument("kinetic_energy: grid mismatch");
  const Grid& g = u.grid;
  const double vol = g.cell_volume();
  const double invh2 = 1.0 / (g.h * g.h);
  double total = 0.0;
  for (int ax = 0; ax < g.dim(); ++ax) {
    const std::size_t n = g.link_count(ax);
    for (std::size_t l = 0; l < n; ++l) {
      auto c = g.link_coords(ax, l);
      const std::size_t i = g.node_index(c[0], c[1], c[2]);
      auto cj = c;
      cj[ax] += 1;
      const std::size_t j = g.node_index(cj[0], cj[1], cj[2]);
      const double th = a.link_phase[ax][l];
      const cplx d = u.values[j] * std::exp(cplx(0.0, th)) - u.values[i];
      total += g.link_share(ax, c) * vol * invh2 * std::norm(d);
    }
  }
  return total;
}

// Potential part sum_cells h^n V(cell) * mean of |u|^2 over the cell corners.
// Identical to nodal trapezoid weights when V is constant.
inline double potential_energy(const GridFunction& u, const ScalarPotential& V) {
  if (V.is_zero()) return 0.0;
  const Grid& g = u.grid;
  const double vol = g.cell_volume();
  const double inv_corners = 1.0 / static_cast<double>(1 << g.dim());
  std::size_t corner[8];
  const int corners = 1 << g.dim();
  double total = 0.0;
  const std::size_t nc = g.cell_count();
  for (std::size_t c = 0; c < nc; ++c) {
    const double v = V.cell_value(g, c);
    if (v == 0.0) continue;
    g.cell_corner_nodes(c, corner);
    double m2 = 0.0;
    for (int s = 0; s < corners; ++s) m2 += std::norm(u.values[corner[s]]);
    total += vol * v * m2 * inv_corners;
  }
  return total;
}

// h_{a,V}(u,u) over the grid's cube.
inline double quadratic_form(const GridFunction& u, const MagneticPotential& a,
                             const ScalarPotential& V) {
  return kinetic_energy(u, a) + potential_energy(u, V);
}

// Squared L^2 norm by nodal trapezoid quadrature.
inline double l2_norm_sq(const GridFunction& u) {
  const Grid& g = u.grid;
  const std::size_t n = g.node_count();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    total += g.node_weight(g.node_coords(i)) * std::norm(u.values[i]);
  return total;
}

// Integral of V over the cells of a mask (midpoint rule per cell).
inline double integrate(const ScalarPotential& V, const CompactSetMask& region) {
  const Grid& g = region.grid;
  const double vol = g.cell_volume();
  double total = 0.0;
  for (std::size_t c = 0; c < region.cells.size(); ++c)
    if (region.cells[c]) total += vol * V.cell_value(g, c);
  return total;
}

inline double integrate_cube(const ScalarPotential& V, const Grid& g) {
  const double vol = g.cell_volume();
  double total = 0.0;
  const std::size_t nc = g.cell_count();
  for (std::size_t c = 0; c < nc; ++c) total += vol * V.cell_value(g, c);
  return total;
}

// Squared L^2 norm restricted to the cells of a mask (corner-average rule).
inline double l2_norm_sq_on(const GridFunction& u, const CompactSetMask& region) {
  const Grid& g = region.grid;
  if (!u.grid.same_layout(g)) throw std::invalid_argument("l2_norm_sq_on: grid mismatch");
  const double vol = g.cell_volume();
  const double inv_corners = 1.0 / static_cast<double>(1 << g.dim());
  std::size_t corner[8];
  const int corners = 1 << g.dim();
  double total = 0.0;
  for (std::size_t c = 0; c < region.cells.size(); ++c) {
    if (!region.cells[c]) continue;
    g.cell_corner_nodes(c, corner);
    double m2 = 0.0;
    for (int s = 0; s < corners; ++s) m2 += std::norm(u.values[corner[s]]);
    total += vol * m2 * inv_corners;
  }
  return total;
}

inline cplx mean_value(const GridFunction& u) {
  const Grid& g = u.grid;
  double vol = 1.0;
  for (int j = 0; j < g.dim(); ++j) vol *= g.cube.edge;
  cplx total = 0.0;
  const std::size_t n = g.node_count();
  for (std::size_t i = 0; i < n; ++i)
    total += g.node_weight(g.node_coords(i)) * u.values[i];
  return total / vol;
}

// Extension of u from Q_d to the concentric Q_{3d} by mirror reflections in
// the faces; energy and mass scale by exactly 3^n.
inline GridFunction reflect_extend(const GridFunction& u) {
  const Grid& g = u.grid;
  const int m = g.m;
  Grid big(Cube(g.cube.center, 3.0 * g.cube.edge, g.dim()), 3 * (m - 1) + 1);
  GridFunction out(big);
  auto fold = [m](int i) {
    // big-grid index i sits at source offset i-(m-1); reflect into [0, m-1]
    const int period = 2 * (m - 1);
    int r = (i - (m - 1)) % period;
    if (r < 0) r += period;
    return r < m ? r : period - r;
  };
  const std::size_t n = big.node_count();
  for (std::size_t idx = 0; idx < n; ++idx) {
    auto c = big.node_coords(idx);
    std::array<int, 3> src{fold(c[0]), fold(c[1]), g.dim() == 3 ? fold(c[2]) : 0};
    out.values[idx] = u.values[g.node_index(src[0], src[1], src[2])];
  }
  return out;
}

}  // namespace magspec
