#pragma once

// Scalar potentials V >= 0 and magnetic potentials stored as link phases.

#include <functional>
#include <memory>
#include <utility>

#include "magspec/core.hpp"

namespace magspec {

// V given either as a closed-form rule sampled at cell midpoints or as a
// per-cell table. Samples must be finite and nonnegative.
class ScalarPotential {
 public:
  ScalarPotential() : kind_(Kind::zero) {}

  static ScalarPotential zero() { return ScalarPotential(); }
  static ScalarPotential constant(double v) {
    ScalarPotential p;
    p.kind_ = Kind::constant;
    p.const_value_ = v;
    return p;
  }
  static ScalarPotential closed_form(std::function<double(const Vec&)> f) {
    ScalarPotential p;
    p.kind_ = Kind::closed_form;
    p.fn_ = std::make_shared<std::function<double(const Vec&)>>(std::move(f));
    return p;
  }
  static ScalarPotential cell_table(const Grid& g, std::vector<double> perCell) {
    if (perCell.size() != g.cell_count())
      throw std::invalid_argument("ScalarPotential: table size must equal cell count");
    ScalarPotential p;
    p.kind_ = Kind::table;
    p.table_grid_ = g;
    p.table_ = std::make_shared<std::vector<double>>(std::move(perCell));
    return p;
  }

  bool is_zero() const { return kind_ == Kind::zero || (kind_ == Kind::constant && const_value_ == 0.0); }

  // Per-cell sample used by all quadratures.
  double cell_value(const Grid& g, std::size_t cellIdx) const {
    double v = 0.0;
    switch (kind_) {
      case Kind::zero:
        return 0.0;
      case Kind::constant:
        v = const_value_;
        break;
      case Kind::closed_form:
        v = (*fn_)(g.cell_midpoint(cellIdx));
        break;
      case Kind::table:
        if (!g.same_layout(table_grid_)) throw std::invalid_argument("ScalarPotential table: grid mismatch");
        v = (*table_)[cellIdx];
        break;
    }
    if (!std::isfinite(v)) throw std::domain_error("ScalarPotential: non-finite sample");
    if (v < 0.0) throw std::domain_error("ScalarPotential: negative sample");
    return v;
  }

 private:
  enum class Kind { zero, constant, closed_form, table };
  Kind kind_;
  double const_value_ = 0.0;
  std::shared_ptr<std::function<double(const Vec&)>> fn_;
  Grid table_grid_;
  std::shared_ptr<std::vector<double>> table_;
};

// Vector potential a as directed link phases: theta(i->j) approximates the
// line integral of a along the link from node i to the adjacent node j.
// Reversal negates the phase. Gauge shifts act exactly on node samples.
struct MagneticPotential {
  Grid grid;
  std::array<std::vector<double>, 3> link_phase;  // per axis, indexed by lower endpoint

  MagneticPotential() = default;

  static MagneticPotential zero(const Grid& g) {
    MagneticPotential a;
    a.grid = g;
    for (int ax = 0; ax < g.dim(); ++ax) a.link_phase[ax].assign(g.link_count(ax), 0.0);
    return a;
  }

  // Midpoint-rule line integrals of a closed-form a = (a_0, ..., a_{n-1}).
  static MagneticPotential from_closed_form(const Grid& g,
                                            const std::function<Vec(const Vec&)>& a_fn) {
    MagneticPotential a = zero(g);
    for (int ax = 0; ax < g.dim(); ++ax) {
      const std::size_t n = g.link_count(ax);
      for (std::size_t l = 0; l < n; ++l) {
        auto c = g.link_coords(ax, l);
        Vec p = g.node_point(c);
        p[ax] += 0.5 * g.h;
        const double val = a_fn(p)[ax] * g.h;
        if (!std::isfinite(val)) throw std::domain_error("MagneticPotential: non-finite link phase");
        a.link_phase[ax][l] = val;
      }
    }
    return a;
  }

  bool is_zero() const {
    for (int ax = 0; ax < grid.dim(); ++ax)
      for (double t : link_phase[ax])
        if (t != 0.0) return false;
    return true;
  }

  // a -> a + d(phi) on the lattice: phase(i->j) += phi_j - phi_i for nodal phi.
  MagneticPotential gauge_shifted(const std::vector<double>& phi) const {
    if (phi.size() != grid.node_count())
      throw std::invalid_argument("gauge_shifted: phi must be nodal");
    MagneticPotential b = *this;
    for (int ax = 0; ax < grid.dim(); ++ax) {
      const std::size_t n = grid.link_count(ax);
      for (std::size_t l = 0; l < n; ++l) {
        auto c = grid.link_coords(ax, l);
        const std::size_t i = grid.node_index(c[0], c[1], c[2]);
        auto cj = c;
        cj[ax] += 1;
        const std::size_t j = grid.node_index(cj[0], cj[1], cj[2]);
        b.link_phase[ax][l] += phi[j] - phi[i];
      }
    }
    return b;
  }

  // exp(-i phi) u, the compensating wavefunction transform of a gauge shift.
  static GridFunction gauge_transform(const GridFunction& u, const std::vector<double>& phi) {
    if (phi.size() != u.values.size()) throw std::invalid_argument("gauge_transform: phi must be nodal");
    GridFunction v = u;
    for (std::size_t i = 0; i < v.values.size(); ++i)
      v.values[i] *= std::exp(cplx(0.0, -phi[i]));
    return v;
  }
};

}  // namespace magspec
