#pragma once

// Axis-parallel cubes, uniform node lattices and grid-sampled fields.
// Everything here is an immutable value type; operations live in forms.hpp.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace magspec {

using cplx = std::complex<double>;

// Point in R^n, n <= 3; unused trailing components stay zero.
using Vec = std::array<double, 3>;

inline Vec vec(double x, double y = 0.0, double z = 0.0) { return {x, y, z}; }

inline double dot(const Vec& a, const Vec& b, int dim) {
  double s = 0.0;
  for (int j = 0; j < dim; ++j) s += a[j] * b[j];
  return s;
}

inline double norm_sq(const Vec& a, int dim) { return dot(a, a, dim); }

struct Cube {
  Vec center{0.0, 0.0, 0.0};
  double edge = 1.0;
  int dim = 2;

  Cube() = default;
  Cube(Vec c, double d, int n) : center(c), edge(d), dim(n) {
    if (!(edge > 0.0)) throw std::invalid_argument("Cube: edge must be positive");
    if (dim != 2 && dim != 3) throw std::invalid_argument("Cube: dim must be 2 or 3");
  }

  double lo(int axis) const { return center[axis] - 0.5 * edge; }
  double hi(int axis) const { return center[axis] + 0.5 * edge; }

  Cube scaled(double s) const { return Cube(center, s * edge, dim); }
  Cube translated(const Vec& t) const {
    Vec c = center;
    for (int j = 0; j < dim; ++j) c[j] += t[j];
    return Cube(c, edge, dim);
  }
};

// Uniform node lattice over a closed cube, m nodes per edge, spacing h = edge/(m-1).
struct Grid {
  Cube cube;
  int m = 0;
  double h = 0.0;

  Grid() = default;
  Grid(const Cube& c, int nodes_per_edge) : cube(c), m(nodes_per_edge) {
    if (m < 3) throw std::invalid_argument("Grid: need at least 3 nodes per edge");
    h = cube.edge / static_cast<double>(m - 1);
  }

  int dim() const { return cube.dim; }
  std::size_t node_count() const {
    std::size_t n = 1;
    for (int j = 0; j < dim(); ++j) n *= static_cast<std::size_t>(m);
    return n;
  }
  int cells_per_edge() const { return m - 1; }
  std::size_t cell_count() const {
    std::size_t n = 1;
    for (int j = 0; j < dim(); ++j) n *= static_cast<std::size_t>(m - 1);
    return n;
  }

  std::size_t node_index(int i, int j, int k = 0) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(m) * (static_cast<std::size_t>(j) +
                                          static_cast<std::size_t>(m) * static_cast<std::size_t>(k));
  }
  std::array<int, 3> node_coords(std::size_t idx) const {
    std::array<int, 3> c{0, 0, 0};
    c[0] = static_cast<int>(idx % m);
    idx /= m;
    c[1] = static_cast<int>(idx % m);
    idx /= m;
    c[2] = static_cast<int>(idx);
    return c;
  }
  Vec node_point(const std::array<int, 3>& c) const {
    Vec p{0.0, 0.0, 0.0};
    for (int j = 0; j < dim(); ++j) p[j] = cube.lo(j) + h * c[j];
    return p;
  }
  Vec node_point(std::size_t idx) const { return node_point(node_coords(idx)); }

  std::size_t cell_index(int i, int j, int k = 0) const {
    const std::size_t mc = static_cast<std::size_t>(m - 1);
    return static_cast<std::size_t>(i) + mc * (static_cast<std::size_t>(j) + mc * static_cast<std::size_t>(k));
  }
  std::array<int, 3> cell_coords(std::size_t idx) const {
    const std::size_t mc = static_cast<std::size_t>(m - 1);
    std::array<int, 3> c{0, 0, 0};
    c[0] = static_cast<int>(idx % mc);
    idx /= mc;
    c[1] = static_cast<int>(idx % mc);
    idx /= mc;
    c[2] = static_cast<int>(idx);
    return c;
  }
  Vec cell_midpoint(std::size_t idx) const {
    auto c = cell_coords(idx);
    Vec p{0.0, 0.0, 0.0};
    for (int j = 0; j < dim(); ++j) p[j] = cube.lo(j) + h * (c[j] + 0.5);
    return p;
  }
  // Node ids of the 2^dim corners of a cell.
  void cell_corner_nodes(std::size_t cellIdx, std::size_t out[8]) const {
    auto c = cell_coords(cellIdx);
    const int corners = 1 << dim();
    for (int s = 0; s < corners; ++s) {
      out[s] = node_index(c[0] + (s & 1), c[1] + ((s >> 1) & 1), dim() == 3 ? c[2] + ((s >> 2) & 1) : 0);
    }
  }

  // Trapezoid weight of a node: h^n times 1/2 per boundary-touching axis.
  double node_weight(const std::array<int, 3>& c) const {
    double w = 1.0;
    for (int j = 0; j < dim(); ++j) {
      w *= h;
      if (c[j] == 0 || c[j] == m - 1) w *= 0.5;
    }
    return w;
  }

  bool on_boundary(const std::array<int, 3>& c) const {
    for (int j = 0; j < dim(); ++j)
      if (c[j] == 0 || c[j] == m - 1) return true;
    return false;
  }

  // Links along `axis` are indexed by their lower endpoint; extent shrinks by one on that axis.
  std::size_t link_count(int axis) const {
    std::size_t n = 1;
    for (int j = 0; j < dim(); ++j) n *= static_cast<std::size_t>(j == axis ? m - 1 : m);
    return n;
  }
  std::array<int, 3> link_coords(int axis, std::size_t idx) const {
    std::array<int, 3> c{0, 0, 0};
    const int ext0 = axis == 0 ? m - 1 : m;
    const int ext1 = axis == 1 ? m - 1 : m;
    c[0] = static_cast<int>(idx % ext0);
    idx /= ext0;
    c[1] = static_cast<int>(idx % ext1);
    idx /= ext1;
    c[2] = static_cast<int>(idx);
    return c;
  }
  // Cell-volume share of a link: 1/2 per transverse boundary axis.
  double link_share(int axis, const std::array<int, 3>& c) const {
    double s = 1.0;
    for (int j = 0; j < dim(); ++j) {
      if (j == axis) continue;
      if (c[j] == 0 || c[j] == m - 1) s *= 0.5;
    }
    return s;
  }
  double cell_volume() const {
    double v = 1.0;
    for (int j = 0; j < dim(); ++j) v *= h;
    return v;
  }

  bool same_layout(const Grid& o) const {
    return dim() == o.dim() && m == o.m && cube.edge == o.cube.edge &&
           cube.center[0] == o.cube.center[0] && cube.center[1] == o.cube.center[1] &&
           cube.center[2] == o.cube.center[2];
  }
};

inline Grid rasterize(const Cube& cube, int m) { return Grid(cube, m); }

// Complex scalar samples on the nodes of a grid.
struct GridFunction {
  Grid grid;
  std::vector<cplx> values;

  GridFunction() = default;
  explicit GridFunction(const Grid& g) : grid(g), values(g.node_count(), cplx(0.0, 0.0)) {}
  GridFunction(const Grid& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.node_count())
      throw std::invalid_argument("GridFunction: value count must equal node count");
  }

  static GridFunction sample(const Grid& g, const std::function<cplx(const Vec&)>& f) {
    GridFunction u(g);
    const std::size_t n = g.node_count();
    for (std::size_t i = 0; i < n; ++i) u.values[i] = f(g.node_point(i));
    return u;
  }
  static GridFunction constant(const Grid& g, cplx c) {
    GridFunction u(g);
    for (auto& v : u.values) v = c;
    return u;
  }

  GridFunction modulus() const {
    GridFunction r(grid);
    for (std::size_t i = 0; i < values.size(); ++i) r.values[i] = std::abs(values[i]);
    return r;
  }

  bool all_finite() const {
    for (const auto& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
};

// A compact subset of a cube given as a union of closed grid cells.
struct CompactSetMask {
  Grid grid;
  std::vector<std::uint8_t> cells;  // one flag per cell

  CompactSetMask() = default;
  explicit CompactSetMask(const Grid& g) : grid(g), cells(g.cell_count(), 0) {}

  enum class Rasterize { outer, inner, center };

  // Rasterizes {x : inside(x)} as a cell union. `outer` marks any cell whose
  // sample stencil touches the set, `inner` only cells fully inside, `center`
  // decides by the cell midpoint.
  static CompactSetMask from_predicate(const Grid& g, const std::function<bool(const Vec&)>& inside,
                                       Rasterize mode = Rasterize::outer) {
    CompactSetMask f(g);
    const std::size_t nc = g.cell_count();
    std::size_t corner[8];
    const int corners = 1 << g.dim();
    for (std::size_t c = 0; c < nc; ++c) {
      if (mode == Rasterize::center) {
        f.cells[c] = inside(g.cell_midpoint(c)) ? 1 : 0;
        continue;
      }
      g.cell_corner_nodes(c, corner);
      int hits = inside(g.cell_midpoint(c)) ? 1 : 0;
      int total = 1;
      for (int s = 0; s < corners; ++s, ++total) hits += inside(g.node_point(corner[s])) ? 1 : 0;
      f.cells[c] = (mode == Rasterize::outer) ? (hits > 0 ? 1 : 0) : (hits == total ? 1 : 0);
    }
    return f;
  }

  static CompactSetMask full(const Grid& g) {
    CompactSetMask f(g);
    for (auto& c : f.cells) c = 1;
    return f;
  }

  bool empty() const {
    for (auto c : cells)
      if (c) return false;
    return true;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto c : cells) n += c ? 1 : 0;
    return n;
  }
  double measure() const { return static_cast<double>(count()) * grid.cell_volume(); }

  bool subset_of(const CompactSetMask& o) const {
    if (cells.size() != o.cells.size()) return false;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (cells[i] && !o.cells[i]) return false;
    return true;
  }
  CompactSetMask unioned(const CompactSetMask& o) const {
    if (!grid.same_layout(o.grid)) throw std::invalid_argument("mask union: grid mismatch");
    CompactSetMask r(grid);
    for (std::size_t i = 0; i < cells.size(); ++i) r.cells[i] = (cells[i] || o.cells[i]) ? 1 : 0;
    return r;
  }

  std::uint64_t hash() const {
    // FNV-1a over the cell bits plus the layout.
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(grid.m));
    mix(static_cast<std::uint64_t>(grid.dim()));
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (cells[i]) mix(i + 1);
    return h;
  }
};

// Open set membership rasterized per node; its complement within the cube is a cell mask.
struct DomainMask {
  Grid grid;
  std::vector<std::uint8_t> node_inside;

  DomainMask() = default;
  explicit DomainMask(const Grid& g) : grid(g), node_inside(g.node_count(), 1) {}

  static DomainMask from_predicate(const Grid& g, const std::function<bool(const Vec&)>& inside) {
    DomainMask d(g);
    const std::size_t n = g.node_count();
    for (std::size_t i = 0; i < n; ++i) d.node_inside[i] = inside(g.node_point(i)) ? 1 : 0;
    return d;
  }

  bool all_inside() const {
    for (auto v : node_inside)
      if (!v) return false;
    return true;
  }
  bool none_inside() const {
    for (auto v : node_inside)
      if (v) return false;
    return true;
  }

  // Q_d ∩ (R^n \ Ω) as a conservative (outer) cell union: a cell belongs to the
  // complement as soon as one of its corners lies outside Ω.
  CompactSetMask complement_cells() const {
    CompactSetMask f(grid);
    std::size_t corner[8];
    const int corners = 1 << grid.dim();
    for (std::size_t c = 0; c < f.cells.size(); ++c) {
      grid.cell_corner_nodes(c, corner);
      for (int s = 0; s < corners; ++s) {
        if (!node_inside[corner[s]]) {
          f.cells[c] = 1;
          break;
        }
      }
    }
    return f;
  }
};

struct ConvergenceError : std::runtime_error {
  double residual;
  int iterations;
  ConvergenceError(const std::string& what, double res, int iters)
      : std::runtime_error(what), residual(res), iterations(iters) {}
};

}  // namespace magspec
