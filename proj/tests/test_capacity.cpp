#include <catch2/catch_amalgamated.hpp>

#include "magspec/capacity.hpp"
#include "magspec/io.hpp"
#include "magspec/random.hpp"

using namespace magspec;

namespace {
Grid unit(int m, int dim, double d = 1.0) { return Grid(Cube(vec(0, 0, 0), d, dim), m); }

CompactSetMask center_cell(const Grid& g) {
  CompactSetMask f(g);
  const int mid = g.cells_per_edge() / 2;
  f.cells[g.cell_index(mid, mid, g.dim() == 3 ? mid : 0)] = 1;
  return f;
}
}  // namespace

TEST_CASE("empty set has zero capacity") {
  Grid g = unit(5, 2);
  auto r = wiener_capacity(CompactSetMask(g));
  CHECK(r.value == 0.0);
}

TEST_CASE("capacity is monotone in the set") {
  Grid g = unit(9, 2);
  CapacityCache cache;
  auto small = center_cell(g);
  auto big = small;
  big.cells[g.cell_index(1, 1)] = 1;
  big.cells[g.cell_index(2, 1)] = 1;
  const double c1 = wiener_capacity(small, {}, &cache).value;
  const double c2 = wiener_capacity(big, {}, &cache).value;
  const double cq = cube_capacity(g, {}, &cache);
  CHECK(c1 > 0.0);
  CHECK(c2 >= c1);
  CHECK(cq >= c2);
}

TEST_CASE("equilibrium potential stays within [0,1]") {
  Grid g = unit(9, 2);
  auto r = wiener_capacity(center_cell(g));
  double lo = 1e9, hi = -1e9;
  for (auto v : r.minimizer.values) {
    lo = std::min(lo, v.real());
    hi = std::max(hi, v.real());
  }
  CHECK(lo >= -1e-10);
  CHECK(hi <= 1.0 + 1e-10);
}

TEST_CASE("cube capacity scaling law is exact at matched resolution") {
  for (int dim : {2, 3}) {
    Grid g1 = unit(dim == 2 ? 9 : 5, dim, 1.0);
    Grid g2 = unit(dim == 2 ? 9 : 5, dim, 2.0);
    const double c1 = cube_capacity(g1);
    const double c2 = cube_capacity(g2);
    const double expected = std::pow(2.0, dim - 2);
    CHECK(c2 / c1 == Catch::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("n=2 capacity of the square does not depend on d") {
  const double c1 = cube_capacity(unit(9, 2, 0.5));
  const double c2 = cube_capacity(unit(9, 2, 4.0));
  CHECK(c1 == Catch::Approx(c2).epsilon(1e-9));
}

TEST_CASE("n=3 conventions: box at least 8d, open boundary shrinks toward 4 pi r") {
  Grid g = unit(5, 3);
  CapacityOptions bad;
  bad.ambient_factor = 4;
  CHECK_THROWS_AS(cube_capacity(g, bad), std::invalid_argument);

  // grounded truncation overestimates the whole-space value; the
  // monopole-matched boundary removes most of the bias
  Grid gb(Cube(vec(0, 0, 0), 2.2, 3), 12);
  auto ball = CompactSetMask::from_predicate(
      gb, [](const Vec& x) { return norm_sq(x, 3) <= 1.0; }, CompactSetMask::Rasterize::center);
  CapacityOptions grounded;
  CapacityOptions open;
  open.open_boundary = true;
  const double cg = wiener_capacity(ball, grounded).value;
  const double co = wiener_capacity(ball, open).value;
  const double exact = 4.0 * M_PI;
  CHECK(cg > co);
  CHECK(std::abs(co - exact) < std::abs(cg - exact));
  CHECK(co == Catch::Approx(exact).epsilon(0.12));  // coarse grid, raster error only
}

TEST_CASE("enlarging the open-boundary box beyond 8d changes little") {
  Grid g(Cube(vec(0, 0, 0), 1.0, 3), 5);
  auto f = center_cell(g);
  CapacityOptions o8;
  o8.open_boundary = true;
  CapacityOptions o16;
  o16.open_boundary = true;
  o16.ambient_factor = 16;
  const double c8 = wiener_capacity(f, o8).value;
  const double c16 = wiener_capacity(f, o16).value;
  CHECK(std::abs(c8 - c16) / c8 < 0.01);
}

TEST_CASE("shrinking the ambient increases capacity") {
  Grid g = unit(5, 3);
  auto f = center_cell(g);
  CapacityOptions small;  // default 8d
  CapacityOptions large;
  large.ambient_factor = 16;
  CHECK(wiener_capacity(f, small).value > wiener_capacity(f, large).value);
}

TEST_CASE("cap-measure lower bounds hold") {
  Grid g2 = unit(9, 2);
  auto r2 = check_cap_measure(center_cell(g2));
  CHECK(r2.passed);
  CHECK(r2.ratio > 1.0);

  auto rq = check_cap_measure(CompactSetMask::full(g2));
  CHECK(rq.passed);

  Grid g3(Cube(vec(0, 0, 0), 2.2, 3), 9);
  auto ball = CompactSetMask::from_predicate(
      g3, [](const Vec& x) { return norm_sq(x, 3) <= 1.0; }, CompactSetMask::Rasterize::center);
  CapacityOptions open;
  open.open_boundary = true;
  auto r3 = check_cap_measure(ball, open);
  CHECK(r3.passed);
  CHECK(r3.ratio > 1.0);

  CHECK_THROWS_AS(check_cap_measure(CompactSetMask(g2)), std::invalid_argument);
}

TEST_CASE("subadditivity of capacity") {
  Grid g = unit(9, 2);
  CapacityCache cache;
  CompactSetMask f1(g), f2(g);
  f1.cells[g.cell_index(1, 1)] = 1;
  f2.cells[g.cell_index(6, 6)] = 1;
  auto far = subadditivity_check(f1, f2, {}, &cache);
  CHECK(far.passed);
  CHECK(far.slack >= 0.0);

  auto same = subadditivity_check(f1, f1, {}, &cache);
  CHECK(same.passed);

  CompactSetMask nested = f1;
  nested.cells[g.cell_index(2, 1)] = 1;
  CHECK(subadditivity_check(f1, nested, {}, &cache).passed);
}

TEST_CASE("memo cache returns identical values") {
  Grid g = unit(9, 2);
  CapacityCache cache;
  auto f = center_cell(g);
  const double v1 = wiener_capacity(f, {}, &cache).value;
  CHECK(cache.size() == 1);
  const double v2 = wiener_capacity(f, {}, &cache).value;
  CHECK(v1 == v2);
  CHECK(cache.size() == 1);
}

TEST_CASE("rle mask round trip") {
  TestFunctionSampler s(5);
  Grid g = unit(7, 2, 1.5);
  auto f = s.random_blob_mask(g, 0.3, 2);
  auto text = mask_to_rle(f);
  auto back = mask_from_rle(text);
  CHECK(back.grid.m == f.grid.m);
  CHECK(back.grid.cube.edge == f.grid.cube.edge);
  CHECK(back.cells == f.cells);
}

TEST_CASE("relative capacity within the cube itself (factor 1)") {
  Grid g = unit(9, 2);
  CapacityOptions rel;
  rel.ambient_factor = 1;
  const double c_rel = wiener_capacity(center_cell(g), rel).value;
  const double c_conv = wiener_capacity(center_cell(g)).value;
  CHECK(c_rel > c_conv);  // smaller ambient, larger capacity
}
