#include <catch2/catch_amalgamated.hpp>

#include "magspec/core.hpp"
#include "magspec/fields.hpp"
#include "magspec/forms.hpp"
#include "magspec/random.hpp"

using namespace magspec;

TEST_CASE("rasterize counts nodes and spacing") {
  Grid g2(Cube(vec(0, 0), 1.0, 2), 3);
  CHECK(g2.node_count() == 9);
  CHECK(g2.h == Catch::Approx(0.5));

  Grid g3(Cube(vec(0, 0, 0), 2.0, 3), 5);
  CHECK(g3.node_count() == 125);
  CHECK(g3.h == Catch::Approx(0.5));

  Grid fine(Cube(vec(0, 0), 1.0, 2), 129);
  CHECK(fine.h == 1.0 / 128.0);  // dyadic spacing is exact

  CHECK_THROWS_AS(rasterize(Cube(vec(0, 0), 1.0, 2), 2), std::invalid_argument);
}

TEST_CASE("magnetic gradient of affine and constant functions") {
  Grid g(Cube(vec(0.5, 0.5), 1.0, 2), 9);
  auto a0 = MagneticPotential::zero(g);

  auto linear = GridFunction::sample(g, [](const Vec& x) { return cplx(x[0], 0.0); });
  auto grad = magnetic_gradient(linear, a0);
  for (auto v : grad.link[0]) CHECK(v.real() == Catch::Approx(1.0).margin(1e-13));
  for (auto v : grad.link[1]) CHECK(std::abs(v) < 1e-13);

  const cplx c(0.7, -0.3);
  auto constant = GridFunction::constant(g, c);
  MagneticPotential a = MagneticPotential::zero(g);
  for (auto& t : a.link_phase[0]) t = 0.4;
  auto gc = magnetic_gradient(constant, a);
  const cplx expected = c * (std::exp(cplx(0, 0.4)) - 1.0) / g.h;
  for (auto v : gc.link[0]) CHECK(std::abs(v - expected) < 1e-12);

  Grid other(Cube(vec(0, 0), 1.0, 2), 7);
  CHECK_THROWS_AS(magnetic_gradient(GridFunction(other), a0), std::invalid_argument);
}

TEST_CASE("quadratic form on the unit cube") {
  Grid g(Cube(vec(0.5, 0.5), 1.0, 2), 17);
  auto a0 = MagneticPotential::zero(g);

  CHECK(quadratic_form(GridFunction(g), a0, ScalarPotential::zero()) == 0.0);

  auto linear = GridFunction::sample(g, [](const Vec& x) { return cplx(x[0], 0.0); });
  CHECK(quadratic_form(linear, a0, ScalarPotential::zero()) == Catch::Approx(1.0).epsilon(1e-12));

  auto one = GridFunction::constant(g, 1.0);
  CHECK(quadratic_form(one, a0, ScalarPotential::constant(1.0)) ==
        Catch::Approx(1.0).epsilon(1e-12));

  auto vneg = ScalarPotential::closed_form([](const Vec&) { return -1.0; });
  CHECK_THROWS_AS(quadratic_form(one, a0, vneg), std::domain_error);
}

TEST_CASE("norms and mask integrals") {
  Grid g(Cube(vec(0, 0, 0), 1.5, 3), 7);
  auto one = GridFunction::constant(g, 1.0);
  const double dn = std::pow(1.5, 3);
  CHECK(l2_norm_sq(one) == Catch::Approx(dn).epsilon(1e-12));

  CHECK(integrate(ScalarPotential::constant(1.0), CompactSetMask::full(g)) ==
        Catch::Approx(dn).epsilon(1e-12));

  CompactSetMask half(g);
  for (std::size_t c = 0; c < half.cells.size(); ++c) half.cells[c] = c < half.cells.size() / 2;
  CHECK(integrate(ScalarPotential::constant(1.0), half) == Catch::Approx(dn / 2).epsilon(1e-12));
}

TEST_CASE("exact discrete gauge invariance") {
  TestFunctionSampler s(991);
  Grid g(Cube(vec(0, 0), 1.0, 2), 9);
  for (int rep = 0; rep < 5; ++rep) {
    auto u = s.random_mixed(g);
    auto a = s.random_phases(g, 2.0);
    auto phi = s.random_gauge(g, 1.5);
    auto a2 = a.gauge_shifted(phi);
    auto u2 = MagneticPotential::gauge_transform(u, phi);
    const double e1 = kinetic_energy(u, a);
    const double e2 = kinetic_energy(u2, a2);
    CHECK(std::abs(e1 - e2) <= 1e-12 * std::max(1.0, e1));
  }
}

TEST_CASE("exact discrete diamagnetic inequality") {
  TestFunctionSampler s(1237);
  for (int rep = 0; rep < 20; ++rep) {
    Grid g(Cube(vec(0, 0), 1.0, 2), 7);
    auto u = s.random_mixed(g);
    auto a = s.random_phases(g, M_PI);
    const double mag = kinetic_energy(u, a);
    const double mod = kinetic_energy(u.modulus(), MagneticPotential::zero(g));
    CHECK(mod <= mag + 1e-12 * std::max(1.0, mag));
  }
}

TEST_CASE("link reversal bookkeeping leaves the form invariant") {
  // the reversed link contributes the conjugate difference with negated phase;
  // |u_i e^{-i theta} - u_j| = |u_j e^{i theta} - u_i| identically
  const cplx ui(0.3, -0.8), uj(-1.1, 0.25);
  const double theta = 0.77;
  const double fwd = std::abs(uj * std::exp(cplx(0, theta)) - ui);
  const double rev = std::abs(ui * std::exp(cplx(0, -theta)) - uj);
  CHECK(fwd == Catch::Approx(rev).epsilon(1e-15));
}

TEST_CASE("quadrature consistency is second order") {
  auto smooth = [](const Vec& x) {
    return cplx(std::sin(2.0 * x[0]) * std::cos(x[1]), 0.3 * std::cos(3.0 * x[0] * x[1]));
  };
  Cube cube(vec(0.5, 0.5), 1.0, 2);
  auto form_at = [&](int m) {
    Grid g(cube, m);
    return quadratic_form(GridFunction::sample(g, smooth), MagneticPotential::zero(g),
                          ScalarPotential::closed_form([](const Vec& x) { return 1.0 + x[0] * x[0]; }));
  };
  const double c1 = form_at(17), c2 = form_at(33), c3 = form_at(65);
  // halving h shrinks the defect by about 4
  const double r = (c1 - c3) / (c2 - c3);
  CHECK(r > 3.0);
  CHECK(r < 5.5);
}

TEST_CASE("reflection extension scales mass and energy by 3^n") {
  TestFunctionSampler s(77);
  Grid g(Cube(vec(0.2, -0.4), 1.0, 2), 9);
  auto u = s.random_mixed(g);
  auto big = reflect_extend(u);
  CHECK(big.grid.m == 25);
  CHECK(l2_norm_sq(big) == Catch::Approx(9.0 * l2_norm_sq(u)).epsilon(1e-12));
  CHECK(kinetic_energy(big, MagneticPotential::zero(big.grid)) ==
        Catch::Approx(9.0 * kinetic_energy(u, MagneticPotential::zero(g))).epsilon(1e-12));
}

TEST_CASE("domain mask complement is a conservative cell union") {
  Grid g(Cube(vec(0.5, 0.5), 1.0, 2), 5);
  auto mask = DomainMask::from_predicate(g, [](const Vec& x) { return x[0] < 0.6; });
  auto comp = mask.complement_cells();
  CHECK_FALSE(comp.empty());
  for (std::size_t c = 0; c < comp.cells.size(); ++c) {
    const Vec mid = g.cell_midpoint(c);
    if (mid[0] > 0.75) CHECK(comp.cells[c] == 1);
    if (mid[0] < 0.3) CHECK(comp.cells[c] == 0);
  }
}
