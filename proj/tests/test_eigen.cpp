#include <catch2/catch_amalgamated.hpp>

#include "magspec/eigen.hpp"
#include "magspec/random.hpp"
#include "oracle_dense.hpp"

using namespace magspec;

namespace {
Grid unit2(int m, double d = 1.0) { return Grid(Cube(vec(0.5 * d, 0.5 * d), d, 2), m); }
}  // namespace

TEST_CASE("dirichlet bottom of the free Laplacian approaches 2 pi^2") {
  Grid g = unit2(65);
  auto r = dirichlet_bottom(g, MagneticPotential::zero(g), ScalarPotential::zero());
  CHECK(r.value == Catch::Approx(2.0 * M_PI * M_PI).epsilon(2e-3));
  CHECK(r.residual <= 1e-8);
}

TEST_CASE("constant potential shifts both bottoms exactly") {
  Grid g = unit2(17);
  auto a = MagneticPotential::zero(g);
  const double base = dirichlet_bottom(g, a, ScalarPotential::zero()).value;
  const double shifted = dirichlet_bottom(g, a, ScalarPotential::constant(2.5)).value;
  CHECK(shifted - base == Catch::Approx(2.5).margin(1e-7));

  CHECK(neumann_bottom(g, a, ScalarPotential::constant(1.0)).value ==
        Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("neumann zero mode of the free Laplacian") {
  Grid g = unit2(33);
  auto r = neumann_bottom(g, MagneticPotential::zero(g), ScalarPotential::zero());
  CHECK(std::abs(r.value) <= 1e-10);
}

TEST_CASE("doubling the cube scales the free spectrum by 1/4, against the dense oracle") {
  Grid g1 = unit2(5, 1.0);
  Grid g2 = unit2(5, 2.0);
  auto a1 = MagneticPotential::zero(g1);
  auto a2 = MagneticPotential::zero(g2);
  const double l1 = dirichlet_bottom(g1, a1, ScalarPotential::zero()).value;
  const double l2 = dirichlet_bottom(g2, a2, ScalarPotential::zero()).value;
  CHECK(l2 == Catch::Approx(0.25 * l1).epsilon(1e-9));

  const double dense1 =
      oracle::smallest_eigenvalue_dense(g1, a1, ScalarPotential::zero(), BottomKind::dirichlet);
  CHECK(l1 == Catch::Approx(dense1).epsilon(1e-8));
}

TEST_CASE("iterative bottoms match dense diagonalization on m=5 with fields") {
  TestFunctionSampler s(555);
  for (int rep = 0; rep < 4; ++rep) {
    Grid g = unit2(5, s.uniform(0.5, 2.0));
    auto a = s.random_phases(g, 1.2);
    auto V = s.random_potential(g, 1.0);
    for (auto kind : {BottomKind::dirichlet, BottomKind::neumann}) {
      const double dense = oracle::smallest_eigenvalue_dense(g, a, V, kind);
      EigenOptions eo;
      eo.tol = 1e-10;
      const double iter = (kind == BottomKind::dirichlet)
                              ? dirichlet_bottom(g, a, V, nullptr, eo).value
                              : neumann_bottom(g, a, V, nullptr, eo).value;
      CHECK(iter == Catch::Approx(dense).margin(1e-7 * std::max(1.0, std::abs(dense))));
    }
  }
}

TEST_CASE("mu0 vanishes without field and under pure gauges") {
  Grid g = unit2(9);
  const double mu0_free = local_energy(g, MagneticPotential::zero(g)).mu0;
  CHECK(mu0_free >= 0.0);
  CHECK(mu0_free <= 1e-12);

  TestFunctionSampler s(42);
  auto phi = s.random_gauge(g, 1.0);
  auto pure_gauge = MagneticPotential::zero(g).gauge_shifted(phi);
  auto le = local_energy(g, pure_gauge);
  CHECK(le.mu0 <= 1e-9);
  CHECK(le.mu0_tilde == le.mu0 * g.cube.edge * g.cube.edge);
}

TEST_CASE("mu0 of a constant 2D field grows with |B| and matches the dense oracle at m=9") {
  Grid g = unit2(9);
  auto mu0_of = [&](double B) {
    auto a = MagneticPotential::from_closed_form(
        g, [B](const Vec& x) { return vec(0.0, B * x[0]); });
    return local_energy(g, a).mu0;
  };
  const double m1 = mu0_of(2.0), m2 = mu0_of(6.0), m3 = mu0_of(12.0);
  CHECK(m1 > 0.0);
  CHECK(m2 > m1);
  CHECK(m3 > m2);

  auto a = MagneticPotential::from_closed_form(g, [](const Vec& x) { return vec(0.0, 6.0 * x[0]); });
  const double dense =
      oracle::smallest_eigenvalue_dense(g, a, ScalarPotential::zero(), BottomKind::neumann);
  CHECK(m2 == Catch::Approx(dense).margin(1e-7));
}

TEST_CASE("mu0 of a fixed field vanishes as the cube shrinks") {
  auto mu0_at = [&](double d) {
    Grid g = unit2(9, d);
    auto a = MagneticPotential::from_closed_form(
        g, [](const Vec& x) { return vec(0.0, 4.0 * x[0]); });
    return local_energy(g, a).mu0;
  };
  const double big = mu0_at(2.0), small = mu0_at(0.25);
  CHECK(small < 0.1 * big);
}

TEST_CASE("gauge invariance of mu0 within 1e-8") {
  TestFunctionSampler s(2024);
  Grid g = unit2(9);
  auto a = MagneticPotential::from_closed_form(g, [](const Vec& x) { return vec(0.0, 3.0 * x[0]); });
  EigenOptions eo;
  eo.tol = 1e-10;
  const double mu = local_energy(g, a, nullptr, eo).mu0;
  for (int rep = 0; rep < 5; ++rep) {
    auto phi = s.random_gauge(g, 1.0);
    const double mu_g = local_energy(g, a.gauge_shifted(phi), nullptr, eo).mu0;
    CHECK(std::abs(mu - mu_g) / std::max(mu, 1.0) <= 1e-8);
  }
}

TEST_CASE("neumann never exceeds dirichlet") {
  TestFunctionSampler s(31337);
  for (int rep = 0; rep < 6; ++rep) {
    Grid g = unit2(7, s.uniform(0.5, 2.0));
    auto a = s.random_phases(g, 1.0);
    auto V = s.random_potential(g, s.uniform(0.0, 2.0));
    const double mu = neumann_bottom(g, a, V).value;
    const double la = dirichlet_bottom(g, a, V).value;
    CHECK(mu <= la * (1.0 + 1e-8) + 1e-10);
  }
}

TEST_CASE("monotonicity in V") {
  Grid g = unit2(9);
  auto a = MagneticPotential::zero(g);
  auto v1 = ScalarPotential::closed_form([](const Vec& x) { return x[0]; });
  auto v2 = ScalarPotential::closed_form([](const Vec& x) { return x[0] + 0.5 * x[1] + 0.2; });
  CHECK(dirichlet_bottom(g, a, v1).value <= dirichlet_bottom(g, a, v2).value + 1e-9);
  CHECK(neumann_bottom(g, a, v1).value <= neumann_bottom(g, a, v2).value + 1e-9);
}

TEST_CASE("refinement converges at second order via Richardson") {
  auto value_at = [](int m) {
    Grid g = unit2(m);
    return dirichlet_bottom(g, MagneticPotential::zero(g), ScalarPotential::zero()).value;
  };
  const double v1 = value_at(9), v2 = value_at(17), v3 = value_at(33);
  const double r = (v1 - v3) / (v2 - v3);  // ~4 for order 2
  CHECK(r > 3.2);
  CHECK(r < 5.0);
  const double extrap = (4.0 * v3 - v2) / 3.0;
  CHECK(extrap == Catch::Approx(2.0 * M_PI * M_PI).epsilon(2e-4));
}

TEST_CASE("domain masks restrict the test space") {
  Grid g = unit2(9);
  auto mask = DomainMask::from_predicate(g, [](const Vec& x) { return x[0] < 0.5; });
  auto a = MagneticPotential::zero(g);
  // Dirichlet on the masked half-cube is larger than on the full cube
  const double full = dirichlet_bottom(g, a, ScalarPotential::zero()).value;
  const double half = dirichlet_bottom(g, a, ScalarPotential::zero(), &mask).value;
  CHECK(half > full * 1.5);

  auto none = DomainMask::from_predicate(g, [](const Vec&) { return false; });
  CHECK_THROWS_AS(dirichlet_bottom(g, a, ScalarPotential::zero(), &none), std::domain_error);
}

TEST_CASE("deterministic under a fixed seed") {
  Grid g = unit2(9);
  TestFunctionSampler s(8);
  auto a = s.random_phases(g, 1.0);
  EigenOptions eo;
  eo.seed = 12345;
  const auto r1 = neumann_bottom(g, a, ScalarPotential::zero(), nullptr, eo);
  const auto r2 = neumann_bottom(g, a, ScalarPotential::zero(), nullptr, eo);
  CHECK(r1.value == r2.value);
  CHECK(r1.iterations == r2.iterations);
}
