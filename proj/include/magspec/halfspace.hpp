#pragma once

// The half-space construction: a magnetic-bottle operator on one side of the
// hyperplane sum(x_j) = 0 and an oscillator potential on the other, glued by
// zero-extension. Supplies the corner-tetrahedron capacities, the mu_0 vs
// delta scaling and the demonstration that non-admissible precision profiles
// break the discreteness trend while the spectrum stays discrete.

#include "magspec/capacity.hpp"
#include "magspec/criteria.hpp"
#include "magspec/eigen.hpp"
#include "magspec/molchanov.hpp"

namespace magspec {

inline double plane_sum(const Vec& x, int dim) {
  double s = 0.0;
  for (int j = 0; j < dim; ++j) s += x[j];
  return s;
}

struct HalfspaceOperator {
  int n = 3;
  std::function<Vec(const Vec&)> a_tilde;     // active on the open half-space L_-
  std::function<double(const Vec&)> V_tilde;  // active on the closed half-space L_+

  // the hyperplane itself carries V (closed L_+), fixed for determinism
  Vec a(const Vec& x) const {
    if (plane_sum(x, n) < 0.0) return a_tilde(x);
    return Vec{0.0, 0.0, 0.0};
  }
  double V(const Vec& x) const { return plane_sum(x, n) >= 0.0 ? V_tilde(x) : 0.0; }

  OperatorData as_operator_data() const {
    OperatorData d;
    d.n = n;
    d.a_rule = [*this](const Vec& x) { return a(x); };
    d.V_rule = [*this](const Vec& x) { return V(x); };
    return d;
  }
};

// Default components: an oscillator potential and a growing magnetic field,
// both with discrete spectrum on R^n.
inline HalfspaceOperator build_halfspace(int n) {
  HalfspaceOperator op;
  op.n = n;
  op.V_tilde = [n](const Vec& x) { return norm_sq(x, n); };
  op.a_tilde = [n](const Vec& x) {
    // a = (0, x1 (1 + |x|^2), 0): B grows in every direction
    Vec a{0.0, 0.0, 0.0};
    a[1] = x[0] * (1.0 + norm_sq(x, n));
    return a;
  };
  return op;
}

// Cube of edge d whose max-corner margin over the hyperplane is delta:
// the intersection with the closed L_+ is a corner tetrahedron of size delta.
// slide shifts the cube along the hyperplane direction (1,-1,0,..)/sqrt(2).
inline Cube corner_margin_cube(double d, double delta, int n, double slide = 0.0) {
  Vec c{0.0, 0.0, 0.0};
  const double base = (delta - n * d / 2.0) / n;
  for (int j = 0; j < n; ++j) c[j] = base;
  const double t = slide / std::sqrt(2.0);
  c[0] += t;
  c[1] -= t;
  return Cube(c, d, n);
}

// Capacity of the rasterized corner tetrahedron {x in Q_d : sum x_j >= 0}
// inside the margin-delta cube, using the cell-center rasterization rule.
inline double tetrahedron_capacity(double d, double delta, int n, int m,
                                   const CapacityOptions& opts = {},
                                   CapacityCache* cache = nullptr) {
  if (!(delta > 0.0 && delta <= d))
    throw std::domain_error("tetrahedron_capacity: need 0 < delta <= d");
  Cube cube = corner_margin_cube(d, delta, n);
  Grid g(cube, m);
  auto mask = CompactSetMask::from_predicate(
      g, [n](const Vec& x) { return plane_sum(x, n) >= 0.0; }, CompactSetMask::Rasterize::center);
  if (mask.empty()) return 0.0;
  return wiener_capacity(mask, opts, cache).value;
}

struct TetraSweepRow {
  double delta = 0.0;
  double cap = 0.0;
};

struct TetraSweepReport {
  std::vector<TetraSweepRow> rows;
  double loglog_slope = 0.0;     // n=3: expect n-2
  double linear_r2 = 0.0;        // n=2: 1/cap against log(2d/delta)
  double linear_slope = 0.0;
};

inline TetraSweepReport tetra_capacity_sweep(double d, const std::vector<double>& deltas, int n,
                                             int m, const CapacityOptions& opts = {},
                                             CapacityCache* cache = nullptr) {
  TetraSweepReport rep;
  for (double delta : deltas)
    rep.rows.push_back({delta, tetrahedron_capacity(d, delta, n, m, opts, cache)});
  if (n >= 3) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const auto& r : rep.rows) {
      if (!(r.cap > 0.0)) continue;
      const double x = std::log(r.delta), y = std::log(r.cap);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++k;
    }
    if (k >= 2) rep.loglog_slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  } else {
    // 1/cap should be affine in log(2d/delta)
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int k = 0;
    for (const auto& r : rep.rows) {
      if (!(r.cap > 0.0)) continue;
      const double x = std::log(2.0 * d / r.delta), y = 1.0 / r.cap;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      syy += y * y;
      ++k;
    }
    if (k >= 2) {
      const double cov = k * sxy - sx * sy;
      const double vx = k * sxx - sx * sx, vy = k * syy - sy * sy;
      rep.linear_slope = cov / vx;
      rep.linear_r2 = vx > 0 && vy > 0 ? cov * cov / (vx * vy) : 0.0;
    }
  }
  return rep;
}

struct Mu0DeltaRow {
  double delta = 0.0;
  double mu0 = 0.0;
  double mu0_delta_sq = 0.0;
};

struct Mu0DeltaReport {
  std::vector<Mu0DeltaRow> rows;
  double sup_mu0_delta_sq = 0.0;  // boundedness along the sweep
  double fit_residual = 0.0;      // relative spread of mu0 * delta^2
};

// mu_0 of the half-space operator on margin-delta cubes: the field-free
// corner pocket caps it at C delta^{-2}.
inline Mu0DeltaReport mu0_delta_scan(const HalfspaceOperator& op, double d,
                                     const std::vector<double>& deltas, int m,
                                     const EigenOptions& eig = {}) {
  Mu0DeltaReport rep;
  for (double delta : deltas) {
    Cube cube = corner_margin_cube(d, delta, op.n);
    Grid g(cube, m);
    auto a = MagneticPotential::from_closed_form(g, [&op](const Vec& x) { return op.a(x); });
    Mu0DeltaRow row;
    row.delta = delta;
    row.mu0 = local_energy(g, a, nullptr, eig).mu0;
    row.mu0_delta_sq = row.mu0 * delta * delta;
    rep.sup_mu0_delta_sq = std::max(rep.sup_mu0_delta_sq, row.mu0_delta_sq);
    rep.rows.push_back(row);
  }
  double mean = 0.0;
  for (const auto& r : rep.rows) mean += r.mu0_delta_sq;
  mean /= std::max<std::size_t>(1, rep.rows.size());
  double dev = 0.0;
  for (const auto& r : rep.rows) dev = std::max(dev, std::abs(r.mu0_delta_sq - mean));
  rep.fit_residual = mean > 0.0 ? dev / mean : 0.0;
  return rep;
}

// A precision profile f(t) = min(cap, f_n(t) h(t)) with unbounded h; these are
// exactly the profiles the admissibility test must reject.
struct PrecisionProfile {
  int n = 3;
  std::function<double(double)> h;
  double cap = 0.99;
  std::string desc = "h(t)=1+log(1+t)";

  double f(double t) const { return std::min(cap, f_n(n, t) * h(t)); }

  static PrecisionProfile log_profile(int n) {
    PrecisionProfile p;
    p.n = n;
    p.h = [](double t) { return 1.0 + std::log1p(t); };
    return p;
  }
};

struct PrecisionDemoRow {
  int step = 0;
  Vec center{0, 0, 0};
  double mu0 = 0.0;
  double gamma = 0.0;
  double M_gamma = 0.0;
  double value = 0.0;  // mu0 + d^{-n} M_gamma
  double lambda = 0.0;
  bool negligible = false;
};

struct PrecisionDemoReport {
  bool refused = false;       // profile turned out to be admissible
  bool found = false;         // some delta passes the negligibility test
  double delta = 0.0;
  double bound_c = 0.0;       // sup over the slide of value * delta^2
  bool lambda_increasing = false;
  bool mu0_stable = false;    // translation stability within 2%
  std::vector<PrecisionDemoRow> rows;
  std::string note;
};

// Sweep delta downward until the corner tetrahedron is f-negligible, then
// slide the cube along the hyperplane: the criterion value stays bounded by
// C delta^{-2} while lambda grows.
inline PrecisionDemoReport demonstrate_precision(const HalfspaceOperator& op,
                                                 const PrecisionProfile& profile, double d,
                                                 int m, int shells = 5, double c_n = 1.0,
                                                 const CapacityOptions& cap_opts = {},
                                                 CapacityCache* cache = nullptr,
                                                 const EigenOptions& eig = {}) {
  PrecisionDemoReport rep;
  if (profile.n != op.n) throw std::invalid_argument("demonstrate_precision: dimension mismatch");

  // the demonstration only makes sense for non-admissible profiles
  AdmissiblePair as_pair;
  as_pair.n = profile.n;
  as_pair.f = [&profile](double t) { return profile.f(t); };
  as_pair.g = [](double dd) { return dd * dd; };
  auto validation = validate_pair(as_pair);
  if (validation.admissible || !validation.precision_profile) {
    rep.refused = true;
    rep.note = "profile is admissible; the precision demonstration is refused";
    return rep;
  }

  std::vector<double> candidates;
  for (double delta = d; delta > 2.5 * (d / (m - 1)); delta *= 0.7) candidates.push_back(delta);

  for (double delta : candidates) {
    Cube cube = corner_margin_cube(d, delta, op.n);
    Grid g(cube, m);
    auto a = MagneticPotential::from_closed_form(g, [&op](const Vec& x) { return op.a(x); });
    const double mu0 = local_energy(g, a, nullptr, eig).mu0;
    const double gamma = std::min(c_n * profile.f(mu0 * d * d), 1.0 - 1e-9);
    auto tetra = CompactSetMask::from_predicate(
        g, [&op](const Vec& x) { return plane_sum(x, op.n) >= 0.0; },
        CompactSetMask::Rasterize::center);
    if (tetra.empty()) continue;
    if (!negligibility_test(tetra, gamma, cap_opts, cache)) continue;

    rep.found = true;
    rep.delta = delta;
    // slide along the hyperplane
    double prev_lambda = -std::numeric_limits<double>::infinity();
    rep.lambda_increasing = true;
    double mu0_min = std::numeric_limits<double>::infinity(), mu0_max = 0.0;
    for (int s = 0; s < shells; ++s) {
      PrecisionDemoRow row;
      row.step = s;
      Cube cs = corner_margin_cube(d, delta, op.n, static_cast<double>(s) * 2.0 * d);
      row.center = cs.center;
      Grid gs(cs, m);
      auto as = MagneticPotential::from_closed_form(gs, [&op](const Vec& x) { return op.a(x); });
      row.mu0 = local_energy(gs, as, nullptr, eig).mu0;
      row.gamma = std::min(c_n * profile.f(row.mu0 * d * d), 1.0 - 1e-9);
      auto tet = CompactSetMask::from_predicate(
          gs, [&op](const Vec& x) { return plane_sum(x, op.n) >= 0.0; },
          CompactSetMask::Rasterize::center);
      row.negligible = !tet.empty() && negligibility_test(tet, row.gamma, cap_opts, cache);

      MolchanovQuery q;
      q.cube = cs;
      q.V = ScalarPotential::closed_form([&op](const Vec& x) { return op.V(x); });
      q.gamma = row.gamma;
      q.m = m;
      q.cap_opts = cap_opts;
      row.M_gamma = molchanov_greedy(q, cache).value;
      row.value = row.mu0 + row.M_gamma / std::pow(d, op.n);

      auto V = ScalarPotential::closed_form([&op](const Vec& x) { return op.V(x); });
      row.lambda = dirichlet_bottom(gs, as, V, nullptr, eig).value;
      if (row.lambda <= prev_lambda) rep.lambda_increasing = false;
      prev_lambda = row.lambda;
      mu0_min = std::min(mu0_min, row.mu0);
      mu0_max = std::max(mu0_max, row.mu0);
      rep.bound_c = std::max(rep.bound_c, row.value * delta * delta);
      rep.rows.push_back(row);
    }
    rep.mu0_stable = mu0_max <= mu0_min * 1.02 + 1e-12;
    return rep;
  }
  rep.note = "no delta in the sweep range passed the negligibility test (inconclusive)";
  return rep;
}

}  // namespace magspec
