#pragma once

// Calibration / validation driver over the testbench checks. A calibration
// run fits every symbolic constant as margin * (suite supremum ratio) and
// writes the ledger; a validation run under a frozen ledger must pass with
// zero inequality violations, and its refitted constants are reported for
// drift monitoring.
//
// Each family mixes a deterministic battery of near-extremal cases with
// seeded random ones, so the supremum is anchored by the battery and refit
// drift stays small across seeds.

#include "magspec/testbench.hpp"

namespace magspec {

struct BenchOptions {
  int n = 2;
  std::uint64_t seed = 0x5eed0003u;
  int cases = 24;  // random cases per family
  double tol_factor = 10.0;
  double fit_margin = 1.25;
  CapacityOptions cap{};
  EigenOptions eig{};
};

struct SuiteOutcome {
  int n = 2;
  std::string run_id;
  std::vector<InequalityCase> cases;
  std::map<std::string, double> fitted;  // margin-scaled constants from this run
  BridgeFit bridge;
  double sharp_poincare_ratio = 0.0;  // ratio for u = cos(pi x1 / d)
  int violations = 0;
  bool all_passed = true;
};

namespace detail {

struct RawCase {
  std::string name;
  double lhs = 0.0;
  double base = 0.0;    // rhs = C * base + addend
  double addend = 0.0;
  double tol = 0.0;
  std::map<std::string, double> extras;
};

inline double raw_ratio(const RawCase& r) {
  if (!(r.base > 0.0) || !std::isfinite(r.addend)) return 0.0;
  const double num = r.lhs - r.addend;
  return num > 0.0 ? num / r.base : 0.0;
}

inline InequalityCase raw_to_case(const RawCase& r, double C) {
  const double rhs = std::isfinite(r.addend) ? C * r.base + r.addend
                                             : std::numeric_limits<double>::infinity();
  auto c = make_case(r.name, r.lhs, rhs, r.tol);
  c.extras = r.extras;
  c.extras["ratio"] = raw_ratio(r);
  return c;
}

}  // namespace detail

class BenchSuite {
 public:
  BenchSuite(const BenchOptions& opts, CapacityCache* cache) : o_(opts), cache_(cache) {
    std::ostringstream id;
    id << "n" << o_.n << "-seed" << std::hex << o_.seed;
    run_id_ = id.str();
  }

  // frozen == nullptr: calibration (constants fitted from this run's suprema)
  SuiteOutcome run(const ConstantsLedger* frozen) {
    SuiteOutcome out;
    out.n = o_.n;
    out.run_id = run_id_;

    poincare_family(out);
    cap_upper_family(out, frozen);
    two_term_family(out, frozen);
    cutoff_family(out, frozen);
    levelset_family(out, frozen);
    restriction_family(out, frozen);
    cap_dirichlet_family(out);
    bridge_family(out, frozen);

    for (const auto& c : out.cases)
      if (!c.passed) ++out.violations;
    out.all_passed = out.violations == 0;
    return out;
  }

  // measured reference constants shared by the criteria layer
  void record_reference_constants(ConstantsLedger& led) const {
    const int m_ref = o_.n == 2 ? 17 : 9;
    Grid g(Cube(vec(0, 0, 0), 1.0, o_.n), m_ref);
    const double capq1 = cube_capacity(g, o_.cap, cache_);
    const std::string n = std::to_string(o_.n);
    led.set("cap_q1_n" + n, capq1, run_id_,
            "cap(Q_1) at reference resolution m=" + std::to_string(m_ref) + ", calibration constant");
    led.set("gamma_cn_n" + n, 0.5 / capq1, run_id_,
            "default c_n of the gamma formula, 0.5/cap(Q_1); the paper fixes no value");
    led.set("pos_ctilde_n" + n, 1.0, run_id_, "default tilde-c of positivity variants (d),(e)");
  }

 private:
  BenchOptions o_;
  CapacityCache* cache_;
  std::string run_id_;

  std::string cname(const std::string& stem) const { return stem + "_n" + std::to_string(o_.n); }

  Grid unit_grid(int m, double d = 1.0, Vec center = {0, 0, 0}) const {
    return Grid(Cube(center, d, o_.n), m);
  }

  void freeze_and_emit(SuiteOutcome& out, const ConstantsLedger* frozen, const std::string& stem,
                       std::vector<detail::RawCase>& raws) {
    double sup = 0.0;
    for (const auto& r : raws) sup = std::max(sup, detail::raw_ratio(r));
    const double fitted = o_.fit_margin * sup;
    out.fitted[cname(stem)] = fitted;
    const double C = frozen ? frozen->get(cname(stem)) : fitted;
    for (const auto& r : raws) out.cases.push_back(detail::raw_to_case(r, C));
  }

  // --- Poincare: fixed constant d^2/pi^2 -----------------------------------
  void poincare_family(SuiteOutcome& out) {
    TestFunctionSampler s(o_.seed ^ 0xA1u);
    {
      const int m = o_.n == 2 ? 33 : 17;
      Grid g = unit_grid(m, 1.0);
      auto sharp = GridFunction::sample(
          g, [&](const Vec& x) { return cplx(std::cos(M_PI * (x[0] - g.cube.lo(0)) / g.cube.edge), 0.0); });
      auto c = check_poincare(sharp, o_.tol_factor);
      const double energy = kinetic_energy(sharp, MagneticPotential::zero(g));
      out.sharp_poincare_ratio = energy > 0.0 ? c.lhs / energy : 0.0;
      c.name = "poincare_sharp";
      out.cases.push_back(c);
      out.cases.push_back(check_poincare(GridFunction::constant(g, cplx(0.7, -0.2)), o_.tol_factor));
    }
    for (int i = 0; i < o_.cases; ++i) {
      const double d = s.uniform(0.5, 2.0);
      Grid g = unit_grid(o_.n == 2 ? 17 : 9, d);
      out.cases.push_back(check_poincare(s.random_mixed(g), o_.tol_factor));
    }
  }

  // --- Lemma: cap(F) <= C_n grad / (d^{-n} mass) ---------------------------
  void cap_upper_family(SuiteOutcome& out, const ConstantsLedger* frozen) {
    TestFunctionSampler s(o_.seed ^ 0xA2u);
    std::vector<detail::RawCase> raws;
    const int m = o_.n == 2 ? 9 : 7;
    for (int i = 0; i < o_.cases; ++i) {
      Grid g = unit_grid(m, 1.0);
      auto F = s.random_blob_mask(g, 0.25, s.uniform_int(1, 2));
      auto capres = wiener_capacity(F, o_.cap, nullptr);
      auto layout = detail::make_ambient(g, o_.cap.factor_for(o_.n));
      const int off = layout.lo_offset_cells;
      GridFunction one_minus_phi(g);
      for (std::size_t k = 0; k < g.node_count(); ++k) {
        auto c = g.node_coords(k);
        const std::size_t ai =
            layout.grid.node_index(c[0] + off, c[1] + off, o_.n == 3 ? c[2] + off : 0);
        one_minus_phi.values[k] = 1.0 - capres.minimizer.values[ai].real();
      }
      GridFunction u = one_minus_phi;
      if (i % 2 == 1) {
        auto w = s.random_mixed(g);
        for (std::size_t k = 0; k < u.values.size(); ++k)
          u.values[k] *= (w.values[k] + cplx(1.5, 0.0));
      }
      const double mass = l2_norm_sq(u) / std::pow(g.cube.edge, o_.n);
      if (!(mass > 1e-12)) continue;
      const double grad = kinetic_energy(u, MagneticPotential::zero(g));
      detail::RawCase r;
      r.name = "cap_upper";
      r.lhs = capres.value;
      r.base = grad / mass;
      r.tol = quad_tolerance(g.h, std::max(r.lhs, r.base), o_.tol_factor);
      raws.push_back(r);

      // magnetic variant: same constant via the diamagnetic reduction
      auto a = s.random_phases(g, 1.0);
      auto mod = u.modulus();
      const double grad_a = kinetic_energy(u, a);
      const double grad_mod = kinetic_energy(mod, MagneticPotential::zero(g));
      detail::RawCase rm;
      rm.name = "cap_upper_magnetic";
      rm.lhs = capres.value;
      rm.base = grad_a / mass;
      rm.tol = r.tol;
      raws.push_back(rm);
      out.cases.push_back(make_case("diamagnetic_reduction", grad_mod, grad_a,
                                    1e-12 * std::max(1.0, grad_a)));
    }
    freeze_and_emit(out, frozen, "cap_upper_C", raws);
  }

  // --- Lemma: two-term norm estimate ---------------------------------------
  void two_term_family(SuiteOutcome& out, const ConstantsLedger* frozen) {
    TestFunctionSampler s(o_.seed ^ 0xA3u);
    std::vector<detail::RawCase> raws;
    const int m = o_.n == 2 ? 4 : 3;
    const double d_fixed = 1.0;
    auto eval = [&](const GridFunction& u, const ScalarPotential& V, double gamma) {
      const Grid& g = u.grid;
      MolchanovQuery q;
      q.cube = g.cube;
      q.V = V;
      q.gamma = gamma;
      q.m = g.m;
      q.cap_opts = o_.cap;
      auto M = molchanov_brute(q, 16, cache_);
      const double d = g.cube.edge;
      const double dn = std::pow(d, o_.n);
      detail::RawCase r;
      r.name = "two_term";
      r.lhs = l2_norm_sq(u);
      const double grad = kinetic_energy(u, MagneticPotential::zero(g));
      r.base = d * d / gamma * grad;
      r.addend = M.value > 0.0 ? 4.0 * dn / M.value * potential_energy(u, V)
                               : std::numeric_limits<double>::infinity();
      r.tol = quad_tolerance(g.h / d, std::max(r.lhs, grad), o_.tol_factor);
      r.extras["M_gamma"] = M.value;
      raws.push_back(r);
    };
    {
      Grid g = unit_grid(m, d_fixed);
      eval(GridFunction::constant(g, 1.0), ScalarPotential::constant(1.0), 0.05);
      eval(GridFunction::constant(g, 1.0), ScalarPotential::zero(), 0.3);
    }
    for (int i = 0; i < o_.cases; ++i) {
      Grid g = unit_grid(m, d_fixed);
      eval(s.random_mixed(g), s.random_potential(g, s.uniform(0.2, 3.0)), s.uniform(0.05, 0.6));
    }
    freeze_and_emit(out, frozen, "two_term_C", raws);
  }

  // --- Lemma: cutoff witness ------------------------------------------------
  void cutoff_family(SuiteOutcome& out, const ConstantsLedger* frozen) {
    const int m = o_.n == 2 ? 9 : 7;
    Grid g = unit_grid(m, 1.0);
    // nested center blobs give a monotone spectrum of capacity ratios
    std::vector<CompactSetMask> candidates;
    const int mid = g.cells_per_edge() / 2;
    for (int r = 0; r <= g.cells_per_edge() / 2; ++r) {
      CompactSetMask F(g);
      for (std::size_t c = 0; c < F.cells.size(); ++c) {
        auto q = g.cell_coords(c);
        int dist = 0;
        for (int j = 0; j < o_.n; ++j) dist = std::max(dist, std::abs(q[j] - mid));
        F.cells[c] = dist <= r ? 1 : 0;
      }
      candidates.push_back(F);
    }

    double threshold;
    if (frozen) {
      threshold = frozen->get(cname("cutoff_cn"));
    } else {
      // largest candidate threshold keeping a mass-ratio margin over 1/4
      threshold = 0.0;
      for (const auto& F : candidates) {
        auto w = build_cutoff(F, 1.0, o_.cap, cache_);
        if (w.accepted && w.mass_ratio >= 0.30) threshold = std::max(threshold, w.cap_ratio);
      }
      threshold = std::min(threshold, 0.5);
    }
    out.fitted[cname("cutoff_cn")] = threshold;

    std::vector<detail::RawCase> energy_raws;
    int accepted = 0, refused = 0;
    for (const auto& F : candidates) {
      auto w = build_cutoff(F, threshold, o_.cap, cache_);
      if (!w.accepted) {
        ++refused;
        continue;
      }
      ++accepted;
      out.cases.push_back(
          make_case("cutoff_mass_ratio", 0.25, w.mass_ratio, 1e-12));
      if (F.empty()) continue;
      detail::RawCase r;
      r.name = "cutoff_energy";
      r.lhs = w.energy_ratio * w.cap_F;  // grad-energy of psi over Q_d
      r.base = w.cap_F;
      r.tol = quad_tolerance(g.h, w.cap_F, o_.tol_factor);
      energy_raws.push_back(r);
    }
    freeze_and_emit(out, frozen, "cutoff_Cpsi", energy_raws);
    out.cases.push_back(make_case("cutoff_accepts_some", 1.0, static_cast<double>(accepted), 0.0));
  }

  // --- Lemma: cap(E_k) <= C_n E k^{-2} d^n ----------------------------------
  void levelset_family(SuiteOutcome& out, const ConstantsLedger* frozen) {
    TestFunctionSampler s(o_.seed ^ 0xA5u);
    std::vector<detail::RawCase> raws;
    const int m = o_.n == 2 ? 9 : 7;
    auto eval = [&](const GridFunction& u_in, const MagneticPotential& a, double k) {
      const Grid& g = u_in.grid;
      GridFunction u = u_in;
      const double nn = l2_norm_sq(u);
      if (!(nn > 1e-14)) return;
      const double d = g.cube.edge;
      const double dn = std::pow(d, o_.n);
      const double sc = std::sqrt(dn / nn);
      for (auto& v : u.values) v *= sc;
      const double E = std::max(kinetic_energy(u, a) / dn, 1.0 / (d * d));
      std::size_t corner[8];
      const int corners = 1 << o_.n;
      CompactSetMask Ek(g);
      for (std::size_t c = 0; c < Ek.cells.size(); ++c) {
        g.cell_corner_nodes(c, corner);
        bool all = true;
        for (int q = 0; q < corners && all; ++q) all = std::abs(u.values[corner[q]]) >= k;
        Ek.cells[c] = all ? 1 : 0;
      }
      detail::RawCase r;
      r.name = "levelset_cap";
      r.lhs = Ek.empty() ? 0.0 : wiener_capacity(Ek, o_.cap, cache_).value;
      r.base = E * dn / (k * k);
      r.tol = quad_tolerance(g.h / d, r.lhs, o_.tol_factor);
      r.extras["k"] = k;
      raws.push_back(r);
    };
    {
      Grid g = unit_grid(m, 1.0);
      eval(GridFunction::constant(g, 1.0), MagneticPotential::zero(g), 0.5);   // E_k = Q_d
      eval(GridFunction::constant(g, 1.0), MagneticPotential::zero(g), 50.0);  // E_k empty
    }
    for (int i = 0; i < o_.cases; ++i) {
      const double d = s.uniform(0.5, 2.0);
      Grid g = unit_grid(m, d);
      auto u = s.random_mixed(g);
      auto a = (i % 3 == 0) ? s.random_phases(g, 0.8) : MagneticPotential::zero(g);
      for (double k : {0.5, 1.0, 2.5}) eval(u, a, k);
    }
    freeze_and_emit(out, frozen, "levelset_C", raws);
  }

  // --- Restriction lemma on the cube ---------------------------------------
  void restriction_family(SuiteOutcome& out, const ConstantsLedger* frozen) {
    TestFunctionSampler s(o_.seed ^ 0xA6u);
    std::vector<detail::RawCase> raws;
    const int m = o_.n == 2 ? 17 : 9;
    auto eval = [&](const GridFunction& u, const CompactSetMask& R) {
      if (R.empty()) return;
      const Grid& g = u.grid;
      const double d = g.cube.edge;
      const double mes = R.measure();
      const double bulk = kinetic_energy(u, MagneticPotential::zero(g)) + l2_norm_sq(u) / (d * d);
      const double geom =
          o_.n >= 3 ? std::pow(mes, 2.0 / o_.n) : mes * std::log(4.0 * d * d / mes);
      detail::RawCase r;
      r.name = "restriction";
      r.lhs = l2_norm_sq_on(u, R);
      r.base = geom * bulk;
      r.tol = quad_tolerance(g.h / d, std::max(r.lhs, bulk), o_.tol_factor);
      r.extras["mes"] = mes;
      raws.push_back(r);
    };
    {
      // reflection extension sanity: mass and energy scale by exactly 3^n
      Grid g = unit_grid(m, 1.0);
      auto u = s.random_mixed(g);
      auto big = reflect_extend(u);
      const double f = std::pow(3.0, o_.n);
      out.cases.push_back(make_case("reflect_mass", l2_norm_sq(big), f * l2_norm_sq(u),
                                    1e-9 * f * l2_norm_sq(u)));
      out.cases.push_back(make_case("reflect_mass_lower", f * l2_norm_sq(u), l2_norm_sq(big),
                                    1e-9 * f * l2_norm_sq(u)));
      eval(GridFunction::constant(g, 1.0), CompactSetMask::full(g));
    }
    for (int i = 0; i < o_.cases; ++i) {
      const double d = s.uniform(0.5, 2.0);
      Grid g = unit_grid(m, d);
      eval(s.random_mixed(g), s.random_blob_mask(g, s.uniform(0.05, 0.6), s.uniform_int(1, 3)));
    }
    freeze_and_emit(out, frozen, "restriction_C", raws);
  }

  // --- Dirichlet capacity integral (fixed constant 4) -----------------------
  void cap_dirichlet_family(SuiteOutcome& out) {
    TestFunctionSampler s(o_.seed ^ 0xA7u);
    const int m = o_.n == 2 ? 17 : 9;
    Grid g = unit_grid(m, 2.0);
    {
      // the equilibrium potential of a center cell, relative to the cube itself
      CompactSetMask center(g);
      center.cells[g.cell_index(g.cells_per_edge() / 2, g.cells_per_edge() / 2,
                                o_.n == 3 ? g.cells_per_edge() / 2 : 0)] = 1;
      CapacityOptions rel;
      rel.ambient_factor = 1;
      auto eq = wiener_capacity(center, rel, nullptr);
      out.cases.push_back(check_cap_dirichlet(eq.minimizer, CompactSetMask::full(g), cache_, 24,
                                              o_.tol_factor));
    }
    for (int i = 0; i < o_.cases / 2 + 2; ++i) {
      auto u = s.random_mixed(g);
      // taper to compact support and take the modulus
      for (std::size_t k = 0; k < u.values.size(); ++k) {
        const Vec x = g.node_point(k);
        double t = 1.0;
        for (int j = 0; j < o_.n; ++j) {
          const double dist =
              std::min(x[j] - g.cube.lo(j), g.cube.hi(j) - x[j]) / (0.25 * g.cube.edge);
          t = std::min(t, std::clamp(dist, 0.0, 1.0));
        }
        u.values[k] = std::abs(u.values[k]) * t;
      }
      auto R = (i % 2 == 0) ? CompactSetMask::full(g)
                            : s.random_blob_mask(g, s.uniform(0.1, 0.5), 2);
      out.cases.push_back(check_cap_dirichlet(u, R, cache_, 24, o_.tol_factor));
    }
  }

  // --- lambda-mu bridge ------------------------------------------------------
  void bridge_family(SuiteOutcome& out, const ConstantsLedger* frozen) {
    TestFunctionSampler s(o_.seed ^ 0xA8u);
    const int m = o_.n == 2 ? 17 : 9;
    std::vector<BridgePoint> pts;
    auto add_point = [&](const Grid& g, const MagneticPotential& a, const ScalarPotential& V) {
      EigenOptions eo = o_.eig;
      BridgePoint p;
      p.d = g.cube.edge;
      p.mu = neumann_bottom(g, a, V, nullptr, eo).value;
      p.lambda = dirichlet_bottom(g, a, V, nullptr, eo).value;
      pts.push_back(p);
    };
    for (double d : {0.5, 1.0, 2.0}) {
      Grid g = unit_grid(m, d);
      add_point(g, MagneticPotential::zero(g), ScalarPotential::zero());
    }
    for (int i = 0; i < o_.cases; ++i) {
      const double d = s.uniform(0.5, 2.0);
      Grid g = unit_grid(m, d);
      auto a = (i % 3 == 0) ? s.random_phases(g, 0.7) : MagneticPotential::zero(g);
      auto V = (i % 2 == 0) ? s.random_potential(g, s.uniform(0.1, 2.0)) : ScalarPotential::zero();
      add_point(g, a, V);
    }
    out.bridge = fit_bridge(pts);
    out.fitted[cname("bridge_A")] = out.bridge.A;
    out.fitted[cname("bridge_B")] = out.bridge.B;
    out.cases.push_back(make_case("bridge_mu_le_lambda", out.bridge.ordering_ok ? 0.0 : 1.0, 0.0, 0.5));
    if (frozen) {
      // drift is monitored by the caller; here only the exact ordering is a gate
      const double A = frozen->get(cname("bridge_A"));
      const double B = frozen->get(cname("bridge_B"));
      out.fitted[cname("bridge_A_refit")] = out.bridge.A;
      (void)A;
      (void)B;
    }
  }
};

// Calibrate both the reference constants and the fitted lemma constants into
// a ledger.
inline SuiteOutcome calibrate_bench(const BenchOptions& opts, ConstantsLedger& ledger,
                                    CapacityCache* cache) {
  BenchSuite suite(opts, cache);
  auto out = suite.run(nullptr);
  suite.record_reference_constants(ledger);
  for (const auto& [name, value] : out.fitted) {
    if (name.find("_refit") != std::string::npos) continue;
    ledger.set(name, value, out.run_id, "fit-then-freeze calibration constant");
  }
  return out;
}

struct ValidationOutcome {
  SuiteOutcome suite;
  std::map<std::string, double> drift;  // |refit - frozen| / frozen
  double max_drift = 0.0;
  bool passed = false;
};

inline ValidationOutcome validate_bench(const BenchOptions& opts, const ConstantsLedger& ledger,
                                        CapacityCache* cache, double drift_limit = 0.2) {
  BenchSuite suite(opts, cache);
  ValidationOutcome v;
  v.suite = suite.run(&ledger);
  for (const auto& [name, refit] : v.suite.fitted) {
    if (name.find("_refit") != std::string::npos) continue;
    if (!ledger.has(name)) continue;
    const double frozen = ledger.get(name);
    if (frozen > 0.0) v.drift[name] = std::abs(refit - frozen) / frozen;
  }
  for (const auto& [name, d] : v.drift) v.max_drift = std::max(v.max_drift, d);
  v.passed = v.suite.all_passed && v.max_drift < drift_limit;
  return v;
}

}  // namespace magspec
