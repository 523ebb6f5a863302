#pragma once

// The headline criteria: discreteness scans over cube tilings, the necessary
// and sufficient corollaries, positivity conditions, and the purely geometric
// domain test. Limits over Q_d -> infinity are truncated to finite shells;
// verdicts are trend statistics and are labeled as such in reports.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "magspec/eigen.hpp"
#include "magspec/molchanov.hpp"
#include "magspec/parallel.hpp"

namespace magspec {

// ---------------------------------------------------------------------------
// Admissible pairs (f, g)

inline double f_n(int n, double t) {
  if (n >= 3) return std::pow(1.0 + t, (2.0 - n) / 2.0);
  return 1.0 / (1.0 + std::log1p(t));
}

struct AdmissiblePair {
  std::function<double(double)> f;
  std::function<double(double)> g;
  int n = 2;
  double d0 = 1.0;  // g is declared on (0, d0)
  std::string f_desc = "f_n";
  std::string g_desc = "d^2";

  static AdmissiblePair canonical(int n, double d0 = 1.0) {
    AdmissiblePair p;
    p.n = n;
    p.d0 = d0;
    p.f = [n](double t) { return f_n(n, t); };
    p.g = [](double d) { return d * d; };
    return p;
  }
};

struct PairValidation {
  bool admissible = false;
  bool precision_profile = false;  // f = f_n * h with h unbounded
  std::string first_violation;
  std::vector<double> t_samples;
  std::vector<double> f_values;
};

inline PairValidation validate_pair(const AdmissiblePair& pair) {
  PairValidation v;
  // log-spaced t lattice plus the origin
  v.t_samples.push_back(0.0);
  for (double t = 1e-3; t <= 1.0e6; t *= std::sqrt(10.0)) v.t_samples.push_back(t);
  v.f_values.reserve(v.t_samples.size());
  double prev = std::numeric_limits<double>::infinity();
  double ratio_first = 0.0, ratio_last = 0.0, ratio_max = 0.0;
  for (std::size_t i = 0; i < v.t_samples.size(); ++i) {
    const double t = v.t_samples[i];
    const double ft = pair.f(t);
    v.f_values.push_back(ft);
    if (!(ft > 0.0)) {
      v.first_violation = "f not positive at t=" + std::to_string(t);
      return v;
    }
    if (ft > prev * (1.0 + 1e-12)) {
      v.first_violation = "f not decreasing at t=" + std::to_string(t);
      return v;
    }
    prev = ft;
    const double bound = f_n(pair.n, t);
    const double ratio = ft / bound;
    if (i == 0) ratio_first = ratio;
    ratio_last = ratio;
    ratio_max = std::max(ratio_max, ratio);
    if (ratio > 1.0 + 1e-12 && v.first_violation.empty())
      v.first_violation = "f exceeds f_n at t=" + std::to_string(t);
  }
  // an unbounded multiplier against f_n marks the precision-theorem profiles
  if (ratio_last > 2.0 && ratio_last > 2.0 * std::max(1.0, ratio_first)) v.precision_profile = true;

  if (!v.first_violation.empty()) return v;

  const double dmax = pair.d0 * (1.0 - 1e-9);
  double g_small = 0.0, g_large = 0.0;
  for (double d = dmax; d >= pair.d0 * 1e-4; d *= 0.5) {
    const double gd = pair.g(d);
    if (!(gd > 0.0)) {
      v.first_violation = "g not positive at d=" + std::to_string(d);
      return v;
    }
    if (d * d > gd * (1.0 + 1e-12)) {
      v.first_violation = "g(d)^{-1} d^2 > 1 at d=" + std::to_string(d);
      return v;
    }
    if (g_large == 0.0) g_large = gd;
    g_small = gd;
  }
  if (!(g_small <= 0.2 * g_large)) {
    v.first_violation = "g(tau) does not tend to 0 as tau -> 0";
    return v;
  }
  v.admissible = true;
  return v;
}

// ---------------------------------------------------------------------------
// Empirical constants with provenance

struct ConstantsLedger {
  struct Entry {
    double value = 0.0;
    std::string run_id;
    std::string note;
  };
  std::map<std::string, Entry> entries;
  std::string version = "magspec-ledger v1";

  void set(const std::string& name, double value, const std::string& run_id,
           const std::string& note) {
    entries[name] = Entry{value, run_id, note};
  }
  bool has(const std::string& name) const { return entries.count(name) > 0; }
  double get(const std::string& name) const {
    auto it = entries.find(name);
    if (it == entries.end()) throw std::invalid_argument("ledger: missing constant " + name);
    return it->second.value;
  }
  double get_or(const std::string& name, double fallback) const {
    auto it = entries.find(name);
    return it == entries.end() ? fallback : it->second.value;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("ledger: cannot write " + path);
    out << version << "\n";
    out.precision(17);
    for (const auto& [name, e] : entries)
      out << name << " " << e.value << " run=" << e.run_id << " # " << e.note << "\n";
  }
  static ConstantsLedger load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ledger: cannot read " + path);
    ConstantsLedger led;
    std::string line;
    if (!std::getline(in, line) || line.rfind("magspec-ledger", 0) != 0)
      throw std::runtime_error("ledger: bad header in " + path);
    led.version = line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      std::string name, run, hash;
      double value;
      ss >> name >> value >> run;
      std::string note;
      std::getline(ss, note);
      const auto pos = note.find("# ");
      Entry e;
      e.value = value;
      if (run.rfind("run=", 0) == 0) e.run_id = run.substr(4);
      if (pos != std::string::npos) e.note = note.substr(pos + 2);
      led.entries[name] = e;
    }
    return led;
  }
};

// ---------------------------------------------------------------------------
// Tiling scans

// Closed-form data of the operator; null members mean identically zero
// (or Omega = R^n for the domain).
struct OperatorData {
  std::function<Vec(const Vec&)> a_rule;
  std::function<double(const Vec&)> V_rule;
  std::function<bool(const Vec&)> omega;
  int n = 2;

  MagneticPotential a_on(const Grid& g) const {
    return a_rule ? MagneticPotential::from_closed_form(g, a_rule) : MagneticPotential::zero(g);
  }
  ScalarPotential V_as_potential() const {
    return V_rule ? ScalarPotential::closed_form(V_rule) : ScalarPotential::zero();
  }
  std::optional<DomainMask> omega_on(const Grid& g) const {
    if (!omega) return std::nullopt;
    return DomainMask::from_predicate(g, omega);
  }
};

struct ScanOptions {
  int m = 9;             // nodes per cube edge
  double eigen_tol = 1e-8;
  std::uint64_t seed = 0x5eed0002u;
  CapacityOptions cap{};
  int threads = 0;
  bool compute_lambda_mu = false;
  double trend_last_over_first = 2.0;
};

struct ScanRow {
  double d = 0.0;
  std::array<int, 3> idx{0, 0, 0};
  int shell = 0;
  Vec center{0.0, 0.0, 0.0};
  double mu0 = 0.0;
  double mu0_tilde = 0.0;
  double gamma = 0.0;
  double M = 0.0;      // Molchanov value (may be +inf)
  double value = 0.0;  // mu0 + d^{-n} M
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
  bool infeasible = false;
};

struct ShellStat {
  int shell = 0;
  double min_value = 0.0;
};

struct PerDepthReport {
  double d = 0.0;
  std::vector<ShellStat> shell_min;
  double trend_slope = 0.0;
  double g_inv = 0.0;  // g(d)^{-1} when applicable
  bool verdict_growth = false;     // condition (b): increasing shell minima
  bool verdict_threshold = false;  // condition (c): outer minimum >= g(d)^{-1}
};

struct CriterionReport {
  std::string kind;
  std::vector<ScanRow> rows;
  std::vector<PerDepthReport> per_d;
  bool verdict = false;
  std::string notes;
};

namespace detail {

inline std::vector<std::array<int, 3>> tiling_indices(int dim, int shells) {
  std::vector<std::array<int, 3>> out;
  auto shell_of = [](int v) { return v >= 0 ? v : -1 - v; };
  const int lo = -shells - 1, hi = shells;
  for (int k = (dim == 3 ? lo : 0); k <= (dim == 3 ? hi : 0); ++k)
    for (int j = lo; j <= hi; ++j)
      for (int i = lo; i <= hi; ++i) {
        int s = std::max(shell_of(i), shell_of(j));
        if (dim == 3) s = std::max(s, shell_of(k));
        if (s <= shells) out.push_back({i, j, k});
      }
  return out;
}

inline int shell_index(const std::array<int, 3>& idx, int dim) {
  auto shell_of = [](int v) { return v >= 0 ? v : -1 - v; };
  int s = std::max(shell_of(idx[0]), shell_of(idx[1]));
  if (dim == 3) s = std::max(s, shell_of(idx[2]));
  return s;
}

inline Cube tiling_cube(const std::array<int, 3>& idx, double d, int dim) {
  Vec c{0.0, 0.0, 0.0};
  for (int j = 0; j < dim; ++j) c[j] = d * (idx[j] + 0.5);
  return Cube(c, d, dim);
}

// Least-squares slope of shell minima against the shell index over finite
// values; +inf entries count as vacuously increasing.
inline void finish_depth(PerDepthReport& rep, double trend_ratio) {
  std::vector<double> xs, ys;
  for (const auto& s : rep.shell_min) {
    if (std::isfinite(s.min_value)) {
      xs.push_back(s.shell);
      ys.push_back(s.min_value);
    }
  }
  if (xs.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    rep.trend_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  const double first = rep.shell_min.front().min_value;
  const double last = rep.shell_min.back().min_value;
  if (!std::isfinite(last)) {
    rep.verdict_growth = true;
  } else if (std::isfinite(first)) {
    rep.verdict_growth = rep.trend_slope > 0.0 && last >= trend_ratio * first && last > 0.0;
  }
  rep.verdict_threshold = last >= rep.g_inv * (1.0 - 1e-9);
}

}  // namespace detail

// Shared scan core. gamma_rule maps (mu0_tilde, d) to the capacity fraction;
// gamma == 0 short-circuits M to the plain integral of V.
inline CriterionReport run_tiling_scan(const std::string& kind, const OperatorData& op,
                                       const std::function<double(double, double)>& gamma_rule,
                                       const std::function<double(double)>& g_inv_of_d,
                                       const std::vector<double>& d_list, int shells,
                                       const ScanOptions& opts, CapacityCache* cache) {
  CriterionReport report;
  report.kind = kind;
  report.notes = "finite-shell proxy for Q_d -> infinity; verdicts are trend statistics";
  const int dim = op.n;
  const auto indices = detail::tiling_indices(dim, shells);
  const double INF = std::numeric_limits<double>::infinity();

  for (double d : d_list) {
    std::vector<ScanRow> rows(indices.size());
    parallel_for(
        indices.size(),
        [&](std::size_t w) {
          const auto& idx = indices[w];
          ScanRow row;
          row.d = d;
          row.idx = idx;
          row.shell = detail::shell_index(idx, dim);
          const Cube cube = detail::tiling_cube(idx, d, dim);
          row.center = cube.center;
          Grid g(cube, opts.m);
          auto a = op.a_on(g);
          auto mask = op.omega_on(g);
          EigenOptions eopts;
          eopts.tol = opts.eigen_tol;
          eopts.seed = opts.seed;
          const bool no_space = mask && mask->none_inside();
          if (no_space) {
            row.mu0 = INF;
            row.value = INF;
            row.infeasible = true;
            rows[w] = row;
            return;
          }
          auto le = local_energy(g, a, mask ? &*mask : nullptr, eopts);
          row.mu0 = le.mu0;
          row.mu0_tilde = le.mu0_tilde;
          row.gamma = gamma_rule(row.mu0_tilde, d);

          MolchanovQuery q;
          q.cube = cube;
          q.V = op.V_as_potential();
          q.gamma = row.gamma;
          q.m = opts.m;
          q.cap_opts = opts.cap;
          if (mask) {
            auto mand = mask->complement_cells();
            if (!mand.empty()) q.mandatory = std::move(mand);
          }
          if (row.gamma == 0.0) {
            // M_0: the plain integral; +inf for the domain variant when the
            // cube is not contained in Omega
            row.M = (q.mandatory) ? INF : integrate_cube(q.V, g);
            row.infeasible = q.mandatory.has_value();
          } else {
            auto res = molchanov_greedy(q, cache);
            row.M = res.value;
            row.infeasible = res.infeasible;
          }
          const double dn = std::pow(d, dim);
          row.value = std::isfinite(row.M) ? row.mu0 + row.M / dn : INF;

          if (opts.compute_lambda_mu) {
            auto V = op.V_as_potential();
            row.lambda = dirichlet_bottom(g, a, V, mask ? &*mask : nullptr, eopts).value;
            row.mu = neumann_bottom(g, a, V, mask ? &*mask : nullptr, eopts).value;
          }
          rows[w] = row;
        },
        opts.threads);

    PerDepthReport rep;
    rep.d = d;
    rep.g_inv = g_inv_of_d ? g_inv_of_d(d) : 0.0;
    for (int s = 0; s <= shells; ++s) rep.shell_min.push_back({s, INF});
    for (const auto& row : rows) {
      auto& slot = rep.shell_min[row.shell];
      slot.min_value = std::min(slot.min_value, row.value);
    }
    detail::finish_depth(rep, opts.trend_last_over_first);
    report.per_d.push_back(rep);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }

  report.verdict = !report.per_d.empty();
  for (const auto& rep : report.per_d) report.verdict = report.verdict && rep.verdict_growth;
  return report;
}

// Condition (b_{f,g}) / (c_{f,g}) of the discreteness theorem on a tiling.
inline CriterionReport scan_discreteness(const OperatorData& op, const AdmissiblePair& pair,
                                         double c_n, const std::vector<double>& d_list, int shells,
                                         const ScanOptions& opts, CapacityCache* cache) {
  auto validation = validate_pair(pair);
  if (!validation.admissible)
    throw std::invalid_argument("scan_discreteness: pair not admissible: " +
                                validation.first_violation);
  if (!(c_n > 0.0 && c_n < 1.0))
    throw std::invalid_argument("scan_discreteness: c_n must lie in (0,1)");
  auto gamma_rule = [&pair, c_n](double mu0t, double d) {
    return c_n * pair.f(mu0t) * d * d / pair.g(d);
  };
  auto g_inv = [&pair](double d) { return 1.0 / pair.g(d); };
  return run_tiling_scan("discreteness(b_fg,c_fg)", op, gamma_rule, g_inv, d_list, shells, opts,
                         cache);
}

// gamma == 0: the necessary condition with the plain integral of V.
inline CriterionReport check_necessary(const OperatorData& op, double d, int shells,
                                       const ScanOptions& opts, CapacityCache* cache) {
  auto gamma_rule = [](double, double) { return 0.0; };
  return run_tiling_scan("necessary(gamma=0)", op, gamma_rule, nullptr, {d}, shells, opts, cache);
}

// Fixed-c scan: the sufficient corollary / Molchanov shortcut (M_c).
inline CriterionReport check_sufficient(const OperatorData& op, double c,
                                        const std::vector<double>& d_list, int shells,
                                        const ScanOptions& opts, CapacityCache* cache) {
  if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("check_sufficient: need 0 <= c < 1");
  auto gamma_rule = [c](double, double) { return c; };
  return run_tiling_scan("sufficient(M_c)", op, gamma_rule, nullptr, d_list, shells, opts, cache);
}

// ---------------------------------------------------------------------------
// Positivity

struct PositivityParams {
  char variant = 'b';  // 'b', 'c', 'd' or 'e'
  double c = 0.05;     // capacity fraction for (b), (d)
  double d1 = 1.0;     // length scale of the bound for (b), (c)
  double d = 1.0;      // cube size for (b), (c)
  double d2 = 1.0;     // size floor for (d), (e)
  double c_tilde = 1.0;
  int samples = 12;
  double sample_radius = 4.0;
};

struct PositivitySample {
  Vec center;
  double d = 0.0;
  double mu0 = 0.0;
  double M = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool passed = false;
  double mu = std::numeric_limits<double>::quiet_NaN();  // localization cross-check
  bool mu_passed = false;
};

struct PositivityReport {
  PositivityParams params;
  std::vector<PositivitySample> rows;
  bool verdict = false;
  bool localization_agrees = false;
};

inline PositivityReport positivity_check(const OperatorData& op, const PositivityParams& params,
                                         const ConstantsLedger& ledger, const ScanOptions& opts,
                                         CapacityCache* cache) {
  PositivityReport report;
  report.params = params;
  const int dim = op.n;
  double c = params.c;
  double c_tilde = params.c_tilde;
  if (params.variant == 'c' || params.variant == 'e')
    c = ledger.get("gamma_cn_n" + std::to_string(dim));
  if (params.variant == 'e') c_tilde = ledger.get_or("pos_ctilde_n" + std::to_string(dim), 1.0);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> pos(-params.sample_radius, params.sample_radius);
  std::uniform_real_distribution<double> dsize(1.0, 3.0);

  std::vector<PositivitySample> rows(params.samples);
  for (int i = 0; i < params.samples; ++i) {
    PositivitySample s;
    for (int j = 0; j < dim; ++j) s.center[j] = pos(rng);
    s.d = (params.variant == 'd' || params.variant == 'e') ? params.d2 * dsize(rng) : params.d;
    rows[i] = s;
  }

  const double rel_tol = 1e-9;
  parallel_for(
      rows.size(),
      [&](std::size_t w) {
        auto& s = rows[w];
        Cube cube(s.center, s.d, dim);
        Grid g(cube, opts.m);
        auto a = op.a_on(g);
        EigenOptions eopts;
        eopts.tol = opts.eigen_tol;
        eopts.seed = opts.seed;
        s.mu0 = local_energy(g, a, nullptr, eopts).mu0;

        MolchanovQuery q;
        q.cube = cube;
        q.V = op.V_as_potential();
        q.gamma = c;
        q.m = opts.m;
        q.cap_opts = opts.cap;
        s.M = molchanov_greedy(q, cache).value;
        s.lhs = s.mu0 + s.M / std::pow(s.d, dim);
        s.rhs = (params.variant == 'b' || params.variant == 'c')
                    ? 1.0 / (params.d1 * params.d1)
                    : c_tilde / (s.d * s.d);
        s.passed = s.lhs >= s.rhs * (1.0 - rel_tol);

        auto V = op.V_as_potential();
        s.mu = neumann_bottom(g, a, V, nullptr, eopts).value;
        if (params.variant == 'b' || params.variant == 'c')
          s.mu_passed = s.mu >= (1.0 / (params.d1 * params.d1)) * (1.0 - rel_tol);
        else
          s.mu_passed = s.mu >= (c_tilde / (s.d * s.d)) * (1.0 - rel_tol);
      },
      opts.threads);

  report.rows = std::move(rows);
  report.verdict = true;
  report.localization_agrees = true;
  for (const auto& s : report.rows) {
    report.verdict = report.verdict && s.passed;
    report.localization_agrees = report.localization_agrees && (s.passed == s.mu_passed);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Domain geometry (a == 0, V == 0): capacity of the complement against gamma

struct DomainGeometrySample {
  double d = 0.0;
  std::array<int, 3> idx{0, 0, 0};
  int shell = 0;
  double cap_complement = 0.0;
  double gamma_cap_cube = 0.0;
  bool holds = false;  // cap(Q_d \ Omega) > gamma cap(Q_d)
};

struct DomainGeometryReport {
  std::vector<DomainGeometrySample> rows;
  std::vector<PerDepthReport> per_d;  // min over shells of the capacity ratio
  bool verdict = false;               // all distant cubes satisfy the condition
};

inline DomainGeometryReport domain_geometry_check(const std::function<bool(const Vec&)>& omega,
                                                  const std::function<double(double)>& g,
                                                  double c_n, const std::vector<double>& d_list,
                                                  int shells, int dim, const ScanOptions& opts,
                                                  CapacityCache* cache) {
  DomainGeometryReport report;
  const auto indices = detail::tiling_indices(dim, shells);
  for (double d : d_list) {
    const double gamma = c_n * d * d / g(d);
    std::vector<DomainGeometrySample> rows(indices.size());
    parallel_for(
        indices.size(),
        [&](std::size_t w) {
          DomainGeometrySample s;
          s.d = d;
          s.idx = indices[w];
          s.shell = detail::shell_index(indices[w], dim);
          const Cube cube = detail::tiling_cube(indices[w], d, dim);
          Grid gr(cube, opts.m);
          auto mask = DomainMask::from_predicate(gr, omega);
          auto complement = mask.complement_cells();
          s.cap_complement =
              complement.empty() ? 0.0 : wiener_capacity(complement, opts.cap, cache).value;
          s.gamma_cap_cube = gamma * cube_capacity(gr, opts.cap, cache);
          s.holds = s.cap_complement > s.gamma_cap_cube;
          rows[w] = s;
        },
        opts.threads);

    PerDepthReport rep;
    rep.d = d;
    for (int sh = 0; sh <= shells; ++sh) rep.shell_min.push_back({sh, 1.0});
    bool all_outer_hold = true;
    for (const auto& s : rows) {
      rep.shell_min[s.shell].min_value =
          std::min(rep.shell_min[s.shell].min_value, s.holds ? 1.0 : 0.0);
      if (s.shell >= 1 && !s.holds) all_outer_hold = false;
    }
    rep.verdict_growth = all_outer_hold;
    report.per_d.push_back(rep);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  report.verdict = !report.per_d.empty();
  for (const auto& rep : report.per_d) report.verdict = report.verdict && rep.verdict_growth;
  return report;
}

}  // namespace magspec
