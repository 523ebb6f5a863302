#pragma once

// The Molchanov functional M_gamma(Q_d; V): the smallest integral of V over
// the cube after removing a compact cell-union F with cap(F) <= gamma cap(Q_d).
// A greedy absorber provides upper bounds; exhaustive enumeration on small
// grids is the exact oracle. Both use one capacity convention and one
// resolution for F and Q_d so the discretization bias cancels in the budget
// ratio.

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>

#include "magspec/capacity.hpp"
#include "magspec/fields.hpp"
#include "magspec/forms.hpp"

namespace magspec {

struct MolchanovQuery {
  Cube cube;
  ScalarPotential V;
  double gamma = 0.0;
  int m = 5;  // grid resolution (m-1 cells per edge)
  std::optional<CompactSetMask> mandatory;  // the section-7 constraint F >= Q_d \ Omega
  CapacityOptions cap_opts{};
};

struct MolchanovResult {
  double value = 0.0;  // +infinity when the mandatory set breaks the budget
  CompactSetMask witness;
  double cap_used = 0.0;
  double cap_budget = 0.0;
  enum class Method { greedy, brute } method = Method::greedy;
  bool infeasible = false;
};

namespace detail {

struct MolchanovSetup {
  Grid grid;
  std::vector<double> cell_integral;
  double total_integral = 0.0;
  double cap_cube = 0.0;
  double budget = 0.0;
};

inline MolchanovSetup molchanov_setup(const MolchanovQuery& q, CapacityCache* cache) {
  if (!(q.gamma >= 0.0 && q.gamma < 1.0))
    throw std::invalid_argument("molchanov: gamma must lie in [0, 1)");
  MolchanovSetup s;
  s.grid = Grid(q.cube, q.m);
  const std::size_t nc = s.grid.cell_count();
  s.cell_integral.resize(nc);
  const double vol = s.grid.cell_volume();
  for (std::size_t c = 0; c < nc; ++c) {
    s.cell_integral[c] = vol * q.V.cell_value(s.grid, c);
    s.total_integral += s.cell_integral[c];
  }
  s.cap_cube = cube_capacity(s.grid, q.cap_opts, cache);
  s.budget = q.gamma * s.cap_cube;
  if (q.mandatory && !q.mandatory->grid.same_layout(s.grid))
    throw std::invalid_argument("molchanov: mandatory mask resolution mismatch");
  return s;
}

inline double value_outside(const MolchanovSetup& s, const CompactSetMask& F) {
  double v = 0.0;
  for (std::size_t c = 0; c < F.cells.size(); ++c)
    if (!F.cells[c]) v += s.cell_integral[c];
  return v;
}

}  // namespace detail

// Greedy upper bound: absorb cells in decreasing order of their V-integral,
// re-checking the capacity budget per batch with one backtracking pass that
// retries the offending batch cell by cell. Deterministic; ties break on the
// cell index.
inline MolchanovResult molchanov_greedy(const MolchanovQuery& q, CapacityCache* cache = nullptr) {
  auto s = detail::molchanov_setup(q, cache);
  MolchanovResult res;
  res.method = MolchanovResult::Method::greedy;
  res.cap_budget = s.budget;
  res.witness = q.mandatory ? *q.mandatory : CompactSetMask(s.grid);

  if (!res.witness.empty()) {
    res.cap_used = wiener_capacity(res.witness, q.cap_opts, cache).value;
    if (res.cap_used > s.budget) {
      res.infeasible = true;
      res.value = std::numeric_limits<double>::infinity();
      return res;
    }
  }

  const std::size_t nc = s.grid.cell_count();
  std::vector<std::size_t> order;
  order.reserve(nc);
  for (std::size_t c = 0; c < nc; ++c)
    if (!res.witness.cells[c] && s.cell_integral[c] > 0.0) order.push_back(c);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (s.cell_integral[a] != s.cell_integral[b]) return s.cell_integral[a] > s.cell_integral[b];
    return a < b;
  });

  const std::size_t batch = std::max<std::size_t>(1, nc / 64);
  CompactSetMask current = res.witness;
  double cap_current = res.cap_used;
  std::size_t pos = 0;
  bool over = false;
  while (pos < order.size() && !over) {
    const std::size_t take = std::min(batch, order.size() - pos);
    CompactSetMask trial = current;
    for (std::size_t t = 0; t < take; ++t) trial.cells[order[pos + t]] = 1;
    const double cap_trial = wiener_capacity(trial, q.cap_opts, cache).value;
    if (cap_trial <= s.budget) {
      current = std::move(trial);
      cap_current = cap_trial;
      pos += take;
      continue;
    }
    // backtracking pass: drop the batch, retry its cells one at a time
    for (std::size_t t = 0; t < take; ++t) {
      CompactSetMask single = current;
      single.cells[order[pos + t]] = 1;
      const double cap_single = wiener_capacity(single, q.cap_opts, cache).value;
      if (cap_single <= s.budget) {
        current = std::move(single);
        cap_current = cap_single;
      } else {
        over = true;
        break;
      }
    }
    pos += take;
  }

  res.witness = std::move(current);
  res.cap_used = cap_current;
  res.value = detail::value_outside(s, res.witness);
  return res;
}

// Exact discrete infimum over all cell unions within the budget; refuses grids
// with more than max_cells cells.
inline MolchanovResult molchanov_brute(const MolchanovQuery& q, int max_cells = 16,
                                       CapacityCache* cache = nullptr) {
  auto s = detail::molchanov_setup(q, cache);
  const std::size_t nc = s.grid.cell_count();
  if (nc > static_cast<std::size_t>(max_cells))
    throw std::invalid_argument("molchanov_brute: too many cells for enumeration");

  MolchanovResult res;
  res.method = MolchanovResult::Method::brute;
  res.cap_budget = s.budget;

  std::uint64_t mandatory_bits = 0;
  if (q.mandatory)
    for (std::size_t c = 0; c < nc; ++c)
      if (q.mandatory->cells[c]) mandatory_bits |= (1ull << c);

  if (mandatory_bits) {
    CompactSetMask mand(s.grid);
    for (std::size_t c = 0; c < nc; ++c) mand.cells[c] = (mandatory_bits >> c) & 1;
    const double cap_mand = wiener_capacity(mand, q.cap_opts, cache).value;
    if (cap_mand > s.budget) {
      res.witness = std::move(mand);
      res.cap_used = cap_mand;
      res.infeasible = true;
      res.value = std::numeric_limits<double>::infinity();
      return res;
    }
  }

  double best = std::numeric_limits<double>::infinity();
  std::uint64_t best_bits = 0;
  double best_cap = 0.0;
  const std::uint64_t subsets = 1ull << nc;
  CompactSetMask mask(s.grid);
  for (std::uint64_t bits = 0; bits < subsets; ++bits) {
    if ((bits & mandatory_bits) != mandatory_bits) continue;
    double outside = 0.0;
    for (std::size_t c = 0; c < nc; ++c)
      if (!((bits >> c) & 1)) outside += s.cell_integral[c];
    if (outside >= best) continue;  // capacity check cannot help
    for (std::size_t c = 0; c < nc; ++c) mask.cells[c] = (bits >> c) & 1;
    const double cap = bits == 0 ? 0.0 : wiener_capacity(mask, q.cap_opts, cache).value;
    if (cap <= s.budget) {
      best = outside;
      best_bits = bits;
      best_cap = cap;
    }
  }

  res.witness = CompactSetMask(s.grid);
  for (std::size_t c = 0; c < nc; ++c) res.witness.cells[c] = (best_bits >> c) & 1;
  res.cap_used = best_cap;
  res.value = best;
  return res;
}

// cap(F) <= gamma cap(Q_d) at matched resolution.
inline bool negligibility_test(const CompactSetMask& F, double gamma,
                               const CapacityOptions& opts = {}, CapacityCache* cache = nullptr) {
  if (gamma < 0.0) throw std::invalid_argument("negligibility_test: gamma must be >= 0");
  if (F.empty()) return true;
  const double cap_f = wiener_capacity(F, opts, cache).value;
  const double cap_q = cube_capacity(F.grid, opts, cache);
  return cap_f <= gamma * cap_q;
}

}  // namespace magspec
