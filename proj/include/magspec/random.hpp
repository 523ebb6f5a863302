#pragma once

// Seeded generators for discrete test data: truncated trigonometric series
// with bounded coefficients plus piecewise-linear tent mixtures, random link
// phases, nodal gauge functions and nonnegative cell-table potentials.

#include <random>

#include "magspec/core.hpp"
#include "magspec/fields.hpp"

namespace magspec {

class TestFunctionSampler {
 public:
  explicit TestFunctionSampler(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& rng() { return rng_; }

  // Smooth complex trig series on the cube, coefficients damped by the mode.
  GridFunction random_trig(const Grid& g, int max_mode = 3, int terms = 5) {
    std::uniform_int_distribution<int> mode(0, max_mode);
    std::uniform_int_distribution<int> kind(0, 1);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    struct Term {
      std::array<int, 3> k;
      std::array<int, 3> use_sin;
      cplx c;
    };
    std::vector<Term> ts(terms);
    for (auto& t : ts) {
      int ksq = 0;
      for (int j = 0; j < g.dim(); ++j) {
        t.k[j] = mode(rng_);
        t.use_sin[j] = t.k[j] > 0 ? kind(rng_) : 0;
        ksq += t.k[j] * t.k[j];
      }
      t.c = cplx(coeff(rng_), coeff(rng_)) / (1.0 + ksq);
    }
    GridFunction u(g);
    const std::size_t n = g.node_count();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec p = g.node_point(i);
      cplx v = 0.0;
      for (const auto& t : ts) {
        double prod = 1.0;
        for (int j = 0; j < g.dim(); ++j) {
          const double xi = (p[j] - g.cube.lo(j)) / g.cube.edge;
          const double arg = M_PI * t.k[j] * xi;
          prod *= t.use_sin[j] ? std::sin(arg) : std::cos(arg);
        }
        v += t.c * prod;
      }
      u.values[i] = v;
    }
    return u;
  }

  // Trig series plus a couple of kinked tents.
  GridFunction random_mixed(const Grid& g) {
    GridFunction u = random_trig(g);
    std::uniform_real_distribution<double> pos(0.1, 0.9);
    std::uniform_real_distribution<double> width(0.15, 0.4);
    std::uniform_real_distribution<double> amp(-0.8, 0.8);
    std::uniform_int_distribution<int> count(1, 2);
    const int bumps = count(rng_);
    for (int b = 0; b < bumps; ++b) {
      Vec p{0.0, 0.0, 0.0};
      for (int j = 0; j < g.dim(); ++j) p[j] = g.cube.lo(j) + pos(rng_) * g.cube.edge;
      const double w = width(rng_) * g.cube.edge;
      const cplx a(amp(rng_), amp(rng_));
      const std::size_t n = g.node_count();
      for (std::size_t i = 0; i < n; ++i) {
        const Vec x = g.node_point(i);
        double dist = 0.0;
        for (int j = 0; j < g.dim(); ++j) dist = std::max(dist, std::abs(x[j] - p[j]));
        u.values[i] += a * std::max(0.0, 1.0 - dist / w);
      }
    }
    return u;
  }

  // Real nodal gauge function, smooth trig series.
  std::vector<double> random_gauge(const Grid& g, double amplitude = 1.0) {
    GridFunction t = random_trig(g, 2, 4);
    std::vector<double> phi(g.node_count());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = amplitude * t.values[i].real();
    return phi;
  }

  // Uniform random link phases in [-amp, amp].
  MagneticPotential random_phases(const Grid& g, double amp = M_PI) {
    std::uniform_real_distribution<double> ph(-amp, amp);
    MagneticPotential a = MagneticPotential::zero(g);
    for (int ax = 0; ax < g.dim(); ++ax)
      for (auto& t : a.link_phase[ax]) t = ph(rng_);
    return a;
  }

  // Nonnegative per-cell potential table: squared trig values plus spikes.
  ScalarPotential random_potential(const Grid& g, double scale = 1.0, double spike_prob = 0.2) {
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_real_distribution<double> spike(2.0, 10.0);
    std::array<double, 3> k{}, ph{};
    for (int j = 0; j < g.dim(); ++j) {
      k[j] = 2.0 * coeff(rng_);
      ph[j] = M_PI * coeff(rng_);
    }
    const bool with_spike = uni(rng_) < spike_prob;
    std::uniform_int_distribution<std::size_t> cell(0, g.cell_count() - 1);
    const std::size_t spike_cell = cell(rng_);
    const double spike_amp = spike(rng_);
    std::vector<double> vals(g.cell_count());
    for (std::size_t c = 0; c < vals.size(); ++c) {
      const Vec p = g.cell_midpoint(c);
      double s = 0.0;
      for (int j = 0; j < g.dim(); ++j) s += std::sin(M_PI * k[j] * p[j] / g.cube.edge + ph[j]);
      vals[c] = scale * s * s;
      if (with_spike && c == spike_cell) vals[c] += scale * spike_amp;
    }
    return ScalarPotential::cell_table(g, vals);
  }

  // A random union of cell blobs, at most max_frac of the cube.
  CompactSetMask random_blob_mask(const Grid& g, double max_frac = 0.2, int blobs = 2) {
    CompactSetMask f(g);
    std::uniform_int_distribution<int> c(0, g.cells_per_edge() - 1);
    std::uniform_int_distribution<int> rad(0, std::max(1, g.cells_per_edge() / 5));
    const std::size_t budget = std::max<std::size_t>(1, static_cast<std::size_t>(max_frac * g.cell_count()));
    for (int b = 0; b < blobs; ++b) {
      std::array<int, 3> p{c(rng_), c(rng_), g.dim() == 3 ? c(rng_) : 0};
      const int r = rad(rng_);
      for (std::size_t cc = 0; cc < g.cell_count(); ++cc) {
        auto q = g.cell_coords(cc);
        int dist = 0;
        for (int j = 0; j < g.dim(); ++j) dist = std::max(dist, std::abs(q[j] - p[j]));
        if (dist <= r) f.cells[cc] = 1;
      }
      if (f.count() >= budget) break;
    }
    if (f.empty()) f.cells[0] = 1;
    return f;
  }

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng_);
  }
  int uniform_int(int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(rng_);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace magspec
