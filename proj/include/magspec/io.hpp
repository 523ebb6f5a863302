#pragma once

// Persistence: grid fields as a flat binary array with a self-describing
// header, CSV debug export, the run-length-encoded text format for cell
// masks, and run manifests.

#include <fstream>
#include <iomanip>
#include <sstream>

#include "magspec/core.hpp"

namespace magspec {

// --- binary grid fields (little-endian doubles, "MSGF" header) --------------

inline void save_field(const GridFunction& u, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_field: cannot open " + path);
  const char magic[4] = {'M', 'S', 'G', 'F'};
  out.write(magic, 4);
  auto w32 = [&out](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto wf64 = [&out](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  w32(1u);  // version
  w32(static_cast<std::uint32_t>(u.grid.dim()));
  w32(static_cast<std::uint32_t>(u.grid.m));
  bool real_only = true;
  for (const auto& v : u.values)
    if (v.imag() != 0.0) {
      real_only = false;
      break;
    }
  w32(real_only ? 0u : 1u);  // value kind
  for (int j = 0; j < 3; ++j) wf64(u.grid.cube.center[j]);
  wf64(u.grid.cube.edge);
  for (const auto& v : u.values) {
    wf64(v.real());
    if (!real_only) wf64(v.imag());
  }
  if (!out) throw std::runtime_error("save_field: write failed for " + path);
}

inline GridFunction load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_field: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "MSGF")
    throw std::runtime_error("load_field: bad magic in " + path);
  auto r32 = [&in]() {
    std::uint32_t v;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto rf64 = [&in]() {
    double v;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  const std::uint32_t version = r32();
  if (version != 1) throw std::runtime_error("load_field: unsupported version");
  const int dim = static_cast<int>(r32());
  const int m = static_cast<int>(r32());
  const bool complex_kind = r32() == 1;
  Vec center;
  for (int j = 0; j < 3; ++j) center[j] = rf64();
  const double edge = rf64();
  Grid g(Cube(center, edge, dim), m);
  GridFunction u(g);
  for (auto& v : u.values) {
    const double re = rf64();
    const double im = complex_kind ? rf64() : 0.0;
    v = cplx(re, im);
  }
  if (!in) throw std::runtime_error("load_field: truncated file " + path);
  return u;
}

inline void export_field_csv(const GridFunction& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_field_csv: cannot open " + path);
  out << "x,y,z,re,im\n";
  out << std::setprecision(17);
  const std::size_t n = u.grid.node_count();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec p = u.grid.node_point(i);
    out << p[0] << ',' << p[1] << ',' << p[2] << ',' << u.values[i].real() << ','
        << u.values[i].imag() << '\n';
  }
}

// --- run-length-encoded cell masks ------------------------------------------

inline std::string mask_to_rle(const CompactSetMask& f) {
  std::ostringstream out;
  out << "magspec-mask v1\n";
  out << std::setprecision(17);
  out << "dim " << f.grid.dim() << "\nm " << f.grid.m << "\nedge " << f.grid.cube.edge
      << "\ncenter " << f.grid.cube.center[0] << ' ' << f.grid.cube.center[1] << ' '
      << f.grid.cube.center[2] << "\nruns";
  std::size_t i = 0;
  while (i < f.cells.size()) {
    if (!f.cells[i]) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < f.cells.size() && f.cells[i]) ++i;
    out << ' ' << start << ':' << (i - start);
  }
  out << '\n';
  return out.str();
}

inline CompactSetMask mask_from_rle(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "magspec-mask v1")
    throw std::runtime_error("mask_from_rle: bad header");
  int dim = 0, m = 0;
  double edge = 0.0;
  Vec center{0, 0, 0};
  std::string key;
  in >> key >> dim;
  in >> key >> m;
  in >> key >> edge;
  in >> key >> center[0] >> center[1] >> center[2];
  in >> key;
  if (key != "runs") throw std::runtime_error("mask_from_rle: missing runs");
  CompactSetMask f(Grid(Cube(center, edge, dim), m));
  std::string run;
  while (in >> run) {
    const auto colon = run.find(':');
    if (colon == std::string::npos) throw std::runtime_error("mask_from_rle: bad run " + run);
    const std::size_t start = std::stoull(run.substr(0, colon));
    const std::size_t len = std::stoull(run.substr(colon + 1));
    if (start + len > f.cells.size()) throw std::runtime_error("mask_from_rle: run out of range");
    for (std::size_t i = start; i < start + len; ++i) f.cells[i] = 1;
  }
  return f;
}

// --- hashing and run records -------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

}  // namespace magspec
