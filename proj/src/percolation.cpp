#include "lrbs/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lrbs {

PercolationGrid::PercolationGrid(int dim, int half_width, int horizon)
    : dim_(dim), half_width_(half_width), horizon_(horizon) {
  if (dim < 1 || dim > kMaxDim) throw GeometryError("percolation dimension must be 1.." + std::to_string(kMaxDim));
  if (half_width < 0 || horizon < 0) throw GeometryError("half width and horizon must be >= 0");
  sites_ = 1;
  for (int i = 0; i < dim; ++i) sites_ *= static_cast<std::size_t>(2 * half_width + 1);
  neighbours_.resize(sites_);
  for (std::size_t s = 0; s < sites_; ++s) {
    const Offset x = site_coords(s);
    Offset d{};
    for (int i = 0; i < dim; ++i) d[i] = -1;
    while (true) {
      const Offset y = x + d;
      if (in_window(y)) neighbours_[s].push_back(site_index(y));
      int axis = dim - 1;
      while (axis >= 0 && d[axis] == 1) {
        d[axis] = -1;
        --axis;
      }
      if (axis < 0) break;
      ++d[axis];
    }
  }
}

bool PercolationGrid::in_window(const Offset& x) const {
  for (int i = 0; i < dim_; ++i)
    if (std::abs(x[i]) > half_width_) return false;
  return true;
}

std::size_t PercolationGrid::site_index(const Offset& x) const {
  if (!in_window(x)) throw GeometryError("site outside the percolation window");
  const std::size_t w = static_cast<std::size_t>(2 * half_width_ + 1);
  std::size_t s = 0;
  for (int i = 0; i < dim_; ++i) s = s * w + static_cast<std::size_t>(x[i] + half_width_);
  return s;
}

Offset PercolationGrid::site_coords(std::size_t s) const {
  const std::size_t w = static_cast<std::size_t>(2 * half_width_ + 1);
  Offset x{};
  for (int i = dim_ - 1; i >= 0; --i) {
    x[i] = static_cast<int>(s % w) - half_width_;
    s /= w;
  }
  return x;
}

PercolationField sample_percolation(double theta, int dim, int half_width, int horizon, std::uint64_t seed,
                                    std::uint64_t stream) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
  PercolationField f{PercolationGrid(dim, half_width, horizon), theta, {}};
  f.open.assign(f.grid.cells(), 0);
  for (int n = 0; n <= horizon; ++n)
    for (std::size_t s = 0; s < f.grid.sites(); ++s)
      f.open[f.grid.cell(s, n)] = keyed_uniform({seed, stream, static_cast<std::uint64_t>(n), s, 0}) < theta;
  return f;
}

namespace {

// Cells at time n >= 1 that are open and have a marked neighbour at time n - 1.
void propagate(const PercolationField& field, CellSet& mark) {
  const auto& g = field.grid;
  for (int n = 1; n <= g.horizon(); ++n)
    for (std::size_t s = 0; s < g.sites(); ++s) {
      if (!field.is_open(s, n)) continue;
      for (std::size_t y : g.neighbours(s))
        if (mark[g.cell(y, n - 1)]) {
          mark[g.cell(s, n)] = 1;
          break;
        }
    }
}

struct UnionFind {
  std::vector<std::size_t> parent, size;
  explicit UnionFind(std::size_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  }
};

}  // namespace

CellSet cluster_of_origin(const PercolationField& field) {
  CellSet c(field.grid.cells(), 0);
  c[field.grid.cell(field.grid.site_index(Offset{}), 0)] = 1;
  propagate(field, c);
  return c;
}

WetDry classify_wet_dry(const PercolationField& field) {
  const auto& g = field.grid;
  WetDry out;
  out.wet.assign(g.cells(), 0);
  for (std::size_t s = 0; s < g.sites(); ++s) out.wet[g.cell(s, 0)] = 1;
  propagate(field, out.wet);

  UnionFind uf(g.cells());
  for (int n = 0; n <= g.horizon(); ++n)
    for (std::size_t s = 0; s < g.sites(); ++s) {
      const std::size_t c = g.cell(s, n);
      if (out.wet[c]) continue;
      for (std::size_t y : g.neighbours(s)) {
        if (y != s && !out.wet[g.cell(y, n)]) uf.unite(c, g.cell(y, n));
        if (n > 0 && !out.wet[g.cell(y, n - 1)]) uf.unite(c, g.cell(y, n - 1));
      }
    }
  for (std::size_t c = 0; c < g.cells(); ++c)
    if (!out.wet[c] && uf.find(c) == c) out.dry_cluster_sizes.push_back(uf.size[c]);
  std::sort(out.dry_cluster_sizes.rbegin(), out.dry_cluster_sizes.rend());
  return out;
}

CellSet exposed_sites(const PercolationGrid& g, const CellSet& cluster, double cone_slope, int from_time) {
  if (cluster.size() != g.cells()) throw GeometryError("cluster does not match the grid");
  // reach[n][y]: some backward path from (y, n) avoids the cluster at times 1..n.
  CellSet reach(g.cells(), 0), out(g.cells(), 0);
  for (std::size_t s = 0; s < g.sites(); ++s) reach[g.cell(s, 0)] = 1;
  for (int n = 1; n <= g.horizon(); ++n)
    for (std::size_t s = 0; s < g.sites(); ++s) {
      if (cluster[g.cell(s, n)]) continue;
      for (std::size_t y : g.neighbours(s))
        if (reach[g.cell(y, n - 1)]) {
          reach[g.cell(s, n)] = 1;
          break;
        }
    }
  for (int n = std::max(from_time, 1); n <= g.horizon(); ++n)
    for (std::size_t s = 0; s < g.sites(); ++s)
      if (reach[g.cell(s, n)] && sup_norm(g.site_coords(s)) <= cone_slope * n) out[g.cell(s, n)] = 1;
  return out;
}

std::size_t count(const CellSet& cells) {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](std::uint8_t v) { return v != 0; }));
}

double GoodBlockField::bad_fraction() const {
  std::size_t total = 0, bad = 0;
  for (const auto& row : good) {
    total += row.size();
    bad += row.size() - count(row);
  }
  return total == 0 ? 0.0 : static_cast<double>(bad) / static_cast<double>(total);
}

GoodBlockField extract_good_blocks(const RunRecord& run, const ModelParams& params, double eps2, double delta,
                                   double K, int n_star) {
  if (!run.draws) throw std::invalid_argument("run has no draw record");
  if (n_star < 1) throw std::invalid_argument("n* must be >= 1");
  const auto& draws = *run.draws;
  const auto c = derived_constants(params);
  const double cap = (1.0 - eps2) * c.M;
  const RngKeyStream extension(draws.seed, kStreamExtension);
  const std::size_t steps = draws.means.size(), sites = params.lattice.size();

  std::vector<CellSet> a_ok(steps, CellSet(sites, 1)), b_ok(steps, CellSet(sites, 1));
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t y = 0; y < sites; ++y) {
      const double F = draws.means[t][y];
      const auto v = draws.values[t][y];
      const double extra = std::max(0.0, c.m_star - F);
      const Count at_m_star = v + extension.poisson(extra, t, y);
      a_ok[t][y] = static_cast<double>(at_m_star) <= cap;
      if (F >= K) b_ok[t][y] = std::abs(static_cast<double>(v) / F - 1.0) <= delta;
    }

  GoodBlockField out{params.lattice, n_star, {}, {}, {}};
  const auto box = spacetime_box_X(params, n_star);
  for (std::size_t j = 0; (j + 1) * static_cast<std::size_t>(n_star) <= steps; ++j) {
    CellSet A(sites, 1), B(sites, 1), G(sites, 0);
    for (std::size_t x = 0; x < sites; ++x) {
      for (const auto& pt : box.points()) {
        auto y = params.lattice.shifted(x, pt.site);
        if (!y) continue;
        const std::size_t t = j * static_cast<std::size_t>(n_star) + static_cast<std::size_t>(pt.time);
        if (!a_ok[t][*y]) A[x] = 0;
        if (!b_ok[t][*y]) B[x] = 0;
      }
      G[x] = A[x] && B[x];
    }
    out.a_event.push_back(std::move(A));
    out.b_event.push_back(std::move(B));
    out.good.push_back(std::move(G));
  }
  return out;
}

DominationReport domination_report(const GoodBlockField& field, double p_target, int max_lag) {
  DominationReport r;
  r.p_target = p_target;
  std::size_t ones = 0;
  for (const auto& row : field.good) {
    r.samples += row.size();
    ones += count(row);
  }
  r.density = r.samples == 0 ? 0.0 : static_cast<double>(ones) / static_cast<double>(r.samples);
  r.meets_target = r.density >= p_target;
  Offset step{};
  const auto& lat = field.lattice;
  for (int lag = 1; lag <= max_lag; ++lag) {
    step[0] = lag;
    double n = 0, sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (const auto& row : field.good)
      for (std::size_t x = 0; x < row.size(); ++x) {
        auto y = lat.shifted(x, step);
        if (!y) continue;
        const double a = row[x], b = row[*y];
        n += 1;
        sa += a;
        sb += b;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
      }
    double corr = 0.0;
    if (n > 1) {
      const double cov = sab / n - (sa / n) * (sb / n);
      const double va = saa / n - (sa / n) * (sa / n), vb = sbb / n - (sb / n) * (sb / n);
      if (va > 0 && vb > 0) corr = cov / std::sqrt(va * vb);
    }
    r.correlations.push_back(corr);
  }
  return r;
}

}  // namespace lrbs
