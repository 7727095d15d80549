#pragma once

#include <cstdint>
#include <vector>

#include "lrbs/lattice.hpp"
#include "lrbs/model.hpp"
#include "lrbs/stochastic.hpp"

namespace lrbs {

/// Space-time window {-L..L}^d x {0..horizon} without wrap-around.
class PercolationGrid {
 public:
  PercolationGrid() = default;
  PercolationGrid(int dim, int half_width, int horizon);

  int dim() const { return dim_; }
  int half_width() const { return half_width_; }
  int horizon() const { return horizon_; }
  std::size_t sites() const { return sites_; }
  std::size_t cells() const { return sites_ * static_cast<std::size_t>(horizon_ + 1); }

  std::size_t site_index(const Offset& x) const;
  Offset site_coords(std::size_t s) const;
  bool in_window(const Offset& x) const;
  std::size_t cell(std::size_t site, int n) const { return static_cast<std::size_t>(n) * sites_ + site; }
  /// In-window sites y with |y - x|_inf <= 1, including x itself.
  const std::vector<std::size_t>& neighbours(std::size_t site) const { return neighbours_[site]; }

  bool operator==(const PercolationGrid& o) const {
    return dim_ == o.dim_ && half_width_ == o.half_width_ && horizon_ == o.horizon_;
  }

 private:
  int dim_ = 1;
  int half_width_ = 0;
  int horizon_ = 0;
  std::size_t sites_ = 1;
  std::vector<std::vector<std::size_t>> neighbours_;
};

/// One byte per cell, indexed by PercolationGrid::cell.
using CellSet = std::vector<std::uint8_t>;

struct PercolationField {
  PercolationGrid grid;
  double theta = 0.0;
  CellSet open;  // time-0 entries are sampled but never consulted

  bool is_open(std::size_t site, int n) const { return open[grid.cell(site, n)] != 0; }
};

/// Cell (x, n) is open iff U < theta with U the keyed uniform (seed, stream, n, site, 0).
/// Sharing (seed, stream) across theta values couples the fields monotonically.
PercolationField sample_percolation(double theta, int dim, int half_width, int horizon, std::uint64_t seed,
                                    std::uint64_t stream = 0);

/// C0: cells reachable from (0, 0) through open cells at times >= 1.
CellSet cluster_of_origin(const PercolationField& field);

struct WetDry {
  CellSet wet;
  std::vector<std::size_t> dry_cluster_sizes;  // sorted, largest first
};

/// Wet: reachable by an open path from some time-0 cell. Dry clusters are
/// connected components of dry cells under |dx|_inf <= 1, |dt| <= 1.
WetDry classify_wet_dry(const PercolationField& field);

/// Cells (y, n) with n >= from_time, |y|_inf <= cone_slope n, that end a
/// backward path y_n .. y_0 with (y_k, k) outside `cluster` for k = 1..n.
CellSet exposed_sites(const PercolationGrid& grid, const CellSet& cluster, double cone_slope, int from_time);

std::size_t count(const CellSet& cells);

/// Indicator of A(x, n) and B(x, n) for n = j n*, x over all lattice sites.
struct GoodBlockField {
  Lattice lattice;
  int n_star = 0;
  std::vector<CellSet> a_event;  // [j][site]
  std::vector<CellSet> b_event;
  std::vector<CellSet> good;

  std::size_t blocks() const { return good.size(); }
  double bad_fraction() const;
};

/// Evaluates the block events on a recorded run. N(m*) at a draw is the
/// realised value plus an independent Poisson(m* - F) increment on stream 3;
/// B is checked at the realised means F >= K. Throws std::invalid_argument
/// when the run has no draw record.
GoodBlockField extract_good_blocks(const RunRecord& run, const ModelParams& params, double eps2, double delta,
                                   double K, int n_star);

struct DominationReport {
  double density = 0.0;
  std::size_t samples = 0;
  std::vector<double> correlations;  // lag 1..max_lag along the first axis, same block row
  double p_target = 0.0;
  bool meets_target = false;
};

DominationReport domination_report(const GoodBlockField& field, double p_target, int max_lag);

}  // namespace lrbs
