#include "lrbs/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lrbs {

namespace {

void check_offset_dim(const Offset& o, int dim, const char* what) {
  for (int i = dim; i < kMaxDim; ++i)
    if (o[i] != 0) throw KernelError(std::string(what) + ": offset has coordinates beyond the kernel dimension");
}

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) throw KernelError("kernel dimension must be between 1 and 3");
}

// Dense array over the sup-norm box of a given radius, used for convolutions.
class DenseBox {
 public:
  DenseBox(int dim, int radius) : dim_(dim), radius_(radius), side_(2 * radius + 1) {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(side_);
    cells_.assign(n, 0.0);
  }

  int radius() const { return radius_; }
  std::size_t size() const { return cells_.size(); }

  std::size_t index(const Offset& o) const {
    std::size_t idx = 0;
    for (int i = 0; i < dim_; ++i) idx = idx * static_cast<std::size_t>(side_) + static_cast<std::size_t>(o[i] + radius_);
    return idx;
  }
  Offset offset(std::size_t idx) const {
    Offset o{};
    for (int i = dim_ - 1; i >= 0; --i) {
      o[i] = static_cast<int>(idx % static_cast<std::size_t>(side_)) - radius_;
      idx /= static_cast<std::size_t>(side_);
    }
    return o;
  }
  bool contains(const Offset& o) const { return sup_norm(o) <= radius_; }

  double& operator[](std::size_t i) { return cells_[i]; }
  double operator[](std::size_t i) const { return cells_[i]; }
  double at(const Offset& o) const { return contains(o) ? cells_[index(o)] : 0.0; }

 private:
  int dim_;
  int radius_;
  int side_;
  std::vector<double> cells_;
};

// One convolution step, keeping only cells within `new_radius`.
DenseBox convolve(const DenseBox& cur, const DispersalKernel& p, int new_radius) {
  DenseBox next(p.dim(), new_radius);
  for (std::size_t i = 0; i < cur.size(); ++i) {
    double v = cur[i];
    if (v == 0.0) continue;
    Offset o = cur.offset(i);
    for (const auto& e : p.entries()) {
      Offset t = o + e.offset;
      if (next.contains(t)) next[next.index(t)] += v * e.weight;
    }
  }
  return next;
}

std::vector<Offset> unit_ball(int dim) {
  std::vector<Offset> out;
  Offset c{};
  for (int i = 0; i < dim; ++i) c[i] = -1;
  while (true) {
    out.push_back(c);
    int axis = dim - 1;
    while (axis >= 0 && c[axis] == 1) {
      c[axis] = -1;
      --axis;
    }
    if (axis < 0) break;
    ++c[axis];
  }
  return out;
}

}  // namespace

double DispersalKernel::weight(const Offset& o) const {
  for (const auto& e : entries_)
    if (e.offset == o) return e.weight;
  return 0.0;
}

std::vector<Offset> DispersalKernel::offsets() const {
  std::vector<Offset> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.offset);
  return out;
}

double CompetitionKernel::gamma_at(const Offset& o) const {
  for (const auto& e : gamma_)
    if (e.offset == o) return e.weight;
  return 0.0;
}

std::vector<KernelEntry> CompetitionKernel::raw() const {
  std::vector<KernelEntry> out;
  out.push_back({Offset{}, lambda0_});
  for (const auto& e : gamma_) out.push_back({e.offset, kappa_ * e.weight});
  return out;
}

DispersalKernel make_dispersal_kernel(int dim, const KernelWeights& weights) {
  check_dim(dim);
  if (weights.empty()) throw KernelError("(A1) dispersal kernel needs at least one weight");
  KernelMap merged;
  for (const auto& [o, w] : weights) {
    check_offset_dim(o, dim, "(A1) dispersal kernel");
    if (!(w >= 0.0)) throw KernelError("(A1) dispersal kernel has a negative weight at offset " + to_string(o, dim));
    merged[o] += w;
  }
  double sum = 0.0;
  for (const auto& [o, w] : merged) sum += w;
  if (std::abs(sum - 1.0) > 1e-9)
    throw KernelError("(A1) dispersal kernel weights sum to " + std::to_string(sum) + ", not 1");

  DispersalKernel p;
  p.dim_ = dim;
  int radius = 0;
  for (const auto& [o, w] : merged) {
    if (w == 0.0) continue;
    p.entries_.push_back({o, w / sum});
    radius = std::max(radius, sup_norm(o));
  }
  p.range_ = std::max(1, radius);

  for (int i = 0; i < dim; ++i) {
    double mean = 0.0;
    for (const auto& e : p.entries_) mean += e.weight * e.offset[i];
    if (std::abs(mean) > 1e-12)
      throw KernelError("(A1) dispersal kernel must have zero mean; coordinate " + std::to_string(i) + " has mean " +
                        std::to_string(mean));
  }

  int horizon = 2 * p.range_ * dim + 16;
  int g = return_time_gcd(p, horizon);
  if (g != 1)
    throw KernelError("(A1) dispersal kernel is periodic: gcd of return times is " + std::to_string(g));
  return p;
}

CompetitionKernel make_competition_kernel(int dim, const KernelWeights& raw) {
  check_dim(dim);
  KernelMap merged;
  for (const auto& [o, w] : raw) {
    check_offset_dim(o, dim, "(A2) competition kernel");
    if (!(w >= 0.0)) throw KernelError("(A2) competition kernel has a negative entry at offset " + to_string(o, dim));
    merged[o] += w;
  }
  CompetitionKernel k;
  k.dim_ = dim;
  auto it = merged.find(Offset{});
  k.lambda0_ = it == merged.end() ? 0.0 : it->second;
  if (!(k.lambda0_ > 0.0)) throw KernelError("(A2) competition kernel needs lambda_00 > 0");

  int radius = 0;
  double kappa = 0.0;
  for (const auto& [o, w] : merged) {
    if (o == Offset{} || w == 0.0) continue;
    kappa += w;
    radius = std::max(radius, sup_norm(o));
  }
  k.kappa_ = kappa;
  k.range_ = std::max(1, radius);
  if (kappa > 0.0) {
    for (const auto& [o, w] : merged) {
      if (o == Offset{} || w == 0.0) continue;
      k.gamma_.push_back({o, w / kappa});
    }
  }
  return k;
}

DispersalKernel lazy_walk(int dim, double hold) {
  KernelWeights w;
  w.push_back({Offset{}, hold});
  double step = (1.0 - hold) / (2.0 * dim);
  for (int i = 0; i < dim; ++i) {
    Offset plus{}, minus{};
    plus[i] = 1;
    minus[i] = -1;
    w.push_back({minus, step});
    w.push_back({plus, step});
  }
  return make_dispersal_kernel(dim, w);
}

DispersalKernel uniform_box_walk(int dim, int r) {
  std::vector<Offset> offsets;
  DenseBox box(dim, r);
  for (std::size_t i = 0; i < box.size(); ++i) offsets.push_back(box.offset(i));
  KernelWeights w;
  for (const auto& o : offsets) w.push_back({o, 1.0 / static_cast<double>(offsets.size())});
  return make_dispersal_kernel(dim, w);
}

CompetitionKernel nearest_neighbour_competition(int dim, double lambda0, double kappa) {
  KernelWeights w;
  w.push_back({Offset{}, lambda0});
  if (kappa > 0.0) {
    for (int i = 0; i < dim; ++i) {
      Offset plus{}, minus{};
      plus[i] = 1;
      minus[i] = -1;
      w.push_back({minus, kappa / (2.0 * dim)});
      w.push_back({plus, kappa / (2.0 * dim)});
    }
  }
  return make_competition_kernel(dim, w);
}

KernelMap kernel_power(const DispersalKernel& p, int n) {
  if (n < 0) throw std::invalid_argument("kernel_power: n must be nonnegative");
  DenseBox cur(p.dim(), 0);
  cur[0] = 1.0;
  for (int j = 1; j <= n; ++j) cur = convolve(cur, p, j * p.range());
  KernelMap out;
  for (std::size_t i = 0; i < cur.size(); ++i)
    if (cur[i] > 0.0) out[cur.offset(i)] = cur[i];
  return out;
}

int return_time_gcd(const DispersalKernel& p, int horizon) {
  int radius = horizon * p.range();
  DenseBox reach(p.dim(), 0);
  reach[0] = 1.0;
  int g = 0;
  for (int n = 1; n <= horizon; ++n) {
    DenseBox next(p.dim(), std::min(radius, n * p.range()));
    for (std::size_t i = 0; i < reach.size(); ++i) {
      if (reach[i] == 0.0) continue;
      Offset o = reach.offset(i);
      for (const auto& e : p.entries()) next[next.index(o + e.offset)] = 1.0;
    }
    reach = std::move(next);
    if (reach.at(Offset{}) != 0.0) g = std::gcd(g, n);
    if (g == 1) break;
  }
  return g;
}

int colonization_horizon(const DispersalKernel& p, double m_tilde, int cap) {
  if (!(m_tilde > 1.0)) throw std::invalid_argument("colonization_horizon: m_tilde must exceed 1");
  const auto targets = unit_ball(p.dim());
  const double log_m = std::log(m_tilde);
  DenseBox cur(p.dim(), 0);
  cur[0] = 1.0;
  for (int j = 1; j <= cap; ++j) {
    // Mass further out than the Hoeffding radius for 1e-40 tail weight never
    // influences the near-origin entries at the precision we compare.
    int exact = j * p.range();
    int tail = static_cast<int>(std::ceil(p.range() * std::sqrt(2.0 * j * 92.1))) + 1;
    cur = convolve(cur, p, std::min(exact, tail));
    const double growth = std::pow(m_tilde, j);
    bool all = true;
    for (const auto& x : targets) {
      double pj = cur.at(x);
      bool ok = std::isfinite(growth) ? pj * growth >= 1.0 : (pj > 0.0 && std::log(pj) + j * log_m >= 0.0);
      if (!ok) {
        all = false;
        break;
      }
    }
    if (all) return j;
  }
  throw HorizonCapExceeded("colonization horizon exceeds the iteration cap of " + std::to_string(cap) +
                           " steps; m_tilde is too close to 1");
}

double default_m_tilde(double m) {
  if (!(m > 1.0)) throw std::invalid_argument("default_m_tilde: m must exceed 1");
  double mt = 0.5 * (1.0 + m);
  return std::clamp(mt, std::nextafter(1.0, 2.0), std::nextafter(m, 1.0));
}

}  // namespace lrbs
