#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lrbs/lattice.hpp"

namespace lrbs {

/// Raised when a kernel violates the dispersal (A1) or competition (A2) requirements.
class KernelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct KernelEntry {
  Offset offset{};
  double weight = 0.0;
};

using KernelWeights = std::vector<std::pair<Offset, double>>;
using KernelMap = std::map<Offset, double>;

/// Finite-range, zero-mean, aperiodic probability kernel p_{xy} = p_{y-x}.
class DispersalKernel {
 public:
  int dim() const { return dim_; }
  int range() const { return range_; }
  std::span<const KernelEntry> entries() const { return entries_; }
  double weight(const Offset& o) const;
  std::vector<Offset> offsets() const;

 private:
  friend DispersalKernel make_dispersal_kernel(int dim, const KernelWeights& weights);
  int dim_ = 0;
  int range_ = 0;
  std::vector<KernelEntry> entries_;
};

/// Competition kernel split into on-site strength lambda0, off-diagonal mass
/// kappa and the normalised off-diagonal shape gamma (lambda_{0x} = kappa * gamma_{0x}).
class CompetitionKernel {
 public:
  int dim() const { return dim_; }
  int range() const { return range_; }
  double lambda0() const { return lambda0_; }
  double kappa() const { return kappa_; }
  /// Off-diagonal shape, offsets != 0, weights summing to 1 (empty when kappa == 0).
  std::span<const KernelEntry> gamma() const { return gamma_; }
  double gamma_at(const Offset& o) const;
  /// Reconstructed raw kernel, on-site entry first.
  std::vector<KernelEntry> raw() const;
  double total() const { return lambda0_ + kappa_; }

 private:
  friend CompetitionKernel make_competition_kernel(int dim, const KernelWeights& raw);
  int dim_ = 0;
  int range_ = 1;
  double lambda0_ = 0.0;
  double kappa_ = 0.0;
  std::vector<KernelEntry> gamma_;
};

DispersalKernel make_dispersal_kernel(int dim, const KernelWeights& weights);
CompetitionKernel make_competition_kernel(int dim, const KernelWeights& raw);

/// Symmetric lazy walk in d dimensions: stay with probability `hold`, otherwise
/// jump to one of the 2d nearest neighbours uniformly.
DispersalKernel lazy_walk(int dim, double hold = 0.5);
/// Uniform kernel on the sup-norm ball of radius r (includes the origin).
DispersalKernel uniform_box_walk(int dim, int r);
/// Competition with on-site lambda0 and total off-diagonal mass kappa spread
/// uniformly over the nearest neighbours.
CompetitionKernel nearest_neighbour_competition(int dim, double lambda0, double kappa);

/// n-fold convolution of p with itself; p^0 is the unit mass at 0.
KernelMap kernel_power(const DispersalKernel& p, int n);

/// Greatest common divisor of the return times to 0 observed within `horizon` steps.
int return_time_gcd(const DispersalKernel& p, int horizon);

class HorizonCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultHorizonCap = 1000;

/// Smallest j >= 1 with p^j_{0x} * m_tilde^j >= 1 for every |x|_inf <= 1.
int colonization_horizon(const DispersalKernel& p, double m_tilde, int cap = kDefaultHorizonCap);

/// Default growth factor used for the colonisation horizon: (1+m)/2 kept inside (1, m).
double default_m_tilde(double m);

}  // namespace lrbs
