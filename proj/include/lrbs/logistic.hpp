#pragma once

#include <stdexcept>
#include <vector>

#include "lrbs/kernel.hpp"
#include "lrbs/model.hpp"

namespace lrbs {

/// x -> x (m - shift - scale x)^+.
struct LogisticMap {
  double m = 2.0;
  double shift = 0.0;
  double scale = 1.0;

  double operator()(double x) const;
  /// Location of the maximum, (m - shift) / (2 scale).
  double vertex() const { return (m - shift) / (2.0 * scale); }
};

double eval_map(const LogisticMap& map, double x);

struct FixedPoints {
  double zero = 0.0;
  double positive = 0.0;
  bool has_positive = false;
};

FixedPoints fixed_points(const LogisticMap& map);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

/// Exact image of [a, b] under a unimodal logistic map (endpoints and vertex).
Interval image_of_interval(const LogisticMap& map, double a, double b);

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Lemma12Case { below_two, at_two, above_two };

/// Shrinking interval sequences for f(x) = x(m-x)^+ and f_gamma(x) = x(m-gamma-x)^+
/// on the normalised scale. alphas/betas hold indices 0..N0+1.
struct IntervalSequencePair {
  Lemma12Case regime = Lemma12Case::below_two;
  double m = 0.0;
  double eps = 0.0;
  double gamma = 0.0;
  std::vector<double> alphas;
  std::vector<double> betas;
  int N0 = 0;
  int n0 = -1;  // phase switch for m in (2,3); -1 otherwise
  double alpha_limit = 0.0;
  double beta_limit = 0.0;
  int gamma_halvings = 0;
};

struct Lemma12Check {
  bool ordering = true;     // alpha_n < alpha_{n+1} < m_bar_gamma <= m_bar < beta_{n+1} < beta_n
  bool containment = true;  // images of [alpha_n, beta_n] under f and f_gamma inside (alpha_{n+1}, beta_{n+1})
  bool window = true;       // alpha_N0, beta_N0 within eps of m_bar
  bool limits = true;       // limits within eps of m_bar
  int first_bad = -1;
  bool ok() const { return ordering && containment && window && limits; }
};

/// Checks the constructed prefix against the ordering and containment
/// conditions for every n <= N0 and the eps-window at N0.
Lemma12Check verify_lemma12(const IntervalSequencePair& seq);

/// Builds the sequences for m in (1,3). alpha0 <= 0 picks the default min(eps, m_bar/10).
IntervalSequencePair lemma12_sequences(double m, double eps, double alpha0 = 0.0);

struct EpsilonChoice {
  double eps1 = 0.0;
  double eps2 = 0.0;
  int n_star = 0;
  double max_growth = 0.0;  // max over S of p^n_{0y} m_tilde^n
};

/// Occupancy thresholds: eps2 from the two growth/cap inequalities and eps1
/// from the kernel-power bound over S, each times 0.95.
EpsilonChoice choose_epsilons(double m, double delta, double m_tilde, const DispersalKernel& p);

struct ContractionReport {
  double grad_sup = 0.0;  // sup over the box of the l1 norm of the gradient
  double diag_bound = 0.0;
  double eps = 0.0;
  bool constants_hold = false;  // kappa_r below min{delta/(m-1), eps/(2(2+delta))}
  bool contraction_ok = false;  // grad_sup < 1 - eps/2
};

/// Gradient bound on the box [m-1-delta, m-1+delta] for the normalised map
/// (lambda0 = 1, kappa_r = kappa/lambda0).
ContractionReport contraction_bound(double m, double kappa_r, double delta);
ContractionReport contraction_bound(const ModelParams& params, double delta);

struct SandwichMaps {
  LogisticMap lower;
  LogisticMap upper;
};

/// z(m - m kappa_r - z)^+ below and z(m - z)^+ above the normalised local map.
SandwichMaps sandwich_maps(double m, double kappa_r);
SandwichMaps sandwich_maps(const ModelParams& params);

}  // namespace lrbs
