#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lrbs/logistic.hpp"
#include "lrbs/model.hpp"

namespace lrbs {

/// zeta_{n+1}(x) = F(x; zeta_n).
RealField cml_step(const RealField& field, const ModelParams& params);
RealField cml_step(const RealField& field, const MeanEvaluator& eval);

/// Local map g : [0, G] -> [0, G] with attracting fixed point a_bar.
struct SingleSiteMap {
  std::function<double(double)> g;
  double G = 1.0;
  double a_bar = 1.0;
};

/// Single-site map x(m - x)^+ on [0, m] (normalised scale).
SingleSiteMap logistic_site_map(double m);

/// zeta_{n+1}(x) = sum_y g(zeta_n(y)) p_{yx}. Throws std::domain_error if any
/// input or output value leaves [0, G].
RealField generalized_cml_step(const RealField& field, const SingleSiteMap& g, const DispersalKernel& p);

/// delta_n(x) as a function of (site, time, F(x; zeta_n)).
using PerturbationProvider = std::function<double(std::size_t site, int time, double mean)>;

/// Means and perturbations of one perturbed step.
struct PerturbedStep {
  std::vector<double> means;
  std::vector<double> deltas;
  RealField next;
};

/// zeta_{n+1} = F(zeta_n) + delta_n. Throws std::domain_error when a
/// perturbation drives a site below -1e-12 max(1, F); tiny negatives are set to 0.
PerturbedStep perturbed_step_traced(const RealField& field, const MeanEvaluator& eval,
                                    const PerturbationProvider& provider, int time);
RealField perturbed_step(const RealField& field, const ModelParams& params, const PerturbationProvider& provider,
                         int time);

/// Per-step means and perturbations, indexed [time][site].
struct StepTrace {
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> deltas;
};

/// Violating space-time points, in absolute site index.
struct ConditionReport {
  bool holds = true;
  std::vector<std::pair<std::size_t, int>> violations;
};

/// F + delta <= (1 - eps2) M on every box point translated by `origin`.
ConditionReport check_B1(const StepTrace& trace, const ModelParams& params, double eps2, const SpaceTimeBox& box,
                         const Offset& origin = {});
/// F >= K implies |delta| <= delta_rel F on every box point (closed at F = K).
ConditionReport check_B2(const StepTrace& trace, const Lattice& lattice, double delta_rel, double K,
                         const SpaceTimeBox& box, const Offset& origin = {});

struct Lemma7Thresholds {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double m_tilde = 0.0;
  int n_star = 0;
  double I_min = 0.0;         // min over S of m_tilde^n p^n_{0y}
  double lambda0_star = 0.0;  // eps1 (m-1) I_min / K
  double alpha = 0.0;         // competition allowance, m_tilde < m - alpha
  double kappa_star = 0.0;    // alpha / ((1 - eps2) m); requirement kappa <= kappa_star lambda0
  std::size_t box_size = 0;   // Delta = |X|
};

/// Thresholds for the one-block occupancy statement. alpha is the largest
/// value (times 0.95, capped at (m - m_tilde)/2) for which the lower map
/// z(m - alpha - lambda0 z)^+ still carries the growth induction over S.
Lemma7Thresholds lemma7_thresholds(double m, const DispersalKernel& p, int competition_range, double eps1,
                                   double eps2, double delta, double K, double m_tilde);

struct Lemma7Options {
  std::uint64_t adversary_seed = 0;
  bool zero_adversary = false;
  /// Starting masses at the origin as fractions between eps1 m_bar (0) and (1 - eps2) M (1).
  std::vector<double> start_fractions{0.0, 0.5, 1.0};
  /// Push one box point past the cap at the first step (out of contract).
  bool inject_b1_violation = false;
};

struct Lemma7Verdict {
  bool occupied = true;  // all |x|_inf <= 1 occupied at step n* for every start
  bool b1_held = true;
  bool b2_held = true;
  int n_star = 0;
  std::vector<Offset> unoccupied;  // failing sites (first failing start)
  Lemma7Thresholds thresholds;
};

/// Runs n* perturbed steps from a single occupied origin on a private torus,
/// with a pointwise saturating adversary on X. Throws std::invalid_argument
/// when lambda0 > lambda0* or kappa > kappa* lambda0.
Lemma7Verdict lemma7_sandbox(const ModelParams& params, double eps1, double eps2, double delta, double K,
                             double m_tilde, const Lemma7Options& options = {});

struct ConvergenceReport {
  bool converged = false;
  int N0 = -1;
  double target = 0.0;
  std::vector<double> history;  // max |zeta_n(x) - target| over the window, n = 0, 1, ...
};

/// Iterates until the window deviation stays <= tol for `hold` consecutive
/// steps or max_steps is reached. N0 is the first step from which the
/// deviation stays <= tol through the end of the recorded history.
ConvergenceReport converge_locally(const RealField& field0, const ModelParams& params,
                                   const std::vector<std::size_t>& window, double tol, int max_steps, int hold = 50);
ConvergenceReport converge_locally(const RealField& field0, const SingleSiteMap& g, const DispersalKernel& p,
                                   const std::vector<std::size_t>& window, double tol, int max_steps, int hold = 50);

/// Sup-norm neighbourhoods around a window ball of radius `radius`:
/// Lambda' of radius radius + (n0 + n1) r and Lambda_i of radius radius + (n0 - i) r.
struct NestedBoxes {
  Offset center{};
  int prime_radius = 0;
  std::vector<int> radii;  // Lambda_0 .. Lambda_n0
  std::vector<std::size_t> prime_sites;
  std::vector<std::vector<std::size_t>> sites;
};

/// r = R_p for the diagonal argument, r = R_lambda + R_p for the competitive one.
NestedBoxes nested_boxes(const Lattice& lattice, const Offset& center, int radius, int n0, int n1, int r);

/// Configurations with values in [alpha_0, beta_0] everywhere, in
/// [alpha_k, beta_k] on Lambda_k \ Lambda_{k+1} and in [alpha_n0, beta_n0] on
/// Lambda_n0 (the lower bound a is alpha_0 and holds on all sites).
struct InvariantSet {
  NestedBoxes boxes;
  std::vector<double> alphas;
  std::vector<double> betas;

  std::vector<int> levels;  // per site: k on Lambda_k minus Lambda_{k+1}, n0 on Lambda_n0, 0 elsewhere

  bool contains(const RealField& field) const;
};

InvariantSet make_invariant_set(const Lattice& lattice, const NestedBoxes& boxes, const IntervalSequencePair& seq);

/// kappa_* for the attractivity experiment: delta = eps = (1 - |m - 2|)/4 and
/// 0.95 times the smallest of the contraction, sandwich and interval-sequence limits.
struct AttractivityConstants {
  double delta = 0.0;
  double eps = 0.0;
  double kappa_star = 0.0;
  double lemma12_gamma = 0.0;
};

AttractivityConstants attractivity_kappa_star(double m);

/// Cross-competition allowance for two types: the competition slack alpha_i
/// of each type's occupancy thresholds, less its own kappa share, must absorb
/// gamma (1 - eps2_i) m_j. kappa_rel_i is kappa_i / lambda0^(ii). Returns 0 when
/// no slack is left.
double coexistence_gamma_star(double m1, const DispersalKernel& p1, double kappa_rel1, double m2,
                              const DispersalKernel& p2, double kappa_rel2, int competition_range, double delta,
                              double K);

}  // namespace lrbs
