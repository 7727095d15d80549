#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lrbs/model.hpp"

namespace lrbs {

enum class ExperimentKind {
  simulate,
  cml,
  couple,
  two_species,
  logistic,
  lemma7,
  percolation,
  survival_sweep,
  coexistence_sweep,
  complete_convergence,
};

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);
std::vector<std::string> experiment_names();

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed `key = value` configuration. Kernels come from the `dispersal` /
/// `competition` shorthands or from [dispersal], [competition], [dispersal2],
/// [competition2], [cross12], [cross21] sections of `offset: weight` lines.
struct RunConfig {
  std::optional<ExperimentKind> kind;
  std::uint64_t seed = 0;

  // model
  int dim = 1;
  std::vector<int> extent{64};
  Boundary boundary = Boundary::periodic;
  double m = 2.0;
  double lambda0 = 0.01;
  double kappa = 0.0;
  double hold = 0.5;
  KernelWeights dispersal_weights;    // empty: lazy walk with `hold`
  KernelWeights competition_weights;  // empty: nearest neighbour with lambda0, kappa
  ModelParams model;

  // second type
  double m2 = 2.0;
  double lambda0_2 = 0.01;
  double kappa_2 = 0.0;
  KernelWeights dispersal2_weights;
  KernelWeights competition2_weights;
  KernelWeights cross12_weights;
  KernelWeights cross21_weights;
  double cross = -1.0;  // on-site cross coefficient as a multiple of gamma* min(lambda0); < 0: use sections
  ModelParams model2;

  // run control
  std::int64_t steps = 500;
  int replicas = 1;
  std::vector<std::int64_t> snapshots;
  bool early_stop = true;
  std::string init = "mbar";  // mbar | single | constant | zero
  double init_value = 10.0;
  int window_radius = 2;

  // occupancy and block constants
  double eps1 = -1.0;  // < 0: chosen from (m, delta, m_tilde)
  double eps2 = -1.0;
  double delta = 0.1;
  double K = 5.0;
  double m_tilde = 0.0;  // 0: default for m

  // cml / convergence
  double tol = 1e-8;
  int hold_steps = 50;

  // couple
  std::int64_t eq36_N = 0;
  double perturbation = 10.0;

  // logistic
  std::vector<double> m_values{1.2, 1.5, 2.0, 2.3, 2.7, 2.9};
  std::vector<double> eps_values{0.1, 0.01};

  // percolation
  double theta = 0.95;
  int half_width = 50;
  int horizon = 50;
  double cone = 0.2;
  int burn_in = 25;

  // sweeps
  std::vector<double> lambda0_values;
  std::vector<double> cross_values;

  // complete convergence
  std::int64_t burn = 500;
  double bin_width = 5.0;

  /// Derived constants as `name = value` lines.
  std::vector<std::pair<std::string, std::string>> echo;
};

/// Throws ConfigError on unknown keys, a missing seed, kernel violations, or an
/// `experiment` key that disagrees with `subcommand`.
RunConfig parse_config(std::string_view text, std::optional<ExperimentKind> subcommand = std::nullopt);
RunConfig load_config(const std::string& path, std::optional<ExperimentKind> subcommand = std::nullopt);

/// Builds the single-type model for a given lambda0 (kappa scaled to keep kappa / lambda0).
ModelParams model_for_lambda0(const RunConfig& cfg, double lambda0);

/// Exact decimal text for a double (shortest round-trip form).
std::string format_double(double v);

}  // namespace lrbs
