#pragma once

#include <string>
#include <vector>

#include "lrbs/config.hpp"

namespace lrbs {

struct ExperimentOptions {
  std::string out_dir = "out";
  bool plots = false;
  unsigned threads = 1;  // replica workers; 0 = hardware concurrency
};

struct ExperimentResult {
  std::vector<std::string> files;  // written paths, in write order
  std::string headline;            // one-line human summary
};

/// Runs the configured experiment and writes summary.csv, series.ndjson,
/// snapshots/ and (with plots) SVG files under out_dir. Replica i uses seed
/// derive_seed(cfg.seed, i); output order is replica, then step.
ExperimentResult run_experiment(const RunConfig& cfg, const ExperimentOptions& options);

/// Starting configuration selected by cfg.init for the given model.
CountField initial_field(const RunConfig& cfg, const ModelParams& model);

/// Seed-independent starts for coupled runs: the initial field plus two fixed
/// perturbation patterns of amplitude cfg.perturbation.
std::pair<CountField, CountField> coupled_starts(const RunConfig& cfg);

}  // namespace lrbs
