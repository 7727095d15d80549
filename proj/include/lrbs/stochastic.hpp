#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lrbs/model.hpp"
#include "lrbs/rng.hpp"

namespace lrbs {

/// Stream ids used for keyed draws.
inline constexpr std::uint64_t kStreamMain = 0;
inline constexpr std::uint64_t kStreamExcess1 = 1;
inline constexpr std::uint64_t kStreamExcess2 = 2;
inline constexpr std::uint64_t kStreamExtension = 3;

/// xi_{t+1}(x) = Poisson(F(x; xi_t)) keyed by (seed, stream, t, x', 0) where x'
/// is the site of coords(x) - key_shift. `means`, if given, receives F.
CountField stochastic_step(const CountField& field, const MeanEvaluator& eval, const RngKeyStream& rng,
                           std::uint64_t t, const Offset& key_shift = {}, std::vector<double>* means = nullptr,
                           unsigned threads = 1);
CountField stochastic_step(const CountField& field, const ModelParams& params, const RngKeyStream& rng,
                           std::uint64_t t);

struct CoupledState {
  CountField xi1;
  CountField xi2;
  std::uint64_t time = 0;
};

/// Minimal-noise coupling: with a = F(x; xi1), b = F(x; xi2),
/// xi1 <- N0(a ^ b) + N1((a - b)^+), xi2 <- N0(a ^ b) + N2((b - a)^+), where
/// N0, N1, N2 are draws on streams 0, 1, 2 at the same (t, x).
CoupledState coupled_step(const CoupledState& state, const MeanEvaluator& eval, std::uint64_t seed,
                          unsigned threads = 1);

/// Two competing types on a shared lattice. s1/s2 carry (m_i, p^(i), lambda^(ii));
/// cross12 is lambda^(12) (pressure of type 2 on type 1), cross21 the reverse.
struct TwoSpeciesParams {
  ModelParams s1;
  ModelParams s2;
  std::vector<KernelEntry> cross12;
  std::vector<KernelEntry> cross21;
};

TwoSpeciesParams make_two_species(ModelParams s1, ModelParams s2, const KernelWeights& cross12,
                                  const KernelWeights& cross21);

/// One generation of both types: independent draws on streams 0 (type 1) and 1 (type 2).
std::pair<CountField, CountField> two_species_step(const CountField& xi1, const CountField& xi2,
                                                   const TwoSpeciesParams& params, std::uint64_t seed,
                                                   std::uint64_t t);

struct StepStats {
  std::int64_t time = 0;
  double mass = 0.0;
  std::size_t occupied = 0;  // (eps1, eps2)-occupied sites
  bool origin = false;       // xi(origin) > 0
  // Coupled runs only.
  std::optional<double> mass2;
  std::optional<double> agreement;  // fraction of window sites with xi1 == xi2
  std::optional<std::uint8_t> eq36;  // bit 0: inner agreement in I, bit 1: middle in I, bit 2: outer in J
};

/// Means F at step t and the realised draws xi_{t+1}, indexed [t][site].
struct DrawRecord {
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<Count>> values;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::int64_t steps_requested = 0;
  std::vector<StepStats> stats;  // index n = time n, starting with the initial state
  std::vector<std::pair<std::int64_t, CountField>> snapshots;
  bool extinct = false;
  std::int64_t extinction_step = -1;
  std::optional<DrawRecord> draws;
  CountField final_field;
};

struct RunOptions {
  bool early_stop = true;  // stop once the total mass hits 0
  OccupancyParams occ{};
  std::vector<std::int64_t> snapshot_steps;
  bool record_draws = false;
  Offset origin{};
  Offset key_shift{};
  unsigned threads = 1;
};

RunRecord run_trajectory(const CountField& field0, const ModelParams& params, std::int64_t steps, std::uint64_t seed,
                         const RunOptions& options = {});

/// (1/N) sum_{n=1}^N 1{xi_n(origin) > 0} with N the requested horizon; steps
/// after extinction count as empty.
double occupation_frequency(const RunRecord& record);

struct CoupledOptions {
  OccupancyParams occ{};
  double delta = 0.1;         // half-width of I(m, delta, lambda0) on the normalised scale
  std::int64_t N = 0;         // 0: smallest multiple of n* above 1/lambda0
  double m_tilde = 0.0;       // for n*; 0 picks the default
  bool stop_when_merged = true;
  Offset origin{};
  std::vector<std::int64_t> snapshot_steps;
  unsigned threads = 1;
};

struct CoupledRun {
  RunRecord record;
  std::optional<std::int64_t> T;       // first step from which the window agrees through the end
  std::optional<std::int64_t> merged;  // first step with agreement on the whole lattice
  std::int64_t N = 0;
  std::vector<int> radii;  // A_N, A_4N, A_7N sup radii after clipping to the lattice
  CountField final1;
  CountField final2;
};

CoupledRun run_coupled(const CountField& field1, const CountField& field2, const ModelParams& params,
                       std::int64_t steps, const std::vector<std::size_t>& window, std::uint64_t seed,
                       const CoupledOptions& options = {});

}  // namespace lrbs
