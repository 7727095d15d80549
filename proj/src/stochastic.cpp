#include "lrbs/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lrbs/parallel.hpp"

namespace lrbs {

namespace {

// Applies fn(x) to every site, in blocks when more than one thread is requested.
template <class Fn>
void for_sites(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1) {
    for (std::size_t x = 0; x < n; ++x) fn(x);
    return;
  }
  const std::size_t blocks = std::min<std::size_t>(n, 4 * static_cast<std::size_t>(threads));
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t lo = n * b / blocks, hi = n * (b + 1) / blocks;
    for (std::size_t x = lo; x < hi; ++x) fn(x);
  });
}

std::uint64_t key_site(const Lattice& lat, std::size_t x, const Offset& key_shift) {
  if (key_shift == Offset{}) return x;
  return lat.index(lat.coords(x) - key_shift);
}

}  // namespace

CountField stochastic_step(const CountField& field, const MeanEvaluator& eval, const RngKeyStream& rng,
                           std::uint64_t t, const Offset& key_shift, std::vector<double>* means, unsigned threads) {
  const auto F = eval.means(field);
  CountField next(field.lattice(), 0);
  const auto& lat = field.lattice();
  for_sites(field.size(), threads, [&](std::size_t x) { next[x] = rng.poisson(F[x], t, key_site(lat, x, key_shift)); });
  if (means) *means = F;
  return next;
}

CountField stochastic_step(const CountField& field, const ModelParams& params, const RngKeyStream& rng,
                           std::uint64_t t) {
  return stochastic_step(field, MeanEvaluator(params), rng, t);
}

CoupledState coupled_step(const CoupledState& state, const MeanEvaluator& eval, std::uint64_t seed,
                          unsigned threads) {
  const auto a = eval.means(state.xi1);
  const auto b = eval.means(state.xi2);
  const RngKeyStream n0(seed, kStreamMain), n1(seed, kStreamExcess1), n2(seed, kStreamExcess2);
  CoupledState out{CountField(state.xi1.lattice(), 0), CountField(state.xi2.lattice(), 0), state.time + 1};
  const auto t = state.time;
  for_sites(a.size(), threads, [&](std::size_t x) {
    const double lo = std::min(a[x], b[x]);
    const Count shared = n0.poisson(lo, t, x);
    out.xi1[x] = shared + (a[x] > b[x] ? n1.poisson(a[x] - b[x], t, x) : 0);
    out.xi2[x] = shared + (b[x] > a[x] ? n2.poisson(b[x] - a[x], t, x) : 0);
  });
  return out;
}

TwoSpeciesParams make_two_species(ModelParams s1, ModelParams s2, const KernelWeights& cross12,
                                  const KernelWeights& cross21) {
  if (!(s1.lattice == s2.lattice)) throw GeometryError("both types must live on the same lattice");
  TwoSpeciesParams out{std::move(s1), std::move(s2), {}, {}};
  const int range = std::max(out.s1.lambda.range(), out.s2.lambda.range());
  auto convert = [&](const KernelWeights& raw, const char* name) {
    std::vector<KernelEntry> entries;
    for (const auto& [o, w] : raw) {
      if (!(w >= 0.0)) throw KernelError(std::string("negative entry in ") + name + " (A2)");
      if (sup_norm(o) > range) throw KernelError(std::string(name) + " exceeds the common competition range");
      if (w > 0.0) entries.push_back({o, w});
    }
    return entries;
  };
  out.cross12 = convert(cross12, "lambda12");
  out.cross21 = convert(cross21, "lambda21");
  return out;
}

namespace {

std::vector<double> offspring_with_cross(const CountField& own, const CountField& other, const ModelParams& sp,
                                         const std::vector<KernelEntry>& cross) {
  const auto& lat = own.lattice();
  const auto gamma = sp.lambda.gamma();
  const double lambda0 = sp.lambda.lambda0(), kappa = sp.lambda.kappa();
  std::vector<double> f(own.size(), 0.0);
  for (std::size_t x = 0; x < own.size(); ++x) {
    const double v = static_cast<double>(own[x]);
    if (v == 0.0) continue;
    double pressure = 0.0;
    for (const auto& g : gamma)
      if (auto z = lat.shifted(x, g.offset)) pressure += g.weight * static_cast<double>(own[*z]);
    double c = 0.0;
    for (const auto& e : cross)
      if (auto z = lat.shifted(x, e.offset)) c += e.weight * static_cast<double>(other[*z]);
    const double bracket = sp.m - lambda0 * v - kappa * pressure - c;
    f[x] = bracket > 0.0 ? v * bracket : 0.0;
  }
  return f;
}

}  // namespace

std::pair<CountField, CountField> two_species_step(const CountField& xi1, const CountField& xi2,
                                                   const TwoSpeciesParams& params, std::uint64_t seed,
                                                   std::uint64_t t) {
  const auto f1 = offspring_with_cross(xi1, xi2, params.s1, params.cross12);
  const auto f2 = offspring_with_cross(xi2, xi1, params.s2, params.cross21);
  std::vector<double> F1(f1.size()), F2(f2.size());
  MeanEvaluator(params.s1).disperse(f1, F1);
  MeanEvaluator(params.s2).disperse(f2, F2);
  const RngKeyStream r1(seed, kStreamMain), r2(seed, kStreamExcess1);
  CountField n1(xi1.lattice(), 0), n2(xi2.lattice(), 0);
  for (std::size_t x = 0; x < F1.size(); ++x) {
    n1[x] = r1.poisson(F1[x], t, x);
    n2[x] = r2.poisson(F2[x], t, x);
  }
  return {std::move(n1), std::move(n2)};
}

RunRecord run_trajectory(const CountField& field0, const ModelParams& params, std::int64_t steps, std::uint64_t seed,
                         const RunOptions& options) {
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  const MeanEvaluator eval(params);
  const RngKeyStream rng(seed, kStreamMain);
  const std::size_t origin = params.lattice.index(options.origin);
  RunRecord rec;
  rec.seed = seed;
  rec.steps_requested = steps;
  if (options.record_draws) rec.draws = DrawRecord{seed, {}, {}};
  auto snap_due = [&](std::int64_t t) {
    return std::find(options.snapshot_steps.begin(), options.snapshot_steps.end(), t) != options.snapshot_steps.end();
  };
  CountField xi = field0;
  for (std::int64_t t = 0;; ++t) {
    StepStats s;
    s.time = t;
    s.mass = total_mass(xi);
    s.occupied = occupied_count(xi, params, options.occ);
    s.origin = xi[origin] > 0;
    rec.stats.push_back(s);
    if (snap_due(t)) rec.snapshots.emplace_back(t, xi);
    if (s.mass == 0.0 && !rec.extinct) {
      rec.extinct = true;
      rec.extinction_step = t;
    }
    if (t == steps || (rec.extinct && options.early_stop)) break;
    std::vector<double> F;
    auto next = stochastic_step(xi, eval, rng, static_cast<std::uint64_t>(t), options.key_shift,
                                options.record_draws ? &F : nullptr, options.threads);
    if (rec.draws) {
      rec.draws->means.push_back(std::move(F));
      rec.draws->values.emplace_back(next.values().begin(), next.values().end());
    }
    xi = std::move(next);
  }
  rec.final_field = std::move(xi);
  return rec;
}

double occupation_frequency(const RunRecord& record) {
  if (record.steps_requested <= 0) return 0.0;
  std::int64_t hits = 0;
  for (const auto& s : record.stats)
    if (s.time >= 1 && s.time <= record.steps_requested && s.origin) ++hits;
  return static_cast<double>(hits) / static_cast<double>(record.steps_requested);
}

CoupledRun run_coupled(const CountField& field1, const CountField& field2, const ModelParams& params,
                       std::int64_t steps, const std::vector<std::size_t>& window, std::uint64_t seed,
                       const CoupledOptions& options) {
  if (!(field1.lattice() == params.lattice) || !(field2.lattice() == params.lattice))
    throw GeometryError("coupled fields must share the model lattice");
  const auto& lat = params.lattice;
  const MeanEvaluator eval(params);
  const auto c = derived_constants(params);
  const double lambda0 = params.lambda.lambda0();
  CoupledRun run;
  run.N = options.N;
  if (run.N <= 0) {
    const double mt = options.m_tilde > 0.0 ? options.m_tilde : default_m_tilde(params.m);
    const std::int64_t ns = colonization_horizon(params.p, mt);
    run.N = (static_cast<std::int64_t>(std::floor(1.0 / (lambda0 * static_cast<double>(ns)))) + 1) * ns;
  }
  const int unit = params.reach() + 1;
  const int cap = lat.max_ball_radius();
  for (std::int64_t k : {1, 4, 7}) {
    const std::int64_t r = k * run.N * unit;
    run.radii.push_back(static_cast<int>(std::min<std::int64_t>(r, cap)));
  }
  const std::size_t origin = lat.index(options.origin);
  std::vector<int> dist(lat.size());
  for (std::size_t x = 0; x < lat.size(); ++x) dist[x] = lat.distance(origin, x);
  const double I_lo = (params.m - 1.0 - options.delta) / lambda0, I_hi = (params.m - 1.0 + options.delta) / lambda0;
  const double J_lo = options.occ.eps1 * c.m_bar_0, J_hi = (1.0 - options.occ.eps2) * c.M;

  auto eq36 = [&](const CountField& a, const CountField& b) {
    bool inner = true, middle = true, outer = true;
    for (std::size_t x = 0; x < lat.size(); ++x) {
      const double u = static_cast<double>(a[x]), v = static_cast<double>(b[x]);
      if (dist[x] <= run.radii[0])
        inner = inner && a[x] == b[x] && u >= I_lo && u <= I_hi;
      else if (dist[x] <= run.radii[1])
        middle = middle && u >= I_lo && u <= I_hi && v >= I_lo && v <= I_hi;
      else if (dist[x] <= run.radii[2])
        outer = outer && u >= J_lo && u <= J_hi && v >= J_lo && v <= J_hi;
    }
    return static_cast<std::uint8_t>((inner ? 1 : 0) | (middle ? 2 : 0) | (outer ? 4 : 0));
  };

  auto& rec = run.record;
  rec.seed = seed;
  rec.steps_requested = steps;
  CoupledState st{field1, field2, 0};
  std::vector<char> window_agrees;
  for (std::int64_t t = 0;; ++t) {
    StepStats s;
    s.time = t;
    s.mass = total_mass(st.xi1);
    s.mass2 = total_mass(st.xi2);
    s.occupied = occupied_count(st.xi1, params, options.occ);
    s.origin = st.xi1[origin] > 0;
    std::size_t agree = 0;
    for (std::size_t x : window) agree += st.xi1[x] == st.xi2[x];
    s.agreement = window.empty() ? 1.0 : static_cast<double>(agree) / static_cast<double>(window.size());
    s.eq36 = eq36(st.xi1, st.xi2);
    rec.stats.push_back(s);
    window_agrees.push_back(agree == window.size());
    if (std::find(options.snapshot_steps.begin(), options.snapshot_steps.end(), t) != options.snapshot_steps.end())
      rec.snapshots.emplace_back(t, st.xi1);
    if (s.mass == 0.0 && !rec.extinct) {
      rec.extinct = true;
      rec.extinction_step = t;
    }
    if (!run.merged && st.xi1 == st.xi2) run.merged = t;
    if (t == steps || (run.merged && options.stop_when_merged)) break;
    st = coupled_step(st, eval, seed, options.threads);
  }
  // Agreement on the whole lattice is absorbing, so a merged run agrees through any horizon.
  std::int64_t T = static_cast<std::int64_t>(window_agrees.size());
  while (T > 0 && window_agrees[static_cast<std::size_t>(T) - 1]) --T;
  if (T < static_cast<std::int64_t>(window_agrees.size())) run.T = T;
  rec.final_field = st.xi1;
  run.final1 = std::move(st.xi1);
  run.final2 = std::move(st.xi2);
  return run;
}

}  // namespace lrbs
