#include "lrbs/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "json.hpp"
#include "lrbs/cml.hpp"
#include "lrbs/logistic.hpp"
#include "lrbs/parallel.hpp"
#include "lrbs/percolation.hpp"
#include "lrbs/snapshot.hpp"
#include "lrbs/stochastic.hpp"
#include "lrbs/svg.hpp"

namespace lrbs {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string cell(double v) { return format_double(v); }
std::string cell(std::int64_t v) { return std::to_string(v); }
std::string cell(std::uint64_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }
std::string cell(const std::string& v) { return v; }
std::string cell(const char* v) { return v; }

class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> cols) {
    bool first = true;
    for (auto c : cols) {
      text_ += (first ? "" : ",");
      text_ += c;
      first = false;
    }
    text_ += "\n";
  }
  template <class... Ts>
  void row(const Ts&... vs) {
    bool first = true;
    ((text_ += (first ? "" : ","), text_ += cell(vs), first = false), ...);
    text_ += "\n";
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

class Ndjson {
 public:
  void add(const Json& j) {
    text_ += j.dump();
    text_ += "\n";
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

class Artifacts {
 public:
  Artifacts(const ExperimentOptions& opt, ExperimentResult& result) : opt_(opt), result_(result) {
    fs::create_directories(opt.out_dir);
  }
  std::string path(const std::string& name) const { return (fs::path(opt_.out_dir) / name).string(); }
  void text(const std::string& name, const std::string& body) {
    write_text_file(path(name), body);
    result_.files.push_back(path(name));
  }
  template <class T>
  void snapshot(const Field<T>& field, std::int64_t step, std::uint64_t seed, const std::string& tag = "") {
    fs::create_directories(path("snapshots"));
    const std::string name = "snapshots/" + tag + "step_" + std::to_string(step) + ".field";
    save_snapshot(path(name), field, step, seed);
    result_.files.push_back(path(name));
    if (opt_.plots) {
      RealField r(field.lattice());
      for (std::size_t x = 0; x < field.size(); ++x) r[x] = static_cast<double>(field[x]);
      text("snapshots/" + tag + "step_" + std::to_string(step) + ".svg",
           svg_heatmap(tag + "step " + std::to_string(step), r));
    }
  }
  void chart(const std::string& name, const std::string& title, const std::string& xl, const std::string& yl,
             const std::vector<Series>& s) {
    if (opt_.plots) text(name, svg_line_chart(title, xl, yl, s));
  }

 private:
  const ExperimentOptions& opt_;
  ExperimentResult& result_;
};

Json stats_json(const StepStats& s) {
  Json j;
  j["time"] = s.time;
  j["mass"] = s.mass;
  j["occupied"] = s.occupied;
  j["origin"] = s.origin ? 1 : 0;
  if (s.mass2) j["mass2"] = *s.mass2;
  if (s.agreement) j["agreement"] = *s.agreement;
  if (s.eq36) j["eq36"] = *s.eq36;
  return j;
}

OccupancyParams occupancy(const RunConfig& cfg) { return {cfg.eps1, cfg.eps2}; }

template <class Fn>
void for_replicas(int n, unsigned threads, Fn&& fn) {
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t r) { fn(static_cast<int>(r)); });
}

std::uint64_t replica_seed(const RunConfig& cfg, int r) { return derive_seed(cfg.seed, static_cast<std::uint64_t>(r)); }

Series mass_series(const std::string& label, const std::vector<StepStats>& stats, bool second = false) {
  Series s{label, {}, {}};
  for (const auto& st : stats) {
    s.x.push_back(static_cast<double>(st.time));
    s.y.push_back(second ? st.mass2.value_or(0.0) : st.mass);
  }
  return s;
}

// simulate

void run_simulate(const RunConfig& cfg, const ExperimentOptions& opt, Artifacts& art, ExperimentResult& res) {
  const auto field0 = initial_field(cfg, cfg.model);
  std::vector<RunRecord> recs(static_cast<std::size_t>(cfg.replicas));
  for_replicas(cfg.replicas, opt.threads, [&](int r) {
    RunOptions ro;
    ro.early_stop = cfg.early_stop;
    ro.occ = occupancy(cfg);
    if (r == 0) ro.snapshot_steps = cfg.snapshots;
    recs[static_cast<std::size_t>(r)] = run_trajectory(field0, cfg.model, cfg.steps, replica_seed(cfg, r), ro);
  });
  Csv csv({"replica", "seed", "extinct", "extinction_step", "final_mass", "final_occupied", "occupation_frequency"});
  Ndjson nd;
  int extinct = 0;
  std::vector<Series> curves;
  for (int r = 0; r < cfg.replicas; ++r) {
    const auto& rec = recs[static_cast<std::size_t>(r)];
    extinct += rec.extinct;
    csv.row(r, rec.seed, rec.extinct, rec.extinction_step, rec.stats.back().mass, rec.stats.back().occupied,
            occupation_frequency(rec));
    for (const auto& s : rec.stats) {
      Json j;
      j["replica"] = r;
      j.update(stats_json(s));
      nd.add(j);
    }
    if (r < 6) curves.push_back(mass_series("replica " + std::to_string(r), rec.stats));
  }
  art.text("summary.csv", csv.text());
  art.text("series.ndjson", nd.text());
  for (const auto& [t, f] : recs[0].snapshots) art.snapshot(f, t, recs[0].seed);
  art.chart("mass.svg", "total mass", "step", "mass", curves);
  res.headline = std::to_string(extinct) + "/" + std::to_string(cfg.replicas) + " replicas extinct by step " +
                 std::to_string(cfg.steps);
}

// cml

void run_cml(const RunConfig& cfg, const ExperimentOptions&, Artifacts& art, ExperimentResult& res) {
  const auto counts = initial_field(cfg, cfg.model);
  RealField z(cfg.model.lattice);
  for (std::size_t x = 0; x < z.size(); ++x) z[x] = static_cast<double>(counts[x]);
  const auto window = cfg.model.lattice.ball(Offset{}, cfg.window_radius);
  const auto rep = converge_locally(z, cfg.model, window, cfg.tol, static_cast<int>(cfg.steps), cfg.hold_steps);
  Ndjson nd;
  Series dev{"max deviation (log10)", {}, {}};
  for (std::size_t n = 0; n < rep.history.size(); ++n) {
    Json j;
    j["time"] = n;
    j["max_deviation"] = rep.history[n];
    nd.add(j);
    dev.x.push_back(static_cast<double>(n));
    dev.y.push_back(rep.history[n] > 0 ? std::log10(rep.history[n]) : -INFINITY);
  }
  Csv csv({"converged", "N0", "target", "final_deviation", "steps_run"});
  csv.row(rep.converged, rep.N0, rep.target, rep.history.empty() ? 0.0 : rep.history.back(),
          static_cast<std::int64_t>(rep.history.size()) - 1);
  art.text("summary.csv", csv.text());
  art.text("series.ndjson", nd.text());
  if (!cfg.snapshots.empty()) {
    const MeanEvaluator eval(cfg.model);
    RealField cur = z;
    const std::int64_t last = *std::max_element(cfg.snapshots.begin(), cfg.snapshots.end());
    for (std::int64_t n = 0; n <= last; ++n) {
      if (std::find(cfg.snapshots.begin(), cfg.snapshots.end(), n) != cfg.snapshots.end())
        art.snapshot(cur, n, cfg.seed);
      cur = cml_step(cur, eval);
    }
  }
  art.chart("deviation.svg", "window deviation from the fixed point", "step", "log10 deviation", {dev});
  res.headline = rep.converged ? "converged to " + format_double(rep.target) + " from step " + std::to_string(rep.N0)
                               : "no convergence within " + std::to_string(cfg.steps) + " steps";
}

// couple

void run_couple(const RunConfig& cfg, const ExperimentOptions& opt, Artifacts& art, ExperimentResult& res) {
  const auto [f1, f2] = coupled_starts(cfg);
  const auto window = cfg.model.lattice.ball(Offset{}, cfg.window_radius);
  std::vector<CoupledRun> runs(static_cast<std::size_t>(cfg.replicas));
  for_replicas(cfg.replicas, opt.threads, [&](int r) {
    CoupledOptions co;
    co.occ = occupancy(cfg);
    co.delta = cfg.delta;
    co.N = cfg.eq36_N;
    co.m_tilde = cfg.m_tilde;
    co.stop_when_merged = cfg.early_stop;
    if (r == 0) co.snapshot_steps = cfg.snapshots;
    runs[static_cast<std::size_t>(r)] = run_coupled(f1, f2, cfg.model, cfg.steps, window, replica_seed(cfg, r), co);
  });
  Csv csv({"replica", "seed", "T", "merged", "final_agreement", "steps_run", "N"});
  Ndjson nd;
  int agreed = 0;
  std::vector<Series> curves;
  for (int r = 0; r < cfg.replicas; ++r) {
    const auto& run = runs[static_cast<std::size_t>(r)];
    const auto& st = run.record.stats;
    agreed += run.T.has_value();
    csv.row(r, run.record.seed, run.T ? cell(*run.T) : std::string("none"),
            run.merged ? cell(*run.merged) : std::string("none"), *st.back().agreement,
            static_cast<std::int64_t>(st.size()) - 1, run.N);
    Series ag{"replica " + std::to_string(r), {}, {}};
    for (const auto& s : st) {
      Json j;
      j["replica"] = r;
      j.update(stats_json(s));
      nd.add(j);
      ag.x.push_back(static_cast<double>(s.time));
      ag.y.push_back(*s.agreement);
    }
    if (r < 6) curves.push_back(ag);
  }
  art.text("summary.csv", csv.text());
  art.text("series.ndjson", nd.text());
  for (const auto& [t, f] : runs[0].record.snapshots) art.snapshot(f, t, runs[0].record.seed);
  art.chart("agreement.svg", "window agreement", "step", "fraction", curves);
  res.headline = std::to_string(agreed) + "/" + std::to_string(cfg.replicas) + " replicas agree on the window";
}

// two types

struct TwoTypeRun {
  std::vector<std::array<double, 2>> mass;
  std::vector<bool> both_at_origin;
  CountField final1, final2;
  std::vector<std::pair<std::int64_t, CountField>> snaps1, snaps2;
};

TwoTypeRun two_type_run(const RunConfig& cfg, const TwoSpeciesParams& tp, std::uint64_t seed, bool snaps) {
  TwoTypeRun out;
  CountField a = initial_field(cfg, tp.s1), b = initial_field(cfg, tp.s2);
  const std::size_t origin = cfg.model.lattice.index(Offset{});
  for (std::int64_t t = 0;; ++t) {
    out.mass.push_back({total_mass(a), total_mass(b)});
    out.both_at_origin.push_back(a[origin] > 0 && b[origin] > 0);
    if (snaps && std::find(cfg.snapshots.begin(), cfg.snapshots.end(), t) != cfg.snapshots.end()) {
      out.snaps1.emplace_back(t, a);
      out.snaps2.emplace_back(t, b);
    }
    const bool dead = out.mass.back()[0] == 0.0 && out.mass.back()[1] == 0.0;
    if (t == cfg.steps || (dead && cfg.early_stop)) break;
    std::tie(a, b) = two_species_step(a, b, tp, seed, static_cast<std::uint64_t>(t));
  }
  out.final1 = std::move(a);
  out.final2 = std::move(b);
  return out;
}

double coexistence_frequency(const TwoTypeRun& run, std::int64_t steps) {
  if (steps <= 0) return 0.0;
  std::int64_t hits = 0;
  for (std::size_t n = 1; n < run.both_at_origin.size(); ++n) hits += run.both_at_origin[n];
  return static_cast<double>(hits) / static_cast<double>(steps);
}

TwoSpeciesParams two_species_params(const RunConfig& cfg, const KernelWeights& c12, const KernelWeights& c21) {
  try {
    return make_two_species(cfg.model, cfg.model2, c12, c21);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("cross kernels: ") + e.what());
  }
}

void run_two_species(const RunConfig& cfg, const ExperimentOptions& opt, Artifacts& art, ExperimentResult& res) {
  const auto tp = two_species_params(cfg, cfg.cross12_weights, cfg.cross21_weights);
  std::vector<TwoTypeRun> runs(static_cast<std::size_t>(cfg.replicas));
  for_replicas(cfg.replicas, opt.threads, [&](int r) {
    runs[static_cast<std::size_t>(r)] = two_type_run(cfg, tp, replica_seed(cfg, r), r == 0);
  });
  Csv csv({"replica", "seed", "mass1", "mass2", "both_alive", "coexistence_frequency"});
  Ndjson nd;
  int both = 0;
  for (int r = 0; r < cfg.replicas; ++r) {
    const auto& run = runs[static_cast<std::size_t>(r)];
    const bool alive = run.mass.back()[0] > 0 && run.mass.back()[1] > 0;
    both += alive;
    csv.row(r, replica_seed(cfg, r), run.mass.back()[0], run.mass.back()[1], alive,
            coexistence_frequency(run, cfg.steps));
    for (std::size_t t = 0; t < run.mass.size(); ++t) {
      Json j;
      j["replica"] = r;
      j["time"] = t;
      j["mass1"] = run.mass[t][0];
      j["mass2"] = run.mass[t][1];
      j["both_at_origin"] = run.both_at_origin[t] ? 1 : 0;
      nd.add(j);
    }
  }
  art.text("summary.csv", csv.text());
  art.text("series.ndjson", nd.text());
  const auto& r0 = runs[0];
  for (std::size_t k = 0; k < r0.snaps1.size(); ++k) {
    art.snapshot(r0.snaps1[k].second, r0.snaps1[k].first, replica_seed(cfg, 0), "type1_");
    art.snapshot(r0.snaps2[k].second, r0.snaps2[k].first, replica_seed(cfg, 0), "type2_");
  }
  Series s1{"type 1", {}, {}}, s2{"type 2", {}, {}};
  for (std::size_t t = 0; t < r0.mass.size(); ++t) {
    s1.x.push_back(static_cast<double>(t));
    s2.x.push_back(static_cast<double>(t));
    s1.y.push_back(r0.mass[t][0]);
    s2.y.push_back(r0.mass[t][1]);
  }
  art.chart("mass.svg", "total mass, replica 0", "step", "mass", {s1, s2});
  res.headline = std::to_string(both) + "/" + std::to_string(cfg.replicas) + " replicas with both types alive";
}

void run_coexistence_sweep(const RunConfig& cfg, const ExperimentOptions& opt, Artifacts& art,
                           ExperimentResult& res) {
  double gstar = 0.0;
  for (const auto& [k, v] : cfg.echo)
    if (k == "gamma_star") gstar = std::stod(v);
  const std::vector<double> levels = cfg.cross_values.empty() ? std::vector<double>{0.0, 0.5, 1.0} : cfg.cross_values;
  const double lmin = std::min(cfg.lambda0, cfg.lambda0_2);
  const std::size_t R = static_cast<std::size_t>(cfg.replicas);
  std::vector<TwoTypeRun> runs(levels.size() * R);
  std::vector<TwoSpeciesParams> tps;
  for (double c : levels) {
    const double w = c * gstar * lmin;
    tps.push_back(two_species_params(cfg, {{Offset{}, w}}, {{Offset{}, w}}));
  }
  parallel_for(runs.size(), opt.threads, [&](std::size_t i) {
    runs[i] = two_type_run(cfg, tps[i / R], replica_seed(cfg, static_cast<int>(i % R)), false);
  });
  Csv csv({"cross", "weight", "replica", "seed", "mass1", "mass2", "both_alive", "coexistence_frequency"});
  Ndjson nd;
  std::vector<Series> curves;
  std::string head;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    int both = 0;
    for (std::size_t r = 0; r < R; ++r) {
      const auto& run = runs[l * R + r];
      const bool alive = run.mass.back()[0] > 0 && run.mass.back()[1] > 0;
      both += alive;
      csv.row(levels[l], levels[l] * gstar * lmin, r, replica_seed(cfg, static_cast<int>(r)), run.mass.back()[0],
              run.mass.back()[1], alive, coexistence_frequency(run, cfg.steps));
      for (std::size_t t = 0; t < run.mass.size(); ++t) {
        Json j;
        j["cross"] = levels[l];
        j["replica"] = r;
        j["time"] = t;
        j["mass1"] = run.mass[t][0];
        j["mass2"] = run.mass[t][1];
        nd.add(j);
      }
    }
    head += (l ? ", " : "") + format_double(levels[l]) + "g*: " + std::to_string(both) + "/" + std::to_string(R);
    Series s{"cross " + format_double(levels[l]) + " g*", {}, {}};
    for (std::size_t t = 0; t < runs[l * R].mass.size(); ++t) {
      s.x.push_back(static_cast<double>(t));
      s.y.push_back(std::min(runs[l * R].mass[t][0], runs[l * R].mass[t][1]));
    }
    curves.push_back(s);
  }
  art.text("summary.csv", csv.text());
  art.text("series.ndjson", nd.text());
  art.chart("coexistence.svg", "smaller type mass, replica 0", "step", "mass", curves);
  res.headline = "both alive at " + head;
}

// logistic

void run_logistic(const RunConfig& cfg, const ExperimentOptions&, Artifacts& art, ExperimentResult& res) {
  Csv csv({"m", "eps", "regime", "gamma", "N0", "n0", "gamma_halvings", "ok"});
  Ndjson nd;
  int ok = 0, total = 0;
  std::vector<Series> curves;
  for (double m : cfg.m_values)
    for (double eps : cfg.eps_values) {
      ++total;
      std::string regime = "error";
      try {
        const auto seq = lemma12_sequences(m, eps);
        const bool good = verify_lemma12(seq).ok();
        ok += good;
        regime = seq.regime == Lemma12Case::below_two ? "below_two"
                 : seq.regime == Lemma12Case::at_two  ? "at_two"
                                                      : "above_two";
        csv.row(m, eps, regime, seq.gamma, seq.N0, seq.n0, seq.gamma_halvings, good);
        Series a{"m=" + format_double(m) + " eps=" + format_double(eps), {}, {}};
        for (std::size_t n = 0; n < seq.alphas.size(); ++n) {
          Json j;
          j["m"] = m;
          j["eps"] = eps;
          j["n"] = n;
          j["alpha"] = seq.alphas[n];
          j["beta"] = seq.betas[n];
          nd.add(j);
          a.x.push_back(static_cast<double>(n));
          a.y.push_back(seq.betas[n] - seq.alphas[n]);
        }
        if (curves.size() < 6) curves.push_back(a);
      } catch (const ConstructionError&) {
        csv.row(m, eps, regime, 0.0, -1, -1, 0, false);
      }
    }
  art.text("summary.csv", csv.text());
  art.text("series.ndjson", nd.text());
  art.chart("widths.svg", "interval widths beta_n - alpha_n", "n", "width", curves);
  res.headline = std::to_string(ok) + "/" + std::to_string(total) + " interval sequences verified";
}

// lemma7

void run_lemma7(const RunConfig& cfg, const ExperimentOptions& opt, Artifacts& art, ExperimentResult& res) {
  if (!(cfg.m > 1.0)) throw ConfigError("lemma7 needs m > 1");
  std::vector<Lemma7Verdict> verdicts(static_cast<std::size_t>(cfg.replicas));
  for_replicas(cfg.replicas, opt.threads, [&](int r) {
    Lemma7Options lo;
    lo.adversary_seed = replica_seed(cfg, r);
    try {
      verdicts[static_cast<std::size_t>(r)] =
          lemma7_sandbox(cfg.model, cfg.eps1, cfg.eps2, cfg.delta, cfg.K, cfg.m_tilde, lo);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("lemma7: ") + e.what());
    }
  });
  Csv csv({"replica", "adversary_seed", "occupied", "b1_held", "b2_held", "n_star", "unoccupied"});
  Ndjson nd;
  int ok = 0;
  for (int r = 0; r < cfg.replicas; ++r) {
    const auto& v = verdicts[static_cast<std::size_t>(r)];
    ok += v.occupied;
    csv.row(r, replica_seed(cfg, r), v.occupied, v.b1_held, v.b2_held, v.n_star, v.unoccupied.size());
    Json j;
    j["replica"] = r;
    j["occupied"] = v.occupied ? 1 : 0;
    j["lambda0_star"] = v.thresholds.lambda0_star;
    j["kappa_star"] = v.thresholds.kappa_star;
    j["alpha"] = v.thresholds.alpha;
    nd.add(j);
  }
  art.text("summary.csv", csv.text());
  art.text("series.ndjson", nd.text());
  res.headline = std::to_string(ok) + "/" + std::to_string(cfg.replicas) + " adversaries leave the unit ball occupied";
}

// percolation

void run_percolation(const RunConfig& cfg, const ExperimentOptions& opt, Artifacts& art, ExperimentResult& res) {
  struct Out {
    std::size_t cluster = 0, wet = 0, dry_clusters = 0, largest_dry = 0, exposed = 0, cells = 0;
    bool survived = false;
    std::vector<std::array<std::size_t, 3>> slices;  // C0, wet, exposed per time
  };
  std::vector<Out> outs(static_cast<std::size_t>(cfg.replicas));
  for_replicas(cfg.replicas, opt.threads, [&](int r) {
    const auto f = sample_percolation(cfg.theta, cfg.dim, cfg.half_width, cfg.horizon, replica_seed(cfg, r));
    const auto c = cluster_of_origin(f);
    const auto wd = classify_wet_dry(f);
    const auto ex = exposed_sites(f.grid, c, cfg.cone, cfg.burn_in);
    auto& o = outs[static_cast<std::size_t>(r)];
    o.cells = f.grid.cells();
    o.cluster = count(c);
    o.wet = count(wd.wet);
    o.dry_clusters = wd.dry_cluster_sizes.size();
    o.largest_dry = wd.dry_cluster_sizes.empty() ? 0 : wd.dry_cluster_sizes[0];
    o.exposed = count(ex);
    for (int n = 0; n <= cfg.horizon; ++n) {
      std::array<std::size_t, 3> s{0, 0, 0};
      for (std::size_t x = 0; x < f.grid.sites(); ++x) {
        const auto k = f.grid.cell(x, n);
        s[0] += c[k];
        s[1] += wd.wet[k];
        s[2] += ex[k];
      }
      o.slices.push_back(s);
    }
    o.survived = o.slices.back()[0] > 0;
  });
  Csv csv({"replica", "seed", "cluster_size", "survived", "wet_fraction", "dry_clusters", "largest_dry", "exposed"});
  Ndjson nd;
  int survived = 0, clean = 0;
  for (int r = 0; r < cfg.replicas; ++r) {
    const auto& o = outs[static_cast<std::size_t>(r)];
    survived += o.survived;
    clean += o.survived && o.exposed == 0;
    csv.row(r, replica_seed(cfg, r), o.cluster, o.survived, static_cast<double>(o.wet) / static_cast<double>(o.cells),
            o.dry_clusters, o.largest_dry, o.exposed);
    for (std::size_t n = 0; n < o.slices.size(); ++n) {
      Json j;
      j["replica"] = r;
      j["time"] = n;
      j["cluster"] = o.slices[n][0];
      j["wet"] = o.slices[n][1];
      j["exposed"] = o.slices[n][2];
      nd.add(j);
    }
  }
  art.text("summary.csv", csv.text());
  art.text("series.ndjson", nd.text());
  Series cs{"cluster width, replica 0", {}, {}};
  for (std::size_t n = 0; n < outs[0].slices.size(); ++n) {
    cs.x.push_back(static_cast<double>(n));
    cs.y.push_back(static_cast<double>(outs[0].slices[n][0]));
  }
  art.chart("cluster.svg", "cells of the origin cluster per time", "time", "cells", {cs});
  res.headline = std::to_string(survived) + "/" + std::to_string(cfg.replicas) + " clusters reach the horizon, " +
                 std::to_string(clean) + " of them with no exposed sites";
}

// survival sweep

void run_survival_sweep(const RunConfig& cfg, const ExperimentOptions& opt, Artifacts& art, ExperimentResult& res) {
  const std::vector<double> lambdas = cfg.lambda0_values.empty() ? std::vector<double>{cfg.lambda0} : cfg.lambda0_values;
  const std::size_t R = static_cast<std::size_t>(cfg.replicas);
  std::vector<ModelParams> models;
  std::vector<CountField> starts;
  for (double l : lambdas) {
    models.push_back(model_for_lambda0(cfg, l));
    starts.push_back(initial_field(cfg, models.back()));
  }
  std::vector<RunRecord> recs(lambdas.size() * R);
  parallel_for(recs.size(), opt.threads, [&](std::size_t i) {
    RunOptions ro;
    ro.early_stop = cfg.early_stop;
    ro.occ = occupancy(cfg);
    recs[i] = run_trajectory(starts[i / R], models[i / R], cfg.steps, replica_seed(cfg, static_cast<int>(i % R)), ro);
  });
  Csv csv({"lambda0", "replica", "seed", "extinct", "extinction_step", "final_mass", "occupation_frequency"});
  Ndjson nd;
  std::string head;
  std::vector<Series> curves;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    int alive = 0;
    for (std::size_t r = 0; r < R; ++r) {
      const auto& rec = recs[l * R + r];
      alive += !rec.extinct;
      csv.row(lambdas[l], r, rec.seed, rec.extinct, rec.extinction_step, rec.stats.back().mass,
              occupation_frequency(rec));
      for (const auto& s : rec.stats) {
        Json j;
        j["lambda0"] = lambdas[l];
        j["replica"] = r;
        j.update(stats_json(s));
        nd.add(j);
      }
    }
    head += (l ? ", " : "") + format_double(lambdas[l]) + ": " + std::to_string(alive) + "/" + std::to_string(R);
    Series s = mass_series("lambda0 " + format_double(lambdas[l]), recs[l * R].stats);
    for (double& y : s.y) y *= lambdas[l];
    curves.push_back(s);
  }
  art.text("summary.csv", csv.text());
  art.text("series.ndjson", nd.text());
  art.chart("mass.svg", "lambda0 x total mass, replica 0", "step", "scaled mass", curves);
  res.headline = "alive at step " + std::to_string(cfg.steps) + " by lambda0: " + head;
}

// complete convergence

CountField second_law_start(const RunConfig& cfg, std::uint64_t seed) {
  // Half the sites, chosen by a keyed coin, carry init_value individuals.
  CountField f(cfg.model.lattice, 0);
  for (std::size_t x = 0; x < f.size(); ++x)
    if (keyed_uniform({seed, kStreamExtension + 1, 0, x, 0}) < 0.5) f[x] = std::llround(cfg.init_value);
  return f;
}

void run_complete_convergence(const RunConfig& cfg, const ExperimentOptions& opt, Artifacts& art,
                              ExperimentResult& res) {
  const double mbar = derived_constants(cfg.model).m_bar_kappa;
  const auto window = cfg.model.lattice.ball(Offset{}, cfg.window_radius);
  const std::size_t origin = cfg.model.lattice.index(Offset{});
  const std::size_t R = static_cast<std::size_t>(cfg.replicas);
  struct Out {
    bool extinct = false;
    double origin_mean = 0.0;
    std::map<std::int64_t, std::int64_t> hist;
    std::vector<double> mass;
  };
  std::vector<Out> outs(2 * R);
  const MeanEvaluator eval(cfg.model);
  parallel_for(outs.size(), opt.threads, [&](std::size_t i) {
    const std::size_t law = i / R;
    const std::uint64_t seed = replica_seed(cfg, static_cast<int>(i % R)) + law;
    CountField xi = law == 0 ? initial_field(cfg, cfg.model) : second_law_start(cfg, seed);
    const RngKeyStream rng(seed);
    auto& o = outs[i];
    double sum = 0.0;
    std::int64_t samples = 0;
    for (std::int64_t t = 0; t <= cfg.steps; ++t) {
      o.mass.push_back(total_mass(xi));
      if (t > cfg.burn) {
        sum += static_cast<double>(xi[origin]);
        ++samples;
        for (std::size_t x : window)
          ++o.hist[static_cast<std::int64_t>(std::floor(static_cast<double>(xi[x]) / cfg.bin_width))];
      }
      if (t == cfg.steps) break;
      if (o.mass.back() == 0.0) {
        o.extinct = true;
        break;
      }
      xi = stochastic_step(xi, eval, rng, static_cast<std::uint64_t>(t));
    }
    o.extinct = o.extinct || total_mass(xi) == 0.0;
    o.origin_mean = samples ? sum / static_cast<double>(samples) : 0.0;
  });

  Csv csv({"law", "replica", "seed", "extinct", "origin_mean", "relative_error"});
  Ndjson nd;
  std::map<std::int64_t, double> h[2];
  double tot[2] = {0, 0}, means[2] = {0, 0};
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const std::size_t law = i / R, r = i % R;
    const auto& o = outs[i];
    csv.row(law == 0 ? "A" : "B", r, replica_seed(cfg, static_cast<int>(r)) + law, o.extinct, o.origin_mean,
            std::abs(o.origin_mean - mbar) / mbar);
    means[law] += o.origin_mean / static_cast<double>(R);
    for (const auto& [b, c] : o.hist) {
      h[law][b] += static_cast<double>(c);
      tot[law] += static_cast<double>(c);
    }
    for (std::size_t t = 0; t < o.mass.size(); ++t) {
      Json j;
      j["law"] = law == 0 ? "A" : "B";
      j["replica"] = r;
      j["time"] = t;
      j["mass"] = o.mass[t];
      nd.add(j);
    }
  }
  std::map<std::int64_t, std::pair<double, double>> bins;
  for (int law = 0; law < 2; ++law)
    for (const auto& [b, c] : h[law]) (law == 0 ? bins[b].first : bins[b].second) = tot[law] > 0 ? c / tot[law] : 0.0;
  double tv = 0.0;
  Csv hist({"bin_low", "law_A", "law_B"});
  Series sa{"law A", {}, {}}, sb{"law B", {}, {}};
  for (const auto& [b, pq] : bins) {
    tv += 0.5 * std::abs(pq.first - pq.second);
    hist.row(static_cast<double>(b) * cfg.bin_width, pq.first, pq.second);
    sa.x.push_back(static_cast<double>(b) * cfg.bin_width);
    sb.x.push_back(static_cast<double>(b) * cfg.bin_width);
    sa.y.push_back(pq.first);
    sb.y.push_back(pq.second);
  }
  Csv cmp({"metric", "value"});
  cmp.row("m_bar", mbar);
  cmp.row("origin_mean_A", means[0]);
  cmp.row("origin_mean_B", means[1]);
  cmp.row("tv_distance", tv);
  art.text("summary.csv", csv.text());
  art.text("series.ndjson", nd.text());
  art.text("histogram.csv", hist.text());
  art.text("comparison.csv", cmp.text());
  art.chart("histogram.svg", "window marginals after burn-in", "value", "probability", {sa, sb});
  res.headline = "origin means " + format_double(means[0]) + " / " + format_double(means[1]) + " (m_bar " +
                 format_double(mbar) + "), TV " + format_double(tv);
}

}  // namespace

CountField initial_field(const RunConfig& cfg, const ModelParams& model) {
  CountField f(model.lattice, 0);
  if (cfg.init == "zero") return f;
  if (cfg.init == "mbar") {
    const double mb = derived_constants(model).m_bar_kappa;
    if (!(mb > 0.0)) throw ConfigError("init = mbar needs m > 1");
    for (auto& v : f.values()) v = std::llround(mb);
    return f;
  }
  const Count v = std::llround(cfg.init_value);
  if (v < 0) throw ConfigError("init_value must be >= 0");
  if (cfg.init == "single")
    f.at(Offset{}) = v;
  else
    for (auto& x : f.values()) x = v;
  return f;
}

std::pair<CountField, CountField> coupled_starts(const RunConfig& cfg) {
  const auto base = initial_field(cfg, cfg.model);
  CountField a = base, b = base;
  for (std::size_t x = 0; x < base.size(); ++x) {
    const double u = cfg.perturbation * std::sin(0.7 * static_cast<double>(x) + 0.3);
    const double w = cfg.perturbation * std::cos(1.3 * static_cast<double>(x));
    a[x] = std::max<Count>(0, base[x] + std::llround(u));
    b[x] = std::max<Count>(0, base[x] - std::llround(w));
  }
  return {a, b};
}

ExperimentResult run_experiment(const RunConfig& cfg, const ExperimentOptions& options) {
  if (!cfg.kind) throw ConfigError("no experiment selected");
  ExperimentResult res;
  Artifacts art(options, res);
  switch (*cfg.kind) {
    case ExperimentKind::simulate: run_simulate(cfg, options, art, res); break;
    case ExperimentKind::cml: run_cml(cfg, options, art, res); break;
    case ExperimentKind::couple: run_couple(cfg, options, art, res); break;
    case ExperimentKind::two_species: run_two_species(cfg, options, art, res); break;
    case ExperimentKind::logistic: run_logistic(cfg, options, art, res); break;
    case ExperimentKind::lemma7: run_lemma7(cfg, options, art, res); break;
    case ExperimentKind::percolation: run_percolation(cfg, options, art, res); break;
    case ExperimentKind::survival_sweep: run_survival_sweep(cfg, options, art, res); break;
    case ExperimentKind::coexistence_sweep: run_coexistence_sweep(cfg, options, art, res); break;
    case ExperimentKind::complete_convergence: run_complete_convergence(cfg, options, art, res); break;
  }
  return res;
}

}  // namespace lrbs
