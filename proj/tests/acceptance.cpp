// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "lrbs/cml.hpp"
#include "lrbs/experiment.hpp"
#include "lrbs/logistic.hpp"
#include "lrbs/percolation.hpp"
#include "lrbs/stochastic.hpp"
#include "oracles.hpp"
#include "stats.hpp"

using namespace lrbs;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(LRBS_SOURCE_DIR) / "configs";
const fs::path kOut = fs::temp_directory_path() / "lrbs_acceptance";

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error("no column " + name);
  }
  std::vector<std::string> column(const std::string& name) const {
    const auto c = col(name);
    std::vector<std::string> out;
    for (const auto& r : rows) out.push_back(r.at(c));
    return out;
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

Table read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  Table t;
  std::string line;
  std::getline(in, line);
  t.header = split(line);
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(split(line));
  return t;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path run_preset(const std::string& name, unsigned threads, const std::string& tag = "t1") {
  const auto cfg = load_config((kConfigs / (name + ".cfg")).string());
  const auto out = kOut / tag / name;
  fs::remove_all(out);
  run_experiment(cfg, {out.string(), true, threads});
  return out;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  failures += !o.pass;
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << o.detail << " (" << secs << " s)";
  std::cout << s.str() << std::endl;
}

ModelParams model_1d(double m, double lambda0, double kappa, int extent) {
  return make_model(m, lazy_walk(1, 0.5), nearest_neighbour_competition(1, lambda0, kappa), Lattice(1, {extent}));
}

Offset o1(int x) { return Offset{x, 0, 0}; }

// 1

Outcome fixed_point_exactness() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> um(1.05, 3.5), ul(-4.0, -1.0), uk(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double m = um(gen), lambda0 = std::pow(10.0, ul(gen)), kappa = uk(gen) * lambda0;
    const int dim = 1 + i % 2;
    auto params = make_model(m, lazy_walk(dim, 0.3), nearest_neighbour_competition(dim, lambda0, kappa),
                             Lattice(dim, std::vector<int>(static_cast<std::size_t>(dim), 7)));
    const double mb = derived_constants(params).m_bar_kappa;
    const auto next = cml_step(RealField(params.lattice, mb), params);
    for (double v : next.values()) worst = std::max(worst, std::abs(v - mb) / mb);
  }
  return {worst <= 1e-12, "max relative change " + format_double(worst)};
}

// 2

Outcome horizon_oracle() {
  struct Case {
    DispersalKernel p;
    double m_tilde;
  };
  std::vector<Case> cases = {
      {lazy_walk(1, 0.5), 1.5},
      {lazy_walk(1, 0.5), 1.2},
      {lazy_walk(1, 0.2), 1.5},
      {lazy_walk(2, 0.2), 1.5},
      {uniform_box_walk(1, 1), 1.3},
      {uniform_box_walk(2, 1), 2.0},
      {make_dispersal_kernel(1, {{o1(-2), 0.2}, {o1(0), 0.4}, {o1(1), 0.4}}), 1.5},
  };
  int agree = 0;
  for (const auto& c : cases) agree += colonization_horizon(c.p, c.m_tilde) == oracle::brute_force_horizon(c.p, c.m_tilde, 12);
  const int lazy = colonization_horizon(lazy_walk(1, 0.5), 1.5);
  return {agree == static_cast<int>(cases.size()) && lazy == 4,
          std::to_string(agree) + "/" + std::to_string(cases.size()) + " kernels agree, lazy walk n* = " +
              std::to_string(lazy)};
}

// 3

Outcome interval_suite() {
  int fails = 0, total = 0;
  for (double m : {1.2, 1.5, 2.0, 2.3, 2.7, 2.9})
    for (double eps : {0.1, 0.01}) {
      ++total;
      try {
        const auto s = lemma12_sequences(m, eps);
        const bool ok = verify_lemma12(s).ok() && oracle::interval_sequences_ok(m, s.gamma, eps, s.alphas, s.betas, s.N0);
        fails += !ok;
      } catch (const std::exception&) {
        ++fails;
      }
    }
  return {fails == 0, std::to_string(total - fails) + "/" + std::to_string(total) + " (m, eps) pairs verified"};
}

// 4

Outcome gradient_check() {
  std::mt19937_64 gen(404);
  std::uniform_real_distribution<double> um(1.2, 2.9), ul(-3.0, -1.0), uk(0.0, 0.05), u01(0.0, 1.0);
  double worst = 0.0;
  for (int pt = 0; pt < 50; ++pt) {
    const double m = um(gen), lambda0 = std::pow(10.0, ul(gen)), kappa = uk(gen) * lambda0, delta = 0.1;
    auto params =
        make_model(m, lazy_walk(2, 0.2), nearest_neighbour_competition(2, lambda0, kappa), Lattice(2, {5, 5}));
    const MeanEvaluator eval(params);
    RealField z(params.lattice);
    for (auto& v : z.values()) v = (m - 1 - delta + 2 * delta * u01(gen)) / lambda0;
    const std::size_t x = 12;
    const double h = 1e-6 * z[x];
    for (const auto& e : eval.gradient(x, z)) {
      const auto y = *params.lattice.shifted(x, e.offset);
      RealField zp = z, zm = z;
      zp[y] += h;
      zm[y] -= h;
      const double fd = (local_mean_offspring(x, zp, params) - local_mean_offspring(x, zm, params)) / (2 * h);
      worst = std::max(worst, std::abs(fd - e.weight) / std::max(std::abs(e.weight), 1e-3));
    }
  }

  // Whenever the constants hold, the sup bound must dominate sampled l1 gradients and contract.
  std::uniform_real_distribution<double> ud(0.0, 0.5), ur(0.0, 0.2);
  int held = 0, violated = 0;
  for (int i = 0; i < 2000; ++i) {
    const double m = 1.05 + 1.9 * u01(gen), delta = ud(gen), kr = ur(gen);
    if (1 - delta - kr * (m - 1 + delta) <= 0 || m - 1 - delta < 0) continue;
    const auto c = contraction_bound(m, kr, delta);
    if (!c.constants_hold) continue;
    ++held;
    if (!c.contraction_ok) ++violated;
    auto params = make_model(m, lazy_walk(1, 0.5), nearest_neighbour_competition(1, 1.0, kr), Lattice(1, {5}));
    const MeanEvaluator eval(params);
    RealField z(params.lattice);
    for (auto& v : z.values()) v = m - 1 - delta + 2 * delta * u01(gen);
    double l1 = 0.0;
    for (const auto& e : eval.gradient(2, z)) l1 += std::abs(e.weight);
    if (l1 > c.grad_sup + 1e-12) ++violated;
  }
  return {worst <= 1e-6 && held > 50 && violated == 0,
          "max relative FD error " + format_double(worst) + ", bound checked on " + std::to_string(held) +
              " constant sets with " + std::to_string(violated) + " violations"};
}

// 5

Outcome coupling_marginal() {
  auto params = make_model(2.3, lazy_walk(1, 0.5), nearest_neighbour_competition(1, 0.05, 0.01), Lattice(1, {7}));
  const MeanEvaluator eval(params);
  const CountField base(params.lattice, 25);
  std::vector<CountField> others;
  others.emplace_back(params.lattice, 0);
  others.emplace_back(params.lattice, 40);
  CountField ramp(params.lattice, 0);
  for (std::size_t x = 0; x < ramp.size(); ++x) ramp[x] = static_cast<Count>(6 * x);
  others.push_back(ramp);
  double min_p = 1.0;
  for (const auto& other : others) {
    std::vector<Count> coupled, direct;
    for (std::uint64_t i = 0; i < 100000; ++i) {
      coupled.push_back(coupled_step({base, other, 0}, eval, i).xi1[3]);
      direct.push_back(stochastic_step(base, eval, RngKeyStream(derive_seed(11, i)), 0)[3]);
    }
    min_p = std::min(min_p, stats::two_sample_chi_square(coupled, direct).p_value);
  }

  std::mt19937_64 gen(55);
  std::uniform_int_distribution<Count> uv(0, 60);
  int broken = 0;
  for (std::uint64_t trial = 0; trial < 10000; ++trial) {
    CountField a(params.lattice, 0), b(params.lattice, 0);
    for (std::size_t x = 0; x < a.size(); ++x) {
      a[x] = uv(gen);
      b[x] = x < 3 ? a[x] : uv(gen);
    }
    b[3] = a[3] = uv(gen);
    auto next = coupled_step({a, a, 0}, eval, trial);
    broken += next.xi1 != next.xi2;
    // agreement carried over from the previous step never breaks at sites whose inputs agree
    next = coupled_step({a, b, 0}, eval, trial);
    const auto Fa = eval.means(a), Fb = eval.means(b);
    for (std::size_t x = 0; x < a.size(); ++x)
      if (Fa[x] == Fb[x]) broken += next.xi1[x] != next.xi2[x];
  }
  return {min_p > 0.001 && broken == 0,
          "min chi-square p " + format_double(min_p) + ", " + std::to_string(broken) + " broken agreements in 1e4 trials"};
}

// 6

Outcome extinction_survival() {
  const auto ext = read_csv(run_preset("simulate_extinction", 1) / "summary.csv");
  int extinct = 0;
  for (const auto& v : ext.column("extinct")) extinct += v == "1";
  const auto sur = read_csv(run_preset("simulate_survival", 1) / "summary.csv");
  int alive = 0, freq_ok = 0;
  const auto e = sur.column("extinct");
  const auto f = sur.column("occupation_frequency");
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] == "0") {
      ++alive;
      freq_ok += std::stod(f[i]) >= 0.5;
    }
  return {extinct == 100 && static_cast<int>(ext.rows.size()) == 100 && alive >= 90 && freq_ok == alive,
          "m=0.9: " + std::to_string(extinct) + "/100 extinct; m=2: " + std::to_string(alive) +
              "/100 alive, " + std::to_string(freq_ok) + " survivors with frequency >= 0.5"};
}

// 7

Outcome deterministic_convergence() {
  int ok = 0, total = 0;
  int worst_steps = 0;
  for (double m : {1.5, 2.0, 2.5, 2.9}) {
    const auto t2 = attractivity_kappa_star(m);
    for (double kr : {0.0, 0.5 * t2.kappa_star, t2.kappa_star}) {
      ++total;
      const double lambda0 = 0.01;
      auto params = model_1d(m, lambda0, kr * lambda0, 41);
      const auto window = params.lattice.ball(o1(0), 2);
      RealField z(params.lattice, 0.0);
      z.at(o1(3)) = 1.0;
      const auto r = converge_locally(z, params, window, 1e-8, 5000);
      const double target = derived_constants(params).m_bar_kappa;
      if (r.converged && r.target == target && r.N0 <= 5000) ++ok;
      worst_steps = std::max(worst_steps, r.N0);
    }
  }
  auto params = model_1d(2.0, 0.01, 0.0, 41);
  RealField zero(params.lattice, 0.0);
  bool stays = true;
  for (int n = 0; n < 5000 && stays; ++n) {
    zero = cml_step(zero, params);
    for (double v : zero.values()) stays = stays && v == 0.0;
  }
  return {ok == total && stays, std::to_string(ok) + "/" + std::to_string(total) + " runs converged (latest N0 " +
                                    std::to_string(worst_steps) + "), zero start " + (stays ? "stays zero" : "moved")};
}

// 8

Outcome coupling_success() {
  const auto t = read_csv(run_preset("couple", 1) / "summary.csv");
  int ok = 0;
  for (const auto& v : t.column("merged")) ok += v != "none" && std::stoll(v) <= 2000;
  return {ok >= 45 && t.rows.size() == 50, std::to_string(ok) + "/50 replicas fully agree by step 2000"};
}

// 9

Outcome complete_convergence() {
  const auto out = run_preset("complete_convergence", 1);
  const auto cmp = read_csv(out / "comparison.csv");
  std::map<std::string, double> v;
  for (const auto& r : cmp.rows) v[r[0]] = std::stod(r[1]);
  const double mb = v["m_bar"];
  const double ea = std::abs(v["origin_mean_A"] - mb) / mb, eb = std::abs(v["origin_mean_B"] - mb) / mb;
  const auto s = read_csv(out / "summary.csv");
  int extinct = 0;
  for (const auto& x : s.column("extinct")) extinct += x == "1";
  return {ea <= 0.1 && eb <= 0.1 && v["tv_distance"] <= 0.1 && extinct == 0,
          "origin mean errors " + format_double(ea) + " / " + format_double(eb) + ", TV " +
              format_double(v["tv_distance"])};
}

// 10

Outcome coexistence() {
  const auto cfg = load_config((kConfigs / "two_species.cfg").string());
  if (!(cfg.cross >= 0.0 && cfg.cross <= 1.0)) return {false, "preset cross level is above gamma*"};
  const auto t = read_csv(run_preset("two_species", 1) / "summary.csv");
  int both = 0;
  for (const auto& v : t.column("both_alive")) both += v == "1";
  return {both >= 45 && t.rows.size() == 50, std::to_string(both) + "/50 replicas with both types alive at step 500"};
}

// 11

Outcome percolation_lab() {
  bool extremes = true;
  {
    auto f = sample_percolation(1.0, 2, 6, 5, 1);
    auto c = cluster_of_origin(f);
    for (int n = 0; n <= 5; ++n)
      for (std::size_t s = 0; s < f.grid.sites(); ++s)
        extremes = extremes && static_cast<bool>(c[f.grid.cell(s, n)]) == (sup_norm(f.grid.site_coords(s)) <= n);
    auto g = sample_percolation(0.0, 1, 6, 5, 1);
    extremes = extremes && count(cluster_of_origin(g)) == 1;
  }
  std::uint32_t mismatches = 0;
  {
    const int L = 2, H = 4, w = 5;
    PercolationField f{PercolationGrid(1, L, H), 0.5, CellSet(25, 0)};
    for (std::uint32_t bits = 0; bits < (1u << 20); ++bits) {
      for (int k = 0; k < 20; ++k) f.open[static_cast<std::size_t>(w + k)] = (bits >> k) & 1u;
      mismatches += cluster_of_origin(f) != oracle::enumerate_cluster(f.open, L, H);
    }
  }
  int monotone = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto lo = cluster_of_origin(sample_percolation(0.6, 1, 30, 30, s));
    auto hi = cluster_of_origin(sample_percolation(0.75, 1, 30, 30, s));
    bool ok = true;
    for (std::size_t c = 0; c < lo.size(); ++c) ok = ok && (!lo[c] || hi[c]);
    monotone += ok;
  }
  const auto t = read_csv(run_preset("percolation", 1) / "summary.csv");
  const auto surv = t.column("survived");
  const auto ex = t.column("exposed");
  int survivors = 0, clean = 0;
  for (std::size_t i = 0; i < surv.size(); ++i)
    if (surv[i] == "1") {
      ++survivors;
      clean += ex[i] == "0";
    }
  const bool proxy = survivors > 0 && clean >= 0.95 * survivors;
  return {extremes && mismatches == 0 && monotone == 100 && proxy,
          std::string("extremes ") + (extremes ? "ok" : "broken") + ", " + std::to_string(mismatches) +
              " enumeration mismatches, " + std::to_string(monotone) + "/100 monotone, " + std::to_string(clean) +
              "/" + std::to_string(survivors) + " survivors clean beyond burn-in"};
}

// 12

Outcome determinism() {
  int compared = 0, differing = 0;
  std::string first_diff;
  for (const auto& e : fs::directory_iterator(kConfigs)) {
    if (e.path().extension() != ".cfg") continue;
    const std::string name = e.path().stem().string();
    if (!fs::exists(kOut / "t1" / name)) run_preset(name, 1);
    const auto many = run_preset(name, 4, "t4");
    for (const auto& f : fs::recursive_directory_iterator(kOut / "t1" / name)) {
      if (!f.is_regular_file()) continue;
      const auto rel = fs::relative(f.path(), kOut / "t1" / name);
      ++compared;
      if (!fs::exists(many / rel) || slurp(f.path()) != slurp(many / rel)) {
        ++differing;
        if (first_diff.empty()) first_diff = (name / rel).string();
      }
    }
  }
  return {compared > 0 && differing == 0,
          std::to_string(compared) + " artifacts compared across 1 and 4 threads, " + std::to_string(differing) +
              " differ" + (first_diff.empty() ? "" : " (first: " + first_diff + ")")};
}

}  // namespace

int main() {
  fs::remove_all(kOut);
  report(1, "fixed-point exactness", fixed_point_exactness);
  report(2, "colonization horizon vs oracle", horizon_oracle);
  report(3, "interval sequences", interval_suite);
  report(4, "gradient check", gradient_check);
  report(5, "coupling marginal law", coupling_marginal);
  report(6, "extinction/survival contrast", extinction_survival);
  report(7, "deterministic convergence", deterministic_convergence);
  report(8, "coupling success", coupling_success);
  report(9, "complete-convergence proxy", complete_convergence);
  report(10, "coexistence", coexistence);
  report(11, "percolation lab", percolation_lab);
  report(12, "determinism", determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures;
}
