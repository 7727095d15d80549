#include "lrbs/cml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "lrbs/rng.hpp"

namespace lrbs {

RealField cml_step(const RealField& field, const MeanEvaluator& eval) {
  return RealField(field.lattice(), eval.means(field));
}

RealField cml_step(const RealField& field, const ModelParams& params) { return cml_step(field, MeanEvaluator(params)); }

SingleSiteMap logistic_site_map(double m) {
  return {[m](double x) { return x * std::max(0.0, m - x); }, m, m - 1.0};
}

RealField generalized_cml_step(const RealField& field, const SingleSiteMap& g, const DispersalKernel& p) {
  const auto& lat = field.lattice();
  const double tol = 1e-12 * std::max(1.0, g.G);
  std::vector<double> gv(field.size());
  for (std::size_t x = 0; x < field.size(); ++x) {
    const double v = field[x];
    if (v < -tol || v > g.G + tol) throw std::domain_error("field value outside [0, G]");
    gv[x] = g.g(v);
  }
  RealField out(lat, 0.0);
  for (std::size_t x = 0; x < field.size(); ++x) {
    double sum = 0.0;
    for (const auto& e : p.entries()) {
      auto y = lat.shifted(x, -e.offset);
      if (y) sum += gv[*y] * e.weight;
    }
    if (sum < -tol || sum > g.G + tol) throw std::domain_error("g does not map [0, G] into itself");
    out[x] = sum;
  }
  return out;
}

PerturbedStep perturbed_step_traced(const RealField& field, const MeanEvaluator& eval,
                                    const PerturbationProvider& provider, int time) {
  PerturbedStep out{eval.means(field), std::vector<double>(field.size()), RealField(field.lattice(), 0.0)};
  for (std::size_t x = 0; x < field.size(); ++x) {
    const double F = out.means[x];
    const double d = provider ? provider(x, time, F) : 0.0;
    out.deltas[x] = d;
    double v = F + d;
    if (v < 0.0) {
      if (v < -1e-12 * std::max(1.0, F))
        throw std::domain_error("perturbation below -F at site " + std::to_string(x) + ", time " + std::to_string(time));
      v = 0.0;
    }
    out.next[x] = v;
  }
  return out;
}

RealField perturbed_step(const RealField& field, const ModelParams& params, const PerturbationProvider& provider,
                         int time) {
  return perturbed_step_traced(field, MeanEvaluator(params), provider, time).next;
}

namespace {

template <class Pred>
ConditionReport check_box(const StepTrace& trace, const Lattice& lattice, const SpaceTimeBox& box,
                          const Offset& origin, Pred&& ok) {
  ConditionReport r;
  for (const auto& pt : box.points()) {
    if (pt.time < 0 || static_cast<std::size_t>(pt.time) >= trace.means.size()) continue;
    auto site = lattice.shifted(lattice.index(origin), pt.site);
    if (!site) continue;
    const auto n = static_cast<std::size_t>(pt.time);
    if (!ok(trace.means[n][*site], trace.deltas[n][*site])) {
      r.holds = false;
      r.violations.emplace_back(*site, pt.time);
    }
  }
  return r;
}

}  // namespace

ConditionReport check_B1(const StepTrace& trace, const ModelParams& params, double eps2, const SpaceTimeBox& box,
                         const Offset& origin) {
  const double cap = (1.0 - eps2) * derived_constants(params).M;
  return check_box(trace, params.lattice, box, origin, [cap](double F, double d) { return F + d <= cap; });
}

ConditionReport check_B2(const StepTrace& trace, const Lattice& lattice, double delta_rel, double K,
                         const SpaceTimeBox& box, const Offset& origin) {
  return check_box(trace, lattice, box, origin,
                   [=](double F, double d) { return F < K || std::abs(d) <= delta_rel * F; });
}

Lemma7Thresholds lemma7_thresholds(double m, const DispersalKernel& p, int competition_range, double eps1,
                                   double eps2, double delta, double K, double m_tilde) {
  if (!(m > 1.0 && m < 4.0)) throw std::invalid_argument("m must lie in (1, 4)");
  if (!(m_tilde > 1.0 && m * (1.0 - delta) > m_tilde)) throw std::invalid_argument("need m(1 - delta) > m_tilde > 1");
  if (!(K > 0.0)) throw std::invalid_argument("K must be positive");
  Lemma7Thresholds t;
  t.eps1 = eps1;
  t.eps2 = eps2;
  t.m_tilde = m_tilde;
  t.n_star = colonization_horizon(p, m_tilde);
  t.box_size = spacetime_box_X(p.dim(), p.range() + competition_range, t.n_star).size();

  // Growth levels v = p^n m_tilde^n eps1 m_bar on S (normalised scale lambda0 = 1).
  std::vector<double> levels;
  t.I_min = INFINITY;
  for (int n = 0; n <= t.n_star; ++n)
    for (const auto& [o, w] : kernel_power(p, n)) {
      const double g = w * std::pow(m_tilde, n);
      t.I_min = std::min(t.I_min, g);
      if (n < t.n_star) levels.push_back(g * eps1 * (m - 1.0));
    }
  t.lambda0_star = eps1 * (m - 1.0) * t.I_min / K;

  const double cap = (1.0 - eps2) * m;
  auto carries = [&](double alpha) {
    auto fl = [&](double z) { return z * std::max(0.0, m - alpha - z); };
    for (double v : levels)
      if ((1.0 - delta) * std::min(fl(v), fl(cap)) < m_tilde * v) return false;
    return true;
  };
  const double alpha_cap = 0.5 * (m - m_tilde);
  if (carries(alpha_cap)) {
    t.alpha = alpha_cap;
  } else if (carries(0.0)) {
    double lo = 0.0, hi = alpha_cap;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (carries(mid) ? lo : hi) = mid;
    }
    t.alpha = 0.95 * lo;
  }
  t.kappa_star = t.alpha / ((1.0 - eps2) * m);
  return t;
}

Lemma7Verdict lemma7_sandbox(const ModelParams& params, double eps1, double eps2, double delta, double K,
                             double m_tilde, const Lemma7Options& options) {
  const auto& p = params.p;
  const auto& lam = params.lambda;
  Lemma7Verdict verdict;
  verdict.thresholds = lemma7_thresholds(params.m, p, lam.range(), eps1, eps2, delta, K, m_tilde);
  const auto& th = verdict.thresholds;
  if (lam.lambda0() > th.lambda0_star * (1.0 + 1e-12))
    throw std::invalid_argument("lambda0 = " + std::to_string(lam.lambda0()) + " exceeds lambda0* = " +
                                std::to_string(th.lambda0_star));
  if (lam.kappa() > th.kappa_star * lam.lambda0() * (1.0 + 1e-12))
    throw std::invalid_argument("kappa exceeds kappa* lambda0");
  verdict.n_star = th.n_star;

  const int dim = p.dim();
  const int reach = params.reach();
  const int radius = th.n_star * reach + lam.range() + 1;
  std::vector<int> extents(static_cast<std::size_t>(dim), 2 * radius + 1);
  const auto local = make_model(params.m, p, lam, Lattice(dim, extents));
  const auto& lat = local.lattice;
  const MeanEvaluator eval(local);
  const auto box = spacetime_box_X(dim, reach, th.n_star);
  std::vector<std::vector<char>> in_box(static_cast<std::size_t>(th.n_star), std::vector<char>(lat.size(), 0));
  for (const auto& pt : box.points()) in_box[static_cast<std::size_t>(pt.time)][lat.index(pt.site)] = 1;

  const auto c = derived_constants(local);
  const double cap = (1.0 - eps2) * c.M;
  const double low = eps1 * c.m_bar_0;
  const OccupancyParams occ{eps1, eps2};
  const std::size_t origin = lat.index(Offset{});

  for (std::size_t s = 0; s < options.start_fractions.size(); ++s) {
    const RngKeyStream rng(options.adversary_seed, s);
    PerturbationProvider adversary = [&](std::size_t x, int n, double F) -> double {
      if (options.inject_b1_violation && n == 0 && x == origin) return 1.5 * cap - F;
      if (options.zero_adversary || !in_box[static_cast<std::size_t>(n)][x]) return 0.0;
      const double u = rng.uniform(static_cast<std::uint64_t>(n), x);
      if (F >= K) {
        double d = (u < 0.5 ? 1.0 : -1.0) * delta * F;
        if (F + d > cap) d = cap - F;
        return d;
      }
      return u < 0.5 ? -F : cap - F;
    };
    RealField zeta(lat, 0.0);
    zeta[origin] = low + options.start_fractions[s] * (cap - low);
    StepTrace trace;
    for (int n = 0; n < th.n_star; ++n) {
      auto st = perturbed_step_traced(zeta, eval, adversary, n);
      trace.means.push_back(std::move(st.means));
      trace.deltas.push_back(std::move(st.deltas));
      zeta = std::move(st.next);
    }
    verdict.b1_held = verdict.b1_held && check_B1(trace, local, eps2, box).holds;
    verdict.b2_held = verdict.b2_held && check_B2(trace, lat, delta, K, box).holds;
    bool all = true;
    std::vector<Offset> bad;
    for (std::size_t x : lat.ball(Offset{}, 1))
      if (!is_occupied(x, zeta, local, occ)) {
        all = false;
        bad.push_back(lat.coords(x));
      }
    if (!all && verdict.occupied) verdict.unoccupied = bad;
    verdict.occupied = verdict.occupied && all;
  }
  return verdict;
}

namespace {

template <class Step>
ConvergenceReport converge(RealField field, double target, const std::vector<std::size_t>& window, double tol,
                           int max_steps, int hold, Step&& step) {
  ConvergenceReport r;
  r.target = target;
  auto deviation = [&](const RealField& f) {
    double d = 0.0;
    for (std::size_t x : window) d = std::max(d, std::abs(f[x] - target));
    return d;
  };
  int run = 0;
  for (int n = 0;; ++n) {
    const double d = deviation(field);
    r.history.push_back(d);
    run = d <= tol ? run + 1 : 0;
    if (run >= hold || n >= max_steps) break;
    if (std::all_of(field.values().begin(), field.values().end(), [](double v) { return v == 0.0; })) break;
    field = step(field);
  }
  r.converged = r.history.back() <= tol;
  if (r.converged) {
    int n0 = static_cast<int>(r.history.size()) - 1;
    while (n0 > 0 && r.history[static_cast<std::size_t>(n0) - 1] <= tol) --n0;
    r.N0 = n0;
  }
  return r;
}

}  // namespace

ConvergenceReport converge_locally(const RealField& field0, const ModelParams& params,
                                   const std::vector<std::size_t>& window, double tol, int max_steps, int hold) {
  const MeanEvaluator eval(params);
  const double target = derived_constants(params).m_bar_kappa;
  return converge(field0, target, window, tol, max_steps, hold, [&](const RealField& f) { return cml_step(f, eval); });
}

ConvergenceReport converge_locally(const RealField& field0, const SingleSiteMap& g, const DispersalKernel& p,
                                   const std::vector<std::size_t>& window, double tol, int max_steps, int hold) {
  return converge(field0, g.a_bar, window, tol, max_steps, hold,
                  [&](const RealField& f) { return generalized_cml_step(f, g, p); });
}

NestedBoxes nested_boxes(const Lattice& lattice, const Offset& center, int radius, int n0, int n1, int r) {
  if (n0 < 0 || n1 < 0 || r < 0 || radius < 0) throw std::invalid_argument("nested_boxes needs nonnegative sizes");
  NestedBoxes b;
  b.center = center;
  b.prime_radius = radius + (n0 + n1) * r;
  if (b.prime_radius > lattice.max_ball_radius())
    throw GeometryError("outer box radius " + std::to_string(b.prime_radius) + " does not fit the lattice");
  b.prime_sites = lattice.ball(center, b.prime_radius);
  for (int i = 0; i <= n0; ++i) {
    b.radii.push_back(radius + (n0 - i) * r);
    b.sites.push_back(lattice.ball(center, b.radii.back()));
  }
  return b;
}

InvariantSet make_invariant_set(const Lattice& lattice, const NestedBoxes& boxes, const IntervalSequencePair& seq) {
  const std::size_t n0 = boxes.sites.size() - 1;
  if (seq.alphas.size() <= n0) throw std::invalid_argument("interval sequences shorter than the box nesting");
  InvariantSet set;
  set.boxes = boxes;
  set.alphas.assign(seq.alphas.begin(), seq.alphas.begin() + static_cast<std::ptrdiff_t>(n0) + 1);
  set.betas.assign(seq.betas.begin(), seq.betas.begin() + static_cast<std::ptrdiff_t>(n0) + 1);
  set.levels.assign(lattice.size(), 0);
  for (std::size_t k = 0; k <= n0; ++k)
    for (std::size_t x : boxes.sites[k]) set.levels[x] = static_cast<int>(k);
  return set;
}

bool InvariantSet::contains(const RealField& field) const {
  for (std::size_t x = 0; x < field.size(); ++x) {
    const auto k = static_cast<std::size_t>(levels[x]);
    if (field[x] < alphas[k] || field[x] > betas[k]) return false;
  }
  return true;
}

AttractivityConstants attractivity_kappa_star(double m) {
  if (!(m > 1.0 && m < 3.0)) throw std::invalid_argument("m must lie in (1, 3)");
  AttractivityConstants t;
  const double slope = std::abs(m - 2.0);
  t.delta = (1.0 - slope) / 4.0;
  t.eps = (1.0 - slope) / 4.0;
  t.lemma12_gamma = lemma12_sequences(m, t.delta).gamma;
  const double d = t.delta, e = t.eps;
  t.kappa_star = 0.95 * std::min({(1.0 - slope - 2.0 * d - e) / (d + m - 1.0), d / (m - 1.0), e / (2.0 * (2.0 + d)),
                                  d / m, t.lemma12_gamma / m});
  return t;
}

double coexistence_gamma_star(double m1, const DispersalKernel& p1, double kappa_rel1, double m2,
                              const DispersalKernel& p2, double kappa_rel2, int competition_range, double delta,
                              double K) {
  const double ms[2] = {m1, m2}, kr[2] = {kappa_rel1, kappa_rel2};
  const DispersalKernel* ps[2] = {&p1, &p2};
  double gamma = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i) {
    const double mt = default_m_tilde(ms[i]);
    const auto eps = choose_epsilons(ms[i], delta, mt, *ps[i]);
    const auto th = lemma7_thresholds(ms[i], *ps[i], competition_range, eps.eps1, eps.eps2, delta, K, mt);
    const double slack = th.alpha - kr[i] * (1.0 - eps.eps2) * ms[i];
    gamma = std::min(gamma, slack / ((1.0 - eps.eps2) * ms[1 - i]));
  }
  return std::max(0.0, gamma);
}

}  // namespace lrbs
