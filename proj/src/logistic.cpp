#include "lrbs/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace lrbs {

double LogisticMap::operator()(double x) const {
  const double bracket = m - shift - scale * x;
  return bracket > 0.0 ? x * bracket : 0.0;
}

double eval_map(const LogisticMap& map, double x) { return map(x); }

FixedPoints fixed_points(const LogisticMap& map) {
  FixedPoints fp;
  fp.has_positive = map.m - map.shift > 1.0;
  if (fp.has_positive) fp.positive = (map.m - map.shift - 1.0) / map.scale;
  return fp;
}

Interval image_of_interval(const LogisticMap& map, double a, double b) {
  if (a > b) std::swap(a, b);
  const double fa = map(a), fb = map(b);
  Interval out{std::min(fa, fb), std::max(fa, fb)};
  const double v = map.vertex();
  if (v >= a && v <= b) out.hi = std::max(out.hi, map(v));
  return out;
}

namespace {

constexpr int kMaxGammaHalvings = 40;
constexpr int kMaxSteps = 1'000'000;

struct Attempt {
  IntervalSequencePair seq;
  bool built = false;
};

// First index with both ends inside [m_bar - eps, m_bar + eps], or -1.
int window_index(const std::vector<double>& a, const std::vector<double>& b, double m_bar, double eps) {
  for (std::size_t n = 0; n < a.size(); ++n)
    if (a[n] >= m_bar - eps && a[n] <= m_bar + eps && b[n] >= m_bar - eps && b[n] <= m_bar + eps)
      return static_cast<int>(n);
  return -1;
}

Attempt build(double m, double eps, double gamma, double alpha0_in) {
  Attempt at;
  auto& s = at.seq;
  s.m = m;
  s.eps = eps;
  s.gamma = gamma;
  const LogisticMap f{m, 0.0, 1.0};
  const LogisticMap fg{m, gamma, 1.0};
  const double m_bar = m - 1.0;
  const double m_star = m * m / 4.0;
  double alpha0 = alpha0_in > 0.0 ? alpha0_in : std::min(eps, m_bar / 10.0);
  auto& al = s.alphas;
  auto& be = s.betas;

  // Extends both sequences by one index.
  std::function<void()> step;

  if (m < 2.0) {
    s.regime = Lemma12Case::below_two;
    al.push_back(alpha0);
    be.push_back(m - gamma - 1.01 * alpha0);
    if (!(fg(be[0]) >= fg(al[0]) && be[0] > m / 2.0)) return at;
    al.push_back((al[0] + fg(al[0])) / 2.0);
    be.push_back((m_star + m / 2.0) / 2.0);
    step = [&] {
      const double a = al.back(), b = be.back();
      al.push_back((a + fg(a)) / 2.0);
      be.push_back((f(b) + b) / 2.0);
    };
    s.alpha_limit = m_bar - gamma;
    s.beta_limit = m_bar;
  } else if (m == 2.0) {
    s.regime = Lemma12Case::at_two;
    if (alpha0_in <= 0.0) alpha0 = std::min(alpha0, gamma / 2.0);
    const double h = (2.0 - gamma) / 2.0;
    auto larger_root = [&](double a) { return h + std::sqrt(std::max(0.0, h * h - fg(a))); };
    al.push_back(alpha0);
    be.push_back(larger_root(alpha0));
    step = [&] {
      const double a = al.back();
      const double next = (a + fg(a)) / 2.0;
      al.push_back(next);
      be.push_back(larger_root(next));
    };
    s.alpha_limit = 1.0 - gamma;
    s.beta_limit = 1.0;
  } else {
    s.regime = Lemma12Case::above_two;
    const double fgm = fg(m_star);
    if (!(m_bar - gamma > fgm && fgm > m / 2.0)) return at;
    if (!(alpha0 < (m - gamma) / 2.0)) return at;
    al.push_back(alpha0);
    while ((al.back() + fg(al.back())) / 2.0 <= m / 2.0) {
      if (al.size() > static_cast<std::size_t>(kMaxSteps)) return at;
      al.push_back((al.back() + fg(al.back())) / 2.0);
    }
    s.n0 = static_cast<int>(al.size()) - 1;
    const double a_n0 = al.back();
    al.push_back(std::min((a_n0 + fg(a_n0)) / 2.0, (m / 2.0 + fgm) / 2.0));
    const double h = (m - gamma) / 2.0;
    auto larger_root = [&](double t) { return h + std::sqrt(std::max(0.0, h * h - t)); };
    double prev = m;
    for (int i = 0; i <= s.n0; ++i) {
      const double b = (m_star + std::min(prev, larger_root(al[static_cast<std::size_t>(i) + 1]))) / 2.0;
      be.push_back(b);
      prev = b;
    }
    be.push_back((be.back() + m_star) / 2.0);
    step = [&] {
      const double a = al.back(), b = be.back();
      al.push_back((fg(b) + a) / 2.0);
      be.push_back((b + f(a)) / 2.0);
    };
    // The limit pair solves f(alpha) = beta, f_gamma(beta) = alpha.
    double a = al.back(), b = be.back();
    for (int k = 0; k < kMaxSteps; ++k) {
      const double a2 = (fg(b) + a) / 2.0, b2 = (b + f(a)) / 2.0;
      if (a2 == a && b2 == b) break;
      a = a2;
      b = b2;
    }
    s.alpha_limit = a;
    s.beta_limit = b;
  }

  int N0 = window_index(al, be, m_bar, eps);
  while (N0 < 0 || static_cast<int>(al.size()) < N0 + 2) {
    if (static_cast<int>(al.size()) > kMaxSteps) return at;
    const double a = al.back(), b = be.back();
    step();
    if (N0 < 0 && al.back() == a && be.back() == b) return at;
    if (N0 < 0) N0 = window_index(al, be, m_bar, eps);
  }
  al.resize(static_cast<std::size_t>(N0) + 2);
  be.resize(static_cast<std::size_t>(N0) + 2);
  s.N0 = N0;
  at.built = true;
  return at;
}

}  // namespace

Lemma12Check verify_lemma12(const IntervalSequencePair& s) {
  Lemma12Check c;
  const LogisticMap f{s.m, 0.0, 1.0};
  const LogisticMap fg{s.m, s.gamma, 1.0};
  const double m_bar = s.m - 1.0;
  const double m_bar_gamma = m_bar - s.gamma;
  if (s.alphas.size() != s.betas.size() || static_cast<int>(s.alphas.size()) < s.N0 + 2) {
    c.ordering = false;
    return c;
  }
  for (int n = 0; n <= s.N0; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const double a = s.alphas[i], b = s.betas[i], a1 = s.alphas[i + 1], b1 = s.betas[i + 1];
    const bool ord = a < a1 && a1 < m_bar_gamma && m_bar_gamma <= m_bar && m_bar < b1 && b1 < b;
    const Interval If = image_of_interval(f, a, b);
    const Interval Ig = image_of_interval(fg, a, b);
    const bool con = If.lo > a1 && If.hi < b1 && Ig.lo > a1 && Ig.hi < b1;
    if ((!ord || !con) && c.first_bad < 0) c.first_bad = n;
    c.ordering = c.ordering && ord;
    c.containment = c.containment && con;
  }
  const auto N = static_cast<std::size_t>(s.N0);
  for (double v : {s.alphas[N], s.betas[N]})
    if (v < m_bar - s.eps || v > m_bar + s.eps) c.window = false;
  c.limits = m_bar - s.eps < s.alpha_limit && s.alpha_limit <= s.beta_limit && s.beta_limit < m_bar + s.eps;
  return c;
}

IntervalSequencePair lemma12_sequences(double m, double eps, double alpha0) {
  if (!(m > 1.0 && m < 3.0)) throw std::invalid_argument("m must lie in (1, 3), got " + std::to_string(m));
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  double slack;
  if (m < 2.0)
    slack = m - 1.0;
  else if (m == 2.0)
    slack = eps;
  else
    slack = std::min(m - 2.0, m - m * m / 4.0 - 2.0 / m);
  double gamma = 0.5 * std::min(eps, slack);
  for (int k = 0; k <= kMaxGammaHalvings; ++k, gamma /= 2.0) {
    Attempt at = build(m, eps, gamma, alpha0);
    if (!at.built) continue;
    if (!verify_lemma12(at.seq).ok()) continue;
    at.seq.gamma_halvings = k;
    return at.seq;
  }
  throw ConstructionError("interval sequence construction failed for m=" + std::to_string(m) +
                          " eps=" + std::to_string(eps));
}

EpsilonChoice choose_epsilons(double m, double delta, double m_tilde, const DispersalKernel& p) {
  if (!(m > 1.0 && m < 4.0)) throw std::invalid_argument("m must lie in (1, 4)");
  if (!(m_tilde > 1.0 && m * (1.0 - delta) > m_tilde))
    throw std::invalid_argument("need m(1 - delta) > m_tilde > 1");
  const double growth = (1.0 - m_tilde / (m * (1.0 - delta))) * (m - 1.0) / m;
  const double cap = (1.0 - m / 4.0) / 2.0;
  const double e2 = std::min(growth, cap);
  if (!(e2 > 0.0)) throw std::invalid_argument("no feasible eps2");
  EpsilonChoice out;
  out.eps2 = 0.95 * e2;
  out.n_star = colonization_horizon(p, m_tilde);
  double best = 0.0;
  for (int n = 0; n <= out.n_star; ++n)
    for (const auto& [o, w] : kernel_power(p, n)) best = std::max(best, w * std::pow(m_tilde, n));
  out.max_growth = best;
  out.eps1 = 0.95 * out.eps2 * (m + 1.0) / m / best;
  return out;
}

ContractionReport contraction_bound(double m, double kappa_r, double delta) {
  if (!(m > 1.0)) throw std::invalid_argument("contraction bound needs m > 1");
  const double lo = m - 1.0 - delta, hi = m - 1.0 + delta;
  if (!(lo >= 0.0) || !(1.0 - delta - kappa_r * hi > 0.0))
    throw std::domain_error("box leaves the region where the bracket is positive");
  ContractionReport r;
  for (double z : {lo, hi})
    for (double s : {lo, hi})
      r.grad_sup = std::max(r.grad_sup, std::abs(m - 2.0 * z - kappa_r * s) + kappa_r * z);
  r.diag_bound = std::abs(m - 2.0) + 2.0 * delta + kappa_r * (delta + m - 1.0);
  r.eps = 0.95 * (1.0 - r.diag_bound);
  r.constants_hold = r.eps > 0.0 && kappa_r < std::min(delta / (m - 1.0), r.eps / (2.0 * (2.0 + delta)));
  r.contraction_ok = r.grad_sup < 1.0 - r.eps / 2.0;
  return r;
}

ContractionReport contraction_bound(const ModelParams& params, double delta) {
  return contraction_bound(params.m, params.lambda.kappa() / params.lambda.lambda0(), delta);
}

SandwichMaps sandwich_maps(double m, double kappa_r) {
  if (m * kappa_r >= m - 1.0) throw std::domain_error("m kappa >= m - 1: lower map has no positive fixed point");
  return {LogisticMap{m, m * kappa_r, 1.0}, LogisticMap{m, 0.0, 1.0}};
}

SandwichMaps sandwich_maps(const ModelParams& params) {
  return sandwich_maps(params.m, params.lambda.kappa() / params.lambda.lambda0());
}

}  // namespace lrbs
