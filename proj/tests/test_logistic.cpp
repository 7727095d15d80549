#include <cmath>
#include <random>

#include "doctest.h"
#include "lrbs/logistic.hpp"
#include "oracles.hpp"

using namespace lrbs;

TEST_CASE("eval_map and fixed points") {
  const LogisticMap f{2.0, 0.0, 1.0};
  CHECK(eval_map(f, 1.0) == 1.0);
  CHECK(eval_map(f, 0.0) == 0.0);
  CHECK(eval_map(f, 3.0) == 0.0);
  const LogisticMap ft{2.0, 0.0, 0.01};
  CHECK(eval_map(ft, 100.0) == doctest::Approx(100.0).epsilon(1e-14));

  auto fp = fixed_points(f);
  CHECK(fp.has_positive);
  CHECK(fp.zero == 0.0);
  CHECK(fp.positive == 1.0);
  CHECK(fixed_points(LogisticMap{2.0, 0.1, 1.0}).positive == doctest::Approx(0.9));
  CHECK_FALSE(fixed_points(LogisticMap{1.0, 0.0, 1.0}).has_positive);
}

TEST_CASE("image_of_interval") {
  const LogisticMap f{2.0, 0.0, 1.0};
  auto I = image_of_interval(f, 0.5, 1.5);
  CHECK(I.lo == 0.75);
  CHECK(I.hi == 1.0);
  CHECK(image_of_interval(f, 1.0, 1.0) == Interval{1.0, 1.0});
  const LogisticMap ft{2.0, 0.0, 0.01};
  auto J = image_of_interval(ft, 10.0, 180.0);
  CHECK(J.lo == doctest::Approx(19.0));
  CHECK(J.hi == doctest::Approx(100.0));

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    double a = u(gen), b = u(gen);
    if (a > b) std::swap(a, b);
    const LogisticMap g{2.7, 0.1, 1.0};
    auto got = image_of_interval(g, a, b);
    auto want = oracle::logistic_image(2.6, a, b);
    CHECK(got.lo == doctest::Approx(want.first));
    CHECK(got.hi == doctest::Approx(want.second));
  }
}

TEST_CASE("the cap [0, M] maps into [0, m*] only below m = 4") {
  for (double m : {3.9, 4.1}) {
    const double lambda0 = 0.01;
    const LogisticMap ft{m, 0.0, lambda0};
    const double M = m / lambda0;
    const auto image = image_of_interval(ft, 0.0, M);
    CHECK(image.hi == doctest::Approx(m * m / (4 * lambda0)));
    if (m < 4)
      CHECK(image.hi <= M);
    else
      CHECK(image.hi > M);
  }
}

TEST_CASE("lemma12_sequences in all three regimes") {
  for (double m : {1.2, 1.5, 1.9, 2.0, 2.3, 2.5, 2.7, 2.9}) {
    for (double eps : {0.1, 0.05, 0.01}) {
      CAPTURE(m);
      CAPTURE(eps);
      auto s = lemma12_sequences(m, eps);
      CHECK(s.gamma > 0.0);
      CHECK(s.gamma < eps);
      CHECK(oracle::interval_sequences_ok(m, s.gamma, eps, s.alphas, s.betas, s.N0));
      CHECK(verify_lemma12(s).ok());
      CHECK(s.alpha_limit > m - 1 - eps);
      CHECK(s.beta_limit < m - 1 + eps);
      CHECK(s.betas[static_cast<std::size_t>(s.N0)] - s.alphas[static_cast<std::size_t>(s.N0)] <= 2 * eps);
      if (m < 2) CHECK(s.regime == Lemma12Case::below_two);
      if (m == 2) CHECK(s.regime == Lemma12Case::at_two);
      if (m > 2) {
        CHECK(s.regime == Lemma12Case::above_two);
        REQUIRE(s.n0 >= 0);
        const LogisticMap fg{m, s.gamma, 1.0};
        const auto n0 = static_cast<std::size_t>(s.n0);
        CHECK((s.alphas[n0] + fg(s.alphas[n0])) / 2 > m / 2);
        if (n0 > 0) CHECK((s.alphas[n0 - 1] + fg(s.alphas[n0 - 1])) / 2 <= m / 2);
      }
    }
  }
}

TEST_CASE("lemma12 recursion values") {
  SUBCASE("m = 1.5 follows the averaged recursion") {
    auto s = lemma12_sequences(1.5, 0.05);
    const double g = s.gamma;
    double a = s.alphas[0];
    for (std::size_t n = 1; n < s.alphas.size(); ++n) {
      a = (a + a * (1.5 - g - a)) / 2;
      CHECK(s.alphas[n] == doctest::Approx(a).epsilon(1e-14));
    }
    CHECK(s.betas[1] == doctest::Approx((1.5 * 1.5 / 4 + 0.75) / 2));
    CHECK(s.alpha_limit == doctest::Approx(0.5 - g));
    CHECK(s.beta_limit == 0.5);
  }
  SUBCASE("m = 2 uses the larger root") {
    auto s = lemma12_sequences(2.0, 0.05);
    const LogisticMap fg{2.0, s.gamma, 1.0};
    for (std::size_t n = 0; n < s.alphas.size(); ++n) {
      CHECK(fg(s.betas[n]) == doctest::Approx(fg(s.alphas[n])).epsilon(1e-10));
      CHECK(s.betas[n] > 1.0);
    }
    CHECK(s.alphas[0] < s.gamma);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(lemma12_sequences(3.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(lemma12_sequences(1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(lemma12_sequences(2.0, 0.0), std::invalid_argument);
  }
}

TEST_CASE("verify_lemma12 rejects a broken prefix") {
  auto s = lemma12_sequences(2.5, 0.05);
  s.betas[1] = s.betas[0] + 0.1;
  auto c = verify_lemma12(s);
  CHECK_FALSE(c.ok());
  CHECK(c.first_bad == 0);
}

TEST_CASE("choose_epsilons") {
  auto p = lazy_walk(1, 0.5);
  auto e = choose_epsilons(2.0, 0.1, 1.5, p);
  CHECK(e.eps2 == doctest::Approx(0.95 / 12).epsilon(1e-12));
  CHECK(e.n_star == 4);
  const double p4 = 70.0 / 256.0;
  CHECK(e.max_growth == doctest::Approx(p4 * std::pow(1.5, 4)));
  CHECK(e.eps1 == doctest::Approx(0.95 * e.eps2 * 1.5 / e.max_growth));

  // Substitute back.
  const double m = 2.0, d = 0.1, mt = 1.5;
  CHECK(m * (1 - d) * (1 - e.eps2 * m / (m - 1)) >= mt);
  CHECK(m * m / 4 <= (1 - 2 * e.eps2) * m);
  for (int n = 0; n <= e.n_star; ++n)
    for (auto& [o, w] : kernel_power(p, n)) CHECK(w * std::pow(mt, n) * e.eps1 <= e.eps2 * (m + 1) / m);

  SUBCASE("cap clause shrinks near m = 4") {
    auto near4 = choose_epsilons(3.99, 0.0, 1.5, p);
    CHECK(near4.eps2 <= 0.95 * (1 - 3.99 / 4) / 2 + 1e-15);
    CHECK(near4.eps2 < 0.002);
  }
  CHECK_THROWS(choose_epsilons(2.0, 0.3, 1.5, p));
  CHECK_THROWS(choose_epsilons(4.0, 0.0, 1.5, p));
}

TEST_CASE("contraction_bound") {
  auto r = contraction_bound(2.0, 0.0, 0.1);
  CHECK(r.grad_sup == doctest::Approx(0.2));
  CHECK(r.contraction_ok);
  CHECK(r.constants_hold);

  auto bad = contraction_bound(2.0, 0.0, 0.5);
  CHECK(bad.grad_sup >= 1.0);
  CHECK_FALSE(bad.contraction_ok);

  auto k = contraction_bound(2.5, 0.01, 0.1);
  CHECK(k.constants_hold);
  CHECK(k.contraction_ok);
  CHECK(k.grad_sup <= k.diag_bound + 0.01 * 1.6 + 1e-12);

  CHECK_THROWS_AS(contraction_bound(2.0, 0.0, 1.0), std::domain_error);

  SUBCASE("constants imply the bound") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> um(1.05, 2.95), ud(0.0, 0.5), uk(0.0, 0.2);
    int held = 0;
    for (int i = 0; i < 5000; ++i) {
      const double m = um(gen), delta = ud(gen), kr = uk(gen);
      if (1 - delta - kr * (m - 1 + delta) <= 0 || m - 1 - delta < 0) continue;
      auto c = contraction_bound(m, kr, delta);
      if (c.constants_hold) {
        ++held;
        CHECK(c.contraction_ok);
      }
    }
    CHECK(held > 50);
  }
}

TEST_CASE("sandwich_maps") {
  auto s = sandwich_maps(2.0, 0.01);
  CHECK(fixed_points(s.lower).positive == doctest::Approx(0.98));
  CHECK(fixed_points(s.upper).positive == doctest::Approx(1.0));
  auto same = sandwich_maps(2.0, 0.0);
  for (double z : {0.1, 0.5, 1.3}) CHECK(same.lower(z) == same.upper(z));
  CHECK_THROWS_AS(sandwich_maps(2.0, 0.6), std::domain_error);

  // Pointwise ordering against the full local map on [0, m]-valued configurations.
  const double m = 2.3, kr = 0.05;
  auto params = make_model(m, lazy_walk(1), nearest_neighbour_competition(1, 1.0, kr), Lattice(1, {5}));
  auto sw = sandwich_maps(params);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, m);
  for (int i = 0; i < 1000; ++i) {
    RealField eta(params.lattice);
    for (auto& v : eta.values()) v = u(gen);
    const double z = eta[2];
    const double fk = local_mean_offspring(2, eta, params);
    CHECK(sw.lower(z) <= fk + 1e-12);
    CHECK(fk <= sw.upper(z) + 1e-12);
  }
}
