#include <cmath>
#include <random>

#include "doctest.h"
#include "lrbs/model.hpp"
#include "oracles.hpp"

using namespace lrbs;

namespace {

Offset o1(int x) { return Offset{x, 0, 0}; }
Offset o2(int x, int y) { return Offset{x, y, 0}; }

ModelParams model_1d(double m, double lambda0, double kappa, int extent, double hold = 0.5) {
  return make_model(m, lazy_walk(1, hold), nearest_neighbour_competition(1, lambda0, kappa), Lattice(1, {extent}));
}

ModelParams model_2d(double m, double lambda0, double kappa, int extent) {
  return make_model(m, lazy_walk(2, 0.2), nearest_neighbour_competition(2, lambda0, kappa), Lattice(2, {extent, extent}));
}

}  // namespace

TEST_CASE("lattice wraps and measures torus distance") {
  Lattice lat(2, {5, 7});
  CHECK(lat.size() == 35);
  CHECK(lat.index(o2(-1, 0)) == lat.index(o2(4, 0)));
  CHECK(lat.coords(lat.index(o2(2, 3))) == o2(2, 3));
  CHECK(lat.distance(lat.index(o2(0, 0)), lat.index(o2(4, 6))) == 1);
  CHECK(lat.ball(o2(0, 0), 1).size() == 9);
  CHECK(lat.ball(o2(0, 0), 10).size() == 35);

  Lattice box(1, {5}, Boundary::zero);
  CHECK_FALSE(box.shifted(0, o1(-1)).has_value());
  CHECK(box.ball(o1(0), 1).size() == 2);
  CHECK_THROWS_AS(box.index(o1(5)), GeometryError);
}

TEST_CASE("make_dispersal_kernel validates (A1)") {
  SUBCASE("lazy walk") {
    auto p = make_dispersal_kernel(1, {{o1(-1), 0.25}, {o1(0), 0.5}, {o1(1), 0.25}});
    CHECK(p.range() == 1);
    CHECK(p.weight(o1(0)) == 0.5);
  }
  SUBCASE("simple walk is periodic") {
    CHECK_THROWS_WITH_AS(make_dispersal_kernel(1, {{o1(-1), 0.5}, {o1(1), 0.5}}), doctest::Contains("periodic"),
                         KernelError);
  }
  SUBCASE("five-point kernel in d=2") {
    auto p = make_dispersal_kernel(
        2, {{o2(0, 0), 0.2}, {o2(1, 0), 0.2}, {o2(-1, 0), 0.2}, {o2(0, 1), 0.2}, {o2(0, -1), 0.2}});
    CHECK(p.range() == 1);
    CHECK(p.entries().size() == 5);
  }
  SUBCASE("errors") {
    CHECK_THROWS_WITH_AS(make_dispersal_kernel(1, {{o1(0), 0.5}, {o1(1), 0.5}}), doctest::Contains("zero mean"),
                         KernelError);
    CHECK_THROWS_AS(make_dispersal_kernel(1, {{o1(0), 1.5}, {o1(1), -0.5}}), KernelError);
    CHECK_THROWS_WITH_AS(make_dispersal_kernel(1, {{o1(0), 0.5}}), doctest::Contains("(A1)"), KernelError);
    CHECK_THROWS_AS(make_dispersal_kernel(1, {}), KernelError);
  }
  SUBCASE("near-unit sums are renormalised") {
    auto p = make_dispersal_kernel(1, {{o1(-1), 0.25}, {o1(0), 0.5 + 5e-10}, {o1(1), 0.25}});
    double s = 0;
    for (auto& e : p.entries()) s += e.weight;
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  SUBCASE("walk on even sublattice in d=2 is periodic") {
    CHECK_THROWS_AS(make_dispersal_kernel(2, {{o2(1, 1), 0.25}, {o2(-1, -1), 0.25}, {o2(1, -1), 0.25}, {o2(-1, 1), 0.25}}),
                    KernelError);
  }
}

TEST_CASE("make_competition_kernel splits lambda into (lambda0, kappa, gamma)") {
  auto k0 = make_competition_kernel(1, {{o1(0), 0.01}});
  CHECK(k0.lambda0() == 0.01);
  CHECK(k0.kappa() == 0.0);
  CHECK(k0.gamma().empty());
  CHECK(k0.range() == 1);

  auto k1 = make_competition_kernel(1, {{o1(0), 0.01}, {o1(-1), 0.001}, {o1(1), 0.001}});
  CHECK(k1.lambda0() == 0.01);
  CHECK(k1.kappa() == doctest::Approx(0.002).epsilon(1e-14));
  CHECK(k1.gamma_at(o1(1)) == doctest::Approx(0.5));
  CHECK(k1.gamma_at(o1(-1)) == doctest::Approx(0.5));
  for (const auto& e : k1.raw())
    if (e.offset != Offset{}) CHECK(e.weight == doctest::Approx(0.001).epsilon(1e-14));

  CHECK_THROWS_AS(make_competition_kernel(1, {{o1(0), 0.0}}), KernelError);
  CHECK_THROWS_AS(make_competition_kernel(1, {{o1(0), 0.1}, {o1(1), -0.1}}), KernelError);
  auto k2 = make_competition_kernel(1, {{o1(0), 0.1}, {o1(3), 0.1}});
  CHECK(k2.range() == 3);
}

TEST_CASE("model validation requires a wide enough torus") {
  CHECK_THROWS_AS(model_1d(2, 0.01, 0, 4), GeometryError);
  CHECK_NOTHROW(model_1d(2, 0.01, 0, 5));
}

TEST_CASE("local_mean_offspring") {
  auto params = model_1d(2.0, 0.01, 0.0, 9);
  RealField eta(params.lattice, 100.0);
  CHECK(local_mean_offspring(3, eta, params) == doctest::Approx(100.0).epsilon(1e-14));
  eta[3] = 250.0;
  CHECK(local_mean_offspring(3, eta, params) == 0.0);
  eta[3] = 0.0;
  CHECK(local_mean_offspring(3, eta, params) == 0.0);
}

TEST_CASE("dispersed_mean") {
  SUBCASE("constant field at m_bar is fixed") {
    auto params = model_2d(2.0, 0.01, 0.005, 9);
    auto c = derived_constants(params);
    RealField eta(params.lattice, c.m_bar_kappa);
    for (std::size_t x = 0; x < eta.size(); ++x)
      CHECK(std::abs(dispersed_mean(x, eta, params) - c.m_bar_kappa) <= 1e-12 * c.m_bar_kappa);
  }
  SUBCASE("zero field") {
    auto params = model_1d(2.0, 0.01, 0.0, 9);
    RealField eta(params.lattice, 0.0);
    CHECK(dispersed_mean(0, eta, params) == 0.0);
  }
  SUBCASE("one-point field matches hand convolution") {
    auto params = model_1d(2.0, 0.01, 0.0, 9);
    RealField eta(params.lattice, 0.0);
    const double u = 30.0;
    eta.at(o1(0)) = u;
    const double ftilde = u * (2.0 - 0.01 * u);  // 51
    CHECK(dispersed_mean(params.lattice.index(o1(0)), eta, params) == doctest::Approx(0.5 * ftilde));
    CHECK(dispersed_mean(params.lattice.index(o1(1)), eta, params) == doctest::Approx(0.25 * ftilde));
    CHECK(dispersed_mean(params.lattice.index(o1(-1)), eta, params) == doctest::Approx(0.25 * ftilde));
    CHECK(dispersed_mean(params.lattice.index(o1(2)), eta, params) == 0.0);
  }
}

TEST_CASE("derived_constants") {
  auto c = derived_constants(2.0, 0.01, 0.0);
  CHECK(c.m_star == doctest::Approx(100.0));
  CHECK(c.M == doctest::Approx(200.0));
  CHECK(c.m_bar_kappa == doctest::Approx(100.0));
  CHECK(c.m_bar_0 == doctest::Approx(100.0));
  CHECK(derived_constants(2.0, 0.01, 0.01).m_bar_kappa == doctest::Approx(50.0));
  auto c1 = derived_constants(1.0, 0.01, 0.0);
  CHECK_FALSE(c1.m_bar_defined);
  CHECK(c1.m_bar_kappa == 0.0);
}

TEST_CASE("is_occupied") {
  auto params = model_1d(2.0, 0.01, 0.0, 9);
  OccupancyParams occ{0.1, 0.1};
  RealField eta(params.lattice, 170.0);
  const auto x = params.lattice.index(o1(4));
  eta[x] = 50.0;
  CHECK(is_occupied(x, eta, params, occ));
  eta[x + 1] = 190.0;
  CHECK_FALSE(is_occupied(x, eta, params, occ));
  eta[x + 1] = 170.0;
  eta[x] = 5.0;
  CHECK_FALSE(is_occupied(x, eta, params, occ));
  eta[x] = 180.0;
  CHECK(is_occupied(x, eta, params, occ));
  CHECK(occupied_count(eta, params, occ) == 9);
}

TEST_CASE("kernel_power") {
  auto p = lazy_walk(1, 0.5);
  auto p0 = kernel_power(p, 0);
  CHECK(p0.size() == 1);
  CHECK(p0.at(Offset{}) == 1.0);
  auto p1 = kernel_power(p, 1);
  for (const auto& e : p.entries()) CHECK(p1.at(e.offset) == e.weight);

  auto p2 = kernel_power(p, 2);
  CHECK(p2.at(o1(-2)) == doctest::Approx(1.0 / 16));
  CHECK(p2.at(o1(-1)) == doctest::Approx(1.0 / 4));
  CHECK(p2.at(o1(0)) == doctest::Approx(3.0 / 8));
  CHECK(p2.at(o1(1)) == doctest::Approx(1.0 / 4));
  CHECK(p2.at(o1(2)) == doctest::Approx(1.0 / 16));

  SUBCASE("semigroup property a+b <= 8") {
    auto q = lazy_walk(2, 0.2);
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; b <= 4; ++b) {
        auto pa = kernel_power(q, a), pb = kernel_power(q, b), pab = kernel_power(q, a + b);
        KernelMap conv;
        for (auto& [x, wx] : pa)
          for (auto& [y, wy] : pb) conv[x + y] += wx * wy;
        REQUIRE(conv.size() == pab.size());
        for (auto& [x, w] : pab) CHECK(std::abs(conv.at(x) - w) <= 1e-14);
      }
  }
  SUBCASE("agrees with path enumeration") {
    auto q = make_dispersal_kernel(1, {{o1(-2), 0.2}, {o1(0), 0.4}, {o1(1), 0.4}});
    for (int n = 0; n <= 6; ++n) {
      auto a = kernel_power(q, n);
      auto b = oracle::path_enumeration_power(q, n);
      REQUIRE(a.size() == b.size());
      for (auto& [x, w] : b) CHECK(std::abs(a.at(x) - w) <= 1e-14);
    }
  }
}

TEST_CASE("colonization_horizon") {
  auto lazy = lazy_walk(1, 0.5);
  CHECK(colonization_horizon(lazy, 1.5) == 4);
  const auto p3 = kernel_power(lazy, 3);
  CHECK(p3.at(o1(1)) * std::pow(1.5, 3) == doctest::Approx(0.791).epsilon(1e-3));

  auto sticky = lazy_walk(1, 0.98);
  CHECK_THROWS_AS(colonization_horizon(sticky, 1.0001), HorizonCapExceeded);

  struct Case {
    DispersalKernel p;
    double m_tilde;
  };
  std::vector<Case> cases = {
      {lazy, 1.5},
      {lazy, 1.2},
      {lazy_walk(1, 0.2), 1.5},
      {lazy_walk(2, 0.2), 1.5},
      {uniform_box_walk(1, 1), 1.3},
      {uniform_box_walk(2, 1), 2.0},
      {make_dispersal_kernel(1, {{o1(-2), 0.2}, {o1(0), 0.4}, {o1(1), 0.4}}), 1.5},
  };
  for (const auto& c : cases) {
    const int expected = oracle::brute_force_horizon(c.p, c.m_tilde, 12);
    REQUIRE(expected > 0);
    CHECK(colonization_horizon(c.p, c.m_tilde) == expected);
  }
}

TEST_CASE("default m_tilde stays inside (1, m)") {
  CHECK(default_m_tilde(2.0) == 1.5);
  CHECK(default_m_tilde(1.2) == doctest::Approx(1.1));
  CHECK_THROWS(default_m_tilde(1.0));
}

TEST_CASE("space-time boxes") {
  auto x1 = spacetime_box_X(1, 2, 1);
  CHECK(x1.size() == 1);
  CHECK(x1.contains({Offset{}, 0}));
  auto x4 = spacetime_box_X(1, 2, 4);
  CHECK(x4.size() == 28);
  CHECK(x4.contains({o1(6), 3}));
  CHECK_FALSE(x4.contains({o1(7), 3}));
  CHECK_FALSE(x4.contains({o1(0), 4}));

  auto s = spacetime_box_S(lazy_walk(1, 0.5), 4);
  CHECK(s.contains({Offset{}, 0}));
  CHECK(s.contains({o1(4), 4}));
  CHECK_FALSE(s.contains({o1(2), 1}));
  CHECK(s.size() == 1 + 3 + 5 + 7 + 9);
}

TEST_CASE("property: mass bounds, transport, shift equivariance") {
  std::mt19937_64 gen(20240611);
  auto params = model_2d(2.5, 0.02, 0.004, 11);
  const auto c = derived_constants(params);
  MeanEvaluator eval(params);
  std::uniform_real_distribution<double> u(0.0, 1.2 * c.M);
  std::uniform_int_distribution<int> shift(-20, 20);
  for (int trial = 0; trial < 1000; ++trial) {
    RealField eta(params.lattice);
    for (auto& v : eta.values()) v = (gen() % 4 == 0) ? 0.0 : u(gen);
    std::vector<double> f(eta.size()), F(eta.size());
    eval.offspring<double>(eta.values(), f);
    eval.disperse(f, F);
    double sf = 0, sF = 0;
    for (std::size_t x = 0; x < eta.size(); ++x) {
      REQUIRE(f[x] <= c.m_star * (1 + 1e-12));
      REQUIRE(f[x] <= params.m * eta[x] * (1 + 1e-12));
      sf += f[x];
      sF += F[x];
    }
    REQUIRE(std::abs(sf - sF) <= 1e-9 * std::max(1.0, sf));
    if (trial % 50 == 0) {
      Offset sh = o2(shift(gen), shift(gen));
      auto moved = translated(eta, sh);
      auto Fm = eval.means(moved);
      for (std::size_t x = 0; x < eta.size(); ++x) {
        auto y = params.lattice.index(params.lattice.coords(x) + sh);
        REQUIRE(Fm[y] == F[x]);
        REQUIRE(dispersed_mean(x, eta, params) == F[x]);
      }
    }
  }
}

TEST_CASE("zero-boundary windows lose mass at the edge") {
  auto params = make_model(2.0, lazy_walk(1, 0.5), nearest_neighbour_competition(1, 0.01, 0.0),
                           Lattice(1, {5}, Boundary::zero));
  RealField eta(params.lattice, 0.0);
  eta[0] = 10.0;
  auto F = mean_field(eta, params);
  CHECK(F[0] == doctest::Approx(0.5 * 19.0));
  CHECK(F[1] == doctest::Approx(0.25 * 19.0));
  CHECK(F[0] + F[1] < 19.0);
}
