#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lrbs/kernel.hpp"
#include "lrbs/lattice.hpp"

namespace lrbs {

/// Everything that defines the single-species dynamics on a finite window.
struct ModelParams {
  double m = 2.0;
  DispersalKernel p;
  CompetitionKernel lambda;
  Lattice lattice;

  int reach() const { return p.range() + lambda.range(); }
};

/// Validates the combination (m > 0, matching dimensions, torus wide enough
/// that no site meets itself through the wrap within one step).
ModelParams make_model(double m, DispersalKernel p, CompetitionKernel lambda, Lattice lattice);

struct DerivedConstants {
  double m_star = 0.0;       // m^2 / (4 lambda0), the largest single-site offspring mean
  double M = 0.0;            // m / lambda0, above which a site produces nothing
  double m_bar_kappa = 0.0;  // (m-1) / (lambda0 + kappa)
  double m_bar_0 = 0.0;      // (m-1) / lambda0
  bool m_bar_defined = false;
};

DerivedConstants derived_constants(double m, double lambda0, double kappa);
DerivedConstants derived_constants(const ModelParams& params);

/// f(x; eta) = eta(x) (m - lambda0 eta(x) - kappa sum_z gamma_{xz} eta(z))^+.
template <class T>
double local_mean_offspring(std::size_t x, const Field<T>& field, const ModelParams& params);

/// F(x; eta) = sum_y f(y; eta) p_{yx}.
template <class T>
double dispersed_mean(std::size_t x, const Field<T>& field, const ModelParams& params);

/// Bulk evaluation of f and F over the whole window, with neighbour tables
/// built once. Agrees bit-for-bit with the pointwise functions.
class MeanEvaluator {
 public:
  MeanEvaluator() = default;
  explicit MeanEvaluator(const ModelParams& params);

  const ModelParams& params() const { return params_; }

  template <class T>
  void offspring(std::span<const T> eta, std::span<double> f) const;
  void disperse(std::span<const double> f, std::span<double> F) const;

  template <class T>
  std::vector<double> means(const Field<T>& field) const {
    std::vector<double> f(field.size()), F(field.size());
    offspring<T>(field.values(), f);
    disperse(f, F);
    return F;
  }

  /// Partial derivatives of x -> f(x; eta) with respect to eta(x) (first entry,
  /// offset 0) and eta(x + o) for each off-diagonal competition offset o.
  template <class T>
  std::vector<KernelEntry> gradient(std::size_t x, const Field<T>& field) const;

 private:
  ModelParams params_;
  Stencil gamma_stencil_;
  Stencil source_stencil_;  // site reached by -offset for each dispersal entry
};

template <class T>
std::vector<double> mean_field(const Field<T>& field, const ModelParams& params) {
  return MeanEvaluator(params).means(field);
}

struct OccupancyParams {
  double eps1 = 0.1;
  double eps2 = 0.1;
};

/// (eps1, eps2)-occupancy: eta(x) in [eps1 m_bar_0, (1-eps2) M] and no site
/// within sup-distance R_lambda above (1-eps2) M.
template <class T>
bool is_occupied(std::size_t x, const Field<T>& field, const ModelParams& params, const OccupancyParams& occ);

template <class T>
std::size_t occupied_count(const Field<T>& field, const ModelParams& params, const OccupancyParams& occ);

struct SpaceTimePoint {
  Offset site{};
  int time = 0;
  auto operator<=>(const SpaceTimePoint&) const = default;
};

/// A finite set of space-time points, kept sorted by (site, time).
class SpaceTimeBox {
 public:
  SpaceTimeBox() = default;
  explicit SpaceTimeBox(std::vector<SpaceTimePoint> points);

  std::span<const SpaceTimePoint> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool contains(const SpaceTimePoint& pt) const;

 private:
  std::vector<SpaceTimePoint> points_;
};

/// {(y, j) : p^j_{0y} > 0, 0 <= j <= n_star}.
SpaceTimeBox spacetime_box_S(const DispersalKernel& p, int n_star);
/// {(y, n) : n < n_star, |y|_inf <= n (R_p + R_lambda)}; its size is Delta.
SpaceTimeBox spacetime_box_X(int dim, int reach, int n_star);
SpaceTimeBox spacetime_box_X(const ModelParams& params, int n_star);

}  // namespace lrbs

#include "lrbs/model_impl.hpp"
