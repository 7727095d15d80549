#include "lrbs/model.hpp"

#include <algorithm>
#include <string>

namespace lrbs {

ModelParams make_model(double m, DispersalKernel p, CompetitionKernel lambda, Lattice lattice) {
  if (!(m > 0.0)) throw std::invalid_argument("m must be positive");
  if (p.dim() != lattice.dim() || lambda.dim() != lattice.dim())
    throw GeometryError("kernel and lattice dimensions differ");
  ModelParams params{m, std::move(p), std::move(lambda), std::move(lattice)};
  if (params.lattice.boundary() == Boundary::periodic) {
    const int need = 2 * params.reach() + 1;
    for (int e : params.lattice.extents())
      if (e < need)
        throw GeometryError("torus extent " + std::to_string(e) + " is below 2(R_p + R_lambda) + 1 = " +
                            std::to_string(need));
  }
  return params;
}

DerivedConstants derived_constants(double m, double lambda0, double kappa) {
  DerivedConstants c;
  c.m_star = m * m / (4.0 * lambda0);
  c.M = m / lambda0;
  c.m_bar_defined = m > 1.0;
  if (c.m_bar_defined) {
    c.m_bar_kappa = (m - 1.0) / (lambda0 + kappa);
    c.m_bar_0 = (m - 1.0) / lambda0;
  }
  return c;
}

DerivedConstants derived_constants(const ModelParams& params) {
  return derived_constants(params.m, params.lambda.lambda0(), params.lambda.kappa());
}

MeanEvaluator::MeanEvaluator(const ModelParams& params) : params_(params) {
  std::vector<Offset> gamma_offsets;
  for (const auto& g : params_.lambda.gamma()) gamma_offsets.push_back(g.offset);
  gamma_stencil_ = Stencil(params_.lattice, gamma_offsets);
  std::vector<Offset> sources;
  for (const auto& e : params_.p.entries()) sources.push_back(-e.offset);
  source_stencil_ = Stencil(params_.lattice, sources);
}

void MeanEvaluator::disperse(std::span<const double> f, std::span<double> F) const {
  const auto entries = params_.p.entries();
  for (std::size_t x = 0; x < f.size(); ++x) {
    double sum = 0.0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      std::size_t y = source_stencil_(x, k);
      if (y != Stencil::kNone) sum += f[y] * entries[k].weight;
    }
    F[x] = sum;
  }
}

SpaceTimeBox::SpaceTimeBox(std::vector<SpaceTimePoint> points) : points_(std::move(points)) {
  std::sort(points_.begin(), points_.end());
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
}

bool SpaceTimeBox::contains(const SpaceTimePoint& pt) const {
  return std::binary_search(points_.begin(), points_.end(), pt);
}

SpaceTimeBox spacetime_box_S(const DispersalKernel& p, int n_star) {
  std::vector<SpaceTimePoint> pts;
  for (int j = 0; j <= n_star; ++j)
    for (const auto& [o, w] : kernel_power(p, j)) pts.push_back({o, j});
  return SpaceTimeBox(std::move(pts));
}

SpaceTimeBox spacetime_box_X(int dim, int reach, int n_star) {
  std::vector<SpaceTimePoint> pts;
  for (int n = 0; n < n_star; ++n) {
    const int r = n * reach;
    Offset c{};
    for (int i = 0; i < dim; ++i) c[i] = -r;
    while (true) {
      pts.push_back({c, n});
      int axis = dim - 1;
      while (axis >= 0 && c[axis] == r) {
        c[axis] = -r;
        --axis;
      }
      if (axis < 0) break;
      ++c[axis];
    }
  }
  return SpaceTimeBox(std::move(pts));
}

SpaceTimeBox spacetime_box_X(const ModelParams& params, int n_star) {
  return spacetime_box_X(params.lattice.dim(), params.reach(), n_star);
}

}  // namespace lrbs
