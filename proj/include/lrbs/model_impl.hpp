#pragma once

// Template definitions for model.hpp.

#include <algorithm>

namespace lrbs {

namespace detail {

template <class T>
double offspring_at(std::size_t x, std::span<const T> eta, const ModelParams& params, const Stencil* gamma_stencil) {
  const double own = static_cast<double>(eta[x]);
  if (own == 0.0) return 0.0;
  double pressure = 0.0;
  const auto gamma = params.lambda.gamma();
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    std::size_t z;
    if (gamma_stencil) {
      z = (*gamma_stencil)(x, k);
    } else {
      auto s = params.lattice.shifted(x, gamma[k].offset);
      z = s ? *s : Stencil::kNone;
    }
    if (z != Stencil::kNone) pressure += gamma[k].weight * static_cast<double>(eta[z]);
  }
  const double bracket = params.m - params.lambda.lambda0() * own - params.lambda.kappa() * pressure;
  return bracket > 0.0 ? own * bracket : 0.0;
}

}  // namespace detail

template <class T>
double local_mean_offspring(std::size_t x, const Field<T>& field, const ModelParams& params) {
  return detail::offspring_at<T>(x, field.values(), params, nullptr);
}

template <class T>
double dispersed_mean(std::size_t x, const Field<T>& field, const ModelParams& params) {
  double sum = 0.0;
  for (const auto& e : params.p.entries()) {
    auto y = params.lattice.shifted(x, -e.offset);
    if (y) sum += local_mean_offspring(*y, field, params) * e.weight;
  }
  return sum;
}

template <class T>
void MeanEvaluator::offspring(std::span<const T> eta, std::span<double> f) const {
  for (std::size_t x = 0; x < eta.size(); ++x) f[x] = detail::offspring_at<T>(x, eta, params_, &gamma_stencil_);
}

template <class T>
std::vector<KernelEntry> MeanEvaluator::gradient(std::size_t x, const Field<T>& field) const {
  const auto eta = field.values();
  const auto gamma = params_.lambda.gamma();
  double pressure = 0.0;
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    std::size_t z = gamma_stencil_(x, k);
    if (z != Stencil::kNone) pressure += gamma[k].weight * static_cast<double>(eta[z]);
  }
  const double own = static_cast<double>(eta[x]);
  const double lambda0 = params_.lambda.lambda0();
  const double kappa = params_.lambda.kappa();
  std::vector<KernelEntry> out;
  out.push_back({Offset{}, params_.m - 2.0 * lambda0 * own - kappa * pressure});
  for (const auto& g : gamma) out.push_back({g.offset, -kappa * g.weight * own});
  return out;
}

template <class T>
bool is_occupied(std::size_t x, const Field<T>& field, const ModelParams& params, const OccupancyParams& occ) {
  const auto c = derived_constants(params);
  const double cap = (1.0 - occ.eps2) * c.M;
  const double v = static_cast<double>(field[x]);
  if (v < occ.eps1 * c.m_bar_0 || v > cap) return false;
  for (std::size_t y : field.lattice().ball(field.lattice().coords(x), params.lambda.range()))
    if (static_cast<double>(field[y]) > cap) return false;
  return true;
}

template <class T>
std::size_t occupied_count(const Field<T>& field, const ModelParams& params, const OccupancyParams& occ) {
  const auto c = derived_constants(params);
  const double lo = occ.eps1 * c.m_bar_0;
  const double cap = (1.0 - occ.eps2) * c.M;
  const auto& lat = field.lattice();
  // A site is spoiled if any site within R_lambda exceeds the cap.
  std::vector<char> spoiled(field.size(), 0);
  for (std::size_t y = 0; y < field.size(); ++y) {
    if (static_cast<double>(field[y]) <= cap) continue;
    for (std::size_t x : lat.ball(lat.coords(y), params.lambda.range())) spoiled[x] = 1;
  }
  std::size_t n = 0;
  for (std::size_t x = 0; x < field.size(); ++x) {
    const double v = static_cast<double>(field[x]);
    if (!spoiled[x] && v >= lo && v <= cap) ++n;
  }
  return n;
}

}  // namespace lrbs
