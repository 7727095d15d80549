#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace stats {

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Two-sample chi-square homogeneity test on integer samples. Adjacent values
/// are pooled until every bin has an expected count of at least 5 in both samples.
inline ChiSquare two_sample_chi_square(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  std::map<std::int64_t, std::pair<double, double>> counts;
  for (auto v : a) counts[v].first += 1.0;
  for (auto v : b) counts[v].second += 1.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double n = na + nb;

  std::vector<std::pair<double, double>> bins;
  std::pair<double, double> acc{0.0, 0.0};
  auto ready = [&](const std::pair<double, double>& c) {
    const double tot = c.first + c.second;
    return tot * na / n >= 5.0 && tot * nb / n >= 5.0;
  };
  for (const auto& [v, c] : counts) {
    acc.first += c.first;
    acc.second += c.second;
    if (ready(acc)) {
      bins.push_back(acc);
      acc = {0.0, 0.0};
    }
  }
  if (acc.first + acc.second > 0.0) {
    if (bins.empty())
      bins.push_back(acc);
    else {
      bins.back().first += acc.first;
      bins.back().second += acc.second;
    }
  }

  ChiSquare out;
  out.dof = static_cast<int>(bins.size()) - 1;
  if (out.dof <= 0) return out;
  for (const auto& [ca, cb] : bins) {
    const double tot = ca + cb;
    const double ea = tot * na / n, eb = tot * nb / n;
    out.statistic += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
  }
  out.p_value = boost::math::gamma_q(0.5 * out.dof, 0.5 * out.statistic);
  return out;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double mu = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace stats
