#ifndef CRITLIM_STATS_HPP
#define CRITLIM_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace critlim {

struct MomentEstimate {
  std::vector<double> mean;  // index m-1 holds the m-th power moment
  std::vector<double> se;    // jackknife standard errors
};

inline MomentEstimate estimate_moments(std::span<const double> values,
                                       int m_max) {
  const std::size_t r = values.size();
  if (r < 2) throw std::invalid_argument("estimate_moments: need >= 2 values");
  if (m_max < 1) throw std::invalid_argument("estimate_moments: m_max >= 1");

  MomentEstimate est;
  est.mean.resize(static_cast<std::size_t>(m_max));
  est.se.resize(static_cast<std::size_t>(m_max));
  std::vector<double> powers(r);
  for (int m = 1; m <= m_max; ++m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      powers[i] = std::pow(values[i], m);
      sum += powers[i];
    }
    const double mean = sum / static_cast<double>(r);
    // leave-one-out means;  theta_i = (sum - x_i) / (r - 1)
    double acc = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      const double theta = (sum - powers[i]) / static_cast<double>(r - 1);
      acc += (theta - mean) * (theta - mean);
    }
    est.mean[static_cast<std::size_t>(m - 1)] = mean;
    est.se[static_cast<std::size_t>(m - 1)] =
        std::sqrt(acc * static_cast<double>(r - 1) / static_cast<double>(r));
  }
  return est;
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// asymptotic Kolmogorov survival function Q(lambda)
inline double ks_q(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline KsResult compare_distributions(std::span<const double> a,
                                      std::span<const double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("compare_distributions: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < sa.size() && ib < sb.size()) {
    const double x = std::min(sa[ia], sb[ib]);
    while (ia < sa.size() && sa[ia] <= x) ++ia;
    while (ib < sb.size() && sb[ib] <= x) ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / na -
                             static_cast<double>(ib) / nb));
  }

  KsResult res;
  res.statistic = d;
  const double ne = std::sqrt(na * nb / (na + nb));
  res.p_value = ks_q((ne + 0.12 + 0.11 / ne) * d);
  return res;
}

}  // namespace critlim

#endif  // CRITLIM_STATS_HPP
