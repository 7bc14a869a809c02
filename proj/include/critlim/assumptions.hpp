#ifndef CRITLIM_ASSUMPTIONS_HPP
#define CRITLIM_ASSUMPTIONS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "critlim/kernels.hpp"
#include "critlim/rng.hpp"

namespace critlim {

enum class Assumption { A1, A2, B, C1, C2 };

inline const char* assumption_name(Assumption a) {
  switch (a) {
    case Assumption::A1: return "A1";
    case Assumption::A2: return "A2";
    case Assumption::B: return "B";
    case Assumption::C1: return "C1";
    case Assumption::C2: return "C2";
  }
  return "?";
}

struct AssumptionReport {
  Assumption assumption = Assumption::A1;
  KernelSpec spec;
  double gamma = 0.0;  // gamma for C1/C2, ratio bound for A1/A2, unused for B
  long trials = 0;
  long violations = 0;
  double worst_margin = 0.0;
  double empirical_constant = 0.0;  // phi-hat (A), kappa-hat (B), beta-hat (C)
};

namespace detail {

// log-uniform over [1e-4, 1e4]; the checks are scale-sensitive, so cover
// eight decades.
inline double log_uniform_scale(Philox& rng) {
  return std::pow(10.0, -4.0 + 8.0 * rng.uniform());
}

// Increment covariance ratio bounds established per family.  fbm cases with
// H > 1/2 follow the mean-value argument; H < 1/2 uses the power-difference
// inequality |y^a - x^a| <= |y - x|^a.  The sub/bi families add the bound
// for their nonstationary part to the fbm part of their covariance
// decomposition, normalized by the lower variance constant.
inline double fbm_beta1(double gamma, double h) {
  if (h == 0.5) return 0.0;
  if (h > 0.5) return 4.0 * std::pow(gamma, h - 1.0);
  return std::pow(gamma, -h);
}

inline double fbm_beta2(double gamma, double h) {
  if (h == 0.5) return 0.0;
  return 2.0 * std::pow(gamma, 2.0 * h - 2.0);
}

}  // namespace detail

inline double beta_bound(const KernelSpec& spec, Assumption which,
                         double gamma) {
  if (which != Assumption::C1 && which != Assumption::C2)
    throw std::invalid_argument("beta_bound: C1 or C2 only");
  const bool c1 = which == Assumption::C1;
  const double h = spec.H;
  switch (spec.family) {
    case Family::fbm:
      return c1 ? detail::fbm_beta1(gamma, h) : detail::fbm_beta2(gamma, h);
    case Family::subfbm: {
      if (h == 0.5)  // reduces to Brownian motion
        return 0.0;
      const double low = std::min(2.0 - std::pow(2.0, 2.0 * h - 1.0), 1.0);
      if (c1)
        return (4.0 * (std::pow(gamma, -h) + std::pow(gamma, h - 1.0)) +
                detail::fbm_beta1(gamma, h)) /
               low;
      return (2.0 * std::pow(gamma, 2.0 * h - 2.0) +
              detail::fbm_beta2(gamma, h)) /
             low;
    }
    case Family::bifbm: {
      const double hk = h * spec.K;
      if (spec.K == 1.0)
        return c1 ? detail::fbm_beta1(gamma, h) : detail::fbm_beta2(gamma, h);
      const double fbm_part = std::pow(2.0, 1.0 - spec.K) *
                              (c1 ? detail::fbm_beta1(gamma, hk)
                                  : detail::fbm_beta2(gamma, hk));
      if (c1) {
        const double own = h <= 0.5
                               ? std::pow(gamma, -hk)
                               : 8.0 * std::pow(gamma, hk - spec.K);
        return own + fbm_part;
      }
      const double own =
          16.0 * std::pow(gamma, 2.0 * hk - std::min(4.0 * h, 2.0));
      return own + fbm_part;
    }
  }
  return 0.0;
}

/// Envelope check for the two variance assumptions: draws (t, h) with
/// h/t <= ratio_bound and reports the largest deviation of the normalized
/// increment variance from its constant.
inline AssumptionReport check_A(const KernelSpec& spec, Assumption which,
                                double ratio_bound, long trials,
                                std::uint64_t seed) {
  if (which != Assumption::A1 && which != Assumption::A2)
    throw std::invalid_argument("check_A: A1 or A2 only");
  if (!(ratio_bound > 0.0 && ratio_bound <= 1.0))
    throw std::invalid_argument("check_A: ratio_bound must be in (0, 1]");
  if (trials < 1) throw std::invalid_argument("check_A: trials must be >= 1");

  const Alphas a = spec.alphas();
  const double alpha = which == Assumption::A1 ? a.alpha1 : a.alpha2;
  const double he = spec.h_eff();

  Philox rng = make_stream(seed, stream_tag::assumptions,
                           static_cast<std::uint64_t>(which));
  AssumptionReport rep;
  rep.assumption = which;
  rep.spec = spec;
  rep.gamma = ratio_bound;
  rep.worst_margin = std::numeric_limits<double>::infinity();

  long accepted = 0;
  while (accepted < trials) {
    const double t = detail::log_uniform_scale(rng);
    // common master draw, filtered by the bound so shrinking bounds give
    // nested samples
    const double rho = std::pow(10.0, -6.0 * rng.uniform());
    if (rho > ratio_bound) continue;
    ++accepted;
    const double h = rho * t;
    // normalize by the realized gap, so the envelope is free of the
    // representation error of t + h
    const double lo = which == Assumption::A1 ? h : t;
    const double hi = t + h;
    const double var = increment_var(spec, lo, hi);
    const double scale = std::pow(hi - lo, 2.0 * he);
    const double normalized = var / scale;
    rep.worst_margin = std::min(rep.worst_margin, normalized);
    if (normalized < -1e-10) ++rep.violations;
    rep.empirical_constant =
        std::max(rep.empirical_constant, std::abs(normalized - alpha));
  }
  rep.trials = trials;
  return rep;
}

/// Smallest eigenvalue of the scale-normalized increment Gram matrix over
/// random ordered time vectors; positive values certify the nondeterminism
/// constant kappa.
inline AssumptionReport estimate_kappa(const KernelSpec& spec, int m,
                                       long trials, std::uint64_t seed) {
  if (m < 1 || m > 12)
    throw std::invalid_argument("estimate_kappa: m must be in [1, 12]");
  if (trials < 1)
    throw std::invalid_argument("estimate_kappa: trials must be >= 1");

  const double he = spec.h_eff();
  Philox rng = make_stream(seed, stream_tag::assumptions, 0xB0,
                           static_cast<std::uint64_t>(m));

  AssumptionReport rep;
  rep.assumption = Assumption::B;
  rep.spec = spec;
  rep.trials = trials;
  rep.empirical_constant = std::numeric_limits<double>::infinity();

  std::vector<double> s(static_cast<std::size_t>(m) + 1, 0.0);
  Eigen::MatrixXd g(m, m);
  for (long trial = 0; trial < trials; ++trial) {
    for (int i = 1; i <= m; ++i)
      s[static_cast<std::size_t>(i)] =
          s[static_cast<std::size_t>(i - 1)] + detail::log_uniform_scale(rng);
    for (int i = 1; i <= m; ++i)
      for (int j = 1; j <= i; ++j) {
        const double v = increment_cov(
            spec, s[static_cast<std::size_t>(j - 1)],
            s[static_cast<std::size_t>(j)], s[static_cast<std::size_t>(i - 1)],
            s[static_cast<std::size_t>(i)]);
        const double di = std::pow(
            s[static_cast<std::size_t>(i)] - s[static_cast<std::size_t>(i - 1)],
            he);
        const double dj = std::pow(
            s[static_cast<std::size_t>(j)] - s[static_cast<std::size_t>(j - 1)],
            he);
        g(i - 1, j - 1) = v / (di * dj);
        g(j - 1, i - 1) = g(i - 1, j - 1);
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g,
                                                       Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
      throw std::runtime_error("estimate_kappa: eigen solver failed");
    const double lam_min = eig.eigenvalues().minCoeff();
    rep.empirical_constant = std::min(rep.empirical_constant, lam_min);
    if (lam_min <= 0.0) ++rep.violations;
  }
  rep.worst_margin = rep.empirical_constant;
  return rep;
}

namespace detail {

struct Quadruple {
  double t1, t2, t3, t4;
};

// one master draw of four log-uniform gaps
inline Quadruple draw_quadruple(Philox& rng) {
  const double d1 = log_uniform_scale(rng);
  const double d2 = log_uniform_scale(rng);
  const double d3 = log_uniform_scale(rng);
  const double d4 = log_uniform_scale(rng);
  return {d1, d1 + d2, d1 + d2 + d3, d1 + d2 + d3 + d4};
}

inline bool accept_quadruple(const Quadruple& q, Assumption which,
                             double gamma) {
  const double dt2 = q.t2 - q.t1;
  const double dt3 = q.t3 - q.t2;
  const double dt4 = q.t4 - q.t3;
  if (which == Assumption::C1) {
    const double r = dt2 / dt4;
    return r <= 1.0 / gamma || r >= gamma;
  }
  return dt2 / dt3 <= 1.0 / gamma && dt4 / dt3 <= 1.0 / gamma;
}

inline double corr_ratio(const KernelSpec& spec, const Quadruple& q) {
  const double num =
      std::abs(increment_cov(spec, q.t1, q.t2, q.t3, q.t4));
  const double v24 = increment_var(spec, q.t3, q.t4);
  const double v12 = increment_var(spec, q.t1, q.t2);
  return num / std::sqrt(v24 * v12);
}

}  // namespace detail

/// Ratio-condition check: random quadruples satisfying the C1/C2 gap
/// constraint, with |increment covariance| / (sd * sd) tested against the
/// family bound at this gamma.
inline AssumptionReport check_C(const KernelSpec& spec, Assumption which,
                                double gamma, long trials,
                                std::uint64_t seed) {
  if (which != Assumption::C1 && which != Assumption::C2)
    throw std::invalid_argument("check_C: C1 or C2 only");
  if (!(gamma > 1.0)) throw std::invalid_argument("check_C: gamma must be > 1");
  if (trials < 1) throw std::invalid_argument("check_C: trials must be >= 1");

  const double bound = beta_bound(spec, which, gamma);
  Philox rng = make_stream(seed, stream_tag::assumptions,
                           static_cast<std::uint64_t>(which), 0xC0);

  AssumptionReport rep;
  rep.assumption = which;
  rep.spec = spec;
  rep.gamma = gamma;
  rep.worst_margin = std::numeric_limits<double>::infinity();

  long accepted = 0;
  while (accepted < trials) {
    const auto q = detail::draw_quadruple(rng);
    if (!detail::accept_quadruple(q, which, gamma)) continue;
    ++accepted;
    const double ratio = detail::corr_ratio(spec, q);
    rep.empirical_constant = std::max(rep.empirical_constant, ratio);
    rep.worst_margin = std::min(rep.worst_margin, bound - ratio);
    if (ratio > bound) ++rep.violations;
  }
  rep.trials = trials;
  return rep;
}

/// Same check over a shared master sample re-filtered per gamma, so the
/// reported maxima are over nested quadruple sets.
inline std::vector<AssumptionReport> check_C_nested(
    const KernelSpec& spec, Assumption which, const std::vector<double>& gammas,
    long master_draws, std::uint64_t seed) {
  std::vector<AssumptionReport> reports;
  for (double gamma : gammas) {
    Philox rng = make_stream(seed, stream_tag::assumptions,
                             static_cast<std::uint64_t>(which), 0xC0);
    const double bound = beta_bound(spec, which, gamma);
    AssumptionReport rep;
    rep.assumption = which;
    rep.spec = spec;
    rep.gamma = gamma;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (long i = 0; i < master_draws; ++i) {
      const auto q = detail::draw_quadruple(rng);
      if (!detail::accept_quadruple(q, which, gamma)) continue;
      ++rep.trials;
      const double ratio = detail::corr_ratio(spec, q);
      rep.empirical_constant = std::max(rep.empirical_constant, ratio);
      rep.worst_margin = std::min(rep.worst_margin, bound - ratio);
      if (ratio > bound) ++rep.violations;
    }
    reports.push_back(rep);
  }
  return reports;
}

}  // namespace critlim

#endif  // CRITLIM_ASSUMPTIONS_HPP
