#ifndef CRITLIM_FUNCTIONAL_HPP
#define CRITLIM_FUNCTIONAL_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "critlim/grid.hpp"
#include "critlim/kernels.hpp"
#include "critlim/sampler.hpp"

namespace critlim {

enum class TestFunctionKind { gauss, diff_gauss, custom };

/// Test function f on R^d with its Fourier transform under the convention
/// fhat(xi) = integral of f(x) exp(i xi . x) dx.
///
/// gauss(sigma) is the normalized Gaussian density (mass 1); diff_gauss is
/// the difference of two of them (mass 0).  Both are radial with real,
/// radial transforms, which is what the closed-form oracles rely on.
struct TestFunction {
  TestFunctionKind kind = TestFunctionKind::gauss;
  int d = 4;
  double sigma1 = 1.0;
  double sigma2 = 2.0;
  double amplitude = 1.0;  // scalar multiple of the base shape

  // custom hook; radial pieces optional
  std::function<double(const Eigen::VectorXd&)> custom_f;
  std::function<double(double)> custom_fhat_radial;
  double custom_mass = 0.0;

  static TestFunction gauss(double sigma, int d) {
    if (sigma <= 0.0) throw std::invalid_argument("gauss: sigma must be > 0");
    TestFunction f;
    f.kind = TestFunctionKind::gauss;
    f.d = d;
    f.sigma1 = sigma;
    return f;
  }

  static TestFunction diff_gauss(double s1, double s2, int d) {
    if (s1 <= 0.0 || s2 <= 0.0)
      throw std::invalid_argument("diff_gauss: sigmas must be > 0");
    TestFunction f;
    f.kind = TestFunctionKind::diff_gauss;
    f.d = d;
    f.sigma1 = s1;
    f.sigma2 = s2;
    return f;
  }

  TestFunction scaled(double c) const {
    TestFunction f = *this;
    f.amplitude *= c;
    return f;
  }

  double mass() const {
    switch (kind) {
      case TestFunctionKind::gauss: return amplitude;
      case TestFunctionKind::diff_gauss: return 0.0;
      case TestFunctionKind::custom: return amplitude * custom_mass;
    }
    return 0.0;
  }

  bool beta_ok() const { return true; }  // all shipped kinds have moments

  bool radial() const { return kind != TestFunctionKind::custom; }

  // f at squared radius r2 (radial kinds only)
  double value_radial2(double r2) const {
    auto dens = [&](double s) {
      const double c =
          std::pow(2.0 * std::numbers::pi * s * s, -0.5 * static_cast<double>(d));
      return c * std::exp(-0.5 * r2 / (s * s));
    };
    switch (kind) {
      case TestFunctionKind::gauss: return amplitude * dens(sigma1);
      case TestFunctionKind::diff_gauss:
        return amplitude * (dens(sigma1) - dens(sigma2));
      case TestFunctionKind::custom:
        throw std::logic_error("value_radial2: custom kind is not radial");
    }
    return 0.0;
  }

  double value(const Eigen::VectorXd& x) const {
    if (x.size() != d) throw std::invalid_argument("TestFunction: dimension mismatch");
    if (kind == TestFunctionKind::custom) {
      if (!custom_f) throw std::invalid_argument("TestFunction: custom f required");
      return amplitude * custom_f(x);
    }
    return value_radial2(x.squaredNorm());
  }

  // radial transform fhat(|xi|) (real for the shipped kinds)
  double fhat_radial(double r) const {
    switch (kind) {
      case TestFunctionKind::gauss:
        return amplitude * std::exp(-0.5 * sigma1 * sigma1 * r * r);
      case TestFunctionKind::diff_gauss:
        return amplitude * (std::exp(-0.5 * sigma1 * sigma1 * r * r) -
                            std::exp(-0.5 * sigma2 * sigma2 * r * r));
      case TestFunctionKind::custom:
        if (!custom_fhat_radial)
          throw std::invalid_argument("TestFunction: transform required");
        return amplitude * custom_fhat_radial(r);
    }
    return 0.0;
  }
};

inline std::complex<double> fhat(const TestFunction& f, const Eigen::VectorXd& xi) {
  if (xi.size() != f.d) throw std::invalid_argument("fhat: dimension mismatch");
  return {f.fhat_radial(xi.norm()), 0.0};
}

/// One realization of the discretized double functional or of the
/// single-process integral.
struct FunctionalSample {
  double value = 0.0;
  double n = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  std::size_t nodes_u = 0;
  std::size_t nodes_v = 0;
  std::uint64_t replicate = 0;
};

namespace detail {

// column indices of grid nodes inside the batch grid (exact membership)
inline std::vector<Eigen::Index> locate_nodes(const std::vector<double>& sub,
                                              const std::vector<double>& all) {
  std::vector<Eigen::Index> idx(sub.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < sub.size(); ++i) {
    while (j < all.size() &&
           all[j] < sub[i] - 1e-12 * std::max(1.0, std::abs(sub[i])))
      ++j;
    if (j >= all.size() ||
        std::abs(all[j] - sub[i]) > 1e-12 * std::max(1.0, std::abs(sub[i])))
      throw std::invalid_argument(
          "evaluate: grid node not present in the batch grid");
    idx[i] = static_cast<Eigen::Index>(j);
  }
  return idx;
}

}  // namespace detail

// Tensor-quadrature value of sum_ij w_i w_j f(X_{u_i} - Xt_{v_j}).
inline FunctionalSample evaluate_F(const TestFunction& f, const PathBatch& batch,
                                   const TimeGrid& grid_u, const TimeGrid& grid_v) {
  if (batch.x.rows() != f.d)
    throw std::invalid_argument("evaluate_F: batch dimension mismatch");
  const auto iu = detail::locate_nodes(grid_u.nodes, batch.grid_nodes);
  const auto iv = detail::locate_nodes(grid_v.nodes, batch.grid_nodes);

  double total = 0.0;
  Eigen::VectorXd diff(f.d);
  for (std::size_t a = 0; a < iu.size(); ++a) {
    double row = 0.0;
    const auto xu = batch.x.col(iu[a]);
    for (std::size_t b = 0; b < iv.size(); ++b) {
      diff = xu - batch.xt.col(iv[b]);
      const double fv = f.radial()
                            ? f.value_radial2(diff.squaredNorm())
                            : f.value(diff);
      row += grid_v.weights[b] * fv;
    }
    total += grid_u.weights[a] * row;
  }

  FunctionalSample s;
  s.value = total;
  s.n = grid_u.n;
  s.t1 = grid_u.t;
  s.t2 = grid_v.t;
  s.nodes_u = grid_u.size();
  s.nodes_v = grid_v.size();
  s.replicate = batch.replicate;
  return s;
}

inline FunctionalSample evaluate_single(const TestFunction& f,
                                        const PathBatch& batch,
                                        const TimeGrid& grid) {
  if (batch.x.rows() != f.d)
    throw std::invalid_argument("evaluate_single: batch dimension mismatch");
  const auto iu = detail::locate_nodes(grid.nodes, batch.grid_nodes);
  double total = 0.0;
  for (std::size_t a = 0; a < iu.size(); ++a) {
    const auto xu = batch.x.col(iu[a]);
    const double fv =
        f.radial() ? f.value_radial2(xu.squaredNorm()) : f.value(xu);
    total += grid.weights[a] * fv;
  }
  FunctionalSample s;
  s.value = total;
  s.n = grid.n;
  s.t1 = grid.t;
  s.t2 = grid.t;
  s.nodes_u = grid.size();
  s.nodes_v = 0;
  s.replicate = batch.replicate;
  return s;
}

// E f(Z) for Z ~ N(0, s2 * I_d), in closed form for the Gaussian kinds.
inline double gaussian_mean(const TestFunction& f, double s2) {
  auto smoothed = [&](double sigma) {
    return std::pow(2.0 * std::numbers::pi * (sigma * sigma + s2),
                    -0.5 * static_cast<double>(f.d));
  };
  switch (f.kind) {
    case TestFunctionKind::gauss: return f.amplitude * smoothed(f.sigma1);
    case TestFunctionKind::diff_gauss:
      return f.amplitude * (smoothed(f.sigma1) - smoothed(f.sigma2));
    case TestFunctionKind::custom:
      throw std::invalid_argument("gaussian_mean: shipped radial kinds only");
  }
  return 0.0;
}

// Expectation of the discretized functional, with no sampling involved:
// each pair (u, v) contributes w_u w_v E f(X_u - Xt_v), and the difference
// is centered Gaussian with componentwise variance Var(X_u) + Var(Xt_v).
inline double mean_F_oracle(const KernelSpec& spec, const TestFunction& f,
                            const TimeGrid& grid_u, const TimeGrid& grid_v) {
  double total = 0.0;
  for (std::size_t a = 0; a < grid_u.size(); ++a) {
    const double vu = spec.var(grid_u.nodes[a]);
    double row = 0.0;
    for (std::size_t b = 0; b < grid_v.size(); ++b)
      row += grid_v.weights[b] * gaussian_mean(f, vu + spec.var(grid_v.nodes[b]));
    total += grid_u.weights[a] * row;
  }
  return total;
}

}  // namespace critlim

#endif  // CRITLIM_FUNCTIONAL_HPP
