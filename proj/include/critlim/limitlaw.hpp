#ifndef CRITLIM_LIMITLAW_HPP
#define CRITLIM_LIMITLAW_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "critlim/functional.hpp"
#include "critlim/rng.hpp"

namespace critlim {

// Gamma-ratio moment E Z_lambda^m = Gamma(m+lambda) / (m! Gamma(lambda)),
// evaluated as a product so it stays exact and overflow-free for m ~ 50.
inline double z_moment(double lambda, int m) {
  if (lambda <= 0.0) throw std::invalid_argument("z_moment: lambda must be > 0");
  if (m < 0) throw std::invalid_argument("z_moment: m must be >= 0");
  double v = 1.0;
  for (int i = 0; i < m; ++i) v *= (lambda + i) / (i + 1.0);
  return v;
}

// (2m-1)!! = 1 * 3 * ... * (2m-1); the even moments of a standard normal.
inline double odd_double_factorial(int m) {
  double v = 1.0;
  for (int i = 1; i <= m; ++i) v *= 2.0 * i - 1.0;
  return v;
}

// (k-1)!! for even k
inline double double_factorial(int k) {
  double v = 1.0;
  for (int i = k; i >= 2; i -= 2) v *= i;
  return v;
}

inline double beta_function(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

inline double sphere_area(int d) {  // surface area of S^{d-1}
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// First-order constant: (d/4) B(d/4, d/4) (2 pi alpha2)^{-d/2} * mass.
inline double c_fd(int d, double alpha2, double mass) {
  if (d < 3) throw std::invalid_argument("c_fd: d must be >= 3");
  if (alpha2 <= 0.0) throw std::invalid_argument("c_fd: alpha2 must be > 0");
  const double q = 0.25 * d;
  return q * beta_function(q, q) *
         std::pow(2.0 * std::numbers::pi * alpha2, -0.5 * d) * mass;
}

// integral_0^inf fhat(r)^2 / r dr for a radial mean-zero test function
inline double radial_sq_transform_integral(const TestFunction& f) {
  using boost::math::quadrature::gauss_kronrod;
  auto integrand = [&](double r) {
    const double v = f.fhat_radial(r);
    return v * v / r;
  };
  // fhat(r)^2 ~ r^4 near 0, so the integrand vanishes at the origin
  double v = gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 12, 1e-12);
  v += gauss_kronrod<double, 31>::integrate(
      integrand, 1.0, std::numeric_limits<double>::infinity(), 12, 1e-12);
  return v;
}

// integral over R^d of fhat(x)^2 |x|^{-d} dx, reduced to one radial axis
inline double fourier_weighted_integral(const TestFunction& f) {
  return sphere_area(f.d) * radial_sq_transform_integral(f);
}

/// Second-order constant for a mean-zero f:
/// d B(d/4,d/4) Gamma((d+4)/4)^2 / pi^{d/2} * (2 pi alpha2)^{-d} * integral.
inline double d_fd(int d, double alpha2, const TestFunction& f) {
  if (d < 3) throw std::invalid_argument("d_fd: d must be >= 3");
  if (f.d != d) throw std::invalid_argument("d_fd: dimension mismatch");
  if (f.mass() != 0.0)
    throw std::invalid_argument(
        "d_fd: integral diverges at 0 unless fhat(0) = 0");
  const double q = 0.25 * d;
  const double g = std::tgamma(q + 1.0);
  const double pref = d * beta_function(q, q) * g * g /
                      std::pow(std::numbers::pi, 0.5 * d);
  return pref * std::pow(2.0 * std::numbers::pi * alpha2, -static_cast<double>(d)) *
         fourier_weighted_integral(f);
}

// m-th limit moment of the unit-mass normalized double functional:
// (2 pi / alpha2)^{md/2} [z_moment]^2 ((d/4) B(d/4,d/4))^m (2m-1)!! t^m.
inline double first_order_moment(double lambda, int d, double alpha2, double t,
                                 int m) {
  if (m < 0) throw std::invalid_argument("first_order_moment: m must be >= 0");
  const double q = 0.25 * d;
  const double z = z_moment(lambda, m);
  return std::pow(2.0 * std::numbers::pi / alpha2, 0.5 * d * m) * z * z *
         std::pow(q * beta_function(q, q), m) * odd_double_factorial(m) *
         std::pow(t, m);
}

enum class LawOrder { first, second };

/// Limiting law of the normalized functional: C t Z Zt N^2 at first order,
/// sqrt(D t Z Zt N^2) eta at second order.
struct LimitLawSpec {
  LawOrder order = LawOrder::first;
  double lambda = 1.0;
  double t = 1.0;
  double constant = 0.0;  // C at first order, D at second
  int d = 4;
};

// m-th moment of C t Z Zt N^2
inline double first_law_moment(double c, double t, double lambda, int m) {
  const double z = z_moment(lambda, m);
  return std::pow(c * t, m) * z * z * odd_double_factorial(m);
}

inline double second_order_moment(const LimitLawSpec& law, int m) {
  if (law.order != LawOrder::second)
    throw std::invalid_argument("second_order_moment: second-order law required");
  if (m < 0) throw std::invalid_argument("second_order_moment: m must be >= 0");
  if (m % 2 == 1) return 0.0;
  const double z = z_moment(law.lambda, m / 2);
  const double df = double_factorial(m - 1);
  return z * z * std::pow(law.constant * law.t, 0.5 * m) * df * df;
}

inline double limit_moment(const LimitLawSpec& law, int m) {
  if (law.order == LawOrder::first)
    return first_law_moment(law.constant, law.t, law.lambda, m);
  return second_order_moment(law, m);
}

namespace detail {

// Beta(lambda, 1-lambda) draw for lambda in (0,1): Johnk's rejection on a
// per-draw substream, so draw i is independent of the rejection counts of
// other draws.
inline double beta_lambda_draw(double lambda, Philox& stream) {
  const double ia = 1.0 / lambda;
  const double ib = 1.0 / (1.0 - lambda);
  for (;;) {
    const double x = std::pow(stream.uniform(), ia);
    const double y = std::pow(stream.uniform(), ib);
    if (x + y <= 1.0 && x + y > 0.0) return x / (x + y);
  }
}

}  // namespace detail

/// Direct draws from the limit law; available for lambda in (0,1], where
/// Z_lambda is Beta(lambda, 1-lambda) (degenerate at 1 when lambda = 1).
inline std::vector<double> sample_limit(const LimitLawSpec& law,
                                        std::size_t count,
                                        std::uint64_t seed) {
  if (law.lambda <= 0.0)
    throw std::invalid_argument("sample_limit: lambda must be > 0");
  if (law.lambda > 1.0)
    throw std::invalid_argument(
        "sample_limit: limit law moment-determinate but no named sampler for "
        "lambda > 1");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    Philox stream = make_stream(seed, stream_tag::limit_law, i);
    const double z = law.lambda == 1.0
                         ? 1.0
                         : detail::beta_lambda_draw(law.lambda, stream);
    const double zt = law.lambda == 1.0
                          ? 1.0
                          : detail::beta_lambda_draw(law.lambda, stream);
    const double nn = stream.normal();
    if (law.order == LawOrder::first) {
      out[i] = law.constant * law.t * z * zt * nn * nn;
    } else {
      const double eta = stream.normal();
      out[i] = std::sqrt(law.constant * law.t * z * zt * nn * nn) * eta;
    }
  }
  return out;
}

struct LogKernelIdentityResult {
  double lhs = 0.0;      // integral of fhat^2 |x|^{-4} over R^4
  double rhs = 0.0;      // -2 pi^2 double integral of f(x) f(y) ln|x-y|
  double rel_err = 0.0;
  std::string note;
};

namespace detail {

// Mean of ln|x - y| over independent uniform directions in R^4 with radii
// r and s: ln(max) + (min/max)^2 / 4.
inline double log_distance_sphere_mean(double r, double s) {
  const double hi = std::max(r, s);
  const double lo = std::min(r, s);
  if (hi == 0.0) return -std::numeric_limits<double>::infinity();
  const double q = lo / hi;
  return std::log(hi) + 0.25 * q * q;
}

}  // namespace detail

/// Checks, for a radial mean-zero f on R^4, that the Fourier-side integral
/// of fhat^2 |x|^{-4} equals -2 pi^2 times the log-kernel energy of f.  Both
/// sides are evaluated by independent quadratures.
inline LogKernelIdentityResult log_kernel_identity_check(const TestFunction& f,
                                                         double quad_tol = 1e-9) {
  if (f.d != 4)
    throw std::invalid_argument("log_kernel_identity_check: d must be 4");
  if (f.mass() != 0.0)
    throw std::invalid_argument("log_kernel_identity_check: mass must be 0");
  if (!f.radial())
    throw std::invalid_argument("log_kernel_identity_check: radial kinds only");

  LogKernelIdentityResult res;
  res.lhs = fourier_weighted_integral(f);

  using boost::math::quadrature::gauss_kronrod;
  const double s3 = sphere_area(4);  // 2 pi^2
  auto fr = [&](double r) { return f.value_radial2(r * r); };
  auto inner = [&](double r) {
    auto h = [&](double s) {
      return fr(s) * s * s * s * detail::log_distance_sphere_mean(r, s);
    };
    // the sphere mean has a derivative kink at s = r; integrate each side
    double v = gauss_kronrod<double, 31>::integrate(h, 0.0, r, 12, quad_tol);
    v += gauss_kronrod<double, 31>::integrate(
        h, r, std::numeric_limits<double>::infinity(), 12, quad_tol);
    return v;
  };
  auto outer = [&](double r) { return fr(r) * r * r * r * inner(r); };
  const double dbl = s3 * s3 *
                     gauss_kronrod<double, 31>::integrate(
                         outer, 0.0, std::numeric_limits<double>::infinity(),
                         12, quad_tol);
  res.rhs = -2.0 * std::numbers::pi * std::numbers::pi * dbl;

  const double denom = std::max(std::abs(res.lhs), std::abs(res.rhs));
  res.rel_err = denom == 0.0 ? 0.0 : std::abs(res.lhs - res.rhs) / denom;
  res.note =
      "checked for rapidly decaying (not compactly supported) f; numerical "
      "agreement only";
  return res;
}

}  // namespace critlim

#endif  // CRITLIM_LIMITLAW_HPP
