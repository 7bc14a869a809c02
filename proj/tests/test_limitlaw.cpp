#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "critlim/limitlaw.hpp"
#include "critlim/stats.hpp"

using namespace critlim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// independent oracle: E X^m for X ~ Beta(lambda, 1 - lambda) by direct
// quadrature of x^{m + lambda - 1} (1 - x)^{-lambda} / B(lambda, 1 - lambda).
// Split at 1/2 and substitute u = 1 - x on the right half, so the singular
// factor is always evaluated from an exactly-representable small argument.
double beta_moment_quadrature(double lambda, int m) {
  boost::math::quadrature::tanh_sinh<double> integ;
  auto left = [&](double x) {
    return std::pow(x, m + lambda - 1.0) * std::pow(1.0 - x, -lambda);
  };
  auto right = [&](double u) {
    return std::pow(1.0 - u, m + lambda - 1.0) * std::pow(u, -lambda);
  };
  const double raw =
      integ.integrate(left, 0.0, 0.5) + integ.integrate(right, 0.0, 0.5);
  return raw / beta_function(lambda, 1.0 - lambda);
}

}  // namespace

TEST_CASE("gamma-ratio moments", "[limitlaw]") {
  CHECK(z_moment(1.0, 5) == 1.0);
  CHECK(z_moment(0.37, 1) == 0.37);
  CHECK(z_moment(2.9, 0) == 1.0);
  const double lam = 0.8588;
  CHECK_THAT(z_moment(lam, 2), WithinRel(lam * (lam + 1.0) / 2.0, 1e-15));
  CHECK_THROWS_AS(z_moment(0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(z_moment(-1.0, 2), std::invalid_argument);

  // recurrence holds exactly: the loop multiplies by the rounded quotient
  for (double lambda : {0.3, 0.9, 1.7, 4.2}) {
    for (int m = 0; m < 30; ++m)
      CHECK(z_moment(lambda, m + 1) ==
            z_moment(lambda, m) * ((lambda + m) / (m + 1.0)));
  }
}

TEST_CASE("gamma-ratio moments match the beta quadrature oracle",
          "[limitlaw]") {
  for (double lambda : {0.3, 0.5, 0.8588}) {
    for (int m = 0; m <= 6; ++m)
      CHECK_THAT(z_moment(lambda, m),
                 WithinRel(beta_moment_quadrature(lambda, m), 1e-10));
  }
}

TEST_CASE("first-order constant", "[limitlaw]") {
  CHECK_THAT(c_fd(4, 1.0, 1.0), WithinRel(0.025330295910584443, 1e-13));
  CHECK(c_fd(4, 1.0, 0.0) == 0.0);
  CHECK_THROWS_AS(c_fd(2, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(c_fd(4, 0.0, 1.0), std::invalid_argument);
  // at alpha2 = 1 the constant carries no alpha2 factor at all
  CHECK(c_fd(4, 1.0, 1.0) ==
        0.25 * 4.0 * beta_function(1.0, 1.0) *
            std::pow(2.0 * std::numbers::pi, -2.0));
}

TEST_CASE("second-order constant quadrature vs closed forms", "[limitlaw]") {
  const auto f = TestFunction::diff_gauss(1.0, 2.0, 4);
  CHECK_THAT(d_fd(4, 1.0, f), WithinRel(1.1453938690194604e-3, 1e-8));

  CHECK_THROWS_AS(d_fd(4, 1.0, TestFunction::gauss(1.0, 4)),
                  std::invalid_argument);
  CHECK(d_fd(4, 1.0, TestFunction::diff_gauss(1.5, 1.5, 4)) == 0.0);

  // family closed form: D = ln((a^2+b^2)/(2ab)) / (2 pi^4 alpha2^4) at d = 4
  Philox rng(2024);
  for (int i = 0; i < 10; ++i) {
    const double a = 0.5 + 2.0 * rng.uniform();
    const double b = a + 0.2 + 2.0 * rng.uniform();
    const double alpha2 = 0.5 + rng.uniform();
    const double closed = std::log((a * a + b * b) / (2.0 * a * b)) /
                          (2.0 * std::pow(std::numbers::pi, 4.0) *
                           std::pow(alpha2, 4.0));
    CHECK_THAT(d_fd(4, alpha2, TestFunction::diff_gauss(a, b, 4)),
               WithinRel(closed, 1e-8));
  }
}

TEST_CASE("normalized first-order limit moments", "[limitlaw]") {
  CHECK_THAT(first_order_moment(1.0, 4, 1.0, 1.0, 1),
             WithinRel(4.0 * std::numbers::pi * std::numbers::pi, 1e-13));
  CHECK(first_order_moment(0.7, 5, 2.0, 1.0, 0) == 1.0);

  // scaling the unit-mass moment by (mass / (2 pi)^d)^m reproduces the
  // constant-based moment sequence
  Philox rng(5);
  for (int i = 0; i < 20; ++i) {
    const int d = 3 + static_cast<int>(rng.uniform() * 3);
    const double alpha2 = 0.5 + 2.0 * rng.uniform();
    const double lambda = 0.2 + 2.0 * rng.uniform();
    const double t = 0.1 + 3.0 * rng.uniform();
    const double mass = -1.0 + 2.0 * rng.uniform();
    for (int m = 0; m <= 6; ++m) {
      const double lhs =
          first_order_moment(lambda, d, alpha2, t, m) *
          std::pow(mass / std::pow(2.0 * std::numbers::pi, d), m);
      const double z = z_moment(lambda, m);
      const double rhs = std::pow(c_fd(d, alpha2, mass) * t, m) * z * z *
                         odd_double_factorial(m);
      CHECK_THAT(lhs, WithinRel(rhs, 1e-12));
    }
  }
}

TEST_CASE("second-order moment sequence", "[limitlaw]") {
  LimitLawSpec law;
  law.order = LawOrder::second;
  law.lambda = 1.0;
  law.t = 1.3;
  law.constant = 0.71;
  CHECK(second_order_moment(law, 3) == 0.0);
  CHECK(second_order_moment(law, 1) == 0.0);
  CHECK(second_order_moment(law, 0) == 1.0);
  CHECK_THAT(second_order_moment(law, 2), WithinRel(0.71 * 1.3, 1e-15));

  law.lambda = 0.6;
  // m = 4: z(lambda, 2)^2 (D t)^2 (3!!)^2
  const double z2 = z_moment(0.6, 2);
  CHECK_THAT(second_order_moment(law, 4),
             WithinRel(z2 * z2 * std::pow(0.71 * 1.3, 2.0) * 9.0, 1e-14));

  law.order = LawOrder::first;
  CHECK_THROWS_AS(second_order_moment(law, 2), std::invalid_argument);
}

TEST_CASE("limit sampler moments", "[limitlaw]") {
  LimitLawSpec law;
  law.order = LawOrder::first;
  law.lambda = 1.0;
  law.t = 1.0;
  law.constant = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);
  law.d = 4;

  SECTION("degenerate z at lambda = 1") {
    const auto draws = sample_limit(law, 20000, 7);
    const auto est = estimate_moments(draws, 2);
    for (int m = 1; m <= 2; ++m)
      CHECK_THAT(est.mean[m - 1],
                 WithinAbs(first_law_moment(law.constant, 1.0, 1.0, m),
                           4.0 * est.se[m - 1]));
  }

  SECTION("second order is symmetric") {
    law.order = LawOrder::second;
    const auto draws = sample_limit(law, 20000, 8);
    const auto est = estimate_moments(draws, 3);
    CHECK_THAT(est.mean[0], WithinAbs(0.0, 4.0 * est.se[0]));
    CHECK_THAT(est.mean[2], WithinAbs(0.0, 4.0 * est.se[2]));
  }

  SECTION("beta-distributed z") {
    law.lambda = 0.85884839532954267;  // sub-fractional H = 0.4, d = 5
    const auto draws = sample_limit(law, 40000, 9);
    const auto est = estimate_moments(draws, 2);
    for (int m = 1; m <= 2; ++m)
      CHECK_THAT(est.mean[m - 1],
                 WithinAbs(first_law_moment(law.constant, 1.0, law.lambda, m),
                           4.0 * est.se[m - 1]));
  }

  SECTION("no sampler beyond lambda = 1") {
    law.lambda = 1.26;
    CHECK_THROWS_AS(sample_limit(law, 10, 1), std::invalid_argument);
    law.lambda = 0.0;
    CHECK_THROWS_AS(sample_limit(law, 10, 1), std::invalid_argument);
  }

  SECTION("draws are reproducible") {
    law.lambda = 0.4;
    const auto a = sample_limit(law, 100, 42);
    const auto b = sample_limit(law, 100, 42);
    CHECK(a == b);
  }
}

TEST_CASE("log-kernel identity", "[limitlaw]") {
  const auto res = log_kernel_identity_check(TestFunction::diff_gauss(1.0, 2.0, 4));
  CHECK_THAT(res.lhs, WithinRel(4.4046771522508675, 1e-6));
  CHECK(res.rel_err <= 1e-2);
  CHECK_FALSE(res.note.empty());

  const auto zero = log_kernel_identity_check(TestFunction::diff_gauss(0.8, 0.8, 4));
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  CHECK(zero.rel_err == 0.0);

  CHECK_THROWS_AS(log_kernel_identity_check(TestFunction::diff_gauss(1.0, 2.0, 3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(log_kernel_identity_check(TestFunction::gauss(1.0, 4)),
                  std::invalid_argument);
}
