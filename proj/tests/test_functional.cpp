#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "critlim/functional.hpp"
#include "critlim/grid.hpp"
#include "critlim/kernels.hpp"
#include "critlim/sampler.hpp"

using namespace critlim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

PathBatch zero_batch(int d, const TimeGrid& grid) {
  PathBatch b;
  b.x = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(grid.size()));
  b.xt = b.x;
  b.grid_nodes = grid.nodes;
  return b;
}

}  // namespace

TEST_CASE("transform point values", "[functional]") {
  const auto g = TestFunction::gauss(1.0, 4);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  CHECK(fhat(g, zero).real() == 1.0);
  CHECK(fhat(g, zero).imag() == 0.0);

  const auto dg = TestFunction::diff_gauss(1.0, 2.0, 4);
  CHECK(fhat(dg, zero).real() == 0.0);
  CHECK(dg.mass() == 0.0);
  CHECK(g.mass() == 1.0);

  Eigen::VectorXd unit(4);
  unit << 1.0, 0.0, 0.0, 0.0;
  CHECK_THAT(fhat(g, unit).real(), WithinRel(std::exp(-0.5), 1e-14));

  TestFunction c;
  c.kind = TestFunctionKind::custom;
  c.d = 4;
  CHECK_THROWS_AS(fhat(c, unit), std::invalid_argument);
}

TEST_CASE("double functional on frozen paths", "[functional]") {
  const TimeGrid grid = build_grid(1.0, 1.0, 3, 6);

  SECTION("identically zero f") {
    const auto f0 = TestFunction::diff_gauss(1.3, 1.3, 4);
    const PathBatch b = zero_batch(4, grid);
    CHECK(evaluate_F(f0, b, grid, grid).value == 0.0);
  }

  SECTION("one-cell quadrature") {
    const TimeGrid gu = TimeGrid::from_nodes({2.0});
    const TimeGrid gv = TimeGrid::from_nodes({3.0});
    TimeGrid joint = TimeGrid::from_nodes({2.0, 3.0});
    PathBatch b = zero_batch(4, joint);
    b.x.col(0).setConstant(0.5);
    b.xt.col(1).setConstant(-0.5);
    const auto f = TestFunction::gauss(1.0, 4);
    Eigen::VectorXd diff = Eigen::VectorXd::Constant(4, 1.0);
    const double expected = gu.weights[0] * gv.weights[0] * f.value(diff);
    CHECK_THAT(evaluate_F(f, b, gu, gv).value, WithinRel(expected, 1e-14));
  }

  SECTION("flat zero paths give the mass-level value") {
    const auto f = TestFunction::gauss(1.0, 4);
    const PathBatch b = zero_batch(4, grid);
    double wsum = 0.0;
    for (double w : grid.weights) wsum += w;
    const double expected =
        wsum * wsum * std::pow(2.0 * std::numbers::pi, -2.0);
    CHECK_THAT(evaluate_F(f, b, grid, grid).value, WithinRel(expected, 1e-13));
  }
}

TEST_CASE("single-process functional", "[functional]") {
  const TimeGrid grid = build_grid(1.0, 1.0, 3, 6);
  const auto f0 = TestFunction::diff_gauss(0.9, 0.9, 2);
  CHECK(evaluate_single(f0, zero_batch(2, grid), grid).value == 0.0);

  const TimeGrid single = TimeGrid::from_nodes({2.5});
  PathBatch b = zero_batch(2, single);
  b.x.col(0) << 0.3, -0.4;
  const auto f = TestFunction::gauss(1.0, 2);
  CHECK_THAT(evaluate_single(f, b, single).value,
             WithinRel(single.weights[0] * f.value(b.x.col(0)), 1e-14));

  const PathBatch z = zero_batch(2, grid);
  double wsum = 0.0;
  for (double w : grid.weights) wsum += w;
  CHECK_THAT(evaluate_single(f, z, grid).value,
             WithinRel(wsum / (2.0 * std::numbers::pi), 1e-13));
}

TEST_CASE("evaluation rejects mismatched inputs", "[functional]") {
  const TimeGrid grid = build_grid(1.0, 1.0, 3, 6);
  const PathBatch b = zero_batch(4, grid);
  CHECK_THROWS_AS(evaluate_F(TestFunction::gauss(1.0, 3), b, grid, grid),
                  std::invalid_argument);
  const TimeGrid other = TimeGrid::from_nodes({0.123, 4.56});
  CHECK_THROWS_AS(evaluate_F(TestFunction::gauss(1.0, 4), b, other, grid),
                  std::invalid_argument);
}

TEST_CASE("linearity over differences of gaussians", "[functional]") {
  const TimeGrid grid = build_grid(1.0, 1.0, 3, 6);
  const auto spec = KernelSpec::fbm(0.5, 4);
  const PathFactorization fact(spec, grid, FactorMethod::cholesky);
  const PathBatch b = sample(fact, 4, 0, 31);

  const auto g1 = TestFunction::gauss(0.8, 4);
  const auto g2 = TestFunction::gauss(1.7, 4);
  const auto dg = TestFunction::diff_gauss(0.8, 1.7, 4);
  const double lhs = evaluate_F(dg, b, grid, grid).value;
  const double rhs =
      evaluate_F(g1, b, grid, grid).value - evaluate_F(g2, b, grid, grid).value;
  CHECK_THAT(lhs, WithinAbs(rhs, 1e-12 * std::max(1.0, std::abs(rhs))));

  const auto scaled = g1.scaled(-2.5);
  CHECK_THAT(evaluate_F(scaled, b, grid, grid).value,
             WithinRel(-2.5 * evaluate_F(g1, b, grid, grid).value, 1e-14));
}

TEST_CASE("mean oracle closed forms", "[functional]") {
  const auto spec = KernelSpec::fbm(0.5, 4);
  const TimeGrid gu = TimeGrid::from_nodes({1.0});
  const TimeGrid gv = TimeGrid::from_nodes({1.0});

  const auto f0 = TestFunction::diff_gauss(1.1, 1.1, 4);
  CHECK(mean_F_oracle(spec, f0, gu, gv) == 0.0);

  // var(X_1) + var(Xt_1) + sigma^2 = 3 at H = 1/2
  const auto f = TestFunction::gauss(1.0, 4);
  const double expected =
      gu.weights[0] * gv.weights[0] *
      std::pow(2.0 * std::numbers::pi * 3.0, -2.0);
  CHECK_THAT(mean_F_oracle(spec, f, gu, gv), WithinRel(expected, 1e-13));
  CHECK_THAT(expected / (gu.weights[0] * gv.weights[0]),
             WithinRel(0.0028144773234, 1e-9));
}

TEST_CASE("mean oracle against the radial-transform route", "[functional]") {
  // independent evaluation of E f(Z), Z ~ N(0, s2 I_d), through the
  // transform side: (2 pi)^{-d} S_{d-1} int fhat(r) exp(-r^2 s2 / 2) r^{d-1}
  using boost::math::quadrature::gauss_kronrod;
  for (int d : {3, 4, 5}) {
    const auto f = TestFunction::diff_gauss(0.9, 2.1, d);
    for (double s2 : {0.3, 1.0, 7.5}) {
      auto integrand = [&](double r) {
        return f.fhat_radial(r) * std::exp(-0.5 * r * r * s2) *
               std::pow(r, d - 1);
      };
      const double radial = gauss_kronrod<double, 31>::integrate(
          integrand, 0.0, std::numeric_limits<double>::infinity(), 10, 1e-12);
      const double area =
          2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
      const double via_transform =
          std::pow(2.0 * std::numbers::pi, -d) * area * radial;
      CHECK_THAT(gaussian_mean(f, s2), WithinRel(via_transform, 1e-9));
    }
  }
}

TEST_CASE("mean oracle agrees with monte carlo", "[functional]") {
  const auto spec = KernelSpec::fbm(0.5, 4);
  const auto f = TestFunction::gauss(1.0, 4);
  const TimeGrid grid = build_grid(2.0, 1.0, 4, 16);
  const PathFactorization fact(spec, grid, FactorMethod::cholesky);

  const std::size_t reps = 4000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const double v = evaluate_F(f, sample(fact, 4, r, 101), grid, grid).value;
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / static_cast<double>(reps);
  const double se = std::sqrt(
      (sum_sq / static_cast<double>(reps) - mean * mean) / static_cast<double>(reps));
  const double oracle = mean_F_oracle(spec, f, grid, grid);
  CHECK_THAT(mean, WithinAbs(oracle, 5.0 * se));
}

TEST_CASE("swapping the two processes preserves the law", "[functional]") {
  // asymmetric grids so the swapped pairing is not a transposition of the
  // original quadrature sum
  const auto spec = KernelSpec::subfbm(0.4, 5);
  const auto f = TestFunction::gauss(1.0, 5);
  const TimeGrid gu = build_grid(2.0, 1.0, 4, 12);
  const TimeGrid gv = build_grid(2.0, 0.5, 4, 12);
  TimeGrid joint = TimeGrid::from_nodes([&] {
    std::vector<double> nodes = gu.nodes;
    nodes.insert(nodes.end(), gv.nodes.begin(), gv.nodes.end());
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
  }());
  const PathFactorization fact(spec, joint, FactorMethod::cholesky);

  const std::size_t reps = 10000;
  double sa = 0.0, saa = 0.0, sb = 0.0, sbb = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    PathBatch a = sample(fact, 5, r, 303);
    const double va = evaluate_F(f, a, gu, gv).value;
    PathBatch b = sample(fact, 5, r, 909);
    std::swap(b.x, b.xt);
    const double vb = evaluate_F(f, b, gu, gv).value;
    sa += va;
    saa += va * va;
    sb += vb;
    sbb += vb * vb;
  }
  const double n = static_cast<double>(reps);
  const double ma = sa / n, mb = sb / n;
  const double se = std::sqrt((saa / n - ma * ma) / n + (sbb / n - mb * mb) / n);
  CHECK_THAT(ma, WithinAbs(mb, 4.0 * se));
}

TEST_CASE("mean oracle is stable under grid refinement", "[functional]") {
  for (auto [spec, f] :
       {std::pair{KernelSpec::fbm(0.5, 4), TestFunction::gauss(1.0, 4)},
        std::pair{KernelSpec::subfbm(0.4, 5), TestFunction::gauss(1.0, 5)}}) {
    const TimeGrid coarse = build_grid(6.0, 1.0, 8, 128);
    const TimeGrid fine = build_grid(6.0, 1.0, 8, 256);
    const double a = mean_F_oracle(spec, f, coarse, coarse);
    const double b = mean_F_oracle(spec, f, fine, fine);
    CHECK(std::abs(a - b) <= 0.01 * std::abs(b));
  }
}
