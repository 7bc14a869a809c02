#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "critlim/assumptions.hpp"

using namespace critlim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

// smallest normalized-Gram eigenvalue seen over the seeded m = 5 sweep below
static constexpr double KAPPA_BASELINE = 0.73281437286463347;

TEST_CASE("variance envelopes", "[assumptions]") {
  SECTION("stationary increments give a zero envelope") {
    const auto spec = KernelSpec::fbm(0.7, 4);
    for (auto which : {Assumption::A1, Assumption::A2}) {
      const auto rep = check_A(spec, which, 0.1, 500, 1);
      CHECK(rep.violations == 0);
      CHECK(rep.empirical_constant <= 1e-11);
    }
  }

  SECTION("sub-fractional envelope shrinks with the stated slope") {
    const auto spec = KernelSpec::subfbm(0.4, 5);
    std::vector<double> eps{0.1, 0.01, 0.001};
    std::vector<double> phi;
    for (double e : eps) {
      const auto rep = check_A(spec, Assumption::A2, e, 4000, 2);
      CHECK(rep.violations == 0);
      phi.push_back(rep.empirical_constant);
    }
    CHECK(phi[0] > phi[1]);
    CHECK(phi[1] > phi[2]);
    // log-log slope across the schedule; expected 2 - 2H = 1.2
    const double slope = (std::log(phi[0]) - std::log(phi[2])) /
                         (std::log(eps[0]) - std::log(eps[2]));
    CHECK_THAT(slope, WithinAbs(1.2, 0.15));
  }

  SECTION("envelope vanishes in the small-ratio limit for every family") {
    for (auto spec : {KernelSpec::subfbm(0.7, 4), KernelSpec::bifbm(0.75, 2.0 / 3.0, 4),
                      KernelSpec::bifbm(0.3, 0.9, 4)}) {
      for (auto which : {Assumption::A1, Assumption::A2}) {
        const auto wide = check_A(spec, which, 0.1, 2000, 3);
        const auto tight = check_A(spec, which, 1e-4, 2000, 3);
        CHECK(tight.empirical_constant < 0.1 * wide.empirical_constant);
        CHECK(tight.violations == 0);
      }
    }
  }

  SECTION("argument validation") {
    const auto spec = KernelSpec::fbm(0.5, 4);
    CHECK_THROWS_AS(check_A(spec, Assumption::B, 0.1, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(check_A(spec, Assumption::A1, 0.0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(check_A(spec, Assumption::A1, 0.1, 0, 1), std::invalid_argument);
  }
}

TEST_CASE("nondeterminism constant", "[assumptions]") {
  SECTION("m = 1 recovers alpha1 exactly") {
    for (auto spec : {KernelSpec::fbm(0.63, 4), KernelSpec::subfbm(0.4, 5),
                      KernelSpec::bifbm(0.75, 2.0 / 3.0, 4)}) {
      const auto rep = estimate_kappa(spec, 1, 200, 4);
      CHECK_THAT(rep.empirical_constant, WithinRel(spec.alphas().alpha1, 1e-12));
      CHECK(rep.violations == 0);
    }
  }

  SECTION("independent increments normalize to the identity") {
    const auto rep = estimate_kappa(KernelSpec::fbm(0.5, 4), 2, 200, 5);
    CHECK_THAT(rep.empirical_constant, WithinRel(1.0, 1e-12));
  }

  SECTION("positive for all families up to m = 8") {
    for (auto spec : {KernelSpec::fbm(0.35, 4), KernelSpec::fbm(0.75, 4),
                      KernelSpec::subfbm(0.4, 5), KernelSpec::bifbm(0.75, 2.0 / 3.0, 4)}) {
      for (int m : {2, 5, 8}) {
        const auto rep = estimate_kappa(spec, m, 1000, 6);
        CHECK(rep.violations == 0);
        CHECK(rep.empirical_constant > 0.0);
      }
    }
  }

  SECTION("regression baseline") {
    const auto rep = estimate_kappa(KernelSpec::subfbm(0.4, 5), 5, 10000, 7);
    CHECK(rep.empirical_constant > 0.0);
    // frozen from this seeded run; guards against silent changes
    CHECK_THAT(rep.empirical_constant, WithinRel(KAPPA_BASELINE, 1e-9));
  }

  CHECK_THROWS_AS(estimate_kappa(KernelSpec::fbm(0.5, 4), 0, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_kappa(KernelSpec::fbm(0.5, 4), 13, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("ratio conditions", "[assumptions]") {
  SECTION("disjoint brownian increments are uncorrelated") {
    const auto rep = check_C(KernelSpec::fbm(0.5, 4), Assumption::C1, 4.0, 2000, 8);
    CHECK(rep.violations == 0);
    CHECK(rep.empirical_constant <= 1e-12);
  }

  SECTION("long-memory case stays within the stated bound") {
    const auto spec = KernelSpec::fbm(0.75, 4);
    const auto rep = check_C(spec, Assumption::C1, 16.0, 5000, 9);
    CHECK(beta_bound(spec, Assumption::C1, 16.0) == 2.0);  // 4 / 16^{1/4}
    CHECK(rep.violations == 0);
    CHECK(rep.empirical_constant < 1.0);
  }

  SECTION("bi-fractional distant-increment bound") {
    const auto spec = KernelSpec::bifbm(0.75, 2.0 / 3.0, 4);
    const auto rep = check_C(spec, Assumption::C2, 32.0, 5000, 10);
    CHECK(rep.violations == 0);
  }

  SECTION("observed maxima decrease over nested gamma filters") {
    for (auto spec : {KernelSpec::fbm(0.75, 4), KernelSpec::subfbm(0.4, 5),
                      KernelSpec::bifbm(0.6, 0.5, 4)}) {
      for (auto which : {Assumption::C1, Assumption::C2}) {
        const auto reports =
            check_C_nested(spec, which, {2.0, 5.0, 10.0, 100.0}, 40000, 11);
        for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
          CHECK(reports[i].trials > reports[i + 1].trials);
          CHECK(reports[i + 1].empirical_constant <=
                reports[i].empirical_constant + 1e-9);
        }
        for (const auto& rep : reports) {
          CHECK(rep.trials > 100);
          CHECK(rep.violations == 0);
        }
      }
    }
  }

  SECTION("correlation ratios respect cauchy-schwarz") {
    Philox rng(12);
    for (auto spec : {KernelSpec::fbm(0.25, 4), KernelSpec::fbm(0.9, 4),
                      KernelSpec::subfbm(0.7, 4), KernelSpec::bifbm(0.8, 0.6, 4)}) {
      for (int i = 0; i < 3000; ++i) {
        double g[4];
        for (double& v : g) v = std::pow(10.0, -4.0 + 8.0 * rng.uniform());
        const double t1 = g[0], t2 = t1 + g[1], t3 = t2 + g[2], t4 = t3 + g[3];
        const double num = std::abs(increment_cov(spec, t1, t2, t3, t4));
        const double den = std::sqrt(increment_var(spec, t3, t4) *
                                     increment_var(spec, t1, t2));
        CHECK(num / den <= 1.0 + 1e-12);
      }
    }
  }

  SECTION("argument validation") {
    const auto spec = KernelSpec::fbm(0.5, 4);
    CHECK_THROWS_AS(check_C(spec, Assumption::A1, 2.0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(check_C(spec, Assumption::C1, 1.0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(beta_bound(spec, Assumption::B, 2.0), std::invalid_argument);
  }
}
