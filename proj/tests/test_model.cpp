#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fkpp/model.hpp"

using namespace fkpp;

TEST_CASE("derived constants at r=2, A=1") {
  ModelParams p = make_params(2.0, 1.0);
  CHECK(p.nu == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(p.log_nu == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.gamma == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(p.beta == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(p.alpha == doctest::Approx(0.5 * (1.0 + std::sqrt(5.0))).epsilon(1e-15));
  CHECK(p.s_a == doctest::Approx(p.alpha + 0.5).epsilon(1e-15));
  CHECK(p.y_bar == doctest::Approx(std::pow(3.0, 2.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("identity sqrt(gamma^2 - beta) = 1 - gamma") {
  for (double r : {1.2, 1.5, 2.0, 2.5, 2.9}) {
    ModelParams p = make_params(r, 1.7);
    CHECK(std::abs(std::sqrt(p.gamma * p.gamma - p.beta) - (1.0 - p.gamma)) <
          1e-14);
  }
}

TEST_CASE("f(1) = 0 and f'(1) for a lattice of (r, A)") {
  for (double r : {1.2, 1.5, 2.0, 3.0, 5.0}) {
    for (double A : {0.5, 1.0, 2.0, 4.0}) {
      ModelParams p = make_params(r, A);
      CHECK(std::abs(reaction(1.0, p)) < 1e-12);
      // finite-difference check of f'(1) from the left
      double eps = 1e-7;
      double fd = (reaction(1.0, p) - reaction(1.0 - eps, p)) / eps;
      CHECK(fd == doctest::Approx(reaction_deriv_at_one(p)).epsilon(1e-4));
    }
  }
}

TEST_CASE("f(1) = 0 survives nu overflow (r=1.2, A=4)") {
  ModelParams p = make_params(1.2, 4.0);
  CHECK(std::isinf(p.nu));
  CHECK(std::isfinite(p.log_nu));
  CHECK(std::abs(reaction(1.0, p)) < 1e-12);
}

TEST_CASE("alpha solves alpha(alpha - 1) = A") {
  for (double A : {0.5, 1.0, 2.0, 4.0}) {
    double a = alpha_of(A);
    CHECK(std::abs(a * (a - 1.0) - A) < 1e-12);
    CHECK(a > 1.0);
  }
}

TEST_CASE("reaction domain and clamps") {
  ModelParams p = make_params(2.0, 1.0);
  CHECK_THROWS_AS(reaction(-1e-9, p), std::domain_error);
  CHECK_THROWS_AS(reaction(p.nu, p), std::domain_error);
  CHECK(reaction(0.0, p) == 0.0);
  // below clamp_low the limit form f(u) = u is used
  CHECK(reaction(1e-300, p) == 1e-300);
  // above clamp_high the argument is clamped to 1, so f = 0
  CHECK(std::abs(reaction(1.0 + 1e-9, p)) < 1e-12);
}

TEST_CASE("fast integer-power paths agree with pow") {
  for (double r : {2.0, 3.0, 5.0}) {
    ModelParams p = make_params(r, 1.3);
    for (double u : {0.9, 0.5, 1e-3, 1e-30}) {
      double ell = p.log_nu - std::log(u);
      double expected = u * (1.0 - p.A * std::pow(ell, 1.0 - r));
      CHECK(reaction(u, p) == doctest::Approx(expected).epsilon(1e-14));
    }
  }
}

TEST_CASE("Gamma curve and its derivatives at r=2, A=1") {
  ModelParams p = make_params(2.0, 1.0);
  // Gamma(y) = y^2/3 + 3/y; at y_bar both terms equal 3^{1/3}
  double c = std::pow(3.0, 1.0 / 3.0);
  CHECK(gamma_curve(p.y_bar, p) == doctest::Approx(2.0 * c).epsilon(1e-13));
  // stationarity identity Gamma'(y_bar) = gamma y_bar / 2
  CHECK(gamma_curve_deriv(p.y_bar, p) ==
        doctest::Approx(0.5 * p.gamma * p.y_bar).epsilon(1e-12));
  CHECK(gamma_curve_second(p.y_bar, p) > 0.5 * p.gamma);  // strict minimum gap
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(make_params(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_params(2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_params(2.0, -1.0), std::invalid_argument);
  ModelParams p3 = make_params(3.0, 1.0);
  CHECK_THROWS_AS(gamma_curve(1.0, p3), std::invalid_argument);
  ModelParams p2 = make_params(2.0, 1.0);
  CHECK_THROWS_AS(gamma_curve(0.0, p2), std::invalid_argument);
}
