#include <doctest.h>

#include <cmath>
#include <vector>

#include "fracspde/errors.hpp"
#include "fracspde/quadcheck.hpp"

using namespace fracspde;

TEST_CASE("simplex integral, n = 1 and n = 4") {
  for (double h : {-0.7, 0.0, 1.3}) {
    const SimplexResult r = dirichlet_simplex(1, h, 1.7);
    CHECK(r.numeric == doctest::Approx(std::pow(1.7, 1 + h) / (1 + h)).epsilon(1e-10));
  }
  const SimplexResult r4 = dirichlet_simplex(4, 0.5, 1.0);
  CHECK(r4.rel_error < 1e-6);
  // h = 0: volume of the simplex t^n / n!.
  CHECK(dirichlet_simplex(3, 0.0, 2.0).numeric == doctest::Approx(8.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("simplex refuses divergent and out-of-range input") {
  CHECK_THROWS_AS(dirichlet_simplex(2, -1.0, 1.0), DivergenceDetected);
  CHECK_THROWS_AS(dirichlet_simplex(2, -2.0, 1.0), DivergenceDetected);
  CHECK_THROWS_AS(dirichlet_simplex(5, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(dirichlet_simplex(0, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("intes scaling: pure mass is exactly alpha/2 d") {
  const ScalingReport r = intes_scaling(0.0, 1, 0.75, 1.0, {0.01, 0.1, 1.0});
  CHECK(r.exponent_expected == doctest::Approx(0.375));
  CHECK(r.exponent_fit == doctest::Approx(0.375).epsilon(1e-6));
  CHECK(r.residual < 1e-6);
  CHECK(r.pass);
  const ScalingReport s = intes_scaling(-0.5, 2, 1.5, 1.0, {0.01, 0.1, 1.0});
  CHECK(s.exponent_expected == doctest::Approx(1.5 * -0.5 / 2 + 1.5));
  CHECK(s.pass);
}

TEST_CASE("fractional double integral") {
  const ScalingReport r =
      frac_double_integral_scaling(0.75, 0.0, 0.75, 1.0, {{0.01, 0.01}, {0.1, 0.1}, {1.0, 1.0}});
  CHECK(r.exponent_expected == doctest::Approx(0.75 * 0.75 / 2));
  CHECK(std::abs(r.exponent_fit - r.exponent_expected) < 0.05);
  CHECK_THROWS_AS(frac_double_integral_scaling(0.75, -0.5, 0.75, 1.0, {{0.1, 0.1}, {1.0, 1.0}}),
                  DegenerateBranch);
  CHECK_THROWS_AS(frac_double_integral_scaling(0.5, 0.0, 0.75, 1.0, {{0.1, 0.1}, {1.0, 1.0}}),
                  InvalidArgument);
}

TEST_CASE("Bessel double integral input checks") {
  CHECK_THROWS_AS(bessel_double_integral_scaling(0.5, 3, 1.5, {}, {{1e-6, 1e-6}, {1e-7, 1e-7}}),
                  InvalidArgument);
}
