#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <vector>

#include "fracspde/chaos.hpp"

using namespace fracspde;

namespace {

ConvergenceInputs frac_inputs(double alpha, std::vector<double> H, double t = 1.0) {
  NoiseSpec n;
  n.d = static_cast<int>(H.size());
  n.space = Fractional{std::move(H)};
  return ConvergenceInputs(FractionalOrder(alpha), n, t);
}

// Fourier transform of 2H(2H-1)|x|^(2H-2): 2 Gamma(2H+1) sin(pi H) |xi|^(1-2H).
double frac_hat(double H, double xi) {
  return 2.0 * std::tgamma(2 * H + 1) * std::sin(M_PI * H) * std::pow(std::abs(xi), 1 - 2 * H);
}

}  // namespace

TEST_CASE("convergence exponent") {
  CHECK(ell_closed_form(0.75, 1, 0.75) == doctest::Approx(-0.34375));
  CHECK(compute_ell(frac_inputs(0.75, {0.75})) == doctest::Approx(-0.34375).epsilon(1e-14));
  CHECK(compute_ell(frac_inputs(1.5, {0.6, 0.8})) == doctest::Approx(ell_closed_form(1.5, 2, 1.4)));
  CHECK(ell_prime(-0.4, 2, 0.75, 0.1) == doctest::Approx(-0.4 + 0.0375));
}

TEST_CASE("degenerate branch needs epsilon") {
  // 2H - 2 + kappa_d/d = -1 at H = 1/2, kappa_d = 0.
  CHECK_THROWS_AS(case_exponent(0.5, 0.0, 1, 0.75), DegenerateBranch);
  const CaseExponent c = case_exponent(0.5, 0.0, 1, 0.75, 0.05);
  CHECK(c.degenerate);
  CHECK_FALSE(case_exponent(0.7, 0.0, 1, 0.75).degenerate);
}

TEST_CASE("bound series closed form") {
  const double ell = -0.3, c = 1.0, ct = 2.0, t = 0.8;
  const BoundSeries b = bound_terms(ell, c, ct, t, 30);
  REQUIRE(b.terms.size() == 31);
  CHECK(b.terms[0] == doctest::Approx(1.0));
  const double g = 2 * ell + 1;
  for (int n : {1, 7, 30}) {
    const double log_b = n * (std::log(c * ct) + std::lgamma(g) + g * std::log(t)) - std::lgamma(g * n + 1);
    CHECK(std::log(b.terms[n]) == doctest::Approx(log_b).epsilon(1e-12));
  }
  CHECK(b.summable);
  CHECK(bound_terms(-0.5, 1, 1, 1, 10).divergent);
  CHECK_FALSE(bound_terms(-0.6, 1, 1, 1, 10).summable);
}

TEST_CASE("condition report") {
  const ChaosReport ok = check_conditions(frac_inputs(0.75, {0.75}));
  CHECK(ok.threshold_ok);
  CHECK(ok.verdict);
  CHECK(ok.margin == doctest::Approx(0.15625));
  // d = 2, alpha = 0.75 needs H1 + H2 > 4/3.
  const ChaosReport bad = check_conditions(frac_inputs(0.75, {0.6, 0.6}));
  CHECK_FALSE(bad.threshold_ok);
  CHECK_FALSE(bad.verdict);
  NoiseSpec r;
  r.d = 3;
  r.space = Riesz{2.8, 1.0};
  const ChaosReport rr = check_conditions(ConvergenceInputs(FractionalOrder(1.5), r, 1.0));
  CHECK_FALSE(rr.verdict);
}

TEST_CASE("lambda_hat for the fractional kernel") {
  for (double H : {0.6, 0.75, 0.9}) {
    for (double xi : {0.1, 1.0, 7.0}) {
      CHECK(lambda_hat(Fractional{{H}}, xi) == doctest::Approx(frac_hat(H, xi)).epsilon(1e-12));
    }
    CHECK(lambda_hat_mass(Fractional{{H}}, 0.5) ==
          doctest::Approx(frac_hat(H, 0.5) * 0.5 / (2 - 2 * H)).epsilon(1e-12));
  }
}

TEST_CASE("first chaos term against a direct spectral integral") {
  boost::math::quadrature::exp_sinh<double> es;
  for (double al : {0.75, 1.5}) {
    for (double H : {0.6, 0.75}) {
      const double t = 0.25;
      const ConvergenceInputs in = frac_inputs(al, {H}, t);
      const InitialData data = InitialData::constant(1.0, 0.0, al > 1.0);
      const std::vector<double> x = {0.0};
      const ChaosTerm got = chaos_term_direct(1, in, data, t, x);
      const double ta = std::pow(t, al);
      const double oracle =
          es.integrate([&](double xi) {
            const double j = ta * mittag_leffler(al, al + 1, -xi * xi * ta);
            return frac_hat(H, xi) * j * j;
          }) / M_PI;
      CHECK(got.value == doctest::Approx(oracle).epsilon(1e-5));
      CHECK(got.error < 1e-3 * got.value);
    }
  }
}

TEST_CASE("exponential time kernel tends to the constant one") {
  const double t = 0.25;
  NoiseSpec n;
  n.space = Fractional{{0.75}};
  const ConvergenceInputs c(FractionalOrder(0.75), n, t);
  n.time = ExponentialTime{1e-7};
  const ConvergenceInputs e(FractionalOrder(0.75), n, t);
  const InitialData data = InitialData::constant(1.0, 0.0, false);
  const std::vector<double> x = {0.0};
  const double tc = chaos_term_direct(1, c, data, t, x).value;
  const double te = chaos_term_direct(1, e, data, t, x).value;
  CHECK(te == doctest::Approx(tc).epsilon(1e-4));
  CHECK(te < tc);
}

TEST_CASE("unsupported chaos inputs") {
  const ConvergenceInputs in = frac_inputs(0.75, {0.75}, 0.25);
  const std::vector<double> x = {0.0};
  CHECK_THROWS_AS(chaos_term_direct(3, in, InitialData::constant(1.0, 0.0, false), 0.25, x),
                  InvalidArgument);
  CHECK_THROWS_AS(chaos_term_direct(1, in, InitialData::gaussian_bump(1.0, 0.5), 0.25, x),
                  UnsupportedInput);
  NoiseSpec n;
  n.time = RieszTime{0.5};
  const ConvergenceInputs rt(FractionalOrder(0.75), n, 0.25);
  CHECK_THROWS_AS(chaos_term_direct(2, rt, InitialData::constant(1.0, 0.0, false), 0.25, x),
                  UnsupportedInput);
}
