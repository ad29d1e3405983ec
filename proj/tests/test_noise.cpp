#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <vector>

#include "fracspde/noise.hpp"

using namespace fracspde;

TEST_CASE("spec validation") {
  NoiseSpec ok;
  CHECK(validate_spec(ok).empty());
  NoiseSpec bad;
  bad.space = Fractional{{0.4}};
  CHECK_FALSE(validate_spec(bad).empty());
  CHECK_THROWS_AS(require_valid(bad), InvalidArgument);
  NoiseSpec r;
  r.d = 2;
  r.space = Riesz{2.0, 1.0};
  CHECK_FALSE(validate_spec(r).empty());
  NoiseSpec dim;
  dim.d = 2;
  dim.space = Fractional{{0.7}};
  CHECK_FALSE(validate_spec(dim).empty());
}

TEST_CASE("Bessel kernel closed form matches its omega integral") {
  boost::math::quadrature::exp_sinh<double> es;
  for (double kappa : {0.3, 1.0, 1.7}) {
    for (double r : {0.1, 0.8, 2.5}) {
      const double num = es.integrate(
          [&](double w) { return std::pow(w, -kappa / 2 - 1) * std::exp(-w - r * r / (4 * w)); });
      CHECK(bessel_closed_form(kappa, r) == doctest::Approx(num).epsilon(1e-9));
      CHECK(bessel_closed_form(kappa, r) ==
            doctest::Approx(2 * std::pow(r / 2, -kappa / 2) * boost::math::cyl_bessel_k(kappa / 2, r))
                .epsilon(1e-12));
      const std::vector<double> v = {r};
      CHECK(space_cov(Bessel{kappa, 2.0}, v) == doctest::Approx(2.0 * num).epsilon(1e-9));
    }
  }
}

// int_A int_B of -d_x d_y |x - y|^(2H) over the two cells.
TEST_CASE("fractional cell covariance from the corner formula") {
  const double H = 0.7, h = 0.25;
  for (double D : {0.0, 0.25, 0.5, 1.5}) {
    const std::vector<double> dv = {D}, hv = {h};
    const double want =
        std::pow(std::abs(D + h), 2 * H) + std::pow(std::abs(D - h), 2 * H) - 2 * std::pow(D, 2 * H);
    CHECK(space_cell_cov(Fractional{{H}}, dv, hv) == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("time kernels") {
  CHECK(c_t(ConstantTime{1.5}, 2.0) == doctest::Approx(6.0));
  CHECK(c_t(ExponentialTime{2.0}, 1.0) == doctest::Approx(1.0 - std::exp(-2.0)));
  CHECK(c_t(RieszTime{0.5}, 4.0) == doctest::Approx(8.0));
  CHECK(time_cell_cov(ConstantTime{2.0}, 0.3, 0.1) == doctest::Approx(2.0 * 0.01));
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double h = 0.2, D = 0.4, rate = 1.3;
  const double num = GK::integrate(
      [&](double s) {
        return GK::integrate([&](double r) { return std::exp(-rate * std::abs(s - r)); }, 0.0, h, 0);
      },
      D, D + h, 0);
  CHECK(time_cell_cov(ExponentialTime{rate}, D, h) == doctest::Approx(num).epsilon(1e-10));
  // Diagonal Riesz cell: 2 h^(2-beta) / ((1-beta)(2-beta)).
  const double beta = 0.4;
  CHECK(time_cell_cov(RieszTime{beta}, 0.0, h) ==
        doctest::Approx(2 * std::pow(h, 2 - beta) / ((1 - beta) * (2 - beta))).epsilon(1e-9));
}

TEST_CASE("psd_factor") {
  Eigen::MatrixXd M(3, 3);
  M << 2, 1, 0, 1, 2, 1, 0, 1, 2;
  FactorStats st;
  const Eigen::MatrixXd A = psd_factor(M, &st);
  CHECK((A * A.transpose() - M).norm() < 1e-12);
  CHECK(st.trace == doctest::Approx(6.0));
  Eigen::MatrixXd N = M;
  N(0, 0) = -1.0;
  CHECK_THROWS_AS(psd_factor(N), NotPositiveSemidefinite);
}

TEST_CASE("sampling is reproducible and has the target covariance") {
  NoiseSpec spec;
  spec.time = ExponentialTime{1.0};
  spec.space = Fractional{{0.75}};
  const NoiseField nf(spec, TimeGrid{1.0, 3}, SpaceGrid::uniform(1, -1.0, 1.0, 4));
  const GridField a = nf.sample(5, 2), b = nf.sample(5, 2), c = nf.sample(5, 3);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  const int n = nf.time_grid().n * nf.space_grid().cells();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  const int draws = 40000;
  std::vector<double> buf;
  for (int k = 0; k < draws; ++k) {
    nf.sample_into(9, k, buf);
    const Eigen::Map<const Eigen::VectorXd> v(buf.data(), n);
    acc += v * v.transpose();
  }
  acc /= draws;
  const Eigen::MatrixXd C = nf.dense_covariance();
  // Entrywise: sd of a product estimate is <= sqrt(C_ii C_jj (1 + rho^2) / draws).
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double sd = std::sqrt(2.0 * C(i, i) * C(j, j) / draws);
      CHECK(std::abs(acc(i, j) - C(i, j)) < 5.0 * sd);
    }
  }
}

TEST_CASE("derived seeds differ") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(3, 4) == derive_seed(3, 4));
}

TEST_CASE("Bessel cell covariance against a direct double integral") {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double kappa = 0.6, h = 0.2;
  for (double D : {0.4, 1.0}) {
    const double num = GK::integrate(
        [&](double x) {
          return GK::integrate([&](double y) { return bessel_closed_form(kappa, std::abs(x - y)); }, D, D + h,
                               0);
        },
        0.0, h, 0);
    const std::vector<double> dv = {D}, hv = {h};
    CHECK(space_cell_cov(Bessel{kappa, 1.0}, dv, hv) == doctest::Approx(num).epsilon(1e-7));
  }
}
