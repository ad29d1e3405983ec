#include <doctest.h>

#include <cmath>
#include <vector>

#include "fracspde/duhamel.hpp"

using namespace fracspde;

namespace {

SimulationConfig small_config(double alpha) {
  SimulationConfig c;
  c.alpha = FractionalOrder(alpha);
  c.initial = InitialData::constant(1.0, 0.0, alpha > 1.0);
  c.t_grid = {0.25, 8};
  c.x_grid = SpaceGrid::uniform(1, -4.0, 4.0, 33);
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("weights carry the time mass of Y") {
  for (double al : {0.75, 1.5}) {
    const FractionalOrder a(al);
    const double ht = 0.05, hx = 0.1;
    const int nt = 6;
    const int maxdj = static_cast<int>(std::ceil(duhamel_padding(a, nt * ht) / hx)) + 1;
    const DuhamelWeights w(a, ht, hx, nt, maxdj);
    for (int dm = 1; dm <= nt; ++dm) {
      double s = 0.0;
      for (int dj = -maxdj; dj <= maxdj; ++dj) s += w(dm, dj);
      const double want = (std::pow(dm, al) - std::pow(dm - 1, al)) * std::pow(ht, al) / std::tgamma(al + 1);
      CHECK(s == doctest::Approx(want).epsilon(1e-10));
      CHECK(w(dm, 1) == doctest::Approx(w(dm, -1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("deterministic solve with constant forcing") {
  for (double al : {0.75, 1.5}) {
    SimulationConfig c = small_config(al);
    if (al > 1.0) c.initial = InitialData::constant(1.0, 0.5, true);
    const GridField u = deterministic_solve(c, [](double, double, double) { return 2.0; });
    REQUIRE(u.n_t == c.t_grid.n + 1);
    for (int k = 0; k <= c.t_grid.n; ++k) {
      const double t = c.t_grid.node(k);
      const double want = 1.0 + (al > 1.0 ? 0.5 * t : 0.0) + 2.0 * std::pow(t, al) / std::tgamma(al + 1);
      CHECK(u.at(k, 16) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("deterministic solve without forcing reproduces J0") {
  SimulationConfig c = small_config(0.75);
  c.initial = InitialData::gaussian_bump(1.0, 0.8);
  const GridField u = deterministic_solve(c, [](double, double, double) { return 0.0; });
  for (int j : {4, 16, 20}) {
    const std::vector<double> x = c.x_grid.center(j);
    CHECK(u.at(c.t_grid.n, j) == doctest::Approx(j0(c.initial, c.t_grid.T, x, c.alpha)).epsilon(1e-8));
  }
}

TEST_CASE("zero amplitude paths are deterministic") {
  SimulationConfig c = small_config(0.75);
  c.amplitude = 0.0;
  const GridField p = pathwise_simulate(c, 4);
  for (int k = 0; k < p.n_t; ++k) CHECK(p.at(k, 16) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("configuration validation") {
  SimulationConfig c = small_config(0.75);
  c.picard_iters = 0;
  CHECK_THROWS(c.validate());
  c = small_config(0.75);
  c.chaos_order = 3;
  CHECK_THROWS(c.validate());
  c = small_config(1.5);
  c.initial = InitialData::constant(1.0, 0.0, false);
  CHECK_THROWS(c.validate());
  c = small_config(0.75);
  c.t_grid.n = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("Monte-Carlo reduction does not depend on the thread count") {
  SimulationConfig c = small_config(0.75);
  c.threads = 1;
  const MCResult a = mc_second_moment(c, 300);
  c.threads = 3;
  const MCResult b = mc_second_moment(c, 300);
  CHECK(a.second.values == b.second.values);
  CHECK(a.mean.values == b.mean.values);
  CHECK(a.samples == 300);
}

TEST_CASE("Wick scheme second moment is consistent with the chaos series") {
  SimulationConfig c = small_config(1.5);
  c.scheme = PathScheme::WickChaos;
  const SecondMoment sm = second_moment_chaos(c, c.t_grid.T, 0.0);
  CHECK(sm.j0_sq == doctest::Approx(1.0));
  REQUIRE(sm.terms.size() == 2);
  CHECK(sm.terms[0] > sm.terms[1]);
  CHECK(sm.terms[1] > 0.0);
  const MCResult mc = mc_second_moment(c, 4000);
  const double got = mc.second.at(mc.second.n_t - 1, 16);
  CHECK(std::abs(got - sm.value) < 4.0 * mc.ci.at(mc.ci.n_t - 1, 16) + 2e-3 * sm.value);
  CHECK(mc.mean.at(mc.mean.n_t - 1, 16) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("scheme tags") {
  SimulationConfig c = small_config(0.75);
  CHECK(pathwise_simulate(c).scheme == "HEURISTIC-forward-sum");
  c.scheme = PathScheme::WickChaos;
  CHECK(pathwise_simulate(c).scheme == "wick-chaos");
}
