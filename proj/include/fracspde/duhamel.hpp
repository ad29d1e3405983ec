#pragma once

// Mild-solution simulation in d = 1: deterministic Duhamel evolution,
// truncated-chaos second moments and a forward Riemann-sum pathwise scheme.
// The pathwise scheme is a heuristic (tag "HEURISTIC-forward-sum"); it is not
// the Skorokhod solution.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fracspde/grid.hpp"
#include "fracspde/greens.hpp"
#include "fracspde/noise.hpp"

namespace fracspde {

enum class PathScheme {
  /// u_m = J0 + sum_{k<m} Y u_k dW_k with ordinary products.
  ForwardSum,
  /// Same sum truncated at chaos_order with Wick products; its second moment
  /// is the discrete analogue of the chaos series.
  WickChaos,
};

struct SimulationConfig {
  FractionalOrder alpha{0.75};
  int d = 1;
  NoiseSpec noise;
  InitialData initial = InitialData::constant(1.0, 0.0, false);
  TimeGrid t_grid{0.25, 16};
  SpaceGrid x_grid = SpaceGrid::uniform(1, -7.0, 7.0, 97);
  std::uint64_t seed = 1;
  int picard_iters = 1;
  int chaos_order = 2;
  PathScheme scheme = PathScheme::ForwardSum;
  /// Multiplies the noise; 0 switches it off.
  double amplitude = 1.0;
  /// Monte-Carlo workers; the reduction runs in fixed blocks, so results do
  /// not depend on this.
  int threads = 1;

  void validate() const;
};

/// f(t, x, u); explicit forcings ignore u.
using Forcing = std::function<double(double, double, double)>;

/// Exact cell integrals W(dm, dj) of Y over time cell [(dm-1) h_t, dm h_t]
/// and space cell [(dj - 1/2) h_x, (dj + 1/2) h_x].
class DuhamelWeights {
 public:
  DuhamelWeights(const FractionalOrder& alpha, double h_t, double h_x, int n_t, int max_dj);
  double operator()(int dm, int dj) const;
  int max_dj() const { return max_dj_; }

 private:
  int n_t_, max_dj_;
  std::vector<double> w_;
};

/// Half-width beyond which int Y(a, .) over |x| > X is below 1e-14 of the
/// total for every a <= T.
double duhamel_padding(const FractionalOrder& alpha, double T);

/// u = J0 + int_0^t int f(s, y) Y(t - s, x - y) dy ds at the cell centres,
/// rows 0..n_t (row 0 = u0).  f is taken at cell midpoints on a box padded
/// so that the truncated kernel mass is negligible.
GridField deterministic_solve(const SimulationConfig& cfg, const Forcing& f);

struct SecondMoment {
  double value = 0.0;
  double j0_sq = 0.0;
  std::vector<double> terms;  // n! ||f_n||^2, n = 1..N
  double error = 0.0;
  /// b_{N+1} / b_N from the bound series.
  double truncation_ratio = 0.0;
};

/// J0(t,x)^2 + sum_{n=1}^N n! ||f_n||^2.
SecondMoment second_moment_chaos(const SimulationConfig& cfg, double t, double x);

/// One trajectory of cfg.scheme; draw selects an independent stream.
GridField pathwise_simulate(const SimulationConfig& cfg, std::uint64_t draw = 0);

struct MCResult {
  GridField mean;
  GridField second;
  /// 95% normal half-widths of the second-moment field.
  GridField ci;
  std::uint64_t samples = 0;
};

MCResult mc_second_moment(const SimulationConfig& cfg, std::uint64_t samples);

}  // namespace fracspde
