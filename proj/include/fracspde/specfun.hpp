#pragma once

// Special functions for time-fractional diffusion kernels.
//
// Conventions
//   wright_phi(a, delta, z)       = sum_n (-z)^n / (n! Gamma(delta + a n)),  -1 < a < 0
//   mittag_leffler(a, b, z)       = sum_n z^n / Gamma(a n + b)
// The Wright function is evaluated at the negated argument (the "-z" form used
// by fundamental solutions), so wright_phi(-1/2, 1/2, z) = exp(-z^2/4)/sqrt(pi).

#include <span>
#include <vector>

#include "fracspde/errors.hpp"

namespace fracspde {

struct SeriesControl {
  double rel_tol = 1e-12;
  int max_terms = 500;

  void validate() const;
};

enum class Regime { Sub, Super };

/// Time order alpha in (1/2, 1) U (1, 2).
class FractionalOrder {
 public:
  explicit FractionalOrder(double alpha);

  double alpha() const { return alpha_; }
  Regime regime() const { return alpha_ < 1.0 ? Regime::Sub : Regime::Super; }
  /// Number of initial conditions, ceil(alpha).
  int ceil() const { return alpha_ < 1.0 ? 1 : 2; }
  /// Half-order alpha/2, the Wright-function parameter of the kernels.
  double nu() const { return 0.5 * alpha_; }

 private:
  double alpha_;
};

/// 1/Gamma(x); exactly zero at the non-positive integers.
double recip_gamma(double x);

/// log|Gamma(x)| and the sign of Gamma(x) (x not a pole).
double log_abs_gamma(double x, int* sign = nullptr);

enum class WrightMethod { Series, Contour };

struct WrightValue {
  double value = 0.0;
  WrightMethod method = WrightMethod::Series;
  int terms = 0;
};

/// Wright function with automatic choice between the compensated power series
/// and the steepest-descent contour integral.  The series is abandoned once its
/// largest term exceeds 1e4 times the partial sum.
WrightValue wright_phi_eval(double a, double delta, double z, const SeriesControl& ctl = {});
double wright_phi(double a, double delta, double z, const SeriesControl& ctl = {});

/// Raw series; throws NonConvergence when the cancellation or term budget is exceeded.
WrightValue wright_phi_series(double a, double delta, double z, const SeriesControl& ctl = {});

/// Contour-integral representation (valid for every z >= 0).
double wright_phi_contour(double a, double delta, double z, double rel_tol = 1e-13);

/// Mittag-Leffler function E_{a,b}(z).  Series for moderate |z|, contour
/// integral plus residues for z < 0 with 0 < a < 2, asymptotic expansion for
/// very large |z|.
double mittag_leffler(double a, double b, double z, const SeriesControl& ctl = {});

/// Discrete Caputo derivative of samples f(k dt), k = 0..n-1.  L1 scheme for
/// alpha < 1, L2-type scheme (L1 weights on second differences) for alpha > 1.
/// Entry 0 of the result is 0 by convention.
std::vector<double> caputo_derivative(std::span<const double> samples, const FractionalOrder& alpha,
                                      double dt);

}  // namespace fracspde
