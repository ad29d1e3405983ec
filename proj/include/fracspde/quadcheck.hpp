#pragma once

// Numerical checks of the integral estimates used in the well-posedness
// argument: a Dirichlet simplex integral with closed form, and three scaling
// bounds whose exponents are fitted by log-log regression.

#include <string>
#include <utility>
#include <vector>

namespace fracspde {

struct SimplexResult {
  double numeric = 0.0;
  double closed_form = 0.0;
  double rel_error = 0.0;
};

/// int over 0 < s_1 < ... < s_n < t of [(t - s_n)(s_n - s_{n-1})...(s_2 - s_1)]^h ds
/// by nested quadrature, against Gamma(1+h)^n / Gamma(n(1+h)+1) t^(n(1+h)).
/// n in 1..4; throws DivergenceDetected for h <= -1.
SimplexResult dirichlet_simplex(int n, double h, double t, int layers = 10);

struct ScalingReport {
  std::string name;
  double exponent_fit = 0.0;
  double exponent_expected = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // max |fit - data| in log space
  double tolerance = 0.05;
  bool pass = false;
  std::vector<double> scales;
  std::vector<double> values;
};

/// I(s) = int |x|^beta p(s, x) dx in R^d (xi = 0, where the bound is attained);
/// expected slope alpha beta / 2 + alpha d / 2.  `level` is the number of
/// graded quadrature layers.
ScalingReport intes_scaling(double beta, int d, double alpha, double sigma,
                            const std::vector<double>& s_values, int level = 12,
                            double tolerance = 0.05);

/// int int |rho1 - tau1|^(2H-2) |rho1|^k |tau1|^k p(s, rho1) p(r, tau1) with
/// k = kappa_d / d; fitted against s r, expected (H + k) alpha / 2.
/// Throws DegenerateBranch when 2H - 2 + k = -1.
ScalingReport frac_double_integral_scaling(double H, double kappa_over_d, double alpha,
                                           double sigma,
                                           const std::vector<std::pair<double, double>>& s_r,
                                           int level = 10, double tolerance = 0.05);

struct BesselEnvelope {
  double zeta = 0.0;
  double kappa_d = 0.0;
  double sigma = 1.0;
};

/// int int E(r, y) E(s, z) B(y - z) dy dz with E(t, x) = t^zeta |x|^kappa_d p(t, x)
/// and B the Bessel kernel as an omega-integral split at r^alpha; fitted
/// against r s, expected zeta - alpha kappa/4 + alpha kappa_d/2 + alpha d/2.
/// d in {1, 2}.
ScalingReport bessel_double_integral_scaling(double kappa, int d, double alpha,
                                             const BesselEnvelope& env,
                                             const std::vector<std::pair<double, double>>& s_r,
                                             int level = 10, double tolerance = 0.05);

struct SimplexCase {
  int n = 0;
  double h = 0.0;
  double t = 0.0;
  SimplexResult result;
  bool pass = false;
};

struct QuadcheckSuite {
  std::vector<SimplexCase> simplex;
  std::vector<ScalingReport> scaling;
  bool pass = false;
};

/// The 45 simplex cases n <= 3, h in {-0.5, -0.3, 0, 0.5, 1}, t in {0.5, 1, 2}
/// plus the edge h = -1 + 1e-3 (rel tol 1e-5), and every scaling example.
QuadcheckSuite quadcheck_suite(double tolerance = 0.05, int threads = 1);

}  // namespace fracspde
