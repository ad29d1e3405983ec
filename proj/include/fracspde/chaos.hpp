#pragma once

// Convergence exponent, well-posedness conditions, the chaos bound series and
// direct evaluation of the first two chaos terms n! ||f_n||^2.

#include <string>
#include <vector>

#include "fracspde/greens.hpp"
#include "fracspde/noise.hpp"

namespace fracspde {

struct ConvergenceInputs {
  FractionalOrder alpha;
  int d = 1;
  NoiseSpec noise;
  EnvelopeParams envelope;
  double horizon_t = 1.0;
  double c_t = 2.0;
  /// Hoelder exponent entering the d >= 5 floor for alpha < 1 (limit gamma -> 0+).
  double floor_gamma = 0.0;
  /// False when the kernel exponents for this regime are not available;
  /// compute_ell then needs allow_closed_form.
  bool envelope_available = true;
  bool allow_closed_form = true;

  ConvergenceInputs(FractionalOrder a, NoiseSpec n, double t, double gamma = 1.0);
  void validate() const;
};

/// alpha - 1 - alpha d / 2 + alpha |H| / 2.
double ell_closed_form(double alpha, int d, double sum_h);
/// Fractional: zeta + |H| alpha/2 + kappa alpha/2.  Riesz: same with
/// H_i = 1 - kappa/(2d).  Bessel: zeta - alpha kappa/4 + alpha kappa_d/2 + alpha d/2.
double compute_ell(const ConvergenceInputs& in);
/// l + (d alpha / 4) eps, used on the degenerate branch.
double ell_prime(double ell, int d, double alpha, double eps);

struct CaseExponent {
  double theta = 0.0;
  bool degenerate = false;
  double epsilon = 0.0;
};
/// Per-coordinate exponent (H_i d + kappa_d)/(2d) alpha; degenerate when
/// 2 H_i - 2 + kappa_d/d = -1.
CaseExponent case_exponent(double H, double kappa_d, int d, double alpha, double epsilon = 0.0);

struct Condition {
  std::string name;
  bool satisfied = false;
  double slack = 0.0;
};

struct BoundSeries {
  std::vector<double> terms;
  std::vector<double> ratios;
  bool summable = false;
  bool divergent = false;  // 2 l + 1 <= 0
};

/// b_n = (c C_t)^n Gamma(2l+1)^n t^((2l+1)n) / Gamma((2l+1)n + 1), n = 0..n_max.
BoundSeries bound_terms(double ell, double c, double c_t, double t, int n_max);

struct ChaosReport {
  double ell = 0.0;
  bool threshold_ok = false;
  double margin = 0.0;
  bool verdict = false;
  std::vector<Condition> conditions;
  BoundSeries bound;
};

ChaosReport check_conditions(const ConvergenceInputs& in, int n_max = 50, double c = 1.0);

struct ChaosQuadrature {
  /// Gauss-Legendre panels per unit of log(xi).
  int panels_per_unit = 1;
  /// Range of log(xi t^(alpha/2)); the part below is added analytically.
  double log_xi_min = -12.0;
  double log_xi_max = 6.0;
  /// Upper cut of the temporal frequency, in units of 1/t.
  double tau_max = 200.0;
};

struct ChaosTerm {
  double value = 0.0;
  double error = 0.0;
};

/// n! ||f_n(., ., t, x)||^2 for n in {1, 2}, d = 1, spatially constant
/// initial data (so J0(s) = u0 + u1 s and the value does not depend on x).
/// n = 2 needs a Constant time kernel.  Evaluated in Fourier variables.
ChaosTerm chaos_term_direct(int n, const ConvergenceInputs& in, const InitialData& data, double t,
                            std::span<const double> x, const ChaosQuadrature& q = {});

/// Fourier transform of the spatial covariance in d = 1.
double lambda_hat(const SpaceKernel& k, double xi);
/// int_0^eps lambda_hat(xi) dxi.
double lambda_hat_mass(const SpaceKernel& k, double eps);

}  // namespace fracspde
