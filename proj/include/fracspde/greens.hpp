#pragma once

// Fundamental kernels of the time-fractional heat operator with B = Laplacian,
// their envelope bounds, and the initial-data term J0.
//
// With nu = alpha/2, z = |x| t^-nu and C_d = 2^-d pi^((1-d)/2):
//   Y (t,x) = C_d t^(alpha(2-d)/2 - 1) f(z; d-1, alpha(2-d)/2)
//   Z1(t,x) = C_d t^(-alpha d/2)       f(z; d-1, 1 - alpha d/2)
//   Z2(t,x) = C_d t^(1 - alpha d/2)    f(z; d-1, 2 - alpha d/2)
// where f is f_radial below.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fracspde/specfun.hpp"

namespace fracspde {

enum class Kernel { Y, Z1, Z2 };

std::string to_string(Kernel k);
Kernel kernel_from_string(const std::string& s);

double c_d(int d);

/// exp(-sigma (|x| t^-alpha/2)^(2/(2-alpha))).
double p_envelope(double t, double r, double alpha, double sigma);
double p_envelope(double t, std::span<const double> x, double alpha, double sigma);

/// Decay constant of phi(-nu, delta; -z) ~ exp(-c z^(1/(1-nu))).
double wright_decay_constant(double nu);

/// phi(-nu, delta; -z) for z >= 0, tabulated once and interpolated.  The
/// exponential decay is factored out before interpolation; beyond the point
/// where the function underflows the profile returns 0.
class WrightProfile {
 public:
  WrightProfile(double nu, double delta, double step = 2.5e-3);
  double operator()(double z) const;
  double nu() const { return nu_; }
  double delta() const { return delta_; }
  double z_max() const { return z_max_; }

  /// Shared per-thread cache keyed on (nu, delta).
  static const WrightProfile& cached(double nu, double delta);

 private:
  struct Impl;
  double nu_, delta_, c0_, q_, z_max_;
  std::shared_ptr<const Impl> impl_;
};

/// f(z; mu, delta) = phi(-alpha/2, delta; -z) for mu = 0, otherwise
/// (2/Gamma(mu/2)) int_1^inf phi(-alpha/2, delta; -z t) (t^2-1)^(mu/2-1) dt.
double f_radial(double z, double mu, double delta, double alpha);

double green_Y(double t, std::span<const double> x, const FractionalOrder& alpha);
/// k = 1 or 2 (k = 2 requires alpha > 1).
double green_Z(int k, double t, std::span<const double> x, const FractionalOrder& alpha);
double green(Kernel k, double t, std::span<const double> x, const FractionalOrder& alpha);

/// Radial forms: same kernels with |x| = r in dimension d.
double green_radial(Kernel k, double t, double r, int d, const FractionalOrder& alpha);

/// Z_k obtained from Y by Riemann-Liouville differintegration in time
/// (Z1 = D^(alpha-1) Y, Z2 = I^(2-alpha) Y) on a refined product-trapezoid grid.
/// Requires r > 0.
struct TimeDomainValue {
  double value = 0.0;
  int steps = 0;
  double last_change = 0.0;
};
TimeDomainValue green_Z_time_domain(int k, double t, double r, int d, const FractionalOrder& alpha,
                                    double rel_tol = 1e-5, int max_steps = 1 << 16);

struct InitialData {
  std::function<double(std::span<const double>)> u0;
  std::function<double(std::span<const double>)> u1;  // empty when alpha < 1
  std::string name = "custom";
  /// Factory arguments in order (u0, u1 | amplitude, width | amplitude, wavenumber).
  std::vector<double> params;

  static InitialData constant(double c0, double c1 = 0.0, bool with_u1 = true);
  static InitialData gaussian_bump(double amplitude, double width, bool with_u1 = false);
  static InitialData sinusoid(double amplitude, double wavenumber, bool with_u1 = false);

  bool has_u1() const { return static_cast<bool>(u1); }
  /// True when u0 and u1 agree at a few probe points (the values are returned).
  bool is_constant(double* c0 = nullptr, double* c1 = nullptr) const;
  /// Throws InvalidArgument unless u1 is present exactly when alpha > 1.
  void validate(const FractionalOrder& alpha) const;
};

/// sum_k int u_k(y) Z_{k+1}(t, x - y) dy (d <= 3), truncated where the
/// envelope drops below 1e-12 of its peak.
double j0(const InitialData& data, double t, std::span<const double> x,
          const FractionalOrder& alpha, double rel_tol = 1e-9);

/// Kernel envelope c_fit t^zeta |x|^kappa mu(z) p(t,x), mu(z) = 1 + |log z|
/// when log_factor is set.
struct EnvelopeParams {
  int d = 1;
  double gamma = 1.0;
  double nu1 = 0.0;
  double nu0 = 0.0;
  double zeta = 0.0;
  double kappa = 0.0;
  bool log_factor = false;
  double sigma = 1.0;
  double c_fit = 1.0;

  /// Envelope exponents for kernel k; nu1 defaults to the midpoint
  /// of (2 - 2/alpha, gamma) when not supplied.
  static EnvelopeParams for_kernel(Kernel k, const FractionalOrder& alpha, int d,
                                   double gamma = 1.0, double nu1 = -1.0);
  /// Throws InvalidArgument when the exponent relations fail.
  void validate(const FractionalOrder& alpha) const;
};

/// mu_d(z) for the Z-kernel bounds: 1 (d = 1), 1 + |log z| (d = 2), z^(2-d) (d >= 3).
double mu_d(int d, double z);

double envelope_bound(double t, std::span<const double> x, const EnvelopeParams& p,
                      double alpha);
double envelope_bound_radial(double t, double r, const EnvelopeParams& p, double alpha);
/// prod_i t^(zeta/d) |x_i|^(kappa/d) p(t, x_i).
double envelope_bound_product(double t, std::span<const double> x, const EnvelopeParams& p,
                              double alpha);

struct GridSpec {
  double t_min = 0.1;
  double t_max = 1.0;
  int n_t = 8;
  double r_min = 0.1;
  double r_max = 4.0;
  int n_r = 24;
  /// The check grid extends the time range down to t_min / refine_factor.
  double refine_factor = 16.0;
  int refine_levels = 4;
};

struct DominationReport {
  Kernel kernel = Kernel::Y;
  int d = 1;
  double alpha = 0.0;
  bool pass = false;
  double sup_ratio = 0.0;
  double t_at = 0.0;
  double r_at = 0.0;
  EnvelopeParams params;
};

/// Scans kernel / envelope on the grid.  With fit, sigma and c_fit are fitted
/// on the coarse grid; the check grid then extends toward t -> 0.  PASS iff
/// the sup ratio on the check grid is <= 1.
DominationReport verify_envelope(Kernel k, const FractionalOrder& alpha, EnvelopeParams params,
                                 const GridSpec& grid = {}, bool fit = true);

}  // namespace fracspde
