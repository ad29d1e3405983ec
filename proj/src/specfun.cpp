#include "fracspde/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "fracspde/quadrature.hpp"

namespace fracspde {

namespace {

constexpr double kPi = std::numbers::pi;

// Largest series term allowed relative to the result before the series is
// considered cancellation-dominated.
constexpr double kCancellationLimit = 1e4;

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// sin(pi x) with exact argument reduction.
double sinpi(double x) {
  double r = x - 2.0 * std::round(0.5 * x);  // r in [-1, 1]
  if (r > 0.5) r = 1.0 - r;
  if (r < -0.5) r = -1.0 - r;
  return std::sin(kPi * r);
}

}  // namespace

void SeriesControl::validate() const {
  FRACSPDE_REQUIRE(rel_tol > 0.0, InvalidArgument, "SeriesControl.rel_tol must be > 0");
  FRACSPDE_REQUIRE(max_terms >= 1, InvalidArgument, "SeriesControl.max_terms must be >= 1");
}

FractionalOrder::FractionalOrder(double alpha) : alpha_(alpha) {
  FRACSPDE_REQUIRE(std::isfinite(alpha) && alpha > 0.5 && alpha < 2.0 && alpha != 1.0,
                   InvalidArgument,
                   "alpha must lie in (1/2, 1) U (1, 2), got " + std::to_string(alpha));
}

double recip_gamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  if (x >= 0.5) {
    if (x > 171.0) return std::exp(-std::lgamma(x));
    return 1.0 / std::tgamma(x);
  }
  // Reflection: 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi.
  const double y = 1.0 - x;
  const double s = sinpi(x);
  if (y > 171.0) return s / kPi * std::exp(std::lgamma(y));
  return std::tgamma(y) * s / kPi;
}

double log_abs_gamma(double x, int* sign) {
  int sg = 1;
  const double v = ::lgamma_r(x, &sg);
  if (sign) *sign = sg;
  return v;
}

WrightValue wright_phi_series(double a, double delta, double z, const SeriesControl& ctl) {
  ctl.validate();
  FRACSPDE_REQUIRE(a > -1.0 && a < 0.0, InvalidArgument, "wright_phi: a must lie in (-1, 0)");
  FRACSPDE_REQUIRE(z >= 0.0, InvalidArgument, "wright_phi: z must be >= 0");
  WrightValue out;
  out.method = WrightMethod::Series;
  if (z == 0.0) {
    out.value = recip_gamma(delta);
    out.terms = 1;
    return out;
  }
  const double log_z = std::log(z);
  quad::CompensatedSum sum;
  double max_log = -std::numeric_limits<double>::infinity();
  double prev_env = std::numeric_limits<double>::infinity();
  for (int n = 0; n < ctl.max_terms; ++n) {
    const double x = delta + a * n;
    // log of |z^n / (n! Gamma(x))| without the oscillating sin factor.
    double env = n * log_z - std::lgamma(n + 1.0);
    double term = 0.0;
    if (x >= 0.5) {
      int sg = 1;
      const double lg = log_abs_gamma(x, &sg);
      env -= lg;
      term = sg * std::exp(env);
    } else {
      env += std::lgamma(1.0 - x) - std::log(kPi);
      term = sinpi(x) * std::exp(env);
    }
    if (n % 2 == 1) term = -term;
    sum.add(term);
    max_log = std::max(max_log, env);
    out.terms = n + 1;
    const double s = std::abs(sum.value());
    if (n > 2 && env < prev_env && s > 0.0 && env < std::log(ctl.rel_tol * s) - 2.0) {
      if (max_log > std::log(kCancellationLimit * s)) {
        throw NonConvergence("wright_phi series: cancellation, largest term exceeds the limit");
      }
      out.value = sum.value();
      return out;
    }
    prev_env = env;
  }
  throw NonConvergence("wright_phi series: max_terms reached");
}

double wright_phi_contour(double a, double delta, double z, double rel_tol) {
  FRACSPDE_REQUIRE(a > -1.0 && a < 0.0, InvalidArgument, "wright_phi: a must lie in (-1, 0)");
  FRACSPDE_REQUIRE(z >= 0.0, InvalidArgument, "wright_phi: z must be >= 0");
  using cd = std::complex<double>;
  const double nu = -a;
  // Saddle point of s - z s^nu on the positive axis; the arc through it carries
  // the maximum modulus of the integrand, so there is no cancellation.
  const double saddle = z > 0.0 ? std::pow(z * nu, 1.0 / (1.0 - nu)) : 0.0;
  const double eps = std::max(saddle, 1.0);
  const double theta = kPi / (1.0 + nu);
  const double log_scale = eps - z * std::pow(eps, nu) - delta * std::log(eps);

  auto log_f = [&](cd s) { return s - z * std::pow(s, nu) - delta * std::log(s) - log_scale; };

  auto arc = [&](double psi) {
    const cd e = std::polar(1.0, psi);
    const cd s = eps * e;
    return (std::exp(log_f(s)) * s).real();
  };
  auto ray = [&](double r) {
    const cd e = std::polar(1.0, theta);
    return (std::exp(log_f(r * e)) * e).imag();
  };

  const double arc_val = quad::gauss_kronrod(arc, 0.0, theta, rel_tol, 10).value;

  // Truncate the ray where the modulus has fallen by e^-50 relative to the arc peak.
  auto log_mod = [&](double r) { return log_f(r * std::polar(1.0, theta)).real(); };
  double r_end = eps;
  double step = std::max(1.0, eps);
  while (log_mod(r_end) > -50.0) {
    r_end += step;
    step *= 1.5;
  }
  // Split into pieces so the adaptive rule sees a few oscillations at a time.
  const int pieces = 16;
  double ray_val = 0.0;
  for (int k = 0; k < pieces; ++k) {
    const double lo = eps + (r_end - eps) * k / pieces;
    const double hi = eps + (r_end - eps) * (k + 1) / pieces;
    ray_val += quad::gauss_kronrod(ray, lo, hi, rel_tol, 10).value;
  }
  return std::exp(log_scale) * (arc_val + ray_val) / kPi;
}

WrightValue wright_phi_eval(double a, double delta, double z, const SeriesControl& ctl) {
  try {
    return wright_phi_series(a, delta, z, ctl);
  } catch (const NonConvergence&) {
    WrightValue out;
    out.method = WrightMethod::Contour;
    out.value = wright_phi_contour(a, delta, z, std::max(ctl.rel_tol * 0.1, 1e-13));
    return out;
  }
}

double wright_phi(double a, double delta, double z, const SeriesControl& ctl) {
  return wright_phi_eval(a, delta, z, ctl).value;
}

namespace {

double mittag_leffler_series(double a, double b, double z, const SeriesControl& ctl) {
  if (z == 0.0) return recip_gamma(b);
  const double log_z = std::log(std::abs(z));
  quad::CompensatedSum sum;
  double max_log = -std::numeric_limits<double>::infinity();
  double prev_env = std::numeric_limits<double>::infinity();
  for (int n = 0; n < ctl.max_terms; ++n) {
    const double x = a * n + b;
    double env = n * log_z;
    double term = 0.0;
    if (x >= 0.5) {
      int sg = 1;
      env -= log_abs_gamma(x, &sg);
      term = sg * std::exp(env);
    } else {
      env += std::lgamma(1.0 - x) - std::log(kPi);
      term = sinpi(x) * std::exp(env);
    }
    if (z < 0.0 && n % 2 == 1) term = -term;
    sum.add(term);
    max_log = std::max(max_log, env);
    const double s = std::abs(sum.value());
    if (n > 2 && env < prev_env && s > 0.0 && env < std::log(ctl.rel_tol * s) - 2.0) {
      if (max_log > std::log(kCancellationLimit * s)) {
        throw NonConvergence("mittag_leffler series: cancellation");
      }
      return sum.value();
    }
    prev_env = env;
  }
  throw NonConvergence("mittag_leffler series: max_terms reached");
}

// E_{a,b}(-x), x > 0, 0 < a < 2, via the Hankel-type contour made of two rays
// at angle +-theta and an arc of radius 1.  theta is chosen below the pole
// angle pi/a so that no residue has to be added.
double mittag_leffler_contour(double a, double b, double x, double rel_tol) {
  using cd = std::complex<double>;
  const double theta = a < 1.0 ? 0.75 * kPi : 0.5 * (0.5 * kPi + kPi / a);
  const double eps = 1.0;
  auto g = [&](cd s) { return std::exp(s + (a - b) * std::log(s)) / (std::pow(s, a) + x); };
  auto arc = [&](double psi) {
    const cd s = eps * std::polar(1.0, psi);
    return (g(s) * s).real();
  };
  auto ray = [&](double r) {
    const cd e = std::polar(1.0, theta);
    return (g(r * e) * e).imag();
  };
  const double arc_val = quad::gauss_kronrod(arc, 0.0, theta, rel_tol, 10).value;
  // |e^s| = e^{r cos theta}; stop where it is below e^-45.
  const double r_end = eps + 45.0 / -std::cos(theta) + 10.0;
  const double knee = std::pow(x, 1.0 / a);
  double ray_val = 0.0;
  std::vector<double> cuts{eps};
  if (knee > eps && knee < r_end) cuts.push_back(knee);
  cuts.push_back(r_end);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const int pieces = 8;
    for (int p = 0; p < pieces; ++p) {
      const double lo = cuts[k] + (cuts[k + 1] - cuts[k]) * p / pieces;
      const double hi = cuts[k] + (cuts[k + 1] - cuts[k]) * (p + 1) / pieces;
      ray_val += quad::gauss_kronrod(ray, lo, hi, rel_tol, 10).value;
    }
  }
  return (arc_val + ray_val) / kPi;
}

double mittag_leffler_asymptotic(double a, double b, double x) {
  using cd = std::complex<double>;
  double sum = 0.0;
  for (int k = 1; k <= 8; ++k) {
    sum -= std::pow(-x, -k) * recip_gamma(b - a * k);
  }
  if (a > 1.0) {
    for (int sgn : {1, -1}) {
      const cd s = std::pow(x, 1.0 / a) * std::polar(1.0, sgn * kPi / a);
      sum += (std::exp(s) * std::pow(s, 1.0 - b)).real() / a;
    }
  }
  return sum;
}

}  // namespace

double mittag_leffler(double a, double b, double z, const SeriesControl& ctl) {
  ctl.validate();
  FRACSPDE_REQUIRE(a > 0.0, InvalidArgument, "mittag_leffler: a must be > 0");
  // Elementary cases where the generic routes lose relative accuracy.
  if (a == 1.0 && b == 1.0) return std::exp(z);
  if (a == 2.0 && b == 1.0) return z < 0.0 ? std::cos(std::sqrt(-z)) : std::cosh(std::sqrt(z));
  if (a == 2.0 && b == 2.0 && z != 0.0) {
    const double r = std::sqrt(std::abs(z));
    return z < 0.0 ? std::sin(r) / r : std::sinh(r) / r;
  }
  if (z < 0.0 && a < 2.0 && -z >= 1e6) return mittag_leffler_asymptotic(a, b, -z);
  try {
    return mittag_leffler_series(a, b, z, ctl);
  } catch (const NonConvergence&) {
    if (z < 0.0 && a < 2.0) {
      return mittag_leffler_contour(a, b, -z, std::max(0.1 * ctl.rel_tol, 1e-14));
    }
    throw;
  }
}

std::vector<double> caputo_derivative(std::span<const double> f, const FractionalOrder& order,
                                      double dt) {
  const int m = order.ceil();
  FRACSPDE_REQUIRE(dt > 0.0, InvalidArgument, "caputo_derivative: dt must be > 0");
  if (static_cast<int>(f.size()) < m + 1) {
    throw GridTooShort("caputo_derivative needs at least " + std::to_string(m + 1) + " samples");
  }
  const double alpha = order.alpha();
  const std::size_t n_pts = f.size();
  std::vector<double> out(n_pts, 0.0);
  const double p = static_cast<double>(m) - alpha;  // weight exponent 1-alpha or 2-alpha
  std::vector<double> w(n_pts);
  for (std::size_t k = 0; k < n_pts; ++k) {
    w[k] = std::pow(k + 1.0, p) - std::pow(static_cast<double>(k), p);
  }
  // Increments of the m-th derivative integrated over each cell.
  std::vector<double> inc(n_pts - 1);
  if (m == 1) {
    for (std::size_t j = 0; j + 1 < n_pts; ++j) inc[j] = f[j + 1] - f[j];
  } else {
    for (std::size_t j = 0; j + 1 < n_pts; ++j) {
      inc[j] = j == 0 ? f[2] - 2.0 * f[1] + f[0] : f[j + 1] - 2.0 * f[j] + f[j - 1];
    }
  }
  const double scale = std::pow(dt, -alpha) * recip_gamma(1.0 + p);
  for (std::size_t n = 1; n < n_pts; ++n) {
    quad::CompensatedSum s;
    for (std::size_t j = 0; j < n; ++j) s.add(w[n - 1 - j] * inc[j]);
    out[n] = scale * s.value();
  }
  return out;
}

}  // namespace fracspde
