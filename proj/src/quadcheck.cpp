#include "fracspde/quadcheck.hpp"

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "fracspde/errors.hpp"
#include "fracspde/greens.hpp"
#include "fracspde/parallel.hpp"
#include "fracspde/quadrature.hpp"

namespace fracspde {

namespace {

using quad::Grade;

// G_k(u) = int_0^u (u - s)^h G_{k-1}(s) ds with y = (u - s)^(1+h).
double simplex_level(int k, double u, double h, int layers) {
  const double p = 1.0 + h;
  if (k == 1) return std::pow(u, p) / p;
  auto f = [&](double y) {
    const double s = u - std::pow(y, 1.0 / p);
    return s > 0.0 ? simplex_level(k - 1, s, h, layers) : 0.0;
  };
  return quad::graded(f, 0.0, std::pow(u, p), Grade::Both, layers) / p;
}

ScalingReport fit_report(std::string name, std::vector<double> scales, std::vector<double> values,
                         double expected, double tol) {
  ScalingReport r;
  r.name = std::move(name);
  r.exponent_expected = expected;
  r.tolerance = tol;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    FRACSPDE_REQUIRE(values[i] > 0.0 && std::isfinite(values[i]), QuadratureFailure,
                     r.name + ": non-positive integral value");
    lx.push_back(std::log(scales[i]));
    ly.push_back(std::log(values[i]));
  }
  const auto fit = quad::fit_line(lx, ly);
  r.exponent_fit = fit.slope;
  r.intercept = fit.intercept;
  r.residual = fit.max_residual;
  r.pass = std::abs(r.exponent_fit - expected) <= tol;
  r.scales = std::move(scales);
  r.values = std::move(values);
  return r;
}

// Radius beyond which p(t, .) < e^-60.
double cutoff(double t, double alpha, double sigma) {
  return std::pow(t, 0.5 * alpha) * std::pow(60.0 / sigma, 1.0 - 0.5 * alpha);
}

// int_R int_R g1(a) g2(b) k(|a - b|) da db for even g1, g2 supported in
// [-R1, R1] x [-R2, R2]; k may be singular at 0.
double double_1d(const std::function<double(double)>& g1, const std::function<double(double)>& g2,
                 const std::function<double(double)>& k, double R1, double R2, int layers) {
  auto outer = [&](double b) {
    auto f = [&](double a) { return g1(a) * k(std::abs(a - b)); };
    double v = quad::graded(f, -R1, 0.0, Grade::Right, layers);
    const double m = std::min(b, R1);
    v += quad::graded(f, 0.0, m, Grade::Both, layers);
    if (b < R1) v += quad::graded(f, b, R1, Grade::Left, layers);
    return g2(b) * v;
  };
  return 2.0 * quad::graded(outer, 0.0, R2, Grade::Left, layers);
}

}  // namespace

SimplexResult dirichlet_simplex(int n, double h, double t, int layers) {
  if (!(h > -1.0)) {
    throw DivergenceDetected("dirichlet_simplex: the integral diverges for h <= -1 (h = " +
                             std::to_string(h) + ")");
  }
  FRACSPDE_REQUIRE(n >= 1 && n <= 4, InvalidArgument, "dirichlet_simplex: n must be in 1..4");
  FRACSPDE_REQUIRE(t > 0.0, InvalidArgument, "dirichlet_simplex: t must be > 0");
  FRACSPDE_REQUIRE(layers >= 1, InvalidArgument, "dirichlet_simplex: layers must be >= 1");
  SimplexResult r;
  r.numeric = simplex_level(n, t, h, layers);
  const double p = 1.0 + h;
  r.closed_form = std::exp(n * std::lgamma(p) - std::lgamma(n * p + 1.0) + n * p * std::log(t));
  r.rel_error = std::abs(r.numeric - r.closed_form) / std::abs(r.closed_form);
  return r;
}

ScalingReport intes_scaling(double beta, int d, double alpha, double sigma,
                            const std::vector<double>& s_values, int level, double tolerance) {
  FRACSPDE_REQUIRE(beta > -1.0 && beta <= 0.0, InvalidArgument,
                   "intes_scaling: beta must lie in (-1, 0]");
  FRACSPDE_REQUIRE(d >= 1 && alpha > 0.0 && alpha < 2.0 && sigma > 0.0, InvalidArgument,
                   "intes_scaling: bad d, alpha or sigma");
  FRACSPDE_REQUIRE(s_values.size() >= 2, InvalidArgument, "intes_scaling: need >= 2 scales");
  const double area = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  // One mesh for every s, sized by the largest.
  const double R = cutoff(*std::max_element(s_values.begin(), s_values.end()), alpha, sigma);
  std::vector<double> vals;
  for (double s : s_values) {
    FRACSPDE_REQUIRE(s > 0.0, InvalidArgument, "intes_scaling: s must be > 0");
    auto f = [&](double rho) {
      return std::pow(rho, beta + d - 1.0) * p_envelope(s, rho, alpha, sigma);
    };
    vals.push_back(area * quad::graded(f, 0.0, R, Grade::Left, level));
  }
  return fit_report("intes beta=" + std::to_string(beta) + " d=" + std::to_string(d) +
                        " alpha=" + std::to_string(alpha),
                    s_values, vals, alpha * beta / 2.0 + alpha * d / 2.0, tolerance);
}

ScalingReport frac_double_integral_scaling(double H, double kappa_over_d, double alpha,
                                           double sigma,
                                           const std::vector<std::pair<double, double>>& s_r,
                                           int level, double tolerance) {
  const double k = kappa_over_d;
  FRACSPDE_REQUIRE(H > 0.5 && H < 1.0, InvalidArgument, "frac_double: H must lie in (1/2, 1)");
  FRACSPDE_REQUIRE(k <= 0.0, InvalidArgument, "frac_double: kappa_d/d must be <= 0");
  FRACSPDE_REQUIRE(2.0 * H + 2.0 * k > 0.0, InvalidArgument,
                   "frac_double: requires 2H + 2 kappa_d/d > 0");
  if (std::abs(2.0 * H - 2.0 + k + 1.0) < 1e-9) {
    throw DegenerateBranch("frac_double: 2H - 2 + kappa_d/d = -1 is the log-corrected branch");
  }
  FRACSPDE_REQUIRE(s_r.size() >= 2, InvalidArgument, "frac_double: need >= 2 (s, r) pairs");
  double smax = 0.0, rmax = 0.0;
  for (auto [s, r] : s_r) {
    FRACSPDE_REQUIRE(s > 0.0 && r > 0.0, InvalidArgument, "frac_double: s, r must be > 0");
    smax = std::max(smax, s);
    rmax = std::max(rmax, r);
  }
  const double R1 = cutoff(smax, alpha, sigma), R2 = cutoff(rmax, alpha, sigma);
  std::vector<double> scales, vals;
  for (auto [s, r] : s_r) {
    auto g1 = [&](double a) { return std::pow(std::abs(a), k) * p_envelope(s, std::abs(a), alpha, sigma); };
    auto g2 = [&](double b) { return std::pow(std::abs(b), k) * p_envelope(r, std::abs(b), alpha, sigma); };
    auto ker = [&](double x) { return std::pow(x, 2.0 * H - 2.0); };
    scales.push_back(s * r);
    vals.push_back(double_1d(g1, g2, ker, R1, R2, level));
  }
  return fit_report("frac_double H=" + std::to_string(H) + " k=" + std::to_string(k) +
                        " alpha=" + std::to_string(alpha),
                    scales, vals, (H + k) * alpha / 2.0, tolerance);
}

namespace {

// log B(x) on a log grid, B(x) = int_0^inf w^(-kappa/2-1) e^-w e^(-x^2/(4w)) dw
// evaluated as int_0^split + int_split^inf.
class BesselTable {
 public:
  BesselTable(double kappa, double split, double x_max) : kappa_(kappa) {
    lo_ = std::log(1e-9);
    const double hi = std::log(std::max(x_max, 1.0));
    const int n = static_cast<int>(std::ceil((hi - lo_) / 0.02)) + 1;
    const double h = (hi - lo_) / (n - 1);
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = std::log(direct(std::exp(lo_ + i * h), split));
    hi_ = hi;
    spline_ = std::make_unique<boost::math::interpolators::cardinal_quintic_b_spline<double>>(
        g, lo_, h);
  }

  double operator()(double x) const {
    const double u = std::log(x);
    if (u <= lo_) {
      // B ~ Gamma(kappa/2) (x^2/4)^(-kappa/2) below the table.
      return std::exp((*spline_)(lo_) - kappa_ * (u - lo_));
    }
    return std::exp((*spline_)(std::min(u, hi_)));
  }

  double direct(double x, double split) const {
    const double c = 0.25 * x * x;
    auto f = [&](double w) {
      const double om = std::exp(w);
      return std::exp(-0.5 * kappa_ * w - om - c / om);
    };
    const double w_lo = std::log(c / 800.0), w_hi = std::log(60.0);
    const double ws = std::clamp(std::log(split), w_lo, w_hi);
    double v = 0.0;
    if (ws > w_lo) v += quad::gauss_kronrod(f, w_lo, ws, 1e-12).value;
    if (w_hi > ws) v += quad::gauss_kronrod(f, ws, w_hi, 1e-12).value;
    return v;
  }

 private:
  double kappa_, lo_, hi_;
  std::unique_ptr<boost::math::interpolators::cardinal_quintic_b_spline<double>> spline_;
};

}  // namespace

ScalingReport bessel_double_integral_scaling(double kappa, int d, double alpha,
                                             const BesselEnvelope& env,
                                             const std::vector<std::pair<double, double>>& s_r,
                                             int level, double tolerance) {
  FRACSPDE_REQUIRE(d == 1 || d == 2, InvalidArgument, "bessel_double: d must be 1 or 2");
  FRACSPDE_REQUIRE(kappa > 0.0 && kappa < d, InvalidArgument,
                   "bessel_double: kappa must lie in (0, d)");
  FRACSPDE_REQUIRE(env.sigma > 0.0 && env.kappa_d > -d, InvalidArgument,
                   "bessel_double: bad envelope");
  FRACSPDE_REQUIRE(s_r.size() >= 2, InvalidArgument, "bessel_double: need >= 2 (s, r) pairs");
  double smax = 0.0, rmax = 0.0;
  for (auto [s, r] : s_r) {
    FRACSPDE_REQUIRE(s > 0.0 && r > 0.0, InvalidArgument, "bessel_double: s, r must be > 0");
    smax = std::max(smax, s);
    rmax = std::max(rmax, r);
  }
  const double sg = env.sigma, kd = env.kappa_d;
  const double R1 = cutoff(rmax, alpha, sg), R2 = cutoff(smax, alpha, sg);
  std::vector<double> scales, vals;
  for (auto [s, r] : s_r) {
    const BesselTable B(kappa, std::pow(r, alpha), 2.0 * (R1 + R2));
    auto g1 = [&](double a) { return std::pow(std::abs(a), kd) * p_envelope(r, std::abs(a), alpha, sg); };
    auto g2 = [&](double b) { return std::pow(std::abs(b), kd) * p_envelope(s, std::abs(b), alpha, sg); };
    double v = 0.0;
    if (d == 1) {
      v = double_1d(g1, g2, std::cref(B), R1, R2, level);
    } else {
      auto theta_int = [&](double r1, double r2) {
        auto f = [&](double th) {
          const double sn = std::sin(0.5 * th);
          return B(std::sqrt((r1 - r2) * (r1 - r2) + 4.0 * r1 * r2 * sn * sn));
        };
        return 2.0 * quad::graded(f, 0.0, std::numbers::pi, Grade::Left, level);
      };
      auto outer = [&](double r2) {
        auto f = [&](double r1) { return r1 * g1(r1) * theta_int(r1, r2); };
        double w = quad::graded(f, 0.0, std::min(r2, R1), Grade::Both, level);
        if (r2 < R1) w += quad::graded(f, r2, R1, Grade::Left, level);
        return r2 * g2(r2) * w;
      };
      v = 2.0 * std::numbers::pi * quad::graded(outer, 0.0, R2, Grade::Left, level);
    }
    scales.push_back(r * s);
    vals.push_back(std::pow(r * s, env.zeta) * v);
  }
  const double ell = env.zeta - alpha * kappa / 4.0 + alpha * kd / 2.0 + alpha * d / 2.0;
  return fit_report("bessel_double kappa=" + std::to_string(kappa) + " d=" + std::to_string(d) +
                        " alpha=" + std::to_string(alpha),
                    scales, vals, ell, tolerance);
}

QuadcheckSuite quadcheck_suite(double tolerance, int threads) {
  QuadcheckSuite out;
  for (int n = 1; n <= 3; ++n) {
    for (double h : {-0.5, -0.3, 0.0, 0.5, 1.0}) {
      for (double t : {0.5, 1.0, 2.0}) out.simplex.push_back({n, h, t, {}, false});
    }
  }
  out.simplex.push_back({2, -1.0 + 1e-3, 1.0, {}, false});
  parallel_for(out.simplex.size(), threads, [&](std::size_t i) {
    auto& c = out.simplex[i];
    c.result = dirichlet_simplex(c.n, c.h, c.t);
    c.pass = c.result.rel_error <= 1e-5;
  });

  auto log_grid = [](double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, i / (n - 1.0)));
    return v;
  };
  auto diag = [](const std::vector<double>& v) {
    std::vector<std::pair<double, double>> p;
    for (double x : v) p.emplace_back(x, x);
    return p;
  };
  const auto s_mid = log_grid(1e-2, 1.0, 6);
  const auto s_small = log_grid(1e-8, 1e-6, 5);
  std::vector<std::function<ScalingReport()>> jobs{
      [&] { return intes_scaling(0.0, 1, 0.75, 1.0, s_mid, 12, tolerance); },
      [&] { return intes_scaling(-0.5, 1, 1.5, 1.0, s_mid, 12, tolerance); },
      [&] { return intes_scaling(-0.9, 2, 0.75, 1.0, s_mid, 12, tolerance); },
      [&] { return frac_double_integral_scaling(0.75, 0.0, 0.75, 1.0, diag(s_mid), 10, tolerance); },
      [&] { return frac_double_integral_scaling(0.75, 0.0, 1.5, 1.0, diag(s_mid), 10, tolerance); },
      [&] { return frac_double_integral_scaling(0.7, -0.3, 1.5, 1.0, diag(s_mid), 10, tolerance); },
      [&] {
        return bessel_double_integral_scaling(0.5, 1, 1.5, {-0.25, 0.0, 1.0}, diag(s_small), 10,
                                              tolerance);
      },
      [&] {
        return bessel_double_integral_scaling(0.3, 1, 1.5, {-0.25, 0.0, 1.0}, diag(s_small), 10,
                                              tolerance);
      },
      [&] {
        return bessel_double_integral_scaling(1.0, 2, 0.75, {-0.75, 0.0, 1.0}, diag(s_small), 8,
                                              tolerance);
      },
  };
  out.scaling.resize(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) { out.scaling[i] = jobs[i](); });
  out.pass = true;
  for (const auto& c : out.simplex) out.pass = out.pass && c.pass;
  for (const auto& r : out.scaling) out.pass = out.pass && r.pass;
  return out;
}

}  // namespace fracspde
