#include "fracspde/greens.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "fracspde/quadrature.hpp"

namespace fracspde {

namespace {
constexpr double kPi = std::numbers::pi;

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Parameter delta of the Wright profile of kernel k in dimension d.
double kernel_delta(Kernel k, double alpha, int d) {
  switch (k) {
    case Kernel::Y:
      return 0.5 * alpha * (2 - d);
    case Kernel::Z1:
      return 1.0 - 0.5 * alpha * d;
    case Kernel::Z2:
      return 2.0 - 0.5 * alpha * d;
  }
  return 0.0;
}
}  // namespace

std::string to_string(Kernel k) {
  switch (k) {
    case Kernel::Y:
      return "Y";
    case Kernel::Z1:
      return "Z1";
    case Kernel::Z2:
      return "Z2";
  }
  return "?";
}

Kernel kernel_from_string(const std::string& s) {
  if (s == "Y" || s == "y") return Kernel::Y;
  if (s == "Z1" || s == "z1") return Kernel::Z1;
  if (s == "Z2" || s == "z2") return Kernel::Z2;
  throw InvalidArgument("unknown kernel '" + s + "' (expected Y, Z1 or Z2)");
}

double c_d(int d) {
  FRACSPDE_REQUIRE(d >= 1, InvalidArgument, "dimension must be >= 1");
  return std::pow(2.0, -d) * std::pow(kPi, 0.5 * (1 - d));
}

double p_envelope(double t, double r, double alpha, double sigma) {
  FRACSPDE_REQUIRE(t > 0.0, InvalidArgument, "p_envelope: t must be > 0");
  const double z = r * std::pow(t, -0.5 * alpha);
  return std::exp(-sigma * std::pow(z, 2.0 / (2.0 - alpha)));
}

double p_envelope(double t, std::span<const double> x, double alpha, double sigma) {
  return p_envelope(t, norm(x), alpha, sigma);
}

double wright_decay_constant(double nu) {
  return (1.0 - nu) * std::pow(nu, nu / (1.0 - nu));
}

// ---------------------------------------------------------------------------
// WrightProfile

struct WrightProfile::Impl {
  boost::math::interpolators::cardinal_quintic_b_spline<double> spline;
  double u_max;
};

WrightProfile::WrightProfile(double nu, double delta, double step) : nu_(nu), delta_(delta) {
  FRACSPDE_REQUIRE(nu > 0.0 && nu < 1.0, InvalidArgument, "WrightProfile: nu must lie in (0,1)");
  FRACSPDE_REQUIRE(step > 0.0, InvalidArgument, "WrightProfile: step must be > 0");
  c0_ = wright_decay_constant(nu);
  q_ = 1.0 / (1.0 - nu);
  z_max_ = std::pow(600.0 / c0_, 1.0 / q_);
  const double u_max = std::log1p(z_max_);
  const int n = static_cast<int>(std::ceil(u_max / step)) + 1;
  const double h = u_max / (n - 1);
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    const double z = std::expm1(i * h);
    g[i] = wright_phi(-nu, delta, z) * std::exp(c0_ * std::pow(z, q_));
  }
  impl_ = std::make_shared<const Impl>(
      Impl{boost::math::interpolators::cardinal_quintic_b_spline<double>(g, 0.0, h), u_max});
}

double WrightProfile::operator()(double z) const {
  FRACSPDE_REQUIRE(z >= 0.0, InvalidArgument, "WrightProfile: z must be >= 0");
  if (z >= z_max_) return 0.0;
  const double u = std::min(std::log1p(z), impl_->u_max);
  return impl_->spline(u) * std::exp(-c0_ * std::pow(z, q_));
}

const WrightProfile& WrightProfile::cached(double nu, double delta) {
  thread_local std::map<std::pair<double, double>, std::unique_ptr<WrightProfile>> cache;
  auto key = std::make_pair(nu, delta);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<WrightProfile>(nu, delta)).first;
  }
  return *it->second;
}

// ---------------------------------------------------------------------------
// Radial function and kernels

double f_radial(double z, double mu, double delta, double alpha) {
  FRACSPDE_REQUIRE(z >= 0.0, InvalidArgument, "f_radial: z must be >= 0");
  FRACSPDE_REQUIRE(mu >= 0.0, InvalidArgument, "f_radial: mu must be >= 0");
  FRACSPDE_REQUIRE(alpha > 0.0 && alpha < 2.0, InvalidArgument, "f_radial: alpha must lie in (0,2)");
  const double nu = 0.5 * alpha;
  if (mu == 0.0) return wright_phi(-nu, delta, z);
  if (z == 0.0) {
    throw QuadratureFailure("f_radial: integral diverges at z = 0 for mu > 0",
                            std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity());
  }
  // mu = 2: int_1^inf phi(-nu, delta; -z t) dt = phi(-nu, delta + nu; -z) / z.
  if (mu == 2.0) return 2.0 * wright_phi(-nu, delta + nu, z) / z;
  const WrightProfile& phi = WrightProfile::cached(nu, delta);
  const double t_max = phi.z_max() / z;
  if (t_max <= 1.0) return 0.0;
  const double coef = 2.0 * recip_gamma(0.5 * mu);

  // Dyadic pieces in t, so that every scale of phi(-z t) gets its own rule.
  std::vector<double> cuts{1.0};
  while (cuts.back() * 2.0 < t_max) cuts.push_back(cuts.back() * 2.0);
  cuts.push_back(t_max);

  quad::CompensatedSum sum;
  double err = 0.0;
  if (mu < 2.0) {
    // t = 1 + s^(2/mu) removes the (t^2-1)^(mu/2-1) endpoint singularity.
    const double p = 2.0 / mu;
    auto g = [&](double s) {
      const double sp = std::pow(s, p);
      return p * std::pow(2.0 + sp, 0.5 * mu - 1.0) * phi(z * (1.0 + sp));
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const auto r = quad::gauss_kronrod(g, std::pow(cuts[i] - 1.0, 0.5 * mu),
                                         std::pow(cuts[i + 1] - 1.0, 0.5 * mu), 1e-11, 10);
      sum.add(r.value);
      err += r.error;
    }
  } else {
    auto g = [&](double t) { return std::pow(t * t - 1.0, 0.5 * mu - 1.0) * phi(z * t); };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const auto r = quad::gauss_kronrod(g, cuts[i], cuts[i + 1], 1e-11, 10);
      sum.add(r.value);
      err += r.error;
    }
  }
  const double value = coef * sum.value();
  if (!(err * coef <= 1e-8 * std::abs(value) + 1e-300)) {
    throw QuadratureFailure("f_radial: tolerance not reached", value, err * coef);
  }
  return value;
}

double green_radial(Kernel k, double t, double r, int d, const FractionalOrder& alpha) {
  FRACSPDE_REQUIRE(t > 0.0, InvalidArgument, "kernel: t must be > 0");
  FRACSPDE_REQUIRE(d >= 1, InvalidArgument, "kernel: d must be >= 1");
  FRACSPDE_REQUIRE(r >= 0.0, InvalidArgument, "kernel: |x| must be >= 0");
  if (k == Kernel::Z2) {
    FRACSPDE_REQUIRE(alpha.regime() == Regime::Super, InvalidArgument,
                     "Z2 exists only for alpha > 1");
  }
  const double a = alpha.alpha();
  const double nu = alpha.nu();
  const double delta = kernel_delta(k, a, d);
  if (d >= 2 && r == 0.0) {
    throw EvaluationAtSingularity("kernel " + to_string(k) + " evaluated at x = 0 in d = " +
                                  std::to_string(d));
  }
  const double z = r * std::pow(t, -nu);
  double f = 0.0;
  if (d == 1) {
    f = WrightProfile::cached(nu, delta)(z);
  } else {
    f = f_radial(z, d - 1.0, delta, a);
  }
  return c_d(d) * std::pow(t, delta - 1.0) * f;
}

double green(Kernel k, double t, std::span<const double> x, const FractionalOrder& alpha) {
  FRACSPDE_REQUIRE(!x.empty(), InvalidArgument, "kernel: x must have dimension >= 1");
  return green_radial(k, t, norm(x), static_cast<int>(x.size()), alpha);
}

double green_Y(double t, std::span<const double> x, const FractionalOrder& alpha) {
  return green(Kernel::Y, t, x, alpha);
}

double green_Z(int k, double t, std::span<const double> x, const FractionalOrder& alpha) {
  FRACSPDE_REQUIRE(k == 1 || k == 2, InvalidArgument, "green_Z: k must be 1 or 2");
  return green(k == 1 ? Kernel::Z1 : Kernel::Z2, t, x, alpha);
}

namespace {

// Riemann-Liouville integral of order beta at time T of a function vanishing
// at 0, product trapezoid rule with n steps.
double rl_integral(const std::function<double(double)>& y, double beta, double T, int n) {
  const double h = T / n;
  const double b1 = beta + 1.0;
  quad::CompensatedSum s;
  for (int j = 1; j <= n; ++j) {
    const double m = n - j;
    const double a = j == n ? 1.0
                            : std::pow(m + 1.0, b1) - 2.0 * std::pow(m, b1) +
                                  std::pow(std::max(m - 1.0, 0.0), b1);
    s.add(a * y(j * h));
  }
  return std::pow(h, beta) * recip_gamma(beta + 2.0) * s.value();
}

}  // namespace

TimeDomainValue green_Z_time_domain(int k, double t, double r, int d, const FractionalOrder& alpha,
                                    double rel_tol, int max_steps) {
  FRACSPDE_REQUIRE(k == 1 || k == 2, InvalidArgument, "green_Z_time_domain: k must be 1 or 2");
  FRACSPDE_REQUIRE(r > 0.0, InvalidArgument, "green_Z_time_domain: |x| must be > 0");
  FRACSPDE_REQUIRE(t > 0.0, InvalidArgument, "green_Z_time_domain: t must be > 0");
  if (k == 2) {
    FRACSPDE_REQUIRE(alpha.regime() == Regime::Super, InvalidArgument,
                     "Z2 exists only for alpha > 1");
  }
  const double a = alpha.alpha();
  std::function<double(double)> y = [&](double s) {
    return green_radial(Kernel::Y, s, r, d, alpha);
  };
  auto evaluate = [&](int n) {
    if (a < 1.0) return rl_integral(y, 1.0 - a, t, n);
    if (k == 2) return rl_integral(y, 2.0 - a, t, n);
    // Z1 = d/dt I^(2-alpha) Y, fourth-order central difference.
    const double e = 1e-2 * t;
    auto F = [&](double T) { return rl_integral(y, 2.0 - a, T, n); };
    return (8.0 * (F(t + e) - F(t - e)) - (F(t + 2 * e) - F(t - 2 * e))) / (12.0 * e);
  };
  TimeDomainValue out;
  int n = 64;
  double prev = evaluate(n);
  while (true) {
    n *= 2;
    if (n > max_steps) {
      throw NonConvergence("green_Z_time_domain: refinement did not settle");
    }
    const double cur = evaluate(n);
    out.value = cur;
    out.steps = n;
    out.last_change = std::abs(cur - prev);
    if (out.last_change <= rel_tol * std::abs(cur) + 1e-300) return out;
    prev = cur;
  }
}

// ---------------------------------------------------------------------------
// Initial data and J0

InitialData InitialData::constant(double c0, double c1, bool with_u1) {
  InitialData d;
  d.u0 = [c0](std::span<const double>) { return c0; };
  if (with_u1) d.u1 = [c1](std::span<const double>) { return c1; };
  d.name = "constant";
  d.params = {c0, c1};
  return d;
}

InitialData InitialData::gaussian_bump(double amplitude, double width, bool with_u1) {
  FRACSPDE_REQUIRE(width > 0.0, InvalidArgument, "gaussian_bump: width must be > 0");
  InitialData d;
  d.u0 = [amplitude, width](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return amplitude * std::exp(-0.5 * s / (width * width));
  };
  if (with_u1) d.u1 = [](std::span<const double>) { return 0.0; };
  d.name = "gaussian_bump";
  d.params = {amplitude, width};
  return d;
}

InitialData InitialData::sinusoid(double amplitude, double wavenumber, bool with_u1) {
  InitialData d;
  d.u0 = [amplitude, wavenumber](std::span<const double> x) {
    return amplitude * std::cos(wavenumber * x[0]);
  };
  if (with_u1) d.u1 = [](std::span<const double>) { return 0.0; };
  d.name = "sinusoid";
  d.params = {amplitude, wavenumber};
  return d;
}

bool InitialData::is_constant(double* c0, double* c1) const {
  const double probes[] = {-1.7, 0.0, 0.9, 3.1};
  auto at = [](const auto& f, double x) { return f ? f(std::span<const double>(&x, 1)) : 0.0; };
  const double a0 = at(u0, 0.0), b0 = at(u1, 0.0);
  for (double x : probes) {
    if (std::abs(at(u0, x) - a0) > 1e-12 * std::max(1.0, std::abs(a0)) ||
        std::abs(at(u1, x) - b0) > 1e-12 * std::max(1.0, std::abs(b0))) {
      return false;
    }
  }
  if (c0) *c0 = a0;
  if (c1) *c1 = b0;
  return true;
}

void InitialData::validate(const FractionalOrder& alpha) const {
  FRACSPDE_REQUIRE(static_cast<bool>(u0), InvalidArgument, "initial data: u0 is missing");
  if (alpha.regime() == Regime::Super) {
    FRACSPDE_REQUIRE(has_u1(), InvalidArgument, "initial data: u1 is required when alpha > 1");
  } else {
    FRACSPDE_REQUIRE(!has_u1(), InvalidArgument, "initial data: u1 must be absent when alpha < 1");
  }
}

namespace {

// int u(x - y) K(|y|) dy over |y| < R, d <= 3, in polar coordinates about x.
double convolve_radial(const std::function<double(std::span<const double>)>& u,
                       const std::function<double(double)>& K, std::span<const double> x,
                       double R, double rel_tol) {
  const int d = static_cast<int>(x.size());
  std::vector<double> pt(d);
  if (d == 1) {
    auto g = [&](double r) {
      pt[0] = x[0] - r;
      double s = u(pt);
      pt[0] = x[0] + r;
      s += u(pt);
      return s * K(r);
    };
    return quad::gauss_kronrod(g, 0.0, R, rel_tol).value;
  }
  if (d == 2) {
    auto g = [&](double r) {
      auto ang = [&](double th) {
        pt[0] = x[0] - r * std::cos(th);
        pt[1] = x[1] - r * std::sin(th);
        return u(pt);
      };
      return r * K(r) * quad::gauss_kronrod(ang, 0.0, 2.0 * kPi, rel_tol).value;
    };
    return quad::gauss_kronrod(g, 0.0, R, rel_tol).value;
  }
  if (d == 3) {
    auto g = [&](double r) {
      auto polar = [&](double th) {
        auto azim = [&](double ph) {
          pt[0] = x[0] - r * std::sin(th) * std::cos(ph);
          pt[1] = x[1] - r * std::sin(th) * std::sin(ph);
          pt[2] = x[2] - r * std::cos(th);
          return u(pt);
        };
        return std::sin(th) * quad::gauss_kronrod(azim, 0.0, 2.0 * kPi, rel_tol).value;
      };
      return r * r * K(r) * quad::gauss_kronrod(polar, 0.0, kPi, rel_tol).value;
    };
    return quad::gauss_kronrod(g, 0.0, R, rel_tol).value;
  }
  throw UnsupportedInput("j0: quadrature implemented for d <= 3");
}

}  // namespace

double j0(const InitialData& data, double t, std::span<const double> x,
          const FractionalOrder& alpha, double rel_tol) {
  FRACSPDE_REQUIRE(t > 0.0, InvalidArgument, "j0: t must be > 0");
  data.validate(alpha);
  const int d = static_cast<int>(x.size());
  FRACSPDE_REQUIRE(d >= 1, InvalidArgument, "j0: x must have dimension >= 1");
  const double nu = alpha.nu();
  const double q = 1.0 / (1.0 - nu);
  // exp(-c0 z^q) < e^-40 beyond R.
  const double R = std::pow(40.0 / wright_decay_constant(nu), 1.0 / q) * std::pow(t, nu);
  double total = 0.0;
  for (int k = 0; k < alpha.ceil(); ++k) {
    const Kernel ker = k == 0 ? Kernel::Z1 : Kernel::Z2;
    std::function<double(double)> K = [&](double r) {
      return green_radial(ker, t, r, d, alpha);
    };
    total += convolve_radial(k == 0 ? data.u0 : data.u1, K, x, R, rel_tol);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Envelopes

EnvelopeParams EnvelopeParams::for_kernel(Kernel k, const FractionalOrder& alpha, int d,
                                          double gamma, double nu1) {
  FRACSPDE_REQUIRE(d >= 1, InvalidArgument, "envelope: d must be >= 1");
  const double a = alpha.alpha();
  EnvelopeParams p;
  p.d = d;
  p.gamma = gamma;
  p.nu1 = nu1 >= 0.0 ? nu1 : 0.5 * ((2.0 - 2.0 / a) + gamma);
  p.nu0 = p.nu1 - 2.0 + 2.0 / a;
  p.sigma = wright_decay_constant(alpha.nu());
  switch (k) {
    case Kernel::Y:
      if (alpha.regime() == Regime::Super) {
        if (d == 1) {
          p.zeta = -1.0 + 0.5 * a;
          p.kappa = 0.0;
        } else {
          p.zeta = a - 0.5 * a * gamma + p.nu0 * a - 2.0;
          p.kappa = -d + gamma - 2.0 * p.nu0 + 2.0 / a;
          if (std::abs(p.kappa) < 1e-12) p.kappa = 0.0;
        }
      } else {
        p.zeta = a - 0.5 * a * d - 1.0;
        p.log_factor = d == 4;
        if (d >= 5) {
          p.kappa = 4.0 - d;
          p.zeta -= 0.5 * a * (4.0 - d);
        }
      }
      break;
    case Kernel::Z1:
    case Kernel::Z2:
      if (k == Kernel::Z2) {
        FRACSPDE_REQUIRE(alpha.regime() == Regime::Super, InvalidArgument,
                         "Z2 exists only for alpha > 1");
      }
      p.zeta = (k == Kernel::Z1 ? 0.0 : 1.0) - 0.5 * a * d;
      p.log_factor = d == 2;
      if (d >= 3) {
        p.kappa = 2.0 - d;
        p.zeta -= 0.5 * a * (2.0 - d);
      }
      break;
  }
  p.validate(alpha);
  return p;
}

void EnvelopeParams::validate(const FractionalOrder& alpha) const {
  const double a = alpha.alpha();
  FRACSPDE_REQUIRE(d >= 1, InvalidArgument, "envelope: d must be >= 1");
  FRACSPDE_REQUIRE(sigma > 0.0, InvalidArgument, "envelope: sigma must be > 0");
  FRACSPDE_REQUIRE(c_fit > 0.0, InvalidArgument, "envelope: c_fit must be > 0");
  FRACSPDE_REQUIRE(kappa <= 0.0, InvalidArgument, "envelope: kappa must be <= 0");
  if (alpha.regime() == Regime::Super) {
    const double lo = 2.0 - 2.0 / a;
    FRACSPDE_REQUIRE(gamma > lo, InvalidArgument,
                     "envelope: gamma must exceed 2 - 2/alpha = " + std::to_string(lo));
    FRACSPDE_REQUIRE(nu1 > lo && nu1 < gamma, InvalidArgument,
                     "envelope: nu1 must lie in (2 - 2/alpha, gamma)");
    FRACSPDE_REQUIRE(std::abs(nu0 - (nu1 - 2.0 + 2.0 / a)) < 1e-12, InvalidArgument,
                     "envelope: nu0 must equal nu1 - 2 + 2/alpha");
  }
}

double mu_d(int d, double z) {
  FRACSPDE_REQUIRE(d >= 1, InvalidArgument, "mu_d: d must be >= 1");
  if (d == 1) return 1.0;
  FRACSPDE_REQUIRE(z > 0.0, SingularArgument, "mu_d: z must be > 0 for d >= 2");
  if (d == 2) return 1.0 + std::abs(std::log(z));
  return std::pow(z, 2.0 - d);
}

namespace {
double log_envelope(double t, double r, const EnvelopeParams& p, double alpha) {
  const double z = r * std::pow(t, -0.5 * alpha);
  double v = std::log(p.c_fit) + p.zeta * std::log(t) -
             p.sigma * std::pow(z, 2.0 / (2.0 - alpha));
  if (p.kappa != 0.0) v += p.kappa * std::log(r);
  if (p.log_factor) v += std::log1p(std::abs(std::log(z)));
  return v;
}
}  // namespace

double envelope_bound_radial(double t, double r, const EnvelopeParams& p, double alpha) {
  FRACSPDE_REQUIRE(t > 0.0, InvalidArgument, "envelope: t must be > 0");
  if ((p.kappa < 0.0 || p.log_factor) && r == 0.0) {
    throw SingularArgument("envelope: x = 0 with a singular spatial factor");
  }
  return std::exp(log_envelope(t, r, p, alpha));
}

double envelope_bound(double t, std::span<const double> x, const EnvelopeParams& p,
                      double alpha) {
  return envelope_bound_radial(t, norm(x), p, alpha);
}

double envelope_bound_product(double t, std::span<const double> x, const EnvelopeParams& p,
                              double alpha) {
  FRACSPDE_REQUIRE(t > 0.0, InvalidArgument, "envelope: t must be > 0");
  const double dd = static_cast<double>(x.size());
  double v = p.c_fit;
  for (double xi : x) {
    v *= std::pow(t, p.zeta / dd) * p_envelope(t, std::abs(xi), alpha, p.sigma);
    if (p.kappa != 0.0) v *= std::pow(std::abs(xi), p.kappa / dd);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Domination scan

DominationReport verify_envelope(Kernel k, const FractionalOrder& alpha, EnvelopeParams params,
                                 const GridSpec& grid, bool fit) {
  FRACSPDE_REQUIRE(grid.t_min > 0.0 && grid.t_max > grid.t_min && grid.n_t >= 2, InvalidArgument,
                   "verify_envelope: bad time grid");
  FRACSPDE_REQUIRE(grid.r_min > 0.0 && grid.r_max > grid.r_min && grid.n_r >= 4, InvalidArgument,
                   "verify_envelope: bad space grid");
  FRACSPDE_REQUIRE(grid.refine_factor >= 1.0 && grid.refine_levels >= 0, InvalidArgument,
                   "verify_envelope: bad refinement");
  if (k == Kernel::Z2) {
    FRACSPDE_REQUIRE(alpha.regime() == Regime::Super, InvalidArgument,
                     "Z2 exists only for alpha > 1");
  }
  const double a = alpha.alpha();
  const double nu = alpha.nu();
  const double q = 2.0 / (2.0 - a);
  const int d = params.d;

  struct Node {
    double t, r, log_k;
    bool fit;
  };
  std::vector<Node> nodes;
  auto logspace = [](double lo, double hi, int n, int i) {
    return lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  };
  auto add_node = [&](double t, double r, bool in_fit) {
    const double v = std::abs(green_radial(k, t, r, d, alpha));
    nodes.push_back({t, r, v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(),
                     in_fit});
  };
  for (int i = 0; i < grid.n_t; ++i) {
    const double t = logspace(grid.t_min, grid.t_max, grid.n_t, i);
    for (int j = 0; j < grid.n_r; ++j) add_node(t, logspace(grid.r_min, grid.r_max, grid.n_r, j), true);
  }
  // Refinement toward t -> 0; |x| is rescaled with t^nu so that the similarity
  // variable covers the same range as on the coarse grid.
  for (int l = 1; l <= grid.refine_levels; ++l) {
    const double t = grid.t_min * std::pow(grid.refine_factor, -static_cast<double>(l) / grid.refine_levels);
    const double s = std::pow(t / grid.t_min, nu);
    for (int j = 0; j < grid.n_r; ++j) {
      add_node(t, s * logspace(grid.r_min, grid.r_max, grid.n_r, j), false);
    }
  }

  if (fit) {
    // sigma from the decay of the tail, c_fit from the coarse-grid maximum.
    std::vector<double> zs;
    for (const auto& n : nodes) {
      if (n.fit) zs.push_back(n.r * std::pow(n.t, -nu));
    }
    std::vector<double> sorted = zs;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double z_med = sorted[sorted.size() / 2];
    std::vector<double> w, rho;
    EnvelopeParams bare = params;
    bare.c_fit = 1.0;
    bare.sigma = 0.0;
    for (const auto& n : nodes) {
      const double z = n.r * std::pow(n.t, -nu);
      if (!n.fit || z < z_med || !std::isfinite(n.log_k)) continue;
      w.push_back(std::pow(z, q));
      rho.push_back(n.log_k - log_envelope(n.t, n.r, bare, a));
    }
    if (w.size() < 3) throw FitFailure("verify_envelope: too few tail points to fit sigma");
    const auto line = quad::fit_line(w, rho);
    const double sigma = -0.9 * line.slope;
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw FitFailure("verify_envelope: fitted sigma is not positive");
    }
    params.sigma = sigma;
    params.c_fit = 1.0;
    double max_log = -std::numeric_limits<double>::infinity();
    for (const auto& n : nodes) {
      if (n.fit) max_log = std::max(max_log, n.log_k - log_envelope(n.t, n.r, params, a));
    }
    if (!std::isfinite(max_log)) throw FitFailure("verify_envelope: kernel vanishes on the grid");
    params.c_fit = std::exp(max_log) * (1.0 + 1e-9);
  }

  DominationReport rep;
  rep.kernel = k;
  rep.d = d;
  rep.alpha = a;
  rep.params = params;
  double sup_log = -std::numeric_limits<double>::infinity();
  for (const auto& n : nodes) {
    const double lr = n.log_k - log_envelope(n.t, n.r, params, a);
    if (lr > sup_log) {
      sup_log = lr;
      rep.t_at = n.t;
      rep.r_at = n.r;
    }
  }
  rep.sup_ratio = std::exp(sup_log);
  rep.pass = rep.sup_ratio <= 1.0;
  return rep;
}

}  // namespace fracspde
