#include "fracspde/chaos.hpp"

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

#include "fracspde/errors.hpp"
#include "fracspde/quadrature.hpp"
#include "fracspde/specfun.hpp"

namespace fracspde {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ConvergenceInputs::ConvergenceInputs(FractionalOrder a, NoiseSpec n, double t, double gamma)
    : alpha(a), d(n.d), noise(std::move(n)), horizon_t(t) {
  envelope = EnvelopeParams::for_kernel(Kernel::Y, alpha, d, gamma);
  c_t = fracspde::c_t(noise.time, t);
}

void ConvergenceInputs::validate() const {
  FRACSPDE_REQUIRE(d >= 1, InvalidArgument, "d must be >= 1");
  FRACSPDE_REQUIRE(noise.d == d, InvalidArgument, "noise dimension differs from d");
  FRACSPDE_REQUIRE(horizon_t > 0.0, InvalidArgument, "horizon t must be > 0");
  FRACSPDE_REQUIRE(c_t > 0.0 && std::isfinite(c_t), InvalidArgument, "C_t must be finite and > 0");
  require_valid(noise);
}

double ell_closed_form(double alpha, int d, double sum_h) {
  return alpha - 1.0 - alpha * d / 2.0 + alpha * sum_h / 2.0;
}

double compute_ell(const ConvergenceInputs& in) {
  const double a = in.alpha.alpha();
  const int d = in.d;
  if (!in.envelope_available) {
    if (!in.allow_closed_form) {
      throw MissingEnvelope("no kernel envelope for alpha = " + fmt(a) + ", d = " +
                            std::to_string(d) + " and the closed form is disabled");
    }
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Fractional>) {
            double s = 0.0;
            for (double h : k.H) s += h;
            return ell_closed_form(a, d, s);
          } else {
            return a - 1.0 - a * k.kappa / 4.0;
          }
        },
        in.noise.space);
  }
  const auto& e = in.envelope;
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Fractional>) {
          double s = 0.0;
          for (double h : k.H) s += h;
          return e.zeta + s * a / 2.0 + e.kappa * a / 2.0;
        } else if constexpr (std::is_same_v<K, Riesz>) {
          const double s = d * (1.0 - k.kappa / (2.0 * d));
          return e.zeta + s * a / 2.0 + e.kappa * a / 2.0;
        } else {
          return e.zeta - a * k.kappa / 4.0 + a * e.kappa / 2.0 + a * d / 2.0;
        }
      },
      in.noise.space);
}

double ell_prime(double ell, int d, double alpha, double eps) {
  return ell + d * alpha / 4.0 * eps;
}

CaseExponent case_exponent(double H, double kappa_d, int d, double alpha, double epsilon) {
  CaseExponent c;
  c.degenerate = std::abs(2.0 * H - 2.0 + kappa_d / d + 1.0) < 1e-12;
  c.epsilon = c.degenerate ? epsilon : 0.0;
  if (c.degenerate) {
    FRACSPDE_REQUIRE(epsilon > 0.0, DegenerateBranch,
                     "degenerate exponent (2H - 2 + kappa_d/d = -1) needs epsilon > 0");
  }
  c.theta = (H * d + kappa_d) / (2.0 * d) * alpha + (c.degenerate ? alpha * epsilon / 4.0 : 0.0);
  return c;
}

BoundSeries bound_terms(double ell, double c, double c_t, double t, int n_max) {
  FRACSPDE_REQUIRE(n_max >= 0, InvalidArgument, "n_max must be >= 0");
  FRACSPDE_REQUIRE(c > 0.0 && c_t > 0.0 && t > 0.0, InvalidArgument,
                   "c, C_t and t must be > 0");
  BoundSeries b;
  const double p = 2.0 * ell + 1.0;
  b.divergent = !(p > 0.0);
  b.terms.resize(n_max + 1);
  if (b.divergent) {
    // No Gamma(2l+1) factor exists; report the geometric part only.
    for (int n = 0; n <= n_max; ++n) b.terms[n] = std::pow(c * c_t * std::pow(t, p), n);
  } else {
    const double lg = std::lgamma(p);
    const double base = std::log(c * c_t) + lg + p * std::log(t);
    for (int n = 0; n <= n_max; ++n) b.terms[n] = std::exp(n * base - std::lgamma(p * n + 1.0));
  }
  for (int n = 1; n <= n_max; ++n) {
    b.ratios.push_back(b.terms[n - 1] > 0.0 ? b.terms[n] / b.terms[n - 1] : 0.0);
  }
  b.summable = !b.divergent;
  return b;
}

ChaosReport check_conditions(const ConvergenceInputs& in, int n_max, double c) {
  ChaosReport r;
  const double a = in.alpha.alpha();
  const int d = in.d;
  auto add = [&](std::string name, double slack) {
    r.conditions.push_back(Condition{std::move(name), slack > 0.0, slack});
  };
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Fractional>) {
          double lo = 1e300, hi = 1e300, sum = 0.0, pos = 1e300;
          for (double h : k.H) {
            lo = std::min(lo, h - 0.5);
            hi = std::min(hi, 1.0 - h);
            pos = std::min(pos, 2.0 * h + 2.0 * in.envelope.kappa / d);
            sum += h;
          }
          add("1/2 < H_i < 1", std::min(lo, hi));
          if (d >= 5) {
            if (a < 1.0) {
              const double floor = 1.0 - 2.0 / d - in.floor_gamma / (2.0 * d);
              add("H_i > 1-2/d-gamma/(2d)", lo + 0.5 - floor);
            } else {
              add("H_i > 1-2/d", lo + 0.5 - (1.0 - 2.0 / d));
            }
          }
          add("Σ H_i > d−2+1/α", sum - (d - 2.0 + 1.0 / a));
          add("2H_i+2κ_d/d>0", pos);
        } else {
          add("0<κ<d", std::min(k.kappa, d - k.kappa));
          add("κ< 4−2/α", 4.0 - 2.0 / a - k.kappa);
        }
      },
      in.noise.space);
  r.ell = compute_ell(in);
  r.margin = r.ell + 0.5;
  r.threshold_ok = r.margin > 0.0;
  r.verdict = r.threshold_ok;
  for (const auto& cnd : r.conditions) r.verdict = r.verdict && cnd.satisfied;
  r.bound = bound_terms(r.ell, c, in.c_t, in.horizon_t, n_max);
  return r;
}

double lambda_hat(const SpaceKernel& k, double xi) {
  const double ax = std::abs(xi);
  return std::visit(
      [&](const auto& s) -> double {
        using K = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<K, Fractional>) {
          const double H = s.H.at(0);
          return 2.0 * std::tgamma(2.0 * H + 1.0) * std::sin(kPi * H) * std::pow(ax, 1.0 - 2.0 * H);
        } else if constexpr (std::is_same_v<K, Riesz>) {
          return s.C * 2.0 * std::tgamma(1.0 - s.kappa) * std::sin(kPi * s.kappa / 2.0) *
                 std::pow(ax, s.kappa - 1.0);
        } else {
          return s.C * std::sqrt(4.0 * kPi) * std::tgamma(0.5 - s.kappa / 2.0) *
                 std::pow(1.0 + xi * xi, s.kappa / 2.0 - 0.5);
        }
      },
      k);
}

double lambda_hat_mass(const SpaceKernel& k, double eps) {
  FRACSPDE_REQUIRE(eps >= 0.0, InvalidArgument, "lambda_hat_mass: eps must be >= 0");
  return std::visit(
      [&](const auto& s) -> double {
        using K = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<K, Fractional>) {
          const double p = 2.0 - 2.0 * s.H.at(0);
          return lambda_hat(k, 1.0) * std::pow(eps, p) / p;
        } else if constexpr (std::is_same_v<K, Riesz>) {
          return lambda_hat(k, 1.0) * std::pow(eps, s.kappa) / s.kappa;
        } else {
          return quad::gauss_kronrod([&](double x) { return lambda_hat(k, x); }, 0.0, eps, 1e-12)
              .value;
        }
      },
      k);
}

namespace {

// E_{a,b}(-x) for x >= 0, tabulated in u = log1p(x).
class MLProfile {
 public:
  MLProfile(double a, double b) : a_(a), b_(b) {
    u_max_ = std::log1p(kXMax);
    const double step = a < 1.0 ? 5e-3 : 2.5e-3;
    const int n = static_cast<int>(std::ceil(u_max_ / step)) + 1;
    const double h = u_max_ / (n - 1);
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = mittag_leffler(a, b, -std::expm1(i * h));
    spline_ = std::make_unique<boost::math::interpolators::cardinal_quintic_b_spline<double>>(
        g, 0.0, h);
  }
  double operator()(double x) const {
    if (x >= kXMax) return mittag_leffler(a_, b_, -x);
    return (*spline_)(std::log1p(x));
  }

 private:
  static constexpr double kXMax = 1e6;
  double a_, b_, u_max_;
  std::unique_ptr<boost::math::interpolators::cardinal_quintic_b_spline<double>> spline_;
};

const MLProfile& ml_profile(double a, double b) {
  thread_local std::map<std::pair<double, double>, std::unique_ptr<MLProfile>> cache;
  auto key = std::make_pair(a, b);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<MLProfile>(a, b)).first;
  return *it->second;
}

struct Node {
  double x, w;
};

// Gauss-Legendre in log x on [e^lo, e^hi]; weights include the Jacobian.
std::vector<Node> log_nodes(double lo, double hi, double per_unit) {
  using GL = boost::math::quadrature::gauss<double, 10>;
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) * per_unit)));
  const double h = (hi - lo) / panels;
  std::vector<Node> out;
  const auto& ab = GL::abscissa();
  const auto& wt = GL::weights();
  for (int p = 0; p < panels; ++p) {
    const double c = lo + (p + 0.5) * h;
    for (std::size_t i = 0; i < ab.size(); ++i) {
      for (int sgn : {-1, 1}) {
        if (ab[i] == 0.0 && sgn > 0) continue;
        const double w = c + sgn * 0.5 * h * ab[i];
        out.push_back({std::exp(w), 0.5 * h * wt[i] * std::exp(w)});
      }
    }
  }
  return out;
}

struct Setup {
  double a, t, s, u0, u1, eps;
  const SpaceKernel* space;
  const MLProfile *e_aa, *e_a1, *e_a2;
};

// J(xi): Fourier transform of J0(s) Y(t - s, .) integrated over s in [0, t]
// (Constant time kernel only needs this combination).
double j_hat(const Setup& S, double tt, double xi) {
  const double ta = std::pow(tt, S.a);
  const double x = xi * xi * ta;
  double v = S.u0 * ta * (*S.e_a1)(x);
  if (S.u1 != 0.0) v += S.u1 * ta * tt * (*S.e_a2)(x);
  return v;
}

double t1_constant(const Setup& S, double c, double per_unit, double lo, double hi) {
  quad::CompensatedSum sum;
  for (const auto& n : log_nodes(lo, hi, per_unit)) {
    const double xi = n.x / S.s;
    const double j = j_hat(S, S.t, xi);
    sum.add(lambda_hat(*S.space, xi) * j * j * n.w / S.s);
  }
  const double j0 = j_hat(S, S.t, 0.0);
  sum.add(j0 * j0 * lambda_hat_mass(*S.space, S.eps));
  return c / kPi * sum.value();
}

// A(p, q) = int_0^t Yhat_{t-s}(p + q) G(s, p) ds with G = J from time s.
double a_kernel(const Setup& S, double p, double q) {
  const double ta = std::pow(S.t, S.a);
  const double pq2 = (p + q) * (p + q);
  const double scale = std::max(pq2, p * p) * ta;
  const int layers = 3 + static_cast<int>(std::ceil(std::log1p(scale) / std::log(5.0)));
  auto f = [&](double v) {
    const double s = S.t - std::pow(v, 1.0 / S.a);
    if (s <= 0.0) return 0.0;
    return (*S.e_aa)(pq2 * v) * j_hat(S, s, p);
  };
  return quad::graded(f, 0.0, ta, quad::Grade::Both, layers) / S.a;
}

double t2_constant(const Setup& S, double c, double per_unit, double lo, double hi) {
  const auto nodes = log_nodes(lo, hi, per_unit);
  std::vector<Node> signed_nodes;
  for (const auto& n : nodes) {
    signed_nodes.push_back({n.x / S.s, n.w / S.s});
    signed_nodes.push_back({-n.x / S.s, n.w / S.s});
  }
  const SpaceKernel& k = *S.space;
  const double mass = lambda_hat_mass(k, S.eps);
  quad::CompensatedSum sum;
  for (const auto& n1 : nodes) {
    const double x1 = n1.x / S.s, w1 = n1.w / S.s, l1 = lambda_hat(k, x1);
    for (const auto& n2 : signed_nodes) {
      const double a12 = a_kernel(S, x1, n2.x), a21 = a_kernel(S, n2.x, x1);
      sum.add(l1 * lambda_hat(k, n2.x) * a12 * (a12 + a21) * w1 * n2.w);
    }
    const double b = a_kernel(S, x1, 0.0), b2 = a_kernel(S, 0.0, x1);
    sum.add(2.0 * mass * l1 * b * (b + b2) * w1);
  }
  for (const auto& n2 : signed_nodes) {
    const double b = a_kernel(S, 0.0, n2.x), b2 = a_kernel(S, n2.x, 0.0);
    sum.add(mass * lambda_hat(k, n2.x) * b * (b + b2) * n2.w);
  }
  return 2.0 * c * c / (4.0 * kPi * kPi) * sum.value();
}

// Spectral density of the time covariance on tau > 0.
double time_density(const TimeKernel& k, double tau) {
  return std::visit(
      [&](const auto& s) -> double {
        using K = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<K, ExponentialTime>) {
          return s.rate / kPi / (s.rate * s.rate + tau * tau);
        } else if constexpr (std::is_same_v<K, RieszTime>) {
          return std::pow(tau, s.beta - 1.0) /
                 (2.0 * std::tgamma(s.beta) * std::cos(kPi * s.beta / 2.0));
        } else {
          return 0.0;
        }
      },
      k);
}

// Spectral mass of (0, tau].
double time_mass(const TimeKernel& k, double tau) {
  return std::visit(
      [&](const auto& s) -> double {
        using K = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<K, ExponentialTime>) {
          return std::atan(tau / s.rate) / kPi;
        } else if constexpr (std::is_same_v<K, RieszTime>) {
          return std::pow(tau, s.beta) /
                 (2.0 * s.beta * std::tgamma(s.beta) * std::cos(kPi * s.beta / 2.0));
        } else {
          return 0.0;
        }
      },
      k);
}

double t1_spectral(const Setup& S, const TimeKernel& tk, const ChaosQuadrature& q,
                   double per_unit, double* tail) {
  using GL = boost::math::quadrature::gauss<double, 10>;
  const double ta = std::pow(S.t, S.a);
  const double tau_max = q.tau_max / S.t;
  // v = a^alpha mesh: geometric toward v = 0, each panel cut so that
  // the phase tau_max * a moves by at most pi per subpanel.
  std::vector<double> mesh{0.0};
  {
    std::vector<double> geo;
    double w = ta;
    for (int k = 0; k < 10; ++k, w *= 0.2) geo.push_back(w);
    std::reverse(geo.begin(), geo.end());
    for (double g : geo) {
      const double prev = mesh.back();
      const double da = std::pow(g, 1.0 / S.a) - std::pow(prev, 1.0 / S.a);
      const int sub = std::max(1, static_cast<int>(std::ceil(da * tau_max / kPi)));
      for (int i = 1; i <= sub; ++i) mesh.push_back(prev + (g - prev) * i / sub);
    }
  }
  std::vector<double> vs, ws, ss;
  const auto& ab = GL::abscissa();
  const auto& wt = GL::weights();
  for (std::size_t p = 0; p + 1 < mesh.size(); ++p) {
    const double c = 0.5 * (mesh[p] + mesh[p + 1]), h = 0.5 * (mesh[p + 1] - mesh[p]);
    for (std::size_t i = 0; i < ab.size(); ++i) {
      for (int sgn : {-1, 1}) {
        if (ab[i] == 0.0 && sgn > 0) continue;
        const double v = c + sgn * h * ab[i];
        vs.push_back(v);
        ws.push_back(h * wt[i] / S.a);
        const double s = S.t - std::pow(v, 1.0 / S.a);
        ss.push_back(s);
        ws.back() *= S.u0 + S.u1 * s;
      }
    }
  }
  const std::size_t K = vs.size();
  const double tau_lo = 1e-3 / S.t;
  const auto taus = log_nodes(std::log(tau_lo), std::log(tau_max), 2.0 * per_unit);
  std::vector<std::complex<double>> phase(taus.size() * K);
  for (std::size_t m = 0; m < taus.size(); ++m) {
    for (std::size_t k = 0; k < K; ++k) phase[m * K + k] = std::polar(1.0, taus[m].x * ss[k]);
  }
  // mu(tau) |F|^2 ~ tau^-decay for large tau.
  const double decay = 2.0 * S.a + (std::holds_alternative<ExponentialTime>(tk)
                                        ? 2.0
                                        : 1.0 - std::get<RieszTime>(tk).beta);
  std::vector<double> e(K);
  // int_0^inf mu(dtau) |F(tau, xi)|^2 and a tail estimate beyond tau_max.
  auto inner = [&](double xi, double* tail_est) {
    for (std::size_t k = 0; k < K; ++k) e[k] = ws[k] * (*S.e_aa)(xi * xi * vs[k]);
    double f0 = 0.0;
    for (double v : e) f0 += v;
    double acc = time_mass(tk, tau_lo) * f0 * f0;
    double last = 0.0;
    for (std::size_t m = 0; m < taus.size(); ++m) {
      std::complex<double> f = 0.0;
      const auto* ph = &phase[m * K];
      for (std::size_t k = 0; k < K; ++k) f += e[k] * ph[k];
      last = std::norm(f);
      acc += time_density(tk, taus[m].x) * last * taus[m].w;
    }
    *tail_est = time_density(tk, tau_max) * last * tau_max / (decay - 1.0);
    return acc;
  };
  quad::CompensatedSum sum, tails;
  double te = 0.0;
  for (const auto& n : log_nodes(q.log_xi_min, q.log_xi_max, per_unit)) {
    const double xi = n.x / S.s, w = n.w / S.s, l = lambda_hat(*S.space, xi);
    sum.add(l * inner(xi, &te) * w);
    tails.add(l * te * w);
  }
  const double mass = lambda_hat_mass(*S.space, S.eps);
  sum.add(mass * inner(0.0, &te));
  tails.add(mass * te);
  *tail = 2.0 / kPi * std::abs(tails.value());
  return 2.0 / kPi * sum.value();
}

}  // namespace

ChaosTerm chaos_term_direct(int n, const ConvergenceInputs& in, const InitialData& data, double t,
                            std::span<const double> x, const ChaosQuadrature& q) {
  FRACSPDE_REQUIRE(n == 1 || n == 2, InvalidArgument, "chaos_term_direct: n must be 1 or 2");
  FRACSPDE_REQUIRE(in.d == 1, UnsupportedInput, "chaos_term_direct: only d = 1 is supported");
  FRACSPDE_REQUIRE(x.size() == 1, InvalidArgument, "chaos_term_direct: x must have one coordinate");
  FRACSPDE_REQUIRE(t > 0.0, InvalidArgument, "chaos_term_direct: t must be > 0");
  FRACSPDE_REQUIRE(q.panels_per_unit >= 1 && q.log_xi_max > q.log_xi_min, InvalidArgument,
                   "chaos_term_direct: bad quadrature settings");
  require_valid(in.noise);
  data.validate(in.alpha);
  Setup S{};
  S.a = in.alpha.alpha();
  S.t = t;
  S.s = std::pow(t, S.a / 2.0);
  if (!data.is_constant(&S.u0, &S.u1)) {
    throw UnsupportedInput("chaos_term_direct: initial data '" + data.name +
                           "' is not spatially constant");
  }
  S.eps = std::exp(q.log_xi_min) / S.s;
  S.space = &in.noise.space;
  S.e_aa = &ml_profile(S.a, S.a);
  S.e_a1 = &ml_profile(S.a, S.a + 1.0);
  S.e_a2 = &ml_profile(S.a, S.a + 2.0);
  ChaosTerm out;
  if (S.u0 == 0.0 && S.u1 == 0.0) return out;
  const double pu = q.panels_per_unit;
  if (const auto* ct = std::get_if<ConstantTime>(&in.noise.time)) {
    if (n == 1) {
      out.value = t1_constant(S, ct->c, pu, q.log_xi_min, q.log_xi_max);
      out.error = std::abs(out.value - t1_constant(S, ct->c, 0.5 * pu, q.log_xi_min, q.log_xi_max));
    } else {
      out.value = t2_constant(S, ct->c, pu, q.log_xi_min, q.log_xi_max);
      out.error = std::abs(out.value - t2_constant(S, ct->c, 0.5 * pu, q.log_xi_min, q.log_xi_max));
    }
  } else {
    FRACSPDE_REQUIRE(n == 1, UnsupportedInput,
                     "chaos_term_direct: n = 2 needs a Constant time kernel");
    double tail = 0.0;
    out.value = t1_spectral(S, in.noise.time, q, pu, &tail);
    double tail2 = 0.0;
    const double coarse = t1_spectral(S, in.noise.time, q, 0.5 * pu, &tail2);
    out.error = std::abs(out.value - coarse) + tail;
  }
  if (!std::isfinite(out.value) || out.error > 0.05 * std::abs(out.value) + 1e-300) {
    throw QuadratureFailure("chaos_term_direct: error estimate too large", out.value, out.error);
  }
  return out;
}

}  // namespace fracspde
