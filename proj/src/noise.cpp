#include "fracspde/noise.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "fracspde/quadrature.hpp"
#include "fracspde/specfun.hpp"

namespace fracspde {

namespace {
constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}
}  // namespace

std::string kernel_name(const SpaceKernel& k) {
  return std::visit(overloaded{[](const Fractional&) { return std::string("fractional"); },
                               [](const Riesz&) { return std::string("riesz"); },
                               [](const Bessel&) { return std::string("bessel"); }},
                    k);
}

std::string kernel_name(const TimeKernel& k) {
  return std::visit(overloaded{[](const ConstantTime&) { return std::string("constant"); },
                               [](const RieszTime&) { return std::string("riesz_time"); },
                               [](const ExponentialTime&) { return std::string("exponential"); }},
                    k);
}

std::vector<std::string> validate_spec(const NoiseSpec& spec) {
  std::vector<std::string> out;
  auto fmt = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  if (spec.d < 1) out.push_back("d = " + std::to_string(spec.d) + " not >= 1");
  std::visit(overloaded{
                 [&](const Fractional& f) {
                   if (static_cast<int>(f.H.size()) != spec.d) {
                     out.push_back("H has " + std::to_string(f.H.size()) +
                                   " entries, expected d = " + std::to_string(spec.d));
                   }
                   for (std::size_t i = 0; i < f.H.size(); ++i) {
                     const std::string name = "H" + std::to_string(i + 1) + " = " + fmt(f.H[i]);
                     if (!(f.H[i] > 0.5)) out.push_back(name + " not > 1/2");
                     if (!(f.H[i] < 1.0)) out.push_back(name + " not < 1");
                   }
                 },
                 [&](const Riesz& r) {
                   if (!(r.kappa > 0.0 && r.kappa < spec.d)) {
                     out.push_back("kappa = " + fmt(r.kappa) + " out of (0, d) with d = " +
                                   std::to_string(spec.d));
                   }
                   if (!(r.C > 0.0)) out.push_back("C = " + fmt(r.C) + " not > 0");
                 },
                 [&](const Bessel& b) {
                   if (!(b.kappa > 0.0 && b.kappa < spec.d)) {
                     out.push_back("kappa = " + fmt(b.kappa) + " out of (0, d) with d = " +
                                   std::to_string(spec.d));
                   }
                   if (!(b.C > 0.0)) out.push_back("C = " + fmt(b.C) + " not > 0");
                 }},
             spec.space);
  std::visit(overloaded{[&](const ConstantTime& c) {
                          if (!(c.c > 0.0)) out.push_back("c = " + fmt(c.c) + " not > 0");
                        },
                        [&](const RieszTime& r) {
                          if (!(r.beta > 0.0 && r.beta < 1.0)) {
                            out.push_back("beta = " + fmt(r.beta) + " out of (0, 1)");
                          }
                        },
                        [&](const ExponentialTime& e) {
                          if (!(e.rate > 0.0)) out.push_back("rate = " + fmt(e.rate) + " not > 0");
                        }},
             spec.time);
  return out;
}

void require_valid(const NoiseSpec& spec) {
  const auto v = validate_spec(spec);
  if (v.empty()) return;
  std::string msg = "invalid noise spec:";
  for (const auto& s : v) msg += " [" + s + "]";
  throw InvalidArgument(msg);
}

double fractional_cov_1d(double H, double v) {
  if (v == 0.0) throw SingularArgument("fractional kernel is singular at 0");
  return 2.0 * H * (2.0 * H - 1.0) * std::pow(std::abs(v), 2.0 * H - 2.0);
}

double bessel_closed_form(double kappa, double r) {
  if (r == 0.0) throw SingularArgument("Bessel kernel is singular at 0");
  const double nu = 0.5 * kappa;
  return 2.0 * std::pow(0.5 * r, -nu) * std::cyl_bessel_k(nu, r);
}

double space_cov(const SpaceKernel& k, std::span<const double> v) {
  return std::visit(
      overloaded{
          [&](const Fractional& f) {
            FRACSPDE_REQUIRE(f.H.size() == v.size(), InvalidArgument,
                             "space_cov: H and v have different dimensions");
            double p = 1.0;
            for (std::size_t i = 0; i < v.size(); ++i) p *= fractional_cov_1d(f.H[i], v[i]);
            return p;
          },
          [&](const Riesz& r) {
            const double n = norm(v);
            if (n == 0.0) throw SingularArgument("Riesz kernel is singular at 0");
            return r.C * std::pow(n, -r.kappa);
          },
          [&](const Bessel& b) { return b.C * bessel_closed_form(b.kappa, norm(v)); }},
      k);
}

double time_cov(const TimeKernel& k, double dt) {
  return std::visit(overloaded{[&](const ConstantTime& c) { return c.c; },
                               [&](const RieszTime& r) {
                                 if (dt == 0.0) throw SingularArgument("time kernel singular at 0");
                                 return std::pow(std::abs(dt), -r.beta);
                               },
                               [&](const ExponentialTime& e) {
                                 return std::exp(-e.rate * std::abs(dt));
                               }},
                    k);
}

double c_t(const TimeKernel& k, double t) {
  FRACSPDE_REQUIRE(t >= 0.0, InvalidArgument, "c_t: t must be >= 0");
  return std::visit(overloaded{[&](const ConstantTime& c) { return 2.0 * c.c * t; },
                               [&](const RieszTime& r) {
                                 return 2.0 * std::pow(t, 1.0 - r.beta) / (1.0 - r.beta);
                               },
                               [&](const ExponentialTime& e) {
                                 return -2.0 * std::expm1(-e.rate * t) / e.rate;
                               }},
                    k);
}

namespace {

// Second antiderivatives vanishing with their slope at 0; the cell integral of
// a translation-invariant kernel is the second difference of these.
double second_difference(const std::function<double(double)>& F, double D, double h) {
  return F(D + h) + F(D - h) - 2.0 * F(D);
}

}  // namespace

double time_cell_cov(const TimeKernel& k, double D, double h) {
  return std::visit(
      overloaded{[&](const ConstantTime& c) { return c.c * h * h; },
                 [&](const RieszTime& r) {
                   const double b = r.beta;
                   return second_difference(
                       [b](double u) {
                         return std::pow(std::abs(u), 2.0 - b) / ((1.0 - b) * (2.0 - b));
                       },
                       D, h);
                 },
                 [&](const ExponentialTime& e) {
                   const double rate = e.rate;
                   return second_difference(
                       [rate](double u) {
                         const double x = rate * std::abs(u);
                         return (x + std::expm1(-x)) / (rate * rate);
                       },
                       D, h);
                 }},
      k);
}

namespace {

// Gaussian cell factor: int_I int_J exp(-(x-y)^2 / (4w)).
double gauss_cell(double w, double D, double h) {
  const double sw = std::sqrt(w);
  auto phi2 = [&](double u) {
    u = std::abs(u);
    return std::sqrt(kPi * w) * u * std::erf(u / (2.0 * sw)) + 2.0 * w * std::expm1(-u * u / (4.0 * w));
  };
  return phi2(D + h) + phi2(D - h) - 2.0 * phi2(D);
}

// int_0^inf pref w^(-kappa/2-1) [e^-w] prod_i gauss_cell(w, D_i, h_i) dw.
double omega_cell_integral(double kappa, bool tempered, std::span<const double> D,
                           std::span<const double> h) {
  const int d = static_cast<int>(D.size());
  double h_min = h[0], L = 0.0;
  for (int i = 0; i < d; ++i) {
    h_min = std::min(h_min, h[i]);
    L = std::max({L, h[i] * h[i], D[i] * D[i]});
  }
  const double w0 = 1e-4 * h_min * h_min;
  double W = 1e12 * L;
  if (tempered) W = std::min(W, 60.0);
  const double e = -0.5 * kappa - 1.0;

  // Below w0 each factor is a polynomial in sqrt(w): same cell 2h sqrt(pi w) - 4w,
  // neighbouring cell 2w, otherwise exponentially small.
  double low = 0.0;
  {
    std::vector<double> poly{1.0};  // coefficients of w^(m/2)
    bool zero = false;
    for (int i = 0; i < d; ++i) {
      std::vector<double> f(3, 0.0);
      const double rel = std::abs(D[i]) / h[i];
      if (rel < 1e-9) {
        f[1] = 2.0 * h[i] * std::sqrt(kPi);
        f[2] = -4.0;
      } else if (std::abs(rel - 1.0) < 1e-9) {
        f[2] = 2.0;
      } else {
        zero = true;
        break;
      }
      std::vector<double> next(poly.size() + 2, 0.0);
      for (std::size_t a = 0; a < poly.size(); ++a) {
        for (std::size_t b = 0; b < 3; ++b) next[a + b] += poly[a] * f[b];
      }
      poly = next;
    }
    if (!zero) {
      for (std::size_t m = 0; m < poly.size(); ++m) {
        if (poly[m] == 0.0) continue;
        const double p = e + 1.0 + 0.5 * m;
        low += poly[m] * (tempered ? boost::math::tgamma_lower(p, w0) : std::pow(w0, p) / p);
      }
    }
  }

  auto integrand = [&](double s) {
    const double w = std::exp(s);
    double v = std::exp((e + 1.0) * s - (tempered ? w : 0.0));
    for (int i = 0; i < d && v != 0.0; ++i) v *= gauss_cell(w, D[i], h[i]);
    return v;
  };
  const double s0 = std::log(w0), s1 = std::log(W);
  const int pieces = std::max(1, static_cast<int>(std::ceil((s1 - s0) / 2.0)));
  quad::CompensatedSum mid;
  for (int p = 0; p < pieces; ++p) {
    const double a = s0 + (s1 - s0) * p / pieces;
    const double b = s0 + (s1 - s0) * (p + 1) / pieces;
    mid.add(quad::gauss_kronrod(integrand, a, b, 1e-11, 12).value);
  }

  double tail = 0.0;
  if (!tempered) {
    // For w > W: prod_i h_i^2 (1 - m2_i / (4w)), m2 = D^2 + h^2/6.
    double vol2 = 1.0, m2 = 0.0;
    for (int i = 0; i < d; ++i) {
      vol2 *= h[i] * h[i];
      m2 += D[i] * D[i] + h[i] * h[i] / 6.0;
    }
    const double a = 0.5 * kappa;
    tail = vol2 * (std::pow(W, -a) / a - 0.25 * m2 * std::pow(W, -a - 1.0) / (a + 1.0));
  }
  return low + mid.value() + tail;
}

}  // namespace

double space_cell_cov(const SpaceKernel& k, std::span<const double> D, std::span<const double> h) {
  FRACSPDE_REQUIRE(D.size() == h.size() && !D.empty(), InvalidArgument,
                   "space_cell_cov: D and h must have the same nonzero dimension");
  return std::visit(
      overloaded{
          [&](const Fractional& f) {
            FRACSPDE_REQUIRE(f.H.size() == D.size(), InvalidArgument,
                             "space_cell_cov: H has the wrong dimension");
            double p = 1.0;
            for (std::size_t i = 0; i < D.size(); ++i) {
              const double H2 = 2.0 * f.H[i];
              p *= second_difference([H2](double u) { return std::pow(std::abs(u), H2); }, D[i],
                                     h[i]);
            }
            return p;
          },
          [&](const Riesz& r) {
            if (D.size() == 1) {
              const double kap = r.kappa;
              return r.C * second_difference(
                               [kap](double u) {
                                 return std::pow(std::abs(u), 2.0 - kap) /
                                        ((1.0 - kap) * (2.0 - kap));
                               },
                               D[0], h[0]);
            }
            // |x|^-kappa = 4^(-kappa/2)/Gamma(kappa/2) int w^(-kappa/2-1) e^(-|x|^2/4w) dw
            const double pref = r.C * std::pow(4.0, -0.5 * r.kappa) * recip_gamma(0.5 * r.kappa);
            return pref * omega_cell_integral(r.kappa, false, D, h);
          },
          [&](const Bessel& b) { return b.C * omega_cell_integral(b.kappa, true, D, h); }},
      k);
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& M, FactorStats* stats) {
  FRACSPDE_REQUIRE(M.rows() == M.cols() && M.rows() > 0, InvalidArgument,
                   "psd_factor: matrix must be square and non-empty");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  FRACSPDE_REQUIRE(es.info() == Eigen::Success, NotPositiveSemidefinite,
                   "psd_factor: eigendecomposition failed");
  const double trace = M.trace();
  Eigen::VectorXd lam = es.eigenvalues();
  const double lowest = lam.minCoeff();
  if (lowest < -1e-6 * std::abs(trace)) {
    std::ostringstream os;
    os << "covariance has eigenvalue " << lowest << " below -1e-6 * trace (trace " << trace << ")";
    throw NotPositiveSemidefinite(os.str());
  }
  FactorStats st;
  st.trace = trace;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < 0.0) {
      st.clipped = std::max(st.clipped, -lam(i));
      lam(i) = 0.0;
    }
  }
  if (stats) *stats = st;
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(seed ^ splitmix(index + 0x632be59bd9b4e019ULL));
}

NoiseField::NoiseField(NoiseSpec spec, TimeGrid tg, SpaceGrid sg, int cell_cap)
    : spec_(std::move(spec)), tg_(tg), sg_(std::move(sg)) {
  require_valid(spec_);
  tg_.validate();
  sg_.validate();
  FRACSPDE_REQUIRE(sg_.dim() == spec_.d, InvalidArgument,
                   "noise: space grid dimension differs from spec.d");
  const long total = static_cast<long>(tg_.n) * sg_.cells();
  FRACSPDE_REQUIRE(total <= cell_cap, InvalidArgument,
                   "noise: " + std::to_string(total) + " cells exceed the cap of " +
                       std::to_string(cell_cap));

  const int nt = tg_.n;
  const double ht = tg_.h();
  std::vector<double> tv(nt);
  for (int m = 0; m < nt; ++m) tv[m] = time_cell_cov(spec_.time, m * ht, ht);
  tcov_.resize(nt, nt);
  for (int a = 0; a < nt; ++a)
    for (int b = 0; b < nt; ++b) tcov_(a, b) = tv[std::abs(a - b)];

  const int ns = sg_.cells();
  const int d = sg_.dim();
  std::vector<double> h(d);
  for (int i = 0; i < d; ++i) h[i] = sg_.axes[i].h();
  std::map<std::vector<int>, double> by_offset;
  scov_.resize(ns, ns);
  std::vector<double> D(d);
  for (int a = 0; a < ns; ++a) {
    const auto ia = sg_.unflatten(a);
    for (int b = a; b < ns; ++b) {
      const auto ib = sg_.unflatten(b);
      std::vector<int> off(d);
      for (int i = 0; i < d; ++i) off[i] = std::abs(ib[i] - ia[i]);
      auto it = by_offset.find(off);
      if (it == by_offset.end()) {
        for (int i = 0; i < d; ++i) D[i] = off[i] * h[i];
        it = by_offset.emplace(off, space_cell_cov(spec_.space, D, h)).first;
      }
      scov_(a, b) = scov_(b, a) = it->second;
    }
  }
  tfac_ = psd_factor(tcov_);
  sfac_ = psd_factor(scov_);
}

Eigen::MatrixXd NoiseField::dense_covariance() const {
  const Eigen::Index nt = tcov_.rows(), ns = scov_.rows();
  Eigen::MatrixXd M(nt * ns, nt * ns);
  for (Eigen::Index a = 0; a < nt; ++a)
    for (Eigen::Index b = 0; b < nt; ++b) M.block(a * ns, b * ns, ns, ns) = tcov_(a, b) * scov_;
  return M;
}

void NoiseField::sample_into(std::uint64_t seed, std::uint64_t draw, std::vector<double>& out) const {
  const Eigen::Index nt = tcov_.rows(), ns = scov_.rows();
  std::mt19937_64 rng(derive_seed(seed, draw));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd xi(nt, ns);
  for (Eigen::Index a = 0; a < nt; ++a)
    for (Eigen::Index b = 0; b < ns; ++b) xi(a, b) = normal(rng);
  const Eigen::MatrixXd w = tfac_ * xi * sfac_.transpose();
  out.resize(static_cast<std::size_t>(nt * ns));
  for (Eigen::Index a = 0; a < nt; ++a)
    for (Eigen::Index b = 0; b < ns; ++b) out[a * ns + b] = w(a, b);
}

GridField NoiseField::sample(std::uint64_t seed, std::uint64_t draw) const {
  GridField f(tg_, sg_, tg_.n, "noise_increments");
  f.seed = seed;
  sample_into(seed, draw, f.values);
  return f;
}

GridField sample_field(const NoiseSpec& spec, const TimeGrid& tg, const SpaceGrid& sg,
                       std::uint64_t seed) {
  return NoiseField(spec, tg, sg).sample(seed, 0);
}

}  // namespace fracspde
