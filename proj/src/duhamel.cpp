#include "fracspde/duhamel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "fracspde/chaos.hpp"
#include "fracspde/errors.hpp"
#include "fracspde/parallel.hpp"
#include "fracspde/quadrature.hpp"
#include "fracspde/specfun.hpp"

namespace fracspde {

void SimulationConfig::validate() const {
  FRACSPDE_REQUIRE(d == 1, UnsupportedInput, "simulation supports d = 1 only");
  FRACSPDE_REQUIRE(x_grid.dim() == 1, InvalidArgument, "x_grid must be one-dimensional");
  FRACSPDE_REQUIRE(noise.d == 1, InvalidArgument, "noise dimension must be 1");
  t_grid.validate();
  x_grid.validate();
  FRACSPDE_REQUIRE(x_grid.cells() <= NoiseField::kDefaultCellCap, InvalidArgument,
                   "x_grid has more cells than the noise cap " +
                       std::to_string(NoiseField::kDefaultCellCap));
  FRACSPDE_REQUIRE(picard_iters >= 1, InvalidArgument, "picard_iters must be >= 1");
  FRACSPDE_REQUIRE(chaos_order >= 0 && chaos_order <= 2, InvalidArgument,
                   "chaos_order must be 0, 1 or 2");
  FRACSPDE_REQUIRE(amplitude >= 0.0 && std::isfinite(amplitude), InvalidArgument,
                   "amplitude must be finite and >= 0");
  FRACSPDE_REQUIRE(threads >= 1, InvalidArgument, "threads must be >= 1");
  require_valid(noise);
  initial.validate(alpha);
}

namespace {

// int over [v0, v1] of Psi(X v^-1/2) dv / (2 alpha), Psi(z) = int_0^z phi(-nu, alpha/2; -w) dw.
double q_integral(const FractionalOrder& alpha, double v0, double v1, double X) {
  if (X == 0.0) return 0.0;
  const double a = alpha.alpha();
  const auto& prof = WrightProfile::cached(alpha.nu(), a);
  const double rg = recip_gamma(a);
  auto f = [&](double v) { return rg - prof(X / std::sqrt(v)); };
  return quad::gauss_kronrod(f, v0, v1, 1e-12, 12).value / (2.0 * a);
}

}  // namespace

DuhamelWeights::DuhamelWeights(const FractionalOrder& alpha, double h_t, double h_x, int n_t,
                               int max_dj)
    : n_t_(n_t), max_dj_(max_dj) {
  FRACSPDE_REQUIRE(h_t > 0.0 && h_x > 0.0 && n_t >= 1 && max_dj >= 0, InvalidArgument,
                   "DuhamelWeights: bad grid");
  const double a = alpha.alpha();
  w_.assign(static_cast<std::size_t>(n_t) * (max_dj + 1), 0.0);
  std::vector<double> q(max_dj + 1);
  for (int dm = 1; dm <= n_t; ++dm) {
    const double v0 = std::pow((dm - 1) * h_t, a), v1 = std::pow(dm * h_t, a);
    for (int i = 0; i <= max_dj; ++i) q[i] = q_integral(alpha, v0, v1, (i + 0.5) * h_x);
    double* row = &w_[static_cast<std::size_t>(dm - 1) * (max_dj + 1)];
    row[0] = 2.0 * q[0];
    for (int i = 1; i <= max_dj; ++i) row[i] = q[i] - q[i - 1];
  }
}

double DuhamelWeights::operator()(int dm, int dj) const {
  dj = std::abs(dj);
  if (dm < 1 || dm > n_t_ || dj > max_dj_) return 0.0;
  return w_[static_cast<std::size_t>(dm - 1) * (max_dj_ + 1) + dj];
}

double duhamel_padding(const FractionalOrder& alpha, double T) {
  const double a = alpha.alpha();
  const auto& prof = WrightProfile::cached(alpha.nu(), a);
  const double g = std::tgamma(a);
  double z = 0.0;
  while (g * std::abs(prof(z)) > 1e-14 && z < prof.z_max()) z += 0.25;
  return z * std::pow(T, alpha.nu());
}

namespace {

// J0 on rows 0..n_t at the cell centres.
std::vector<double> j0_grid(const SimulationConfig& cfg) {
  const int nt = cfg.t_grid.n, nx = cfg.x_grid.cells();
  const Axis& ax = cfg.x_grid.axes[0];
  std::vector<double> out(static_cast<std::size_t>(nt + 1) * nx);
  double c0 = 0.0, c1 = 0.0;
  const bool flat = cfg.initial.is_constant(&c0, &c1);
  for (int j = 0; j < nx; ++j) {
    const double x = ax.center(j);
    out[j] = cfg.initial.u0(std::span<const double>(&x, 1));
  }
  parallel_for(static_cast<std::size_t>(nt) * nx, thread_count(cfg.threads), [&](std::size_t i) {
    const int m = static_cast<int>(i / nx) + 1, j = static_cast<int>(i % nx);
    const double t = cfg.t_grid.node(m), x = ax.center(j);
    out[static_cast<std::size_t>(m) * nx + j] =
        flat ? c0 + c1 * t : j0(cfg.initial, t, std::span<const double>(&x, 1), cfg.alpha);
  });
  return out;
}

}  // namespace

GridField deterministic_solve(const SimulationConfig& cfg, const Forcing& f) {
  cfg.validate();
  FRACSPDE_REQUIRE(static_cast<bool>(f), InvalidArgument, "deterministic_solve: forcing is empty");
  const int nt = cfg.t_grid.n, nx = cfg.x_grid.cells();
  const Axis& ax = cfg.x_grid.axes[0];
  const double ht = cfg.t_grid.h(), hx = ax.h();
  const int pad = static_cast<int>(std::ceil(duhamel_padding(cfg.alpha, cfg.t_grid.T) / hx));
  const int ne = nx + 2 * pad;
  const DuhamelWeights W(cfg.alpha, ht, hx, nt, ne);
  const std::vector<double> J = j0_grid(cfg);
  std::vector<double> u = J, forcing(static_cast<std::size_t>(nt) * ne);
  for (int it = 0; it < cfg.picard_iters; ++it) {
    for (int k = 0; k < nt; ++k) {
      const double s = (k + 0.5) * ht;
      for (int e = 0; e < ne; ++e) {
        const int j = std::clamp(e - pad, 0, nx - 1);
        const double ub = 0.5 * (u[static_cast<std::size_t>(k) * nx + j] +
                                 u[static_cast<std::size_t>(k + 1) * nx + j]);
        forcing[static_cast<std::size_t>(k) * ne + e] = f(s, ax.lo + (e - pad + 0.5) * hx, ub);
      }
    }
    std::vector<double> next = J;
    parallel_for(static_cast<std::size_t>(nt) * nx, thread_count(cfg.threads), [&](std::size_t i) {
      const int m = static_cast<int>(i / nx) + 1, j = static_cast<int>(i % nx);
      quad::CompensatedSum acc;
      for (int k = 0; k < m; ++k) {
        const double* fk = &forcing[static_cast<std::size_t>(k) * ne];
        double row = 0.0;
        for (int e = 0; e < ne; ++e) row += W(m - k, j + pad - e) * fk[e];
        acc.add(row);
      }
      next[static_cast<std::size_t>(m) * nx + j] += acc.value();
    });
    u.swap(next);
  }
  GridField out(cfg.t_grid, cfg.x_grid, nt + 1, "deterministic");
  out.values = std::move(u);
  out.seed = cfg.seed;
  out.check_finite();
  return out;
}

SecondMoment second_moment_chaos(const SimulationConfig& cfg, double t, double x) {
  cfg.validate();
  FRACSPDE_REQUIRE(t > 0.0, InvalidArgument, "second_moment_chaos: t must be > 0");
  SecondMoment r;
  const double j = j0(cfg.initial, t, std::span<const double>(&x, 1), cfg.alpha);
  r.j0_sq = j * j;
  r.value = r.j0_sq;
  if (cfg.amplitude == 0.0 || cfg.chaos_order == 0) return r;
  const ConvergenceInputs in(cfg.alpha, cfg.noise, t);
  const double a2 = cfg.amplitude * cfg.amplitude;
  double scale = 1.0;
  for (int n = 1; n <= cfg.chaos_order; ++n) {
    scale *= a2;
    const ChaosTerm c = chaos_term_direct(n, in, cfg.initial, t, std::span<const double>(&x, 1));
    r.terms.push_back(scale * c.value);
    r.value += scale * c.value;
    r.error += scale * c.error;
  }
  const BoundSeries b =
      bound_terms(compute_ell(in), 1.0, in.c_t * a2, t, cfg.chaos_order + 1);
  r.truncation_ratio = b.ratios.at(cfg.chaos_order);
  return r;
}

namespace {

class PathwiseEngine {
 public:
  explicit PathwiseEngine(const SimulationConfig& cfg)
      : cfg_(cfg),
        nt_(cfg.t_grid.n),
        nx_(cfg.x_grid.cells()),
        noise_(cfg.noise, cfg.t_grid, cfg.x_grid),
        J_(j0_grid(cfg)) {
    const double ht = cfg.t_grid.h(), hx = cfg.x_grid.axes[0].h();
    const DuhamelWeights W(cfg.alpha, ht, hx, nt_, nx_ - 1);
    K_.resize(static_cast<std::size_t>(nt_) * nx_);
    for (int dm = 1; dm <= nt_; ++dm) {
      for (int dj = 0; dj < nx_; ++dj) {
        K_[static_cast<std::size_t>(dm - 1) * nx_ + dj] = W(dm, dj) / (ht * hx) * cfg.amplitude;
      }
    }
    T_.resize(nt_);
    for (int dm = 1; dm <= nt_; ++dm) {
      T_[dm - 1].resize(nx_, nx_);
      for (int j = 0; j < nx_; ++j) {
        for (int jp = 0; jp < nx_; ++jp) {
          T_[dm - 1](j, jp) = K_[static_cast<std::size_t>(dm - 1) * nx_ + std::abs(j - jp)];
        }
      }
    }
    if (cfg.scheme == PathScheme::WickChaos) {
      // c_{k,j} = Cov(I1_{k,j}, dW_{k,j}) with I1 = sum K J0 dW.
      c1_.assign(static_cast<std::size_t>(nt_) * nx_, 0.0);
      for (int k = 1; k < nt_; ++k) {
        for (int j = 0; j < nx_; ++j) {
          double s = 0.0;
          for (int kp = 0; kp < k; ++kp) {
            const double* kr = &K_[static_cast<std::size_t>(k - kp - 1) * nx_];
            const double tc = noise_.time_matrix()(kp, k);
            for (int jp = 0; jp < nx_; ++jp) {
              s += kr[std::abs(j - jp)] * J_[static_cast<std::size_t>(kp) * nx_ + jp] * tc *
                   noise_.space_matrix()(jp, j);
            }
          }
          c1_[static_cast<std::size_t>(k) * nx_ + j] = s;
        }
      }
    }
  }

  const char* tag() const {
    return cfg_.scheme == PathScheme::WickChaos ? "wick-chaos" : "HEURISTIC-forward-sum";
  }

  // Rows 0..n_t into u; dw and g are scratch.
  void run(std::uint64_t draw, std::vector<double>& u, std::vector<double>& dw,
           std::vector<double>& g) const {
    u = J_;
    if (cfg_.amplitude == 0.0) return;
    noise_.sample_into(cfg_.seed, draw, dw);
    if (cfg_.scheme == PathScheme::WickChaos) return run_wick(dw, u, g);
    g.assign(dw.size(), 0.0);
    for (int m = 1; m <= nt_; ++m) {
      const int k = m - 1;
      for (int j = 0; j < nx_; ++j) {
        g[static_cast<std::size_t>(k) * nx_ + j] =
            u[static_cast<std::size_t>(k) * nx_ + j] * dw[static_cast<std::size_t>(k) * nx_ + j];
      }
      double* um = &u[static_cast<std::size_t>(m) * nx_];
      for (int kk = 0; kk < m; ++kk) add_row(m - kk, &g[static_cast<std::size_t>(kk) * nx_], um);
      for (int j = 0; j < nx_; ++j) {
        if (!(std::abs(um[j]) <= 1e12)) {
          throw NumericalBlowup("pathwise_simulate: |u| exceeded 1e12 at step " +
                                    std::to_string(m) + "; use a finer grid",
                                m);
        }
      }
    }
  }

  int nt() const { return nt_; }
  int nx() const { return nx_; }

 private:
  // out += T(dm) in, T(dm)_{j,jp} = K(dm, j - jp).
  void add_row(int dm, const double* in, double* out) const {
    Eigen::Map<Eigen::VectorXd>(out, nx_).noalias() +=
        T_[dm - 1] * Eigen::Map<const Eigen::VectorXd>(in, nx_);
  }

  // out[m] += sum_{k<m} K(m-k) * in[k] for all rows m >= 1, one product per lag.
  void convolve(const std::vector<double>& in, std::vector<double>& out) const {
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> I(in.data(), nt_, nx_);
    Eigen::Map<RowMat> O(out.data(), nt_ + 1, nx_);
    for (int dm = 1; dm <= nt_; ++dm) {
      const int rows = nt_ + 1 - dm;
      O.middleRows(dm, rows).noalias() += I.topRows(rows) * T_[dm - 1];
    }
  }

  void run_wick(const std::vector<double>& dw, std::vector<double>& u,
                std::vector<double>& g) const {
    if (cfg_.chaos_order < 1) return;
    const std::size_t n = static_cast<std::size_t>(nt_) * nx_;
    std::vector<double> i1(u.size(), 0.0);
    g.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) g[i] = J_[i] * dw[i];
    convolve(g, i1);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += i1[i];
    if (cfg_.chaos_order < 2) return;
    for (std::size_t i = 0; i < n; ++i) g[i] = i1[i] * dw[i] - c1_[i];
    convolve(g, u);
  }

 private:
  const SimulationConfig& cfg_;
  int nt_, nx_;
  NoiseField noise_;
  std::vector<double> J_, K_, c1_;
  std::vector<Eigen::MatrixXd> T_;
};

constexpr std::uint64_t kBlock = 256;

}  // namespace

GridField pathwise_simulate(const SimulationConfig& cfg, std::uint64_t draw) {
  cfg.validate();
  const PathwiseEngine eng(cfg);
  GridField out(cfg.t_grid, cfg.x_grid, eng.nt() + 1, eng.tag());
  std::vector<double> dw, g;
  eng.run(draw, out.values, dw, g);
  out.seed = cfg.seed;
  return out;
}

MCResult mc_second_moment(const SimulationConfig& cfg, std::uint64_t samples) {
  cfg.validate();
  FRACSPDE_REQUIRE(samples >= 2, InvalidArgument, "mc_second_moment: need at least 2 samples");
  const PathwiseEngine eng(cfg);
  const std::size_t cells = static_cast<std::size_t>(eng.nt() + 1) * eng.nx();
  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  // Per block: sums of u, u^2, u^4.
  std::vector<std::vector<double>> acc(blocks);
  parallel_for(blocks, thread_count(cfg.threads), [&](std::size_t b) {
    std::vector<double> sums(3 * cells, 0.0), u, dw, g;
    const std::uint64_t lo = b * kBlock, hi = std::min<std::uint64_t>(samples, lo + kBlock);
    for (std::uint64_t s = lo; s < hi; ++s) {
      eng.run(s, u, dw, g);
      for (std::size_t i = 0; i < cells; ++i) {
        const double v2 = u[i] * u[i];
        sums[i] += u[i];
        sums[cells + i] += v2;
        sums[2 * cells + i] += v2 * v2;
      }
    }
    acc[b] = std::move(sums);
  });
  std::vector<double> tot(3 * cells, 0.0);
  for (const auto& a : acc) {
    for (std::size_t i = 0; i < tot.size(); ++i) tot[i] += a[i];
  }
  MCResult r;
  r.samples = samples;
  const int rows = eng.nt() + 1;
  r.mean = GridField(cfg.t_grid, cfg.x_grid, rows, eng.tag());
  r.second = r.mean;
  r.ci = r.mean;
  const double n = static_cast<double>(samples);
  for (std::size_t i = 0; i < cells; ++i) {
    const double m2 = tot[cells + i] / n;
    const double var = std::max(0.0, (tot[2 * cells + i] / n - m2 * m2) * n / (n - 1.0));
    r.mean.values[i] = tot[i] / n;
    r.second.values[i] = m2;
    r.ci.values[i] = 1.96 * std::sqrt(var / n);
  }
  r.mean.seed = r.second.seed = r.ci.seed = cfg.seed;
  r.mean.check_finite();
  r.second.check_finite();
  return r;
}

}  // namespace fracspde
