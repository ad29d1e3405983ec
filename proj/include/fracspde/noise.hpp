#pragma once

// Gaussian noise with covariance lambda(t - s) Lambda(x - y).

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fracspde/grid.hpp"

namespace fracspde {

/// prod_i 2 H_i (2 H_i - 1) |x_i|^(2 H_i - 2)
struct Fractional {
  std::vector<double> H;
};
/// C |x|^-kappa
struct Riesz {
  double kappa = 0.5;
  double C = 1.0;
};
/// C int_0^inf w^(-kappa/2-1) e^-w e^(-|x|^2/(4w)) dw
struct Bessel {
  double kappa = 0.5;
  double C = 1.0;
};
using SpaceKernel = std::variant<Fractional, Riesz, Bessel>;

/// lambda = c
struct ConstantTime {
  double c = 1.0;
};
/// lambda(t) = |t|^-beta
struct RieszTime {
  double beta = 0.5;
};
/// lambda(t) = exp(-rate |t|)
struct ExponentialTime {
  double rate = 1.0;
};
using TimeKernel = std::variant<ConstantTime, RieszTime, ExponentialTime>;

struct NoiseSpec {
  TimeKernel time = ConstantTime{};
  SpaceKernel space = Fractional{{0.75}};
  int d = 1;
};

std::string kernel_name(const SpaceKernel& k);
std::string kernel_name(const TimeKernel& k);

/// Empty iff every parameter is in range; each entry names the parameter and its bound.
std::vector<std::string> validate_spec(const NoiseSpec& spec);
/// Throws InvalidArgument listing the violations.
void require_valid(const NoiseSpec& spec);

/// 2 H (2H - 1) |v|^(2H - 2)
double fractional_cov_1d(double H, double v);
double space_cov(const SpaceKernel& k, std::span<const double> v);
/// 2 (r/2)^(-kappa/2) K_{kappa/2}(r), the Bessel kernel with C = 1.
double bessel_closed_form(double kappa, double r);

double time_cov(const TimeKernel& k, double dt);
/// C_t = 2 int_0^t lambda(s) ds.
double c_t(const TimeKernel& k, double t);

/// int_I int_J lambda(s - r) ds dr for time cells of width h whose left ends differ by D.
double time_cell_cov(const TimeKernel& k, double D, double h);
/// int_A int_B Lambda(x - y) dx dy for equal-size cells whose lower corners differ by D.
double space_cell_cov(const SpaceKernel& k, std::span<const double> D, std::span<const double> h);

struct FactorStats {
  double trace = 0.0;
  double clipped = 0.0;  // magnitude of the most negative eigenvalue removed
};

/// Symmetric square root A (A A^T = M) with eigenvalue clipping at -1e-10 trace;
/// throws NotPositiveSemidefinite when an eigenvalue is below -1e-6 trace.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& M, FactorStats* stats = nullptr);

/// Cell-averaged covariance of the increments W(cell_t x cell_x); the full
/// matrix is the Kronecker product time_matrix (x) space_matrix.
class NoiseField {
 public:
  static constexpr int kDefaultCellCap = 4096;

  NoiseField(NoiseSpec spec, TimeGrid tg, SpaceGrid sg, int cell_cap = kDefaultCellCap);

  const Eigen::MatrixXd& time_matrix() const { return tcov_; }
  const Eigen::MatrixXd& space_matrix() const { return scov_; }
  /// Covariance of cells (k, j) and (k2, j2).
  double covariance(int k, int j, int k2, int j2) const { return tcov_(k, k2) * scov_(j, j2); }
  /// Dense n_t n_s square matrix (row index k * n_s + j).
  Eigen::MatrixXd dense_covariance() const;

  /// Draw number `draw` of the field for `seed`; reproducible.
  GridField sample(std::uint64_t seed, std::uint64_t draw = 0) const;
  /// Same as sample() but writes into an existing buffer (n_t x n_s, row-major).
  void sample_into(std::uint64_t seed, std::uint64_t draw, std::vector<double>& out) const;

  const NoiseSpec& spec() const { return spec_; }
  const TimeGrid& time_grid() const { return tg_; }
  const SpaceGrid& space_grid() const { return sg_; }

 private:
  NoiseSpec spec_;
  TimeGrid tg_;
  SpaceGrid sg_;
  Eigen::MatrixXd tcov_, scov_, tfac_, sfac_;
};

GridField sample_field(const NoiseSpec& spec, const TimeGrid& tg, const SpaceGrid& sg,
                       std::uint64_t seed);

/// Seed of an independent stream for (seed, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace fracspde
