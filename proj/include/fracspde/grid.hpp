#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracspde/errors.hpp"

namespace fracspde {

/// Uniform cells on [lo, hi].
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int n = 1;

  double h() const { return (hi - lo) / n; }
  double center(int i) const { return lo + (i + 0.5) * h(); }
  double left(int i) const { return lo + i * h(); }
};

/// n uniform steps on (0, T]; node k is t_k = k T / n.
struct TimeGrid {
  double T = 1.0;
  int n = 1;

  double h() const { return T / n; }
  double node(int k) const { return k * T / n; }
  void validate() const;
};

/// Tensor grid of cells; dimension = axes.size().  Cell index is row-major
/// with the last axis fastest.
struct SpaceGrid {
  std::vector<Axis> axes;

  int dim() const { return static_cast<int>(axes.size()); }
  int cells() const;
  std::vector<int> unflatten(int cell) const;
  std::vector<double> center(int cell) const;
  double cell_volume() const;
  void validate() const;

  static SpaceGrid uniform(int d, double lo, double hi, int n);
};

/// Values on (time index, cell index), row-major in time.
struct GridField {
  TimeGrid time;
  SpaceGrid space;
  int n_t = 0;
  int n_s = 0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string scheme;

  GridField() = default;
  GridField(TimeGrid tg, SpaceGrid sg, int rows, std::string scheme_tag);

  double& at(int k, int j) { return values[static_cast<std::size_t>(k) * n_s + j]; }
  double at(int k, int j) const { return values[static_cast<std::size_t>(k) * n_s + j]; }
  /// Throws NumericalBlowup on the first non-finite value.
  void check_finite() const;
};

}  // namespace fracspde
