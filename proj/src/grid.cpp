#include "fracspde/grid.hpp"

#include <cmath>
#include <utility>

namespace fracspde {

void TimeGrid::validate() const {
  FRACSPDE_REQUIRE(T > 0.0 && std::isfinite(T), InvalidArgument, "time grid: T must be finite and > 0");
  FRACSPDE_REQUIRE(n >= 1, InvalidArgument, "time grid: n must be >= 1");
}

int SpaceGrid::cells() const {
  int c = 1;
  for (const auto& a : axes) c *= a.n;
  return c;
}

std::vector<int> SpaceGrid::unflatten(int cell) const {
  std::vector<int> idx(axes.size());
  for (int i = dim() - 1; i >= 0; --i) {
    idx[i] = cell % axes[i].n;
    cell /= axes[i].n;
  }
  return idx;
}

std::vector<double> SpaceGrid::center(int cell) const {
  const auto idx = unflatten(cell);
  std::vector<double> c(axes.size());
  for (int i = 0; i < dim(); ++i) c[i] = axes[i].center(idx[i]);
  return c;
}

double SpaceGrid::cell_volume() const {
  double v = 1.0;
  for (const auto& a : axes) v *= a.h();
  return v;
}

void SpaceGrid::validate() const {
  FRACSPDE_REQUIRE(!axes.empty(), InvalidArgument, "space grid: needs at least one axis");
  for (const auto& a : axes) {
    FRACSPDE_REQUIRE(a.n >= 1 && a.hi > a.lo, InvalidArgument,
                     "space grid: every axis needs n >= 1 and hi > lo");
  }
}

SpaceGrid SpaceGrid::uniform(int d, double lo, double hi, int n) {
  SpaceGrid g;
  g.axes.assign(d, Axis{lo, hi, n});
  return g;
}

GridField::GridField(TimeGrid tg, SpaceGrid sg, int rows, std::string scheme_tag)
    : time(tg), space(std::move(sg)), n_t(rows), n_s(space.cells()), scheme(std::move(scheme_tag)) {
  values.assign(static_cast<std::size_t>(n_t) * n_s, 0.0);
}

void GridField::check_finite() const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericalBlowup("non-finite value in field", static_cast<int>(i / n_s));
    }
  }
}

}  // namespace fracspde
