#include "fracspde/quadrature.hpp"

#include <algorithm>

namespace fracspde::quad {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  FRACSPDE_REQUIRE(x.size() == y.size() && x.size() >= 2, InvalidArgument,
                   "fit_line needs at least two (x, y) pairs of equal length");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  FRACSPDE_REQUIRE(sxx > 0.0, InvalidArgument, "fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    fit.max_residual =
        std::max(fit.max_residual, std::abs(y[i] - (fit.intercept + fit.slope * x[i])));
  }
  return fit;
}

}  // namespace fracspde::quad
