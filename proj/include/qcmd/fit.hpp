#pragma once

#include <cstddef>
#include <span>

namespace qcmd {

/// Ordinary least-squares line log(y) = slope * log(x) + intercept.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Fits only the pairs with y > floor (and x, y > 0). Throws
/// std::invalid_argument when fewer than two pairs remain or the sizes differ.
SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y, double floor = 0.0);

}  // namespace qcmd
