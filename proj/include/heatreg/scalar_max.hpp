#pragma once

#include <functional>
#include <vector>

namespace heatreg {

struct ScalarMax {
  double argmax = 0.0;
  double value = 0.0;
  /// False when the best point sits on the outermost grid node, i.e. the
  /// supremum is only approached toward an edge of the domain.
  bool attained = true;
};

/**
 * Maximizes a concave function over an open interval (lo, hi); either end
 * may be infinite. A log-stretched grid that accumulates at both ends
 * brackets the maximizer, then Brent's method refines inside the bracket.
 * Points where `f` is -inf or NaN are treated as outside the domain.
 */
ScalarMax maximize_concave(const std::function<double(double)>& f, double lo, double hi);

/// The bracketing grid used by maximize_concave, exposed for tests.
std::vector<double> stretched_grid(double lo, double hi);

}  // namespace heatreg
