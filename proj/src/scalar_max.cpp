#include "heatreg/scalar_max.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>

namespace heatreg {

namespace {

constexpr double kSpan = 32.0;  // e^32 ~ 8e13
constexpr double kStep = 0.125;

// Monotone map from the unbounded coordinate s onto the open interval (lo, hi),
// stretched logarithmically toward every end of the interval.
struct Stretch {
  double lo;
  double hi;

  double operator()(double s) const {
    const bool lo_inf = std::isinf(lo);
    const bool hi_inf = std::isinf(hi);
    if (lo_inf && hi_inf) {
      return std::sinh(s);
    }
    if (lo_inf) {
      return hi - std::exp(-s);
    }
    if (hi_inf) {
      return lo + std::exp(s);
    }
    return lo + (hi - lo) / (1.0 + std::exp(-s));
  }
};

bool valid(double v) { return !std::isnan(v) && v != -std::numeric_limits<double>::infinity(); }

}  // namespace

std::vector<double> stretched_grid(double lo, double hi) {
  const Stretch map{lo, hi};
  std::vector<double> grid;
  for (double s = -kSpan; s <= kSpan + 1e-12; s += kStep) {
    const double x = map(s);
    if (x > lo && x < hi && (grid.empty() || x > grid.back())) {
      grid.push_back(x);
    }
  }
  return grid;
}

ScalarMax maximize_concave(const std::function<double(double)>& f, double lo, double hi) {
  const Stretch map{lo, hi};
  const double ninf = -std::numeric_limits<double>::infinity();

  std::vector<double> ss;
  std::vector<double> vals;
  for (double s = -kSpan; s <= kSpan + 1e-12; s += kStep) {
    const double x = map(s);
    if (!(x > lo && x < hi)) {
      continue;
    }
    const double v = f(x);
    ss.push_back(s);
    vals.push_back(valid(v) ? v : ninf);
  }

  ScalarMax best{0.0, ninf, false};
  std::size_t k_best = 0;
  for (std::size_t k = 0; k < ss.size(); ++k) {
    if (vals[k] > best.value) {
      best.value = vals[k];
      best.argmax = map(ss[k]);
      k_best = k;
    }
  }
  if (best.value == ninf) {
    return best;
  }
  if (best.value == std::numeric_limits<double>::infinity()) {
    best.attained = false;
    return best;
  }

  const std::size_t k_lo = k_best == 0 ? 0 : k_best - 1;
  const std::size_t k_hi = k_best + 1 < ss.size() ? k_best + 1 : k_best;
  auto neg = [&](double s) {
    const double v = f(map(s));
    return valid(v) ? -v : std::numeric_limits<double>::infinity();
  };
  if (k_hi > k_lo) {
    const int bits = std::numeric_limits<double>::digits / 2;
    boost::uintmax_t max_iter = 200;
    const auto [s_star, neg_val] = boost::math::tools::brent_find_minima(neg, ss[k_lo], ss[k_hi], bits, max_iter);
    if (-neg_val > best.value) {
      best.value = -neg_val;
      best.argmax = map(s_star);
    }
  }
  // Optimum pinned against the outermost grid node: supremum approached only.
  best.attained = k_best != 0 && k_best + 1 != ss.size();
  return best;
}

}  // namespace heatreg
