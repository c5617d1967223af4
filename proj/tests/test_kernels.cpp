#include "heatreg/heat.hpp"
#include "heatreg/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace heatreg;
using kernels::Exec;
using kernels::RowMatrix;

TEST_CASE("softmin matches a direct log-sum-exp") {
  RowMatrix c(2, 3);
  const double inf = std::numeric_limits<double>::infinity();
  c << 0.0, 1.0, 2.0, inf, inf, inf;
  Eigen::VectorXd logw = Eigen::VectorXd::Zero(3), g = Eigen::VectorXd::Zero(3), out;
  kernels::softmin_rows(c, logw, g, 0.5, out);
  const double direct = -0.5 * std::log(std::exp(0.0) + std::exp(-2.0) + std::exp(-4.0));
  CHECK(out(0) == doctest::Approx(direct).epsilon(1e-15));
  CHECK(out(1) == inf);
  // Stable far below the underflow threshold of exp.
  kernels::softmin_rows(c, logw, g, 1e-4, out);
  CHECK(out(0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("parallel and serial kernels agree bit for bit") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  const int threads = kernels::max_threads();
  kernels::set_threads(std::max(threads, 4));
  for (int n : {3, 70, 300}) {
    RowMatrix c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = (i + j) % 7 == 0 ? std::numeric_limits<double>::infinity() : u(rng);
    Eigen::VectorXd logw(n), g(n), a, b;
    for (int j = 0; j < n; ++j) {
      logw(j) = std::log(0.1 + u(rng));
      g(j) = u(rng) - 1.5;
    }
    for (double eps : {1.0, 1e-2, 1e-4}) {
      kernels::softmin_rows(c, logw, g, eps, a, Exec::parallel);
      kernels::softmin_rows_serial(c, logw, g, eps, b);
      CHECK(a == b);
    }
  }
  for (int n : {4, 12, 40}) {
    const Generator G = cycle_generator(n, 3.0);
    const auto p = curvature_lower_bound(G, Exec::parallel);
    const auto s = curvature_lower_bound_serial(G);
    CHECK(p.K == s.K);
    CHECK(p.per_point == s.per_point);
  }
  kernels::set_threads(threads);
}
