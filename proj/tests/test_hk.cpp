#include "heatreg/divergences.hpp"
#include "heatreg/errors.hpp"
#include "heatreg/hk.hpp"
#include "heatreg/transport.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace heatreg;
using doctest::Approx;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

MetricMeasureSpace two_points(double d) {
  Matrix dist(2, 2);
  dist << 0, d, d, 0;
  return new_space(dist, Vector::Constant(2, 0.5));
}

DiscreteMeasure dm(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return DiscreteMeasure(v);
}

}  // namespace

TEST_CASE("cost_ell") {
  CHECK(cost_ell(1.0, 0.0) == 0.0);
  CHECK(cost_ell(7.0, 0.0) == 0.0);
  CHECK(cost_ell(1.0, std::numbers::pi / 4) == Approx(std::log(2.0)).epsilon(1e-14));
  const double t = std::tan(0.3 / std::sqrt(2.0));
  CHECK(cost_ell(2.0, 0.3) == Approx(std::log(1 + t * t)).epsilon(1e-14));
  CHECK(cost_ell(1.0, std::numbers::pi / 2) == kInf);
  CHECK(cost_ell(1.0, 3.0) == kInf);
  CHECK_THROWS_AS(cost_ell(0.0, 1.0), InvalidArgument);
  SUBCASE("nonincreasing in alpha") {
    for (double d : {0.1, 0.5, 1.0, 2.0}) {
      double prev = kInf;
      for (double alpha : {0.1, 0.3, 1.0, 3.0, 10.0}) {
        const double c = cost_ell(alpha, d);
        CHECK(c <= prev);
        prev = c;
      }
    }
  }
}

TEST_CASE("let_objective of simple plans") {
  const auto s = two_points(1.0);
  CHECK(let_objective(s, dm({1, 0}), dm({0, 1}), 1.0, Matrix::Zero(2, 2)) == Approx(2.0));
  Matrix g = Matrix::Zero(2, 2);
  g(0, 1) = 1.0;
  CHECK(let_objective(s, dm({1, 0}), dm({0, 1}), 1.0, g) == Approx(cost_ell(1.0, 1.0)));
  g(1, 0) = 0.1;  // row 1 carries mass where mu0 has none
  CHECK(let_objective(s, dm({1, 0}), dm({0, 1}), 1.0, g) == kInf);
}

TEST_CASE("hk examples") {
  SUBCASE("equal measures") {
    const auto s = two_points(0.7);
    const auto r = hk(s, dm({0.4, 0.6}), dm({0.4, 0.6}), 1.0);
    CHECK(r.value == Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(r.gamma(0, 0) == Approx(0.4).epsilon(1e-6));
    CHECK(r.gamma(1, 1) == Approx(0.6).epsilon(1e-6));
    CHECK(r.converged);
  }
  SUBCASE("single point, masses four and one") {
    const auto s = new_space(Matrix::Zero(1, 1), Vector::Ones(1));
    const auto r = hk(s, dm({4}), dm({1}), 1.0);
    CHECK(r.value == Approx(1.0).epsilon(1e-8));
    CHECK(hk_bruteforce(s, dm({4}), dm({1}), 1.0) == Approx(1.0).epsilon(1e-4));
  }
  SUBCASE("beyond the cutoff no mass can move") {
    const auto s = two_points(2.0);
    const auto r = hk(s, dm({1, 0}), dm({0, 1}), 1.0);
    CHECK(r.value == Approx(2.0));
    CHECK(r.gamma.cwiseAbs().maxCoeff() == 0.0);
    CHECK(hk_bruteforce(s, dm({1, 0}), dm({0, 1}), 1.0) == Approx(2.0));
  }
  SUBCASE("two points at distance pi/4") {
    const auto s = two_points(std::numbers::pi / 4);
    const double bf = hk_bruteforce(s, dm({1, 0}), dm({0, 1}), 1.0);
    const auto r = hk(s, dm({1, 0}), dm({0, 1}), 1.0);
    CHECK(bf <= 2.0);
    CHECK(r.value == Approx(bf).epsilon(1e-6));
  }
  SUBCASE("zero measures") {
    const auto s = two_points(1.0);
    CHECK(hk(s, dm({0, 0}), dm({0, 0}), 1.0).value == 0.0);
    CHECK(hk(s, dm({0, 0}), dm({0, 2}), 1.0).value == Approx(2.0));
  }
  SUBCASE("invalid input") {
    const auto s = two_points(1.0);
    CHECK_THROWS_AS(hk(s, dm({1, 0}), dm({0, 1}), 0.0), InvalidArgument);
    CHECK_THROWS_AS(hk(s, dm({1, 0}), dm({0, 1, 0}), 1.0), DimensionMismatch);
    HkOptions o;
    o.epsilon_schedule.clear();
    CHECK_THROWS_AS(hk(s, dm({1, 0}), dm({0, 1}), 1.0, o), InvalidArgument);
    o = {};
    o.relaxation = 2.0;
    CHECK_THROWS_AS(hk(s, dm({1, 0}), dm({0, 1}), 1.0, o), InvalidArgument);
    CHECK_THROWS_AS(hk_bruteforce(cycle_space(4, 4.0), dm({1, 0, 0, 0}), dm({0, 1, 0, 0}), 1.0), InvalidArgument);
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  const auto s = cycle_space(6, 3.0);
  HkOptions o;
  o.max_iter = 1;
  const auto r = hk(s, dm({1, 0, 0, 0.5, 0, 0}), dm({0, 0.2, 1, 0, 0, 0}), 1.0, o);
  CHECK_FALSE(r.converged);
  CHECK(std::isfinite(r.value));
}

TEST_CASE("solver plan respects the structure of the problem") {
  std::mt19937_64 rng(44);
  for (int k = 0; k < 10; ++k) {
    const int n = 5;
    const auto space = new_space(oracle::random_metric(rng, n), Vector::Ones(n));
    const DiscreteMeasure a(oracle::random_weights(rng, n, 0.3)), b(oracle::random_weights(rng, n, 0.3));
    const double alpha = 0.5;
    const auto r = hk(space, a, b, alpha);
    CHECK(r.converged);
    CHECK(r.value == Approx(let_objective(space, a, b, alpha, r.gamma)).epsilon(1e-12).scale(1.0));
    CHECK(r.lower_bound <= r.value + 1e-12);
    CHECK(r.value - r.lower_bound < 1e-3);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (std::isinf(cost_ell(alpha, space.dist(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))))
          CHECK(r.gamma(i, j) == 0.0);
        if (a[static_cast<std::size_t>(i)] == 0 || b[static_cast<std::size_t>(j)] == 0) CHECK(r.gamma(i, j) == 0.0);
      }
  }
}

TEST_CASE("agreement with brute force on up to three points") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 24; ++k) {
    const int n = 1 + k % 3;
    const auto space = new_space(oracle::random_metric(rng, n), Vector::Ones(n));
    const DiscreteMeasure a(oracle::random_weights(rng, n, 0.2)), b(oracle::random_weights(rng, n, 0.2));
    for (double alpha : {0.1, 1.0, 10.0}) {
      CHECK(hk(space, a, b, alpha).value == Approx(hk_bruteforce(space, a, b, alpha)).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("comparison with Hellinger and Wasserstein") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 15; ++k) {
    const int n = 2 + k % 5;
    const auto space = new_space(oracle::random_metric(rng, n), Vector::Ones(n));
    Vector wa = oracle::random_weights(rng, n), wb = oracle::random_weights(rng, n);
    const DiscreteMeasure a(wa / wa.sum()), b(wb / wb.sum());
    const double he = hellinger(2, a, b);
    const double w2 = wasserstein(space, a, b, 2).distance;
    double prev = kInf;
    for (double alpha : {0.05, 0.2, 1.0, 4.0, 16.0, 64.0}) {
      const double d = hk(space, a, b, alpha).distance();
      CHECK(d <= he + 1e-6);
      CHECK(std::sqrt(alpha) * d <= w2 + 1e-6);
      CHECK(d <= prev + 1e-6);
      prev = d;
    }
  }
}

TEST_CASE("limits in alpha") {
  const auto space = line_space(std::vector<double>{0.0, 0.4, 1.1}, Vector::Ones(3));
  const DiscreteMeasure a = dm({0.6, 0.4, 0.0}), b = dm({0.0, 0.3, 0.7});
  const double he = hellinger(2, a, b);
  const double w2 = wasserstein(space, a, b, 2).distance;
  // Small alpha: HK approaches He_2 from below.
  double prev = 0.0;
  for (double alpha : {0.1, 0.01, 0.001}) {
    const double d = hk(space, a, b, alpha).distance();
    CHECK(d >= prev - 1e-6);
    prev = d;
  }
  CHECK(prev == Approx(he).epsilon(1e-6));
  // Large alpha: sqrt(alpha) HK increases toward W_2. The dual bound is a
  // certified lower bound of HK^2, the plan value an upper bound.
  prev = 0.0;
  for (double alpha : {1.0, 10.0, 100.0, 1000.0}) {
    const auto r = hk(space, a, b, alpha);
    const double d = std::sqrt(alpha) * r.distance();
    CHECK(d >= prev - 1e-6);
    CHECK(std::sqrt(alpha * std::max(0.0, r.lower_bound)) <= w2 + 1e-9);
    prev = d;
  }
  CHECK(prev == Approx(w2).epsilon(2e-2));
}

TEST_CASE("triangle inequality on random triples") {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 10; ++k) {
    const int n = 4;
    const auto space = new_space(oracle::random_metric(rng, n), Vector::Ones(n));
    const DiscreteMeasure a(oracle::random_weights(rng, n)), b(oracle::random_weights(rng, n)),
        c(oracle::random_weights(rng, n));
    const double alpha = 1.0;
    const double ab = hk(space, a, b, alpha).distance();
    const double bc = hk(space, b, c, alpha).distance();
    const double ac = hk(space, a, c, alpha).distance();
    CHECK(ac <= ab + bc + 1e-6);
    CHECK(hk(space, b, a, alpha).distance() == Approx(ab).epsilon(1e-6));
  }
}
