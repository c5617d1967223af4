#include "heatreg/errors.hpp"
#include "heatreg/transport.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace heatreg;
using doctest::Approx;

namespace {

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

TEST_CASE("wasserstein on two points") {
  const auto s = two_points(1.0);
  const auto same = wasserstein(s, dm({0.3, 0.7}), dm({0.3, 0.7}), 2);
  CHECK(same.distance == 0.0);
  CHECK(same.solution.plan.plan(0, 1) == 0.0);
  CHECK(same.solution.plan.plan(0, 0) == Approx(0.3));
  CHECK(wasserstein(s, dm({1, 0}), dm({0, 1}), 2).distance == Approx(1.0));
  CHECK(wasserstein(s, dm({0.7, 0.3}), dm({0.4, 0.6}), 2).distance == Approx(std::sqrt(0.3)).epsilon(1e-14));
}

TEST_CASE("two-point plans match a scan of the coupling family") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int k = 0; k < 20; ++k) {
    const double a0 = u(rng), b0 = u(rng);
    Vector a(2), b(2);
    a << a0, 1 - a0;
    b << b0, 1 - b0;
    Matrix c(2, 2);
    c << 0.0, 1.7, 1.7, 0.0;
    const auto sol = solve_transport(c, a, b);
    CHECK(sol.plan.cost == Approx(oracle::two_point_transport_cost(a, b, c)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("wasserstein_1d") {
  const std::vector<double> x2{0.0, 1.0};
  CHECK(wasserstein_1d(x2, dm({0.2, 0.8}), dm({0.2, 0.8}), 1) == 0.0);
  CHECK(wasserstein_1d(x2, dm({1, 0}), dm({0, 1}), 1) == Approx(1.0));
  const std::vector<double> x3{0.0, 1.0, 2.0};
  CHECK(wasserstein_1d(x3, dm({0.5, 0.5, 0}), dm({0, 0.5, 0.5}), 2) == Approx(1.0));
  const std::vector<double> bad{0.0, 2.0, 1.0};
  CHECK_THROWS_AS(wasserstein_1d(bad, dm({1, 0, 0}), dm({0, 0, 1}), 1), InvalidArgument);
  CHECK_THROWS_AS(wasserstein_1d(x2, dm({1, 0}), dm({0, 2}), 1), MassMismatch);
}

TEST_CASE("mass checks") {
  const auto s = two_points(1.0);
  CHECK_THROWS_AS(wasserstein(s, dm({1, 0}), dm({0, 2}), 1), MassMismatch);
  CHECK_THROWS_AS(wasserstein(s, dm({0, 0}), dm({0, 0}), 1), PreconditionError);
  CHECK_THROWS_AS(wasserstein(s, dm({1, 0}), dm({0, 1}), 0.5), InvalidArgument);
  CHECK_NOTHROW(require_equal_mass(1.0, 1.0 + 1e-13));
  CHECK_THROWS_AS(require_equal_mass(1.0, 1.0 + 1e-10), MassMismatch);
}

TEST_CASE("masses other than one scale the cost") {
  const auto s = two_points(2.0);
  CHECK(wasserstein(s, dm({3, 0}), dm({0, 3}), 2).distance == Approx(std::sqrt(3.0 * 4.0)));
}

TEST_CASE("uniform measures match permutation enumeration") {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 30; ++k) {
    const int n = 3 + k % 5;
    // Points 0..n-1 carry mu0, points n..2n-1 carry mu1.
    const Matrix d = oracle::random_metric(rng, 2 * n);
    Vector a = Vector::Zero(2 * n), b = Vector::Zero(2 * n);
    a.head(n).setConstant(1.0 / n);
    b.tail(n).setConstant(1.0 / n);
    const auto space = new_space(d, Vector::Ones(2 * n));
    for (double p : {1.0, 2.0}) {
      const Matrix cost = d.topRightCorner(n, n).array().pow(p);
      const double ref = oracle::uniform_transport_cost(cost);
      const auto w = wasserstein(space, DiscreteMeasure(a), DiscreteMeasure(b), p);
      CHECK(std::pow(w.distance, p) == Approx(ref).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("plans are feasible and dual certificates are tight") {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 40; ++k) {
    const int n = 2 + k % 9;
    const Matrix d = oracle::random_metric(rng, n);
    Vector a = oracle::random_weights(rng, n, 0.2), b = oracle::random_weights(rng, n, 0.2);
    if (a.sum() == 0 || b.sum() == 0) continue;
    a /= a.sum();
    b /= b.sum();
    const Matrix cost = d.array().square();
    const auto sol = solve_transport(cost, a, b);
    const Matrix& P = sol.plan.plan;
    CHECK((P.array() >= 0).all());
    CHECK((P.rowwise().sum() - a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((P.colwise().sum().transpose() - b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sol.plan.cost == Approx((P.array() * cost.array()).sum()).epsilon(1e-12).scale(1.0));
    CHECK(std::abs(sol.duality_gap) <= 1e-10);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        CHECK(sol.u(i) + sol.v(j) <= cost(i, j) + 1e-10);
        if (P(i, j) > 1e-14) CHECK(sol.u(i) + sol.v(j) == Approx(cost(i, j)).epsilon(1e-9).scale(1.0));
      }
  }
}

TEST_CASE("LP agrees with the quantile coupling on the line") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 11;
    const auto x = oracle::random_positions(rng, n);
    Vector a = oracle::random_weights(rng, n, 0.2), b = oracle::random_weights(rng, n, 0.2);
    if (a.sum() == 0 || b.sum() == 0) continue;
    b *= a.sum() / b.sum();
    const auto space = line_space(x, Vector::Ones(n));
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      const DiscreteMeasure mu0(a), mu1(b);
      CHECK(wasserstein(space, mu0, mu1, p).distance ==
            Approx(wasserstein_1d(x, mu0, mu1, p)).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("metric axioms and monotonicity in p") {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 40; ++k) {
    const int n = 2 + k % 7;
    const auto space = new_space(oracle::random_metric(rng, n), Vector::Ones(n));
    auto prob = [&] {
      Vector w = oracle::random_weights(rng, n);
      return DiscreteMeasure(w / w.sum());
    };
    const auto a = prob(), b = prob(), c = prob();
    for (double p : {1.0, 2.0}) {
      const double ab = wasserstein(space, a, b, p).distance;
      const double ba = wasserstein(space, b, a, p).distance;
      const double bc = wasserstein(space, b, c, p).distance;
      const double ac = wasserstein(space, a, c, p).distance;
      CHECK(ab == Approx(ba).epsilon(1e-12).scale(1.0));
      CHECK(ac <= ab + bc + 1e-12);
      CHECK(wasserstein(space, a, a, p).distance == Approx(0.0).scale(1.0));
    }
    CHECK(wasserstein(space, a, b, 1).distance <= wasserstein(space, a, b, 2).distance + 1e-12);
    CHECK(wasserstein(space, a, b, 2).distance <= wasserstein(space, a, b, 3).distance + 1e-12);
  }
}
