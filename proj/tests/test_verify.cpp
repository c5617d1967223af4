#include "heatreg/errors.hpp"
#include "heatreg/gaussian.hpp"
#include "heatreg/verify.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

using namespace heatreg;
using doctest::Approx;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Symmetric two-point chain with unit rates: P_t f = mean + e^{-2t} (f - mean).
Generator two_point_chain(double a = 1.0, double b = 1.0) {
  Matrix dist(2, 2);
  dist << 0, 1, 1, 0;
  Vector m(2);
  m << b / (a + b), a / (a + b);
  Matrix L(2, 2);
  L << -a, a, b, -b;
  return Generator(new_space(dist, m), L);
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

const CheckRecord& find(const std::vector<CheckRecord>& rs, const std::string& name, const std::string& t) {
  for (const auto& r : rs)
    if (r.name == name && r.params.at("t") == t) return r;
  FAIL("missing record " << name << " at t = " << t);
  return rs.front();
}

}  // namespace

TEST_CASE("fmt gives the shortest round-trip decimal") {
  CHECK(fmt(1.0) == "1");
  CHECK(fmt(0.1) == "0.1");
  CHECK(fmt(0.25) == "0.25");
  CHECK(fmt(kInf) == "inf");
  CHECK(fmt(-kInf) == "-inf");
  CHECK(fmt(std::nan("")) == "nan");
  for (double x : {1.0 / 3.0, std::exp(1.0), 1e-300, 123456.789}) CHECK(std::stod(fmt(x)) == x);
}

TEST_CASE("make_record") {
  const auto pass = make_record("x", {}, 1.0, 2.0, 0.0, Exactness::exact);
  CHECK(pass.slack == 1.0);
  CHECK(pass.verdict == Verdict::pass);
  const auto fail = make_record("x", {}, 2.0, 1.0, 1e-9, Exactness::exact);
  CHECK(fail.slack == -1.0);
  CHECK(fail.verdict == Verdict::fail);
  CHECK(make_record("x", {}, 1.0 + 1e-10, 1.0, 1e-9, Exactness::exact).verdict == Verdict::pass);
  CHECK(make_record("x", {}, 1.2, 1.0, 0.25, Exactness::oracle).verdict == Verdict::pass);
  CHECK(make_record("x", {}, 1.0, 2.0, 0.0, Exactness::exact, true).verdict == Verdict::inconclusive);
  const auto infs = make_record("x", {}, kInf, kInf, 0.0, Exactness::exact);
  CHECK(infs.slack == 0.0);
  CHECK(infs.verdict == Verdict::pass);
  CHECK(make_record("x", {}, kInf, 1.0, 0.0, Exactness::exact).verdict == Verdict::fail);
  CHECK(make_record("x", {}, std::nan(""), 1.0, 0.0, Exactness::exact).verdict == Verdict::fail);
  CHECK_THROWS_AS(make_record("x", {}, 1, 2, 1e-6, Exactness::exact), ConfigError);
  CHECK_THROWS_AS(make_record("x", {}, 1, 2, -1.0, Exactness::oracle), ConfigError);
  CHECK(to_string(Verdict::inconclusive) == "inconclusive");
  CHECK(to_string(Exactness::discretization) == "discretization");
}

TEST_CASE("integrands") {
  CHECK(integrand_names().size() == 5);
  for (const auto& name : integrand_names()) {
    const auto E = integrand(name);
    CHECK(E.E(0.7, 0.7) == Approx(0.0).scale(1.0));
    CHECK_NOTHROW(require_convex(E, -2.0, 3.0));
  }
  CHECK(integrand("kl").E(1.0, 0.0) == kInf);
  CHECK(integrand("kl").E(0.0, 2.0) == 2.0);
  CHECK_THROWS_AS(integrand("cubic"), ConfigError);
  const ConvexIntegrand concave{"concave", [](double r, double s) { return -(r - s) * (r - s); }, false};
  CHECK_THROWS_AS(require_convex(concave, -1.0, 1.0), NonConvexIntegrand);
  // Convex in each variable separately but not jointly.
  const ConvexIntegrand product{"product", [](double r, double s) { return r * s; }, false};
  CHECK_THROWS_AS(require_convex(product, -1.0, 1.0), NonConvexIntegrand);
}

TEST_CASE("closed forms on the two-point chain") {
  const Generator G = two_point_chain();
  const Semigroup P(G);
  const ChainContext c{G, P, 2.0, {}};
  const Vector f = vec({1, 0}), g = vec({0, 0});
  const std::vector<double> grid{0.0, std::log(2.0), 1.0, 3.0};

  SUBCASE("squared contraction") {
    const auto rs = check_convex_contraction(c, integrand("squared"), f, g, grid);
    const auto& r = find(rs, "convex_contraction", fmt(std::log(2.0)));
    CHECK(r.lhs == Approx(0.265625).epsilon(1e-13));
    CHECK(r.rhs == Approx(0.5).epsilon(1e-15));
    for (const auto& rec : rs) CHECK(rec.verdict == Verdict::pass);
    CHECK(find(rs, "convex_contraction_monotone", fmt(1.0)).verdict == Verdict::pass);
    CHECK(find(rs, "convex_contraction", "0").slack == Approx(0.0).scale(1.0));
  }
  SUBCASE("equal functions give zero on both sides") {
    for (const auto& r : check_convex_contraction(c, integrand("abs"), f, f, grid)) {
      CHECK(r.lhs == Approx(0.0).scale(1.0).epsilon(1e-15));
      CHECK(r.verdict == Verdict::pass);
    }
  }
  SUBCASE("Hellinger contraction") {
    const DiscreteMeasure a(Vector::Unit(2, 0)), b(Vector::Unit(2, 1));
    const auto rs = check_hellinger_contraction(c, a, b, 2.0, grid);
    for (double t : grid) {
      const double e = std::exp(-2 * t);
      const auto& r = find(rs, "hellinger_contraction", fmt(t));
      CHECK(r.rhs == Approx(std::sqrt(2.0)));
      CHECK(r.lhs == Approx(std::sqrt(2.0 * (1.0 - std::sqrt(1.0 - e * e)))).epsilon(1e-10));
      CHECK(r.verdict == Verdict::pass);
    }
  }
  SUBCASE("gradient commutation and the variance bound are sharp") {
    // Gamma(P_t f) = e^{-4t}/2 = e^{-2Kt} P_t Gamma(f), and
    // R_K(t) Gamma(P_t f) = (1 - e^{-4t})/4 = Var_x(P_t f).
    for (const auto& r : check_be_gradient(c, f, grid)) {
      const double t = std::stod(r.params.at("t"));
      CHECK(r.lhs == Approx(0.5 * std::exp(-4 * t)).epsilon(1e-12));
      CHECK(r.slack == Approx(0.0).scale(1.0).epsilon(1e-12));
      CHECK(r.verdict == Verdict::pass);
    }
    for (const auto& r : check_variance_bound(c, f, grid)) {
      const double t = std::stod(r.params.at("t"));
      if (r.name == "variance_bound") {
        CHECK(r.rhs == Approx(0.25 * (1 - std::exp(-4 * t))).epsilon(1e-12).scale(1.0));
        CHECK(r.lhs == Approx(r.rhs).epsilon(1e-10).scale(1.0));
      }
      CHECK(r.verdict == Verdict::pass);
    }
  }
  SUBCASE("imposing a larger curvature breaks gradient commutation") {
    const ChainContext wrong{G, P, 3.0, {}};
    const auto rs = check_be_gradient(wrong, f, grid);
    CHECK(find(rs, "be_gradient", "1").verdict == Verdict::fail);
    CHECK(find(rs, "be_gradient", "0").verdict == Verdict::pass);
  }
  SUBCASE("csiszar contraction for E1 against a direct sum") {
    const Vector fv = vec({1.5, 0.5}), gv = vec({0.5, 1.0});
    const auto F = power_entropy(1.0);
    const auto rs = check_csiszar_contraction(c, F, fv, gv, grid);
    for (const auto& r : rs) {
      const double t = std::stod(r.params.at("t"));
      const Vector pf = P.apply(t, fv), pg = P.apply(t, gv);
      double direct = 0.0;
      for (int i = 0; i < 2; ++i) direct += 0.5 * pg(i) * F.value(pf(i) / pg(i));
      CHECK(r.lhs == Approx(direct).epsilon(1e-12));
      CHECK(r.verdict == Verdict::pass);
    }
  }
  SUBCASE("input checks") {
    const DiscreteMeasure a(Vector::Unit(2, 0)), b(Vector::Unit(2, 1));
    CHECK_THROWS_AS(check_be_gradient(c, f, {0.5, 0.1}), InvalidArgument);
    CHECK_THROWS_AS(check_be_gradient(c, f, {-1.0}), InvalidArgument);
    CHECK_THROWS_AS(check_csiszar_contraction(c, kl_entropy(), vec({-1, 1}), f, grid), InvalidArgument);
    CHECK_THROWS_AS(check_regularization_he_wp(c, a, b, 0.5, grid, {}), InvalidArgument);
    CHECK_THROWS_AS(check_regularization_he_wp(c, a, b, 2.5, grid, {}), InvalidArgument);
  }
}

TEST_CASE("asymmetric chain: curvature from the smaller per-point constant") {
  const Generator G = two_point_chain(1.0, 3.0);
  const Semigroup P(G);
  const double K = curvature_lower_bound(G).K;
  CHECK(K == Approx(3.0));
  const ChainContext c{G, P, K, {}};
  for (const auto& r : check_be_gradient(c, vec({0.3, 2.0}), {0.0, 0.1, 0.5, 2.0}))
    CHECK(r.verdict == Verdict::pass);
}

TEST_CASE("Gaussian worked instance against quadrature") {
  const auto g0 = gaussian(0, 1), g1 = gaussian(1, 1);
  const auto rs = check_regularization_he_wp(g0, g1, 2.0, {0.5}, 1e-9, {});
  REQUIRE(rs.size() == 1);
  const double mt = std::exp(-0.5);
  const double he = std::sqrt(oracle::he2_squared_quadrature({0, 1}, {mt, 1}));
  CHECK(rs[0].lhs == Approx(he).epsilon(1e-9));
  CHECK(rs[0].lhs == Approx(0.299812).epsilon(1e-6));
  CHECK(rs[0].rhs == Approx(1.0 / (2.0 * std::sqrt(std::exp(1.0) - 1.0))).epsilon(1e-14));
  CHECK(rs[0].rhs == Approx(0.381437).epsilon(1e-6));
  CHECK(rs[0].verdict == Verdict::pass);
  CHECK(rs[0].params.at("K") == "1");
  CHECK_THROWS_AS(check_regularization_he_wp(g0, g1, 1.0, {0.5}, 1e-9, {}), InvalidArgument);

  for (const auto& r : check_kl_decay(gaussian(0, 0.25), {0.1, 1.0}, 1e-9, {})) {
    const double t = std::stod(r.params.at("t"));
    const auto flowed = ou_flow(gaussian(0, 0.25), t);
    CHECK(r.lhs == Approx(oracle::kl_quadrature({0, flowed.var}, {0, 1})).epsilon(1e-8));
    CHECK(r.verdict == Verdict::pass);
  }
}

TEST_CASE("he_hk on the two-point chain for small t") {
  const Generator G = two_point_chain();
  const Semigroup P(G);
  const ChainContext c{G, P, 2.0, {}};
  const DiscreteMeasure a(Vector::Unit(2, 0)), b(Vector::Unit(2, 1));
  const auto rs = check_he_hk(c, a, b, {0.0, 0.05, 0.1}, {}, HkOptions{});
  CHECK(rs.size() == 4);  // t = 0 gives alpha = 0 and is skipped
  for (const auto& r : rs) {
    CHECK(r.verdict == Verdict::pass);
    if (r.name == "he_hk_chain") CHECK(r.rhs == Approx(std::sqrt(2.0)));
  }
}

TEST_CASE("worst_slack and worst_violation") {
  std::vector<CheckRecord> rs{make_record("a", {}, 1, 2, 0, Exactness::exact),
                              make_record("a", {{"k", "1"}}, 3, 2, 0, Exactness::exact),
                              make_record("b", {}, 5, 2, 0, Exactness::exact)};
  CHECK(worst_slack(rs, "a") == -1.0);
  CHECK(worst_slack(rs, "zzz") == kInf);
  CHECK(worst_violation(rs, {"a"}) == 1.0);
  CHECK(worst_violation(rs, {"a", "b"}) == 3.0);
  CHECK(worst_violation(rs, {}) == 0.0);
}

TEST_CASE("random_chain") {
  CHECK_THROWS_AS(random_chain(1, 3), InvalidArgument);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = 2 + static_cast<int>(seed % 7);
    const Generator G = random_chain(n, seed);
    const Matrix& L = G.L();
    const Vector& m = G.reference();
    CHECK(m.sum() == Approx(1.0));
    CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 0; i < n; ++i) {
      if (i + 1 < n) CHECK(L(i, i + 1) > 0.0);
      for (int j = 0; j < n; ++j) {
        if (i != j) CHECK(L(i, j) >= 0.0);
        CHECK(m(i) * L(i, j) == Approx(m(j) * L(j, i)).epsilon(1e-12).scale(1.0));
      }
    }
    CHECK(random_chain(n, seed).L() == L);
  }
  CHECK(random_chain(5, 1).L() != random_chain(5, 2).L());
}

TEST_CASE("run_suite configuration handling") {
  using nlohmann::json;
  SUBCASE("empty configuration") {
    const auto rep = run_suite(json::object());
    CHECK(rep.records.empty());
    CHECK(rep.seed == 20240607);
    CHECK(rep.to_json()["counts"]["total"] == 0);
  }
  SUBCASE("schema errors") {
    CHECK_THROWS_AS(run_suite(json::array()), ConfigError);
    CHECK_THROWS_AS(run_suite(json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(run_suite(json{{"seed", -3}}), ConfigError);
    CHECK_THROWS_AS(run_suite(json{{"instances", {{{"kind", "torus"}}}}}), ConfigError);
    CHECK_THROWS_AS(run_suite(json{{"instances", {{{"kind", "two_point"}, {"colour", 1}}}}}), ConfigError);
    CHECK_THROWS_AS(run_suite(json{{"instances", {{{"kind", "random_chains"}, {"integrands", {"cubic"}}}}}}),
                    ConfigError);
    CHECK_THROWS_AS(run_suite(json{{"instances", {{{"kind", "random_chains"}, {"entropies", {"G2"}}}}}}),
                    ConfigError);
    CHECK_THROWS_AS(run_suite(json{{"hk", {{"relaxation", 2.5}}}}), ConfigError);
    CHECK_THROWS_AS(run_suite(json{{"instances", {{{"kind", "cycle"}, {"checks", {"nope"}}}}}}), ConfigError);
  }
  SUBCASE("a small chain suite") {
    const json config = {{"seed", 11},
                         {"instances",
                          {{{"kind", "random_chains"},
                            {"count", 3},
                            {"n", 4},
                            {"t_grid", {0, 0.5, 2}},
                            {"entropies", {"KL", "F2"}}}}}};
    const auto rep = run_suite(config);
    CHECK(rep.seed == 11);
    CHECK(rep.count(Verdict::fail) == 0);
    CHECK(rep.count(Verdict::inconclusive) == 0);
    CHECK(rep.records.size() == rep.count(Verdict::pass));
    for (std::size_t k = 1; k < rep.records.size(); ++k) {
      const auto& a = rep.records[k - 1];
      const auto& b = rep.records[k];
      CHECK(std::tie(a.name, a.params) < std::tie(b.name, b.params));
    }
    // Same seed, same report; another seed, different chains.
    CHECK(run_suite(config).to_json().dump() == rep.to_json().dump());
    CHECK(run_suite(config, 12).to_json().dump() != rep.to_json().dump());
    // Thread count does not change the report.
    const int threads = kernels::max_threads();
    kernels::set_threads(1);
    const auto serial = run_suite(config).to_json().dump();
    kernels::set_threads(threads);
    CHECK(serial == rep.to_json().dump());

    const auto j = rep.to_json();
    CHECK(j["counts"]["total"] == rep.records.size());
    CHECK(j["counts"]["pass"] == rep.records.size());
    CHECK(j["records"].size() == rep.records.size());
    CHECK(j["worst_slack"].contains("be_gradient"));
    const auto ws = rep.worst_slacks();
    CHECK(ws.at("be_gradient") == worst_slack(rep.records, "be_gradient"));

    const std::string csv = rep.to_csv();
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "name,params,lhs,rhs,slack,tolerance,exactness,verdict");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      CHECK(std::count(line.begin(), line.end(), ',') == 7);
    }
    CHECK(rows == rep.records.size());
  }
  SUBCASE("the only filter keeps the named records") {
    const json config = {{"only", {"be_gradient"}},
                         {"instances", {{{"kind", "two_point"}, {"t_grid", {0, 1}}, {"hk_t_grid", json::array()}}}}};
    const auto rep = run_suite(config);
    CHECK(rep.records.size() == 2);
    for (const auto& r : rep.records) CHECK(r.name == "be_gradient");
  }
  SUBCASE("imposed curvature above the true bound fails") {
    const json config = {{"instances",
                          {{{"kind", "two_point"}, {"K", 5}, {"t_grid", {0, 0.5, 1}}, {"hk_t_grid", json::array()}}}}};
    const auto rep = run_suite(config);
    CHECK(rep.count(Verdict::fail) > 0);
    CHECK(worst_slack(rep.records, "be_gradient") < -1e-3);
  }
  SUBCASE("Gaussian instance") {
    const json config = {{"instances", {{{"kind", "gaussian"}, {"gaussians", {{0, 1}, {1, 1, 2}}}}}}};
    CHECK_THROWS_AS(run_suite(config), MassMismatch);
    const json ok = {{"instances", {{{"kind", "gaussian"}, {"gaussians", {{0, 1}, {1, 1}}}, {"t_grid", {0.5}}}}}};
    const auto rep = run_suite(ok);
    CHECK(rep.count(Verdict::fail) == 0);
    CHECK(rep.records.size() > 0);
  }
}
