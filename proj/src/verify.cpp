#include "heatreg/verify.hpp"

#include "heatreg/errors.hpp"
#include "heatreg/json_io.hpp"
#include "heatreg/transport.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace heatreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_grid(const std::vector<double>& t_grid) {
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!(t_grid[k] >= 0.0) || !std::isfinite(t_grid[k])) {
      throw InvalidArgument("time grid entries must be finite and >= 0");
    }
    if (k > 0 && !(t_grid[k] > t_grid[k - 1])) {
      throw InvalidArgument("time grid must be strictly increasing");
    }
  }
}

Params with(Params p, std::initializer_list<std::pair<const std::string, std::string>> extra) {
  for (const auto& [k, v] : extra) p[k] = v;
  return p;
}

// lhs(t_k) <= lhs(t_{k-1}) along the grid.
void append_monotone(std::vector<CheckRecord>& out, const std::string& name, const Params& base,
                     const std::vector<double>& t_grid, const std::vector<double>& values, double tolerance,
                     Exactness exactness) {
  for (std::size_t k = 1; k < values.size(); ++k) {
    out.push_back(make_record(name, with(base, {{"t", fmt(t_grid[k])}}), values[k], values[k - 1], tolerance,
                              exactness));
  }
}

double exp_factor(double K, double t) {
  // e^{-Kt} with the conventions K = -inf -> +inf (t > 0) and t = 0 -> 1.
  if (t == 0.0) return 1.0;
  return std::exp(-K * t);
}

double times(double factor, double x) { return x == 0.0 ? 0.0 : factor * x; }

DiscreteMeasure density_measure(const Vector& f, const Vector& m) {
  if ((f.array() < 0.0).any()) {
    throw InvalidArgument("densities must be nonnegative");
  }
  return DiscreteMeasure(f.cwiseProduct(m));
}

Gaussian1D standard_normal() { return Gaussian1D{0.0, 1.0, 1.0}; }

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

std::string to_string(Exactness e) {
  switch (e) {
    case Exactness::exact:
      return "exact";
    case Exactness::discretization:
      return "discretization";
    case Exactness::oracle:
      return "oracle";
  }
  return "?";
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CheckRecord make_record(std::string name, Params params, double lhs, double rhs, double tolerance,
                        Exactness exactness, bool inconclusive) {
  if (exactness == Exactness::exact && tolerance > kExactTolerance) {
    throw ConfigError("exact checks allow a tolerance of at most 1e-9 (" + name + ")");
  }
  if (!(tolerance >= 0.0)) {
    throw ConfigError("tolerances must be >= 0 (" + name + ")");
  }
  CheckRecord r;
  r.name = std::move(name);
  r.params = std::move(params);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = (lhs == rhs) ? 0.0 : rhs - lhs;
  r.tolerance = tolerance;
  r.exactness = exactness;
  if (inconclusive) {
    r.verdict = Verdict::inconclusive;
  } else {
    r.verdict = (r.slack >= -tolerance) ? Verdict::pass : Verdict::fail;
  }
  return r;
}

ConvexIntegrand integrand(const std::string& name) {
  if (name == "squared") {
    return {name, [](double r, double s) { return (r - s) * (r - s); }, false};
  }
  if (name == "abs") {
    return {name, [](double r, double s) { return std::abs(r - s); }, false};
  }
  if (name == "exp_diff") {
    return {name, [](double r, double s) { return std::expm1(r - s) - (r - s); }, false};
  }
  if (name == "hellinger2") {
    return {name,
            [](double r, double s) {
              const double d = std::sqrt(r) - std::sqrt(s);
              return d * d;
            },
            true};
  }
  if (name == "kl") {
    return {name,
            [](double r, double s) {
              if (s == 0.0) return r == 0.0 ? 0.0 : kInf;
              if (r == 0.0) return s;
              return r * std::log(r / s) - r + s;
            },
            true};
  }
  throw ConfigError("unknown integrand '" + name + "'");
}

std::vector<std::string> integrand_names() { return {"squared", "abs", "exp_diff", "hellinger2", "kl"}; }

void require_convex(const ConvexIntegrand& E, double lo, double hi, std::uint64_t seed) {
  if (E.nonnegative_domain) lo = std::max(lo, 0.0);
  if (!(hi > lo)) hi = lo + 1.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  for (int k = 0; k < 2000; ++k) {
    const double r0 = u(rng), s0 = u(rng), r1 = u(rng), s1 = u(rng);
    const double e0 = E.E(r0, s0);
    const double e1 = E.E(r1, s1);
    if (!std::isfinite(e0) || !std::isfinite(e1)) continue;
    const double mid = E.E(0.5 * (r0 + r1), 0.5 * (s0 + s1));
    const double avg = 0.5 * (e0 + e1);
    if (!(mid <= avg + 1e-10 * (1.0 + std::abs(avg)))) {
      std::ostringstream os;
      os.precision(17);
      os << "integrand '" << E.name << "' is not convex: E(mid) = " << mid << " > " << avg << " between (" << r0
         << ", " << s0 << ") and (" << r1 << ", " << s1 << ")";
      throw NonConvexIntegrand(os.str());
    }
  }
}

std::vector<CheckRecord> check_convex_contraction(const ChainContext& c, const ConvexIntegrand& E, const Vector& f,
                                                  const Vector& g, const std::vector<double>& t_grid) {
  require_grid(t_grid);
  if (E.nonnegative_domain && ((f.array() < 0.0).any() || (g.array() < 0.0).any())) {
    throw InvalidArgument("integrand '" + E.name + "' needs nonnegative inputs");
  }
  require_convex(E, std::min(f.minCoeff(), g.minCoeff()), std::max(f.maxCoeff(), g.maxCoeff()));
  const Vector& m = c.G.reference();
  auto energy = [&](const Vector& a, const Vector& b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += E.E(a(i), b(i)) * m(i);
    return s;
  };
  const double rhs = energy(f, g);
  const Params base = with(c.base, {{"integrand", E.name}});
  std::vector<CheckRecord> out;
  std::vector<double> values;
  for (double t : t_grid) {
    const double lhs = energy(c.P.apply(t, f), c.P.apply(t, g));
    values.push_back(lhs);
    out.push_back(make_record("convex_contraction", with(base, {{"t", fmt(t)}}), lhs, rhs, kExactTolerance,
                              Exactness::exact));
  }
  append_monotone(out, "convex_contraction_monotone", base, t_grid, values, 1e-10, Exactness::exact);
  return out;
}

std::vector<CheckRecord> check_csiszar_contraction(const ChainContext& c, const EntropyFunction& F, const Vector& f,
                                                   const Vector& g, const std::vector<double>& t_grid) {
  require_grid(t_grid);
  const Vector& m = c.G.reference();
  const double rhs = csiszar(F, density_measure(f, m), density_measure(g, m));
  const Params base = with(c.base, {{"entropy", F.name}});
  std::vector<CheckRecord> out;
  for (double t : t_grid) {
    const double lhs = csiszar(F, density_measure(c.P.apply(t, f), m), density_measure(c.P.apply(t, g), m));
    out.push_back(make_record("csiszar_contraction", with(base, {{"t", fmt(t)}}), lhs, rhs, kExactTolerance,
                              Exactness::exact));
  }
  return out;
}

std::vector<CheckRecord> check_hellinger_contraction(const ChainContext& c, const DiscreteMeasure& mu0,
                                                     const DiscreteMeasure& mu1, double p,
                                                     const std::vector<double>& t_grid) {
  require_grid(t_grid);
  const double rhs = hellinger(p, mu0, mu1);
  const Params base = with(c.base, {{"p", fmt(p)}});
  std::vector<CheckRecord> out;
  std::vector<double> values;
  for (double t : t_grid) {
    const double lhs = hellinger(p, c.P.dual(t, mu0), c.P.dual(t, mu1));
    values.push_back(lhs);
    out.push_back(make_record("hellinger_contraction", with(base, {{"t", fmt(t)}}), lhs, rhs, kExactTolerance,
                              Exactness::exact));
  }
  append_monotone(out, "hellinger_contraction_monotone", base, t_grid, values, kExactTolerance, Exactness::exact);
  return out;
}

std::vector<CheckRecord> check_be_gradient(const ChainContext& c, const Vector& f, const std::vector<double>& t_grid) {
  require_grid(t_grid);
  const Vector gf = gamma(c.G, f);
  const Params base = with(c.base, {{"K", fmt(c.K)}});
  std::vector<CheckRecord> out;
  for (double t : t_grid) {
    const Vector lhs = gamma(c.G, c.P.apply(t, f));
    const Vector pg = c.P.apply(t, gf);
    const double factor = exp_factor(2.0 * c.K, t);
    Eigen::Index worst = 0;
    double worst_slack = kInf;
    for (Eigen::Index x = 0; x < lhs.size(); ++x) {
      const double s = times(factor, pg(x)) - lhs(x);
      if (s < worst_slack) {
        worst_slack = s;
        worst = x;
      }
    }
    out.push_back(make_record("be_gradient", with(base, {{"t", fmt(t)}}), lhs(worst), times(factor, pg(worst)),
                              kExactTolerance, Exactness::exact));
  }
  return out;
}

std::vector<CheckRecord> check_variance_bound(const ChainContext& c, const Vector& f,
                                              const std::vector<double>& t_grid) {
  require_grid(t_grid);
  const Params base = with(c.base, {{"K", fmt(c.K)}});
  const Vector f2 = f.cwiseAbs2();
  const double sup2 = f.cwiseAbs().maxCoeff() * f.cwiseAbs().maxCoeff();
  std::vector<CheckRecord> out;
  for (double t : t_grid) {
    const double R = r_k(c.K, t);
    const Vector pf = c.P.apply(t, f);
    const Vector g = gamma(c.G, pf);
    const Vector var = c.P.apply(t, f2) - pf.cwiseAbs2();
    Eigen::Index worst = 0;
    double worst_slack = kInf;
    for (Eigen::Index x = 0; x < g.size(); ++x) {
      const double s = var(x) - times(R, g(x));
      if (s < worst_slack) {
        worst_slack = s;
        worst = x;
      }
    }
    const Params pt = with(base, {{"t", fmt(t)}});
    out.push_back(
        make_record("variance_bound", pt, times(R, g(worst)), var(worst), kExactTolerance, Exactness::exact));
    out.push_back(make_record("sup_norm", pt, times(R, g.maxCoeff()), sup2, kExactTolerance, Exactness::exact));
  }
  return out;
}

std::vector<CheckRecord> check_w2_contraction(const ChainContext& c, const DiscreteMeasure& mu0,
                                              const DiscreteMeasure& mu1, const std::vector<double>& t_grid,
                                              const MetricSide& side) {
  require_grid(t_grid);
  const auto& space = c.G.space();
  const double w0 = wasserstein(space, mu0, mu1, 2.0).distance;
  const Params base = with(c.base, {{"K", fmt(c.K)}});
  std::vector<CheckRecord> out;
  for (double t : t_grid) {
    const double lhs = wasserstein(space, c.P.dual(t, mu0), c.P.dual(t, mu1), 2.0).distance;
    out.push_back(make_record("w2_contraction", with(base, {{"t", fmt(t)}}), lhs, times(exp_factor(c.K, t), w0),
                              side.tolerance, side.exactness));
  }
  return out;
}

std::vector<CheckRecord> check_w2_contraction(const Gaussian1D& g0, const Gaussian1D& g1,
                                              const std::vector<double>& t_grid, double tolerance, Params base) {
  require_grid(t_grid);
  const double w0 = w2_gauss(g0, g1);
  base["K"] = "1";
  std::vector<CheckRecord> out;
  for (double t : t_grid) {
    const double lhs = w2_gauss(ou_flow(g0, t), ou_flow(g1, t));
    out.push_back(make_record("w2_contraction", with(base, {{"t", fmt(t)}}), lhs, std::exp(-t) * w0, tolerance,
                              Exactness::oracle));
  }
  return out;
}

namespace {

void require_p_range(double p) {
  if (!(p >= 1.0 && p <= 2.0)) {
    throw InvalidArgument("regularization estimate needs p in [1, 2]");
  }
}

double regularization_rhs(double wp, double p, double R) {
  if (wp == 0.0) return 0.0;
  if (R == 0.0) return kInf;
  return wp / (p * std::sqrt(R));
}

}  // namespace

std::vector<CheckRecord> check_regularization_he_wp(const ChainContext& c, const DiscreteMeasure& mu0,
                                                    const DiscreteMeasure& mu1, double p,
                                                    const std::vector<double>& t_grid, const MetricSide& side) {
  require_grid(t_grid);
  require_p_range(p);
  const double wp = wasserstein(c.G.space(), mu0, mu1, p).distance;
  const Params base = with(c.base, {{"K", fmt(c.K)}, {"p", fmt(p)}});
  std::vector<CheckRecord> out;
  for (double t : t_grid) {
    const double lhs = hellinger(p, c.P.dual(t, mu0), c.P.dual(t, mu1));
    out.push_back(make_record("regularization", with(base, {{"t", fmt(t)}}), lhs,
                              regularization_rhs(wp, p, r_k(c.K, t)), side.tolerance, side.exactness));
  }
  return out;
}

std::vector<CheckRecord> check_regularization_he_wp(const Gaussian1D& g0, const Gaussian1D& g1, double p,
                                                    const std::vector<double>& t_grid, double tolerance,
                                                    Params base) {
  require_grid(t_grid);
  require_p_range(p);
  if (p != 2.0) {
    throw InvalidArgument("the Gaussian setting has closed forms for p = 2 only");
  }
  const double wp = w2_gauss(g0, g1);
  base["K"] = "1";
  base["p"] = fmt(p);
  std::vector<CheckRecord> out;
  for (double t : t_grid) {
    const double lhs = he2_gauss(ou_flow(g0, t), ou_flow(g1, t));
    out.push_back(make_record("regularization", with(base, {{"t", fmt(t)}}), lhs,
                              regularization_rhs(wp, p, r_k(1.0, t)), tolerance, Exactness::oracle));
  }
  return out;
}

std::vector<CheckRecord> check_asymptotic(const ChainContext& c, const DiscreteMeasure& mu0, double p,
                                          const std::vector<double>& t_grid, const MetricSide& side) {
  require_grid(t_grid);
  require_p_range(p);
  const DiscreteMeasure m(c.G.reference());
  const double wp = wasserstein(c.G.space(), mu0, m, p).distance;
  const Params base = with(c.base, {{"K", fmt(c.K)}, {"p", fmt(p)}});
  std::vector<CheckRecord> out;
  std::vector<double> values;
  for (double t : t_grid) {
    const double lhs = hellinger(p, c.P.dual(t, mu0), m);
    values.push_back(lhs);
    out.push_back(make_record("asymptotic", with(base, {{"t", fmt(t)}}), lhs, regularization_rhs(wp, p, r_k(c.K, t)),
                              side.tolerance, side.exactness));
  }
  append_monotone(out, "asymptotic_monotone", base, t_grid, values, kExactTolerance, Exactness::exact);
  return out;
}

std::vector<CheckRecord> check_asymptotic(const Gaussian1D& g0, double p, const std::vector<double>& t_grid,
                                          double tolerance, Params base) {
  require_grid(t_grid);
  require_p_range(p);
  if (p != 2.0) {
    throw InvalidArgument("the Gaussian setting has closed forms for p = 2 only");
  }
  const Gaussian1D m = standard_normal();
  const double wp = w2_gauss(g0, m);
  base["K"] = "1";
  base["p"] = fmt(p);
  std::vector<CheckRecord> out;
  std::vector<double> values;
  for (double t : t_grid) {
    const double lhs = he2_gauss(ou_flow(g0, t), m);
    values.push_back(lhs);
    out.push_back(make_record("asymptotic", with(base, {{"t", fmt(t)}}), lhs, regularization_rhs(wp, p, r_k(1.0, t)),
                              tolerance, Exactness::oracle));
  }
  append_monotone(out, "asymptotic_monotone", base, t_grid, values, tolerance, Exactness::oracle);
  return out;
}

std::vector<CheckRecord> check_kl_decay(const Gaussian1D& g0, const std::vector<double>& t_grid, double tolerance,
                                        Params base) {
  require_grid(t_grid);
  const Gaussian1D m = standard_normal();
  const double k0 = kl_gauss(g0, m);
  base["K"] = "1";
  std::vector<CheckRecord> out;
  for (double t : t_grid) {
    out.push_back(make_record("kl_decay", with(base, {{"t", fmt(t)}}), kl_gauss(ou_flow(g0, t), m),
                              std::exp(-2.0 * t) * k0, tolerance, Exactness::oracle));
  }
  return out;
}

std::vector<CheckRecord> check_he_hk(const ChainContext& c, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                     const std::vector<double>& t_grid, const MetricSide& side,
                                     const HkOptions& opts) {
  require_grid(t_grid);
  const double he0 = hellinger(2.0, mu0, mu1);
  const Params base = with(c.base, {{"K", fmt(c.K)}});
  std::vector<CheckRecord> out;
  for (double t : t_grid) {
    const double alpha = 4.0 * r_k(c.K, t);
    if (!(alpha > 0.0) || !std::isfinite(alpha)) continue;
    const LetSolution sol = hk(c.G.space(), mu0, mu1, alpha, opts);
    const double d = sol.distance();
    const double gap = std::max(0.0, d - std::sqrt(std::max(0.0, sol.lower_bound)));
    const double tol = side.tolerance + gap;
    const Params pt = with(base, {{"t", fmt(t)}, {"alpha", fmt(alpha)}});
    const double lhs = hellinger(2.0, c.P.dual(t, mu0), c.P.dual(t, mu1));
    out.push_back(make_record("he_hk", pt, lhs, d, tol, side.exactness, !sol.converged));
    out.push_back(make_record("he_hk_chain", pt, d, he0, tol, side.exactness, !sol.converged));
  }
  return out;
}

double worst_slack(const std::vector<CheckRecord>& records, const std::string& name) {
  double w = kInf;
  for (const auto& r : records) {
    if (r.name == name) w = std::min(w, r.slack);
  }
  return w;
}

double worst_violation(const std::vector<CheckRecord>& records, const std::vector<std::string>& names) {
  double v = 0.0;
  for (const auto& r : records) {
    if (std::find(names.begin(), names.end(), r.name) != names.end()) v = std::max(v, -r.slack);
  }
  return v;
}

std::size_t SuiteReport::count(Verdict v) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [v](const CheckRecord& r) { return r.verdict == v; }));
}

std::map<std::string, double> SuiteReport::worst_slacks() const {
  std::map<std::string, double> out;
  for (const auto& r : records) {
    auto [it, fresh] = out.emplace(r.name, r.slack);
    if (!fresh) it->second = std::min(it->second, r.slack);
  }
  return out;
}

nlohmann::json record_json(const CheckRecord& r) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  return {{"name", r.name},
          {"params", params},
          {"lhs", io::number(r.lhs)},
          {"rhs", io::number(r.rhs)},
          {"slack", io::number(r.slack)},
          {"tolerance", io::number(r.tolerance)},
          {"exactness", to_string(r.exactness)},
          {"verdict", to_string(r.verdict)}};
}

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json worst = nlohmann::json::object();
  for (const auto& [k, v] : worst_slacks()) worst[k] = io::number(v);
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) recs.push_back(record_json(r));
  return {{"seed", seed},
          {"counts",
           {{"total", records.size()},
            {"pass", count(Verdict::pass)},
            {"fail", count(Verdict::fail)},
            {"inconclusive", count(Verdict::inconclusive)}}},
          {"worst_slack", worst},
          {"records", recs}};
}

std::string SuiteReport::to_csv() const {
  std::string out = "name,params,lhs,rhs,slack,tolerance,exactness,verdict\n";
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (const auto& r : records) {
    std::string params;
    for (const auto& [k, v] : r.params) {
      if (!params.empty()) params += ';';
      params += k + '=' + v;
    }
    out += r.name + ',' + params + ',' + num(r.lhs) + ',' + num(r.rhs) + ',' + num(r.slack) + ',' +
           num(r.tolerance) + ',' + to_string(r.exactness) + ',' + to_string(r.verdict) + '\n';
  }
  return out;
}

Generator random_chain(int n, std::uint64_t seed) {
  if (n < 2) {
    throw InvalidArgument("random chains need n >= 2");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  double pos = 0.0;
  for (auto& xi : x) {
    pos += 0.1 + u(rng);
    xi = pos;
  }
  Vector m(n);
  for (int i = 0; i < n; ++i) m(i) = 0.5 + u(rng);
  m /= m.sum();
  Matrix L = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool edge = (j == i + 1) || u(rng) < 0.3;
      const double c = 0.2 + 1.8 * u(rng);
      if (!edge) continue;
      L(i, j) = c / m(i);
      L(j, i) = c / m(j);
    }
  }
  for (int i = 0; i < n; ++i) L(i, i) = -(L.row(i).sum() - L(i, i));
  return Generator(line_space(x, std::move(m)), std::move(L));
}

}  // namespace heatreg
