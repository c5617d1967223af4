#pragma once

#include "heatreg/divergences.hpp"
#include "heatreg/gaussian.hpp"
#include "heatreg/heat.hpp"
#include "heatreg/hk.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace heatreg {

enum class Verdict { pass, fail, inconclusive };
enum class Exactness { exact, discretization, oracle };

std::string to_string(Verdict v);
std::string to_string(Exactness e);

/// Largest tolerance an exact check may carry.
inline constexpr double kExactTolerance = 1e-9;

/// One instance of an inequality lhs <= rhs.
struct CheckRecord {
  std::string name;
  std::map<std::string, std::string> params;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs; 0 when both sides are the same infinity
  double tolerance = 0.0;
  Exactness exactness = Exactness::exact;
  Verdict verdict = Verdict::pass;
};

using Params = std::map<std::string, std::string>;

/// Shortest decimal that round-trips to x.
std::string fmt(double x);

/// Fills slack and verdict. Throws ConfigError when an exact check is given
/// a tolerance above kExactTolerance.
CheckRecord make_record(std::string name, Params params, double lhs, double rhs, double tolerance,
                        Exactness exactness, bool inconclusive = false);

/// A jointly convex integrand E(r, s) with its sampling domain.
struct ConvexIntegrand {
  std::string name;
  std::function<double(double, double)> E;
  bool nonnegative_domain = false;  // defined on [0, inf)^2 only
};

/// squared, abs, exp_diff, hellinger2, kl.
ConvexIntegrand integrand(const std::string& name);
std::vector<std::string> integrand_names();

/**
 * Random midpoint test E((x+y)/2) <= (E(x)+E(y))/2 on the box spanned by
 * the given values. Throws NonConvexIntegrand with the offending pair.
 */
void require_convex(const ConvexIntegrand& E, double lo, double hi, std::uint64_t seed = 7);

/// Evolution settings for checks on a finite chain.
struct ChainContext {
  const Generator& G;
  const Semigroup& P;
  double K;  // curvature used by the check (computed or imposed)
  Params base;
};

std::vector<CheckRecord> check_convex_contraction(const ChainContext& c, const ConvexIntegrand& E, const Vector& f,
                                                  const Vector& g, const std::vector<double>& t_grid);

std::vector<CheckRecord> check_csiszar_contraction(const ChainContext& c, const EntropyFunction& F, const Vector& f,
                                                   const Vector& g, const std::vector<double>& t_grid);

std::vector<CheckRecord> check_hellinger_contraction(const ChainContext& c, const DiscreteMeasure& mu0,
                                                     const DiscreteMeasure& mu1, double p,
                                                     const std::vector<double>& t_grid);

/// Gamma(P_t f) <= e^{-2Kt} P_t Gamma(f); the worst point is reported.
std::vector<CheckRecord> check_be_gradient(const ChainContext& c, const Vector& f, const std::vector<double>& t_grid);

/// R_K(t) Gamma(P_t f) <= P_t(f^2) - (P_t f)^2 pointwise, and
/// R_K(t) max Gamma(P_t f) <= ||f||_inf^2.
std::vector<CheckRecord> check_variance_bound(const ChainContext& c, const Vector& f,
                                              const std::vector<double>& t_grid);

/// Tolerance and tag for metric-side checks on a discrete space.
struct MetricSide {
  double tolerance = 5e-2;
  Exactness exactness = Exactness::discretization;
};

/// W_2(P_t^* mu0, P_t^* mu1) <= e^{-Kt} W_2(mu0, mu1).
std::vector<CheckRecord> check_w2_contraction(const ChainContext& c, const DiscreteMeasure& mu0,
                                              const DiscreteMeasure& mu1, const std::vector<double>& t_grid,
                                              const MetricSide& side);
std::vector<CheckRecord> check_w2_contraction(const Gaussian1D& g0, const Gaussian1D& g1,
                                              const std::vector<double>& t_grid, double tolerance, Params base);

/// He_p(P_t^* mu0, P_t^* mu1) <= W_p(mu0, mu1) / (p sqrt(R_K(t))), p in [1, 2].
std::vector<CheckRecord> check_regularization_he_wp(const ChainContext& c, const DiscreteMeasure& mu0,
                                                    const DiscreteMeasure& mu1, double p,
                                                    const std::vector<double>& t_grid, const MetricSide& side);
/// Gaussian setting, K = 1; closed forms exist for p = 2 only.
std::vector<CheckRecord> check_regularization_he_wp(const Gaussian1D& g0, const Gaussian1D& g1, double p,
                                                    const std::vector<double>& t_grid, double tolerance,
                                                    Params base);

/// The previous check against the stationary measure, plus monotone decay
/// of the left side along the grid.
std::vector<CheckRecord> check_asymptotic(const ChainContext& c, const DiscreteMeasure& mu0, double p,
                                          const std::vector<double>& t_grid, const MetricSide& side);
std::vector<CheckRecord> check_asymptotic(const Gaussian1D& g0, double p, const std::vector<double>& t_grid,
                                          double tolerance, Params base);

/// KL(P_t^* g | N(0,1)) <= e^{-2t} KL(g | N(0,1)).
std::vector<CheckRecord> check_kl_decay(const Gaussian1D& g0, const std::vector<double>& t_grid, double tolerance,
                                        Params base);

/**
 * He_2(P_t^* mu0, P_t^* mu1) <= HK_{4 R_K(t)}(mu0, mu1) <= He_2(mu0, mu1).
 * The tolerance grows by the solver's own gap (in distance units); a
 * non-converged solve makes the record inconclusive.
 */
std::vector<CheckRecord> check_he_hk(const ChainContext& c, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                     const std::vector<double>& t_grid, const MetricSide& side,
                                     const HkOptions& opts);

/// Worst (most negative) slack among records with the given name.
double worst_slack(const std::vector<CheckRecord>& records, const std::string& name);
/// max(0, -slack) over records whose name is in `names`.
double worst_violation(const std::vector<CheckRecord>& records, const std::vector<std::string>& names);

struct SuiteReport {
  std::uint64_t seed = 0;
  std::vector<CheckRecord> records;  // sorted by (name, params)

  std::size_t count(Verdict v) const;
  /// Record name -> worst slack.
  std::map<std::string, double> worst_slacks() const;
  nlohmann::json to_json() const;
  /// Columns name, params, lhs, rhs, slack, tolerance, exactness, verdict.
  std::string to_csv() const;
};

nlohmann::json record_json(const CheckRecord& r);

/**
 * Runs every instance listed in the configuration. Independent jobs run on
 * the OpenMP pool; the report does not depend on the thread count.
 * `seed_override` replaces the configured seed when set.
 */
SuiteReport run_suite(const nlohmann::json& config, std::optional<std::uint64_t> seed_override = std::nullopt);

/// Random reversible chain on n random points of the line: a connected
/// conductance graph (weights in [0.2, 2]) over random reference weights.
Generator random_chain(int n, std::uint64_t seed);

}  // namespace heatreg
