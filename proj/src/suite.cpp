#include "heatreg/errors.hpp"
#include "heatreg/json_io.hpp"
#include "heatreg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <tuple>

namespace heatreg {

namespace {

using json = nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20240607;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Small typed accessors with schema diagnostics.
class Fields {
 public:
  Fields(const json& j, std::string where, std::set<std::string> allowed) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    for (const auto& [k, v] : j_.items()) {
      if (!allowed.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }
  bool has(const char* k) const { return j_.contains(k); }
  const json& raw(const char* k) const { return j_.at(k); }
  double number(const char* k, double def) const {
    if (!has(k)) return def;
    return io::to_double(j_.at(k), (where_ + "." + k).c_str());
  }
  int integer(const char* k, int def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_number_integer()) throw ConfigError(where_ + "." + k + ": expected an integer");
    return j_.at(k).get<int>();
  }
  bool boolean(const char* k, bool def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_boolean()) throw ConfigError(where_ + "." + k + ": expected true or false");
    return j_.at(k).get<bool>();
  }
  std::string string(const char* k, const std::string& def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_string()) throw ConfigError(where_ + "." + k + ": expected a string");
    return j_.at(k).get<std::string>();
  }
  std::vector<double> numbers(const char* k, std::vector<double> def) const {
    if (!has(k)) return def;
    const Vector v = io::vector_from_json(j_.at(k), (where_ + "." + k).c_str());
    return {v.data(), v.data() + v.size()};
  }
  std::vector<std::string> strings(const char* k, std::vector<std::string> def) const {
    if (!has(k)) return def;
    const json& a = j_.at(k);
    if (!a.is_array()) throw ConfigError(where_ + "." + k + ": expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : a) {
      if (!e.is_string()) throw ConfigError(where_ + "." + k + ": expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }
  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
};

// "computed" or a number.
std::optional<double> curvature_setting(const Fields& f, std::optional<double> def) {
  if (!f.has("K")) return def;
  const json& k = f.raw("K");
  if (k.is_string() && k.get<std::string>() == "computed") return std::nullopt;
  return io::to_double(k, (f.where() + ".K").c_str());
}

EntropyFunction entropy_by_name(const std::string& name) {
  try {
    if (name == "KL") return kl_entropy();
    if (name.size() > 1 && name[0] == 'E') return power_entropy(std::stod(name.substr(1)));
    if (name.size() > 1 && name[0] == 'F') return hellinger_entropy(std::stod(name.substr(1)));
  } catch (const std::logic_error&) {
  }
  throw ConfigError("unknown entropy '" + name + "' (use KL, E<p> or F<p>)");
}

HkOptions hk_options(const json& config) {
  HkOptions o;
  if (!config.contains("hk")) return o;
  Fields f(config.at("hk"), "hk", {"epsilon_schedule", "max_iter", "tol", "relaxation"});
  o.epsilon_schedule = f.numbers("epsilon_schedule", o.epsilon_schedule);
  o.max_iter = f.integer("max_iter", o.max_iter);
  o.tol = f.number("tol", o.tol);
  o.relaxation = f.number("relaxation", o.relaxation);
  if (o.epsilon_schedule.empty() || o.max_iter < 1 || !(o.tol > 0.0) || !(o.relaxation > 0.0 && o.relaxation < 2.0)) {
    throw ConfigError("hk: need a nonempty epsilon_schedule, max_iter >= 1, tol > 0 and relaxation in (0, 2)");
  }
  return o;
}

struct Job {
  std::function<std::vector<CheckRecord>()> run;
};

// A generator with its spectral cache and curvature, shared by jobs.
struct Prepared {
  Generator G;
  Semigroup P;
  double K;
  explicit Prepared(Generator g, std::optional<double> K_fixed)
      : G(std::move(g)), P(G), K(K_fixed ? *K_fixed : curvature_lower_bound(G).K) {}
};

// Post-processing step that turns the records of one instance into extra
// records (used for the refinement rule).
struct Group {
  std::vector<std::size_t> jobs;
  std::function<std::vector<CheckRecord>(const std::vector<CheckRecord>&)> finish;
};

const std::vector<double> kChainTimes{0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0};
const std::vector<double> kMetricTimes{0.05, 0.1, 0.25, 0.5, 1.0};
const std::vector<double> kGaussTimes{0.1, 0.25, 0.5, 1.0, 2.0};

void add_random_chains(const Fields& f, std::uint64_t seed, std::vector<Job>& jobs) {
  const std::string id = f.string("id", "chains");
  const int count = f.integer("count", 20);
  const int n = f.integer("n", 6);
  const auto t_grid = f.numbers("t_grid", kChainTimes);
  const auto integrands = f.strings("integrands", integrand_names());
  const auto entropies = f.strings("entropies", {"E0", "E1", "E2", "F1.5", "F2", "F3"});
  const auto ps = f.numbers("hellinger_p", {1.0, 2.0, 3.0});
  const std::optional<double> K = curvature_setting(f, std::nullopt);
  for (const auto& name : integrands) integrand(name);
  for (const auto& name : entropies) entropy_by_name(name);
  if (count < 0 || n < 2) throw ConfigError(f.where() + ": need count >= 0 and n >= 2");

  const std::uint64_t base_seed = mix(seed, fnv1a(id));
  for (int j = 0; j < count; ++j) {
    jobs.push_back({[=] {
      const std::uint64_t s = mix(base_seed, static_cast<std::uint64_t>(j));
      const Prepared prep(random_chain(n, s), K);
      std::mt19937_64 rng(mix(s, 1));
      std::uniform_real_distribution<double> u(0.1, 2.0);
      Vector fv(n), gv(n);
      for (int i = 0; i < n; ++i) {
        fv(i) = u(rng);
        gv(i) = u(rng);
      }
      const ChainContext c{prep.G, prep.P, prep.K, {{"instance", id}, {"chain", std::to_string(j)}}};
      std::vector<CheckRecord> out;
      auto append = [&](std::vector<CheckRecord> r) { out.insert(out.end(), r.begin(), r.end()); };
      for (const auto& name : integrands) append(check_convex_contraction(c, integrand(name), fv, gv, t_grid));
      for (const auto& name : entropies) append(check_csiszar_contraction(c, entropy_by_name(name), fv, gv, t_grid));
      const Vector& m = prep.G.reference();
      const DiscreteMeasure mu0(fv.cwiseProduct(m)), mu1(gv.cwiseProduct(m));
      for (double p : ps) append(check_hellinger_contraction(c, mu0, mu1, p, t_grid));
      append(check_be_gradient(c, fv, t_grid));
      append(check_variance_bound(c, fv, t_grid));
      return out;
    }});
  }
}

void add_two_point(const Fields& f, const HkOptions& hk_opts, std::vector<Job>& jobs) {
  const std::string id = f.string("id", "two_point");
  const double d = f.number("distance", 1.0);
  const auto t_grid = f.numbers("t_grid", kChainTimes);
  const auto hk_t_grid = f.numbers("hk_t_grid", t_grid);
  const double tol = f.number("tolerance", 5e-2);
  const std::optional<double> K = curvature_setting(f, std::nullopt);
  jobs.push_back({[=] {
    Matrix dist(2, 2);
    dist << 0.0, d, d, 0.0;
    Matrix L(2, 2);
    L << -1.0, 1.0, 1.0, -1.0;
    const Prepared prep(Generator(new_space(dist, Vector::Constant(2, 0.5)), L), K);
    const ChainContext c{prep.G, prep.P, prep.K, {{"instance", id}}};
    Vector f1(2), f0 = Vector::Zero(2);
    f1 << 1.0, 0.0;
    const DiscreteMeasure a(Vector::Unit(2, 0)), b(Vector::Unit(2, 1));
    std::vector<CheckRecord> out;
    auto append = [&](std::vector<CheckRecord> r) { out.insert(out.end(), r.begin(), r.end()); };
    append(check_convex_contraction(c, integrand("squared"), f1, f0, t_grid));
    append(check_hellinger_contraction(c, a, b, 2.0, t_grid));
    append(check_be_gradient(c, f1, t_grid));
    append(check_variance_bound(c, f1, t_grid));
    append(check_he_hk(c, a, b, hk_t_grid, MetricSide{tol, Exactness::discretization}, hk_opts));
    return out;
  }});
}

// Smooth probability measures on the discretized continuum.
DiscreteMeasure bump_on_cycle(const Generator& G, double length, double centre, double kappa) {
  const auto n = static_cast<Eigen::Index>(G.size());
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = length * static_cast<double>(i) / static_cast<double>(n);
    w(i) = std::exp(kappa * std::cos(2.0 * std::numbers::pi * x / length - centre));
  }
  return DiscreteMeasure(w / w.sum());
}

DiscreteMeasure bump_on_line(const std::vector<double>& x, double centre, double sd) {
  Vector w(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = (x[i] - centre) / sd;
    w(static_cast<Eigen::Index>(i)) = std::exp(-0.5 * z * z);
  }
  return DiscreteMeasure(w / w.sum());
}

const std::vector<std::string> kMetricChecks{"w2_contraction", "regularization", "asymptotic", "he_hk"};

std::vector<std::string> family_names(const std::string& check) {
  if (check == "he_hk") return {"he_hk", "he_hk_chain"};
  return {check};
}

void add_discretized(const Fields& f, const std::string& kind, std::uint64_t seed, const HkOptions& hk_opts,
                     std::vector<Job>& jobs, std::vector<Group>& groups) {
  const bool cycle = kind == "cycle";
  const std::string id = f.string("id", kind);
  const auto t_grid = f.numbers("t_grid", kMetricTimes);
  const int pairs = f.integer("pairs", 2);
  const auto ps = f.numbers("p", {1.0, 2.0});
  const double tol = f.number("tolerance", 5e-2);
  const bool refine = f.boolean("refine", true);
  const auto checks = f.strings("checks", kMetricChecks);
  for (const auto& c : checks) {
    if (std::find(kMetricChecks.begin(), kMetricChecks.end(), c) == kMetricChecks.end()) {
      throw ConfigError(f.where() + ": unknown check '" + c + "'");
    }
  }
  const int n = f.integer("n", 32);
  const double length = f.number("length", 2.0 * std::numbers::pi);
  const double h = f.number("h", 0.1);
  const double radius = f.number("radius", 4.0);
  const std::optional<double> K = curvature_setting(f, cycle ? 0.0 : 1.0);
  if (pairs < 0) throw ConfigError(f.where() + ": pairs must be >= 0");

  // Continuous parameters of the measures, shared by both resolutions.
  std::mt19937_64 rng(mix(seed, fnv1a(id)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Bump {
    double centre, spread;
  };
  std::vector<std::pair<Bump, Bump>> bumps;
  for (int j = 0; j < pairs; ++j) {
    auto draw = [&] {
      return cycle ? Bump{2.0 * std::numbers::pi * u(rng), 1.0 + 3.0 * u(rng)}
                   : Bump{-1.5 + 3.0 * u(rng), 0.4 + 0.6 * u(rng)};
    };
    const Bump a = draw();
    const Bump b = draw();
    bumps.emplace_back(a, b);
  }

  Group group;
  const int levels = refine ? 2 : 1;
  for (int level = 0; level < levels; ++level) {
    const std::string resolution = level == 0 ? "base" : "fine";
    const MetricSide side{level == 0 ? tol : 0.5 * tol, Exactness::discretization};
    std::shared_ptr<const Prepared> prep;
    std::vector<double> grid;
    if (cycle) {
      prep = std::make_shared<const Prepared>(cycle_generator(n << level, length), K);
    } else {
      grid = symmetric_grid(h / (1 << level), radius);
      prep = std::make_shared<const Prepared>(ou_generator(grid, radius), K);
    }
    for (int j = 0; j < pairs; ++j) {
      const auto [ba, bb] = bumps[static_cast<std::size_t>(j)];
      auto measure = [=](const Bump& b) {
        return cycle ? bump_on_cycle(prep->G, length, b.centre, b.spread) : bump_on_line(grid, b.centre, b.spread);
      };
      const DiscreteMeasure mu0 = measure(ba);
      const DiscreteMeasure mu1 = measure(bb);
      const Params base{{"instance", id}, {"resolution", resolution}, {"pair", std::to_string(j)}};
      for (const auto& check : checks) {
        group.jobs.push_back(jobs.size());
        jobs.push_back({[=] {
          const ChainContext c{prep->G, prep->P, prep->K, base};
          std::vector<CheckRecord> out;
          auto append = [&](std::vector<CheckRecord> r) { out.insert(out.end(), r.begin(), r.end()); };
          if (check == "w2_contraction") append(check_w2_contraction(c, mu0, mu1, t_grid, side));
          if (check == "regularization") {
            for (double p : ps) append(check_regularization_he_wp(c, mu0, mu1, p, t_grid, side));
          }
          if (check == "asymptotic") {
            for (double p : ps) append(check_asymptotic(c, mu0, p, t_grid, side));
          }
          if (check == "he_hk") append(check_he_hk(c, mu0, mu1, t_grid, side, hk_opts));
          return out;
        }});
      }
    }
  }
  if (refine) {
    group.finish = [=](const std::vector<CheckRecord>& records) {
      std::vector<CheckRecord> base_recs, fine_recs;
      for (const auto& r : records) {
        (r.params.at("resolution") == "base" ? base_recs : fine_recs).push_back(r);
      }
      std::vector<CheckRecord> out;
      for (const auto& check : checks) {
        const auto names = family_names(check);
        out.push_back(make_record(check + "_refinement", {{"instance", id}}, worst_violation(fine_recs, names),
                                  worst_violation(base_recs, names), 0.0, Exactness::discretization));
      }
      return out;
    };
  }
  groups.push_back(std::move(group));
}

Gaussian1D gaussian_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() < 2 || j.size() > 3) {
    throw ConfigError(where + ": expected [mean, var] or [mean, var, mass]");
  }
  const double mass = j.size() == 3 ? io::to_double(j[2], where.c_str()) : 1.0;
  return gaussian(io::to_double(j[0], where.c_str()), io::to_double(j[1], where.c_str()), mass);
}

void add_gaussian(const Fields& f, std::vector<Job>& jobs) {
  const std::string id = f.string("id", "gaussian");
  const auto t_grid = f.numbers("t_grid", kGaussTimes);
  const double tol = f.number("tolerance", 1e-9);
  std::vector<Gaussian1D> gs;
  if (f.has("gaussians")) {
    const json& a = f.raw("gaussians");
    if (!a.is_array()) throw ConfigError(f.where() + ".gaussians: expected an array");
    for (std::size_t k = 0; k < a.size(); ++k) gs.push_back(gaussian_from_json(a[k], f.where() + ".gaussians"));
  } else {
    gs = {gaussian(0, 1), gaussian(1, 1), gaussian(0, 0.25), gaussian(-0.5, 2), gaussian(1.5, 0.5)};
  }
  jobs.push_back({[=] {
    std::vector<CheckRecord> out;
    auto append = [&](std::vector<CheckRecord> r) { out.insert(out.end(), r.begin(), r.end()); };
    const Gaussian1D m{0.0, 1.0, 1.0};
    for (std::size_t a = 0; a < gs.size(); ++a) {
      const Params pa{{"instance", id}, {"g0", std::to_string(a)}};
      append(check_kl_decay(gs[a], t_grid, tol, pa));
      Params to_m = pa;
      to_m["g1"] = "standard";
      append(check_w2_contraction(gs[a], m, t_grid, tol, to_m));
      append(check_asymptotic(gs[a], 2.0, t_grid, tol, pa));
      for (std::size_t b = 0; b < gs.size(); ++b) {
        Params pab = pa;
        pab["g1"] = std::to_string(b);
        append(check_regularization_he_wp(gs[a], gs[b], 2.0, t_grid, tol, pab));
        append(check_w2_contraction(gs[a], gs[b], t_grid, tol, pab));
      }
    }
    return out;
  }});
}

}  // namespace

SuiteReport run_suite(const json& config, std::optional<std::uint64_t> seed_override) {
  Fields top(config, "config", {"seed", "hk", "only", "instances", "description"});
  SuiteReport report;
  if (top.has("seed")) {
    const json& sj = config.at("seed");
    if (!sj.is_number_integer() || (!sj.is_number_unsigned() && sj.get<std::int64_t>() < 0)) throw ConfigError("config.seed: expected a nonnegative integer");
    report.seed = config.at("seed").get<std::uint64_t>();
  } else {
    report.seed = kDefaultSeed;
  }
  if (seed_override) report.seed = *seed_override;
  const HkOptions hk_opts = hk_options(config);
  const auto only = top.strings("only", {});

  std::vector<Job> jobs;
  std::vector<Group> groups;
  if (top.has("instances")) {
    const json& list = config.at("instances");
    if (!list.is_array()) throw ConfigError("config.instances: expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string where = "instances[" + std::to_string(k) + "]";
      if (!list[k].is_object() || !list[k].contains("kind") || !list[k].at("kind").is_string()) {
        throw ConfigError(where + ": expected an object with a string \"kind\"");
      }
      const std::string kind = list[k].at("kind").get<std::string>();
      if (kind == "random_chains") {
        add_random_chains(Fields(list[k], where,
                                 {"kind", "id", "count", "n", "t_grid", "integrands", "entropies", "hellinger_p", "K"}),
                          report.seed, jobs);
      } else if (kind == "two_point") {
        add_two_point(Fields(list[k], where, {"kind", "id", "distance", "t_grid", "hk_t_grid", "tolerance", "K"}), hk_opts, jobs);
      } else if (kind == "cycle" || kind == "ou") {
        add_discretized(Fields(list[k], where,
                               {"kind", "id", "t_grid", "pairs", "p", "tolerance", "refine", "checks", "n", "length",
                                "h", "radius", "K"}),
                        kind, report.seed, hk_opts, jobs, groups);
      } else if (kind == "gaussian") {
        add_gaussian(Fields(list[k], where, {"kind", "id", "t_grid", "tolerance", "gaussians"}), jobs);
      } else {
        throw ConfigError(where + ": unknown kind '" + kind + "'");
      }
    }
  }

  std::vector<std::vector<CheckRecord>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  const auto njobs = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long k = 0; k < njobs; ++k) {
    try {
      results[static_cast<std::size_t>(k)] = jobs[static_cast<std::size_t>(k)].run();
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (const auto& group : groups) {
    if (!group.finish) continue;
    std::vector<CheckRecord> members;
    for (std::size_t k : group.jobs) members.insert(members.end(), results[k].begin(), results[k].end());
    results.push_back(group.finish(members));
  }
  for (auto& r : results) {
    for (auto& rec : r) {
      if (only.empty() || std::find(only.begin(), only.end(), rec.name) != only.end()) {
        report.records.push_back(std::move(rec));
      }
    }
  }
  std::sort(report.records.begin(), report.records.end(), [](const CheckRecord& a, const CheckRecord& b) {
    return std::tie(a.name, a.params) < std::tie(b.name, b.params);
  });
  return report;
}

}  // namespace heatreg
