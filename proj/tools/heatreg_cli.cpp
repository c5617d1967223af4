// heatreg: command-line front end.
//
//   heatreg space cycle --n 8 --length 6.283185307179586 --out cycle.json
//   heatreg dist hk --space s.json --mu0 a.json --mu1 b.json --alpha 1
//   heatreg flow --generator g.json --t 0.5 --mu a.json --out evolved.json
//   heatreg verify --config configs/default.json --out report.json
//
// Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 violated
// precondition (e.g. unequal masses), 4 internal error.

#include "heatreg/divergences.hpp"
#include "heatreg/errors.hpp"
#include "heatreg/heat.hpp"
#include "heatreg/hk.hpp"
#include "heatreg/json_io.hpp"
#include "heatreg/kernels.hpp"
#include "heatreg/transport.hpp"
#include "heatreg/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

namespace fs = std::filesystem;
using namespace heatreg;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kInvalid = 2, kPrecondition = 3, kInternal = 4 };

void print_number(double x) { std::printf("%.17g\n", x); }

fs::path default_generator_path(const fs::path& space_path) {
  fs::path p = space_path;
  p.replace_extension();
  p += ".generator.json";
  return p;
}

void write_generator(const Generator& G, const fs::path& space_path, const fs::path& gen_path) {
  // Reference the space file relative to the generator's directory.
  const fs::path base = gen_path.has_parent_path() ? gen_path.parent_path() : fs::path(".");
  const fs::path rel = fs::relative(fs::absolute(space_path), fs::absolute(base));
  io::write_file(gen_path, io::generator_json(G, rel.generic_string()));
}

EntropyFunction entropy_from_name(const std::string& name) {
  if (name == "KL") return kl_entropy();
  try {
    if (name.size() > 1 && name[0] == 'E') return power_entropy(std::stod(name.substr(1)));
    if (name.size() > 1 && name[0] == 'F') return hellinger_entropy(std::stod(name.substr(1)));
  } catch (const std::logic_error&) {
  }
  throw InvalidArgument("unknown entropy '" + name + "' (use KL, E<p> or F<p>)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Divergences, transport distances and heat-flow estimates on finite metric-measure spaces"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool strict = false;
  app.add_option("--seed", seed, "Seed for randomly generated instances");
  app.add_option("--threads", threads, "Worker threads for verify (default: all cores)")->check(CLI::NonNegativeNumber);
  app.add_flag("--strict", strict, "Treat inconclusive checks as failures");

  // space
  auto* space_cmd = app.add_subcommand("space", "Write a space (and generator) file");
  std::string kind;
  int n = 8;
  double length = 2.0 * std::numbers::pi;
  double h = 0.05;
  double radius = 5.0;
  std::string from;
  fs::path space_out;
  std::optional<fs::path> gen_out;
  space_cmd->add_option("kind", kind, "cycle, ou or custom")->required()->check(CLI::IsMember({"cycle", "ou", "custom"}));
  space_cmd->add_option("--n", n, "Number of points (cycle)");
  space_cmd->add_option("--length", length, "Circumference (cycle)");
  space_cmd->add_option("--step", h, "Grid spacing (ou)");
  space_cmd->add_option("--radius", radius, "Truncation radius (ou)");
  space_cmd->add_option("--from", from, "Input space JSON to validate (custom)");
  space_cmd->add_option("--out", space_out, "Space file to write")->required();
  space_cmd->add_option("--generator", gen_out, "Generator file (default: <out>.generator.json)");

  // dist
  auto* dist_cmd = app.add_subcommand("dist", "Distance or divergence between two measure files");
  std::string metric;
  fs::path space_path, mu0_path, mu1_path;
  std::optional<fs::path> plan_out;
  double p = 2.0;
  double alpha = 1.0;
  std::string entropy = "KL";
  dist_cmd->add_option("metric", metric, "he, tv, wp, hk, kl or csiszar")
      ->required()
      ->check(CLI::IsMember({"he", "tv", "wp", "hk", "kl", "csiszar"}));
  dist_cmd->add_option("--space", space_path, "Space file (needed by wp and hk)");
  dist_cmd->add_option("--mu0", mu0_path, "First measure")->required();
  dist_cmd->add_option("--mu1", mu1_path, "Second measure")->required();
  dist_cmd->add_option("--p", p, "Exponent for he and wp");
  dist_cmd->add_option("--alpha", alpha, "Scale for hk");
  dist_cmd->add_option("--entropy", entropy, "Entropy for csiszar: KL, E<p> or F<p>");
  dist_cmd->add_option("--plan", plan_out, "Write the optimal plan (wp) as JSON");

  // flow
  auto* flow_cmd = app.add_subcommand("flow", "Evolve a measure by the adjoint heat flow");
  fs::path gen_path, mu_path, flow_out;
  double t = 0.0;
  flow_cmd->add_option("--generator", gen_path, "Generator file")->required();
  flow_cmd->add_option("--t", t, "Time")->required();
  flow_cmd->add_option("--mu", mu_path, "Measure file")->required();
  flow_cmd->add_option("--out", flow_out, "Output measure file")->required();

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Run the verification suite");
  fs::path config_path, report_out;
  std::string format = "json";
  verify_cmd->add_option("--config", config_path, "Suite configuration")->required();
  verify_cmd->add_option("--out", report_out, "Report file")->required();
  verify_cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*space_cmd) {
      if (kind == "custom") {
        if (from.empty()) throw InvalidArgument("custom spaces need --from <space.json>");
        io::write_file(space_out, io::space_json(io::read_space(from)));
      } else {
        const Generator G = kind == "cycle" ? cycle_generator(n, length) : ou_generator(h, radius);
        io::write_file(space_out, io::space_json(G.space()));
        write_generator(G, space_out, gen_out ? *gen_out : default_generator_path(space_out));
      }
      return kOk;
    }

    if (*dist_cmd) {
      const DiscreteMeasure mu0 = io::read_measure(mu0_path);
      const DiscreteMeasure mu1 = io::read_measure(mu1_path);
      require_same_size(mu0, mu1);
      auto load_space = [&] {
        if (space_path.empty()) throw InvalidArgument(metric + " needs --space");
        MetricMeasureSpace s = io::read_space(space_path);
        require_on_space(s, mu0);
        return s;
      };
      if (metric == "he") {
        print_number(hellinger(p, mu0, mu1));
      } else if (metric == "tv") {
        print_number(hellinger(1.0, mu0, mu1));
      } else if (metric == "kl") {
        print_number(kl(mu0, mu1));
      } else if (metric == "csiszar") {
        print_number(csiszar(entropy_from_name(entropy), mu0, mu1));
      } else if (metric == "wp") {
        const Wasserstein w = wasserstein(load_space(), mu0, mu1, p);
        print_number(w.distance);
        if (plan_out) io::write_file(*plan_out, io::plan_json(w.solution.plan));
      } else {
        const LetSolution s = hk(load_space(), mu0, mu1, alpha);
        const double gap = s.distance() - std::sqrt(std::max(0.0, s.lower_bound));
        std::printf("%.17g %.17g\n", s.distance(), std::max(0.0, gap));
        if (!s.converged) std::fprintf(stderr, "warning: HK solver did not converge\n");
      }
      return kOk;
    }

    if (*flow_cmd) {
      const Generator G = io::read_generator(gen_path);
      const DiscreteMeasure mu = io::read_measure(mu_path);
      io::write_file(flow_out, io::measure_json(heat_dual(G, t, mu)));
      return kOk;
    }

    if (*verify_cmd) {
      if (threads > 0) kernels::set_threads(threads);
      const SuiteReport report = run_suite(io::read_file(config_path), seed);
      if (format == "json") {
        io::write_file(report_out, report.to_json());
      } else {
        std::ofstream out(report_out);
        if (!out) throw InvalidArgument("cannot write " + report_out.string());
        out << report.to_csv();
      }
      const auto fails = report.count(Verdict::fail);
      const auto inconclusive = report.count(Verdict::inconclusive);
      std::printf("%zu records: %zu pass, %zu fail, %zu inconclusive\n", report.records.size(),
                  report.count(Verdict::pass), fails, inconclusive);
      if (fails > 0 || (strict && inconclusive > 0)) return kCheckFailed;
      return kOk;
    }
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInvalid;
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kPrecondition;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  }
  return kInternal;
}
