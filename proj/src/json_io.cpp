#include "heatreg/json_io.hpp"

#include "heatreg/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

namespace heatreg::io {

namespace {

[[noreturn]] void bad(const char* what, const std::string& detail) {
  throw ConfigError(std::string(what) + ": " + detail);
}

}  // namespace

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double to_double(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  bad(what, "expected a number");
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

Vector vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) bad(what, "expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_double(j[i], what);
  return v;
}

json matrix_json(const Matrix& a) {
  json out = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) out.push_back(vector_json(a.row(i).transpose()));
  return out;
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) bad(what, "expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector r = vector_from_json(j[static_cast<std::size_t>(i)], what);
    if (r.size() != cols) throw DimensionMismatch(std::string(what) + ": ragged matrix");
    a.row(i) = r.transpose();
  }
  return a;
}

json space_json(const MetricMeasureSpace& space) {
  return json{{"n", space.size()}, {"dist", matrix_json(space.dist())}, {"m", vector_json(space.reference())}};
}

MetricMeasureSpace space_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dist") || !j.contains("m")) {
    bad("space", "expected an object with \"dist\" and \"m\"");
  }
  Matrix d = matrix_from_json(j.at("dist"), "space.dist");
  Vector m = vector_from_json(j.at("m"), "space.m");
  if (j.contains("n")) {
    if (!j.at("n").is_number_integer()) bad("space.n", "expected an integer");
    const auto n = j.at("n").get<long>();
    if (n != d.rows() || n != m.size()) throw DimensionMismatch("space: n disagrees with dist/m sizes");
  }
  if (d.rows() != d.cols() || d.rows() != m.size()) {
    throw DimensionMismatch("space: dist must be n x n and m of length n");
  }
  return MetricMeasureSpace(std::move(d), std::move(m));
}

json measure_json(const DiscreteMeasure& mu) { return json{{"weights", vector_json(mu.weights())}}; }

DiscreteMeasure measure_from_json(const json& j) {
  if (!j.is_object() || !j.contains("weights")) bad("measure", "expected an object with \"weights\"");
  return DiscreteMeasure(vector_from_json(j.at("weights"), "measure.weights"));
}

json plan_json(const TransportPlan& plan) {
  return json{{"plan", matrix_json(plan.plan)}, {"cost", number(plan.cost)}};
}

json generator_json(const Generator& G, const json& space_ref) {
  return json{{"L", matrix_json(G.L())}, {"space", space_ref}};
}

Generator generator_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("L") || !j.contains("space")) {
    bad("generator", "expected an object with \"L\" and \"space\"");
  }
  const json& ref = j.at("space");
  MetricMeasureSpace space = [&] {
    if (ref.is_string()) {
      std::filesystem::path p = ref.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      return read_space(p);
    }
    return space_from_json(ref);
  }();
  return Generator(std::move(space), matrix_from_json(j.at("L"), "generator.L"));
}

json read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw InvalidArgument("write failed for " + path.string());
}

MetricMeasureSpace read_space(const std::filesystem::path& path) { return space_from_json(read_file(path)); }

DiscreteMeasure read_measure(const std::filesystem::path& path) { return measure_from_json(read_file(path)); }

Generator read_generator(const std::filesystem::path& path) {
  return generator_from_json(read_file(path), path.parent_path());
}

}  // namespace heatreg::io
