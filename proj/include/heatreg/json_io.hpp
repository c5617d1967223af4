#pragma once

#include "heatreg/heat.hpp"
#include "heatreg/space.hpp"
#include "heatreg/transport.hpp"

#include <json.hpp>

#include <filesystem>

namespace heatreg::io {

using json = nlohmann::json;

/// Doubles as JSON numbers; +-inf and NaN as the strings "inf", "-inf", "nan".
json number(double x);
double to_double(const json& j, const char* what);

json vector_json(const Vector& v);
Vector vector_from_json(const json& j, const char* what);
json matrix_json(const Matrix& a);
Matrix matrix_from_json(const json& j, const char* what);

/// {"n": int, "dist": [[...]], "m": [...]}
json space_json(const MetricMeasureSpace& space);
MetricMeasureSpace space_from_json(const json& j);

/// {"weights": [...]}
json measure_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const json& j);

/// {"plan": [[...]], "cost": x}
json plan_json(const TransportPlan& plan);

/// {"L": [[...]], "space": <path or inline space object>}
json generator_json(const Generator& G, const json& space_ref);
/// Relative space paths are resolved against `base_dir`.
Generator generator_from_json(const json& j, const std::filesystem::path& base_dir = {});

json read_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline. Throws InvalidArgument when not writable.
void write_file(const std::filesystem::path& path, const json& j);

MetricMeasureSpace read_space(const std::filesystem::path& path);
DiscreteMeasure read_measure(const std::filesystem::path& path);
Generator read_generator(const std::filesystem::path& path);

}  // namespace heatreg::io
