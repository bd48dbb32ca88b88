#pragma once

#include "roughflow/certificates.hpp"
#include "roughflow/noise.hpp"
#include "roughflow/paths.hpp"
#include "roughflow/rough.hpp"
#include "roughflow/solvers.hpp"
#include "roughflow/system.hpp"

#include "json.hpp"

#include <stdexcept>
#include <string>

namespace roughflow {

using Json = nlohmann::ordered_json;

/// Input problem with a location ("file:line" or a JSON field path).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV with header t,x1,...,xd and %.17g values, so a write/read round trip is exact.
void write_path_csv(const SampledPath& path, const std::string& file, const std::string& prefix = "x");
/// Rejects ragged rows, non-numeric cells and non-increasing times.
SampledPath read_path_csv(const std::string& file);

/// Reads a JSON file; parse errors report line and column.
Json read_json_file(const std::string& file);
void write_json_file(const Json& j, const std::string& file);

Json to_json(const DriverSpec& spec);
DriverSpec driver_spec_from_json(const Json& j);

Json to_json(const Control& f);
Control control_from_json(const Json& j);
Json to_json(const GrowthSpec& spec);
GrowthSpec growth_spec_from_json(const Json& j);

/// {"d": 2, "m": 1, "drift": [[{"coef": 1, "powers": [1, 0]}], ...], "sigma": [...]}
/// with sigma listed row-major (entry a*m + b is σ_ab).
PolynomialSystemSpec polynomial_spec_from_json(const Json& j);
Json to_json(const PolynomialSystemSpec& spec);

/// level1.csv (t,x1..xm), level2.csv (t_from,t_to,xx11,xx12,...) over
/// consecutive cells, and manifest.json with alpha and sizes.
void write_rough_path(const RoughPath& rp, const std::string& dir);
RoughPath read_rough_path(const std::string& dir);

/// Status summary: status, blowup_time, level crossings, exit times, max norm.
Json trajectory_status_json(const Trajectory& tr);
Json to_json(const CertificateReport& rep, std::size_t envelope_rows = 64);
Json to_json(const Lemma33Result& r);
Json to_json(const PvarReport& r);
Json to_json(const PropagationReport& r);

}  // namespace roughflow
