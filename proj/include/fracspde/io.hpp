#pragma once

// Exports (CSV, binary + JSON sidecar), the versioned JSON run config, run
// manifests and report serialization.  Numbers are written with
// std::to_chars, so output never depends on the locale.

#include <Eigen/Dense>
#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "fracspde/chaos.hpp"
#include "fracspde/duhamel.hpp"
#include "fracspde/greens.hpp"
#include "fracspde/quadcheck.hpp"

namespace fracspde {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Header "t,x,value"; one row per (time row, cell).  Time of row k is
/// k * h_t when the field has n_t + 1 rows, (k + 1/2) h_t for increments.
void write_field_csv(std::ostream& os, const GridField& f);
/// Header "t_index,x1..xd,value" (noise increments).
void write_increments_csv(std::ostream& os, const GridField& f);
/// Header "t,x1..xd,value".
void write_kernel_csv(std::ostream& os, Kernel k, const FractionalOrder& alpha, int d,
                      const std::vector<double>& ts, const std::vector<double>& xs);

/// Row-major little-endian float64 and a JSON sidecar (dims, extra).
void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& m, const Json& extra);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// Parses a config document ("schema": 1); unknown or mistyped fields throw ConfigError.
SimulationConfig config_from_json(const Json& j);
Json config_to_json(const SimulationConfig& c);

NoiseSpec noise_from_json(const Json& j, int d);
Json noise_to_json(const NoiseSpec& n);

Json to_json(const ChaosReport& r, const ConvergenceInputs& in);
Json to_json(const ScalingReport& r);
Json to_json(const DominationReport& r);
Json to_json(const QuadcheckSuite& s);

struct RunManifest {
  std::string subcommand;
  Json config;
  std::uint64_t seed = 0;
  std::string version;
  std::string started;
  std::string finished;
  std::vector<std::pair<std::string, std::string>> outputs;  // path, sha256

  void add_output(const std::string& path) { outputs.emplace_back(path, sha256_file(path)); }
  Json to_json() const;
};

/// UTC ISO-8601 timestamp.
std::string utc_now();

}  // namespace fracspde
