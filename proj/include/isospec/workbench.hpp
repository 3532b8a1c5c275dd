#pragma once

// Experiment configs, pipelines and deterministic report emission for the command-line workbench.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "isospec/rep_spectra.hpp"

namespace isospec {

/// Unwritable output path or unreadable config.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { VerifyFamily, Witness, Curvature, Heat, Flow, Sphere, Spectra, Conformal };

inline constexpr int kConfigSchema = 1;
std::string version_string();

/// "VERIFY_FAMILY" etc.
std::string command_name(Command c);
/// Accepts the enum spelling and the lower-case subcommand spelling ("verify-family").
Command parse_command(const std::string& s);
std::string subcommand_name(Command c);
const std::vector<Command>& all_commands();

struct ExperimentConfig {
  Command command = Command::VerifyFamily;
  std::string family;
  std::vector<double> t_values;
  std::vector<BlockSpec> blocks;
  std::map<std::string, double> tolerances;  // every known tolerance, defaults filled in
  std::map<std::string, double> params;      // every known parameter, defaults filled in
  std::uint64_t seed = 0;
  std::string json_name;  // relative to the output directory
  std::string csv_name;   // empty: no CSV
  int jobs = 1;           // not part of the config hash; results do not depend on it
};

/// Validates a schema-1 config and fills in defaults. Unknown fields, unknown families,
/// unknown tolerance or parameter names and non-positive tolerances raise ConfigError;
/// t values outside the family domain raise DomainError.
ExperimentConfig parse_config(const nlohmann::json& j);
/// Defaults for a command with no config file.
ExperimentConfig default_config(Command c);
/// Canonical JSON form of the effective config (what the hash covers).
nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

struct CheckRecord {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  bool lower_bound = false;  // pass iff measured >= tolerance instead of measured <= tolerance
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<CheckRecord> records;  // in pipeline order
  nlohmann::json data = nlohmann::json::object();
  CsvTable csv;

  bool pass() const;
  std::vector<std::string> failing() const;
};

/// Runs the configured pipeline. Numerical failures inside a pipeline (drift, rank decisions)
/// become failing records; ConfigError and DomainError propagate.
RunReport run(const ExperimentConfig& cfg);

/// Report JSON with sorted keys and doubles printed with 17 significant digits.
std::string report_json(const RunReport& report);
std::string csv_text(const CsvTable& table);
/// %.17g; nonfinite values print as null in JSON and nan/inf in CSV.
std::string format_double(double v);

/// Default configs for every command, plus the so(8) spectra run and the S^4 sphere run, all at `seed`.
std::vector<ExperimentConfig> suite_configs(std::uint64_t seed);

/// Writes the JSON report (and CSV when configured) under dir. Throws IoError.
void emit_report(const RunReport& report, const std::filesystem::path& dir);

/// Serializes json with sorted keys and %.17g doubles.
std::string dump_canonical(const nlohmann::json& j);

}  // namespace isospec
