#pragma once

// Declarative experiment runner. A JSON config names one experiment and its
// parameters; run_experiment dispatches to the library and returns a table
// with the provenance needed to rerun it.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace kz::experiments {

using json = nlohmann::json;

enum class OutputFormat { csv, json };

struct ConfigError {
    std::string path;  ///< JSON-pointer style, "/" for the root
    std::string message;
};

struct ExperimentConfig {
    std::string experiment;
    json parameters;  ///< fully resolved, defaults filled
    std::string output_path;  ///< empty means stdout
    OutputFormat format = OutputFormat::csv;
    std::uint64_t master_seed = 0;

    /// Config object that validates back to this one.
    json to_json() const;
};

struct ValidationResult {
    std::optional<ExperimentConfig> config;
    std::vector<ConfigError> errors;

    bool ok() const { return config.has_value(); }
};

ValidationResult validate_config(const json& raw);
/// Parses text first; malformed JSON is reported at the root.
ValidationResult validate_config(const std::string& text);

enum class ParamType { number, integer, integer_list, choice };

struct ParamSpec {
    std::string name;
    ParamType type;
    json default_value;  ///< null: derived from other parameters when omitted
    std::optional<double> min;
    std::optional<double> max;
    bool exclusive_min = false;
    std::vector<std::string> choices;
    std::string description;
};

struct ExperimentSchema {
    std::string name;
    std::string summary;
    std::vector<ParamSpec> params;
};

const std::vector<ExperimentSchema>& experiment_schemas();

using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct ResultEnvelope {
    ExperimentConfig config;
    std::string tool_version;
    double wall_time_s = 0.0;
    Table table;
};

/// Throws kz::TruncationError on truncation failure.
ResultEnvelope run_experiment(const ExperimentConfig& config);

/// RFC-4180 CSV: header row, CRLF line ends, doubles with 17 significant digits.
void write_csv(std::ostream& os, const Table& table);
json envelope_to_json(const ResultEnvelope& env);
/// Metadata of an envelope without its rows.
json envelope_metadata(const ResultEnvelope& env);

std::string tool_version();

}  // namespace kz::experiments
