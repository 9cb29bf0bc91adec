#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mfcal/data.hpp"
#include "mfcal/inference.hpp"
#include "mfcal/predict.hpp"
#include "mfcal/toybench.hpp"

namespace mfcal {

using Json = nlohmann::json;

/// Shortest round-trip decimal form.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  // rows x header.size()

  /// Column position by name; throws SchemaError naming the column and file.
  std::size_t column(const std::string& name, const std::string& context) const;
};

/// Numeric CSV with a mandatory header row. Blank lines are skipped.
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);
/// Two-space indented, trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

// ---------------------------------------------------------------------------
// Schema

/// The bundled run-config schema.
const Json& run_config_schema();

/// Validates `instance` against a JSON Schema using the keywords type,
/// properties, required, additionalProperties, items, minItems, maxItems,
/// enum, minimum, exclusiveMinimum, exclusiveMaximum, minLength and local
/// $ref. Throws SchemaError naming the offending location.
void validate_schema(const Json& instance, const Json& schema);

// ---------------------------------------------------------------------------
// Configuration

struct ColumnNames {
  std::vector<std::string> x, t_f, t_h, t_l;
  std::string y = "y";
};

struct InputBounds {
  std::vector<Interval> x, t_f, t_h, t_l;
};

struct DataConfig {
  std::filesystem::path field, high, low;  // high empty when absent
  ModelForm form = ModelForm::two_level;
  Dimensions dims;
  ColumnNames columns;
  InputBounds bounds;
};

struct StudySettings {
  std::size_t n_l = 40, n_h = 10, n_f = 3;
  std::size_t replicates = 100;
  std::size_t validation_n = 25;
  std::vector<ToyModel> models{ToyModel::D1, ToyModel::D2, ToyModel::D3};
  std::uint64_t seed = 1;
  std::size_t thin = 1;
  bool save_datasets = false;
};

struct RunConfig {
  std::optional<DataConfig> data;
  FitOptions fit;
  /// Metropolis widths by parameter name; setting any disables tuning.
  std::map<std::string, double> widths;
  std::optional<std::filesystem::path> x_new;
  std::optional<std::filesystem::path> chain;
  PredictionOptions prediction;
  StudySettings study;
  std::filesystem::path output_dir = "out";
  std::size_t threads = 1;
  Json source = Json::object();  // the validated document
};

/// Per-layout widths from `config.widths`, 0.1 where unnamed. Throws
/// SchemaError for names that are not Metropolis parameters of the layout.
std::vector<double> resolve_widths(const RunConfig& config, const std::vector<ParameterId>& layout);

/// Validates against the schema, then resolves relative paths against `base_dir`.
RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Reads the three tables, checks headers against the config and maps the
/// inputs onto [0, 1]. Responses stay raw.
MultiFidelityDataSet load_dataset(const DataConfig& config);

/// Raw-scale prediction inputs; a y column, if present, is returned as well.
struct PredictionInputs {
  Eigen::MatrixXd x_raw;
  Eigen::MatrixXd x_scaled;
  std::optional<Eigen::VectorXd> y;
};
PredictionInputs load_prediction_inputs(const std::filesystem::path& path, const DataConfig& config);

// ---------------------------------------------------------------------------
// Chains and summaries

void write_chain_csv(const std::filesystem::path& path, const Chain& chain);
/// Rebuilds a chain for (dims, form); the header must match the parameter
/// layout exactly, otherwise DimensionError.
Chain read_chain_csv(const std::filesystem::path& path, const Dimensions& dims, ModelForm form);

Json chain_sidecar(const Chain& chain, const std::optional<TuningResult>& tuning, const Json& config);

struct ParameterSummary {
  std::string name;
  double mean = 0.0, sd = 0.0, lower = 0.0, upper = 0.0;
};
std::vector<ParameterSummary> summarize_chain(const Chain& chain, double level = 0.95);
void write_posterior_summary(const std::filesystem::path& path, const std::vector<ParameterSummary>& s);

void write_predictions(const std::filesystem::path& path, const std::vector<std::string>& x_names,
                       const Eigen::MatrixXd& x_raw, const std::vector<PredictiveSummary>& preds);

}  // namespace mfcal
