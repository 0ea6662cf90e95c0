#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "marma/core.hpp"
#include "marma/estimation.hpp"
#include "marma/simulation.hpp"

namespace marma::cli {

using json = nlohmann::ordered_json;

/// Unreadable or unwritable files and malformed JSON (exit code 4).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad flags, config values or dataset contents (exit code 2).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---- CSV -------------------------------------------------------------------

/// Comma separated, dot decimal, header line mandatory. Lines starting with
/// '#' are comments. Row numbers count data rows from 1; line numbers count
/// physical lines from 1.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<long> lines;

  /// Index of `name` in the header, or -1.
  int column(const std::string& name) const;
  std::string where(std::size_t row) const;  // "row 17 (line 18)"
};

CsvTable parse_csv(std::istream& in, const std::string& source);
CsvTable read_csv(const std::string& path);

std::string format_full(double v);  // %.17g
std::string format6(double v);      // %.6g

struct Metadata {
  std::string command;
  std::string config_hash;
  std::optional<std::uint64_t> seed;
};

json metadata_json(const Metadata& meta);
/// "# marma <version>" and key: value comment lines.
void write_metadata_comments(std::ostream& out, const Metadata& meta);

/// FNV-1a 64-bit, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

// ---- datasets --------------------------------------------------------------

struct DataLayout {
  std::string y_column = "y";
  std::optional<std::string> time_column;               // default: "t" or "time" if present
  std::optional<std::vector<std::string>> covariates;  // default: every other column unless harmonics are set
  std::vector<HarmonicTerm> harmonics;                  // evaluated on the time index
};

struct Dataset {
  SeriesData data;
  Eigen::VectorXd time;  // time index; 1..n when the file has none
  std::vector<std::string> covariate_names;
  DataLayout layout;

  /// Covariates for the h steps after the last observation when they are all
  /// harmonic; nullopt when data columns would be needed.
  std::optional<Eigen::MatrixXd> future_covariates(int h) const;
};

Dataset load_dataset(const CsvTable& table, const DataLayout& layout);
Dataset load_dataset(const std::string& path, const DataLayout& layout);

/// Future covariate rows from a CSV holding the same covariate columns.
Eigen::MatrixXd load_future_covariates(const std::string& path, const Dataset& dataset, int h);

// ---- configuration ---------------------------------------------------------

struct ForecastConfig {
  int horizon = 1;
  int paths = 500;
  double level = 0.05;
  std::uint64_t seed = 1;
};

struct ScenarioConfig {
  int n = 100;
  int burn_in = 100;
  int replicas = 1;
  std::uint64_t seed = 1;
  double alpha = 0.0;
  std::vector<double> beta, phi, theta;
  std::vector<HarmonicTerm> covariates;
};

struct McConfig {
  std::string kind = "point";  // point | gof | coverage
  int horizon = 10;
  int paths = 300;
  std::vector<double> levels{0.10, 0.05, 0.01};
  std::optional<int> fit_ar_order, fit_ma_order;
  std::optional<std::string> fit_link;
};

struct RunConfig {
  int ar_order = 0;
  int ma_order = 0;
  std::string link = "cloglog";
  DataLayout data;
  FitOptions fit;
  ForecastConfig forecast;
  std::optional<ScenarioConfig> scenario;
  McConfig mc;
  int threads = 0;

  /// Canonical JSON form (all fields, defaults filled in); hashed for the
  /// metadata block.
  json to_json() const;
  std::string hash() const;
};

/// Rejects unknown keys and values of the wrong type.
RunConfig parse_config(const json& j);
RunConfig read_config(const std::string& path);

HarmonicTerm parse_harmonic(const std::string& text);  // "sin:12"
std::vector<HarmonicTerm> parse_harmonics(const std::string& text);  // "sin:12,cos:12"

/// Scenario built from the model and scenario sections.
ScenarioSpec make_scenario(const RunConfig& config);

// ---- model files -----------------------------------------------------------

struct SavedModel {
  FitResult fit;
  DataLayout layout;
  std::vector<std::string> covariate_names;
};

json model_json(const FitResult& fit, const Dataset& dataset, const Metadata& meta);
SavedModel parse_model(const json& j);
SavedModel read_model(const std::string& path);

json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace marma::cli
