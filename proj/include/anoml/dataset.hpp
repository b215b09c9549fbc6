#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "anoml/config.hpp"
#include "anoml/error.hpp"

namespace anoml::data {

enum class Label : std::uint8_t { Normal = 0, Anomalous = 1 };

enum class DatasetErrc {
  MissingColumn,
  NonMonotonicTimestamps,
  ParseError,
  InjectionOutOfBounds,
  DegenerateSplit,
  InvalidFrame,
  Io,
};

std::string_view to_string(DatasetErrc code);

class DatasetError : public Error<DatasetErrc> {
 public:
  DatasetError(DatasetErrc code, const std::string& detail, std::size_t row = 0)
      : Error<DatasetErrc>(code, detail), row_(row) {}
  // 1-based data row for ParseError / NonMonotonicTimestamps, 0 otherwise.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

using Matrix = Eigen::MatrixXd;

// Labeled multivariate time series; rows are time steps.
struct TimeSeriesFrame {
  std::vector<std::int64_t> timestamps;  // ms, strictly increasing
  Matrix features;                       // n_rows x n_features
  std::vector<std::string> feature_names;
  std::vector<Label> labels;

  std::size_t n_rows() const { return timestamps.size(); }
  std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }
  std::size_t count(Label l) const;

  // Throws InvalidFrame when sizes disagree, no features, or timestamps are
  // not strictly increasing.
  void check() const;

  // Subset of rows in the given order.
  TimeSeriesFrame rows(const std::vector<std::size_t>& indices) const;

  friend bool operator==(const TimeSeriesFrame& a, const TimeSeriesFrame& b);
};

struct CsvSchema {
  std::string timestamp_column = "timestamp";
  std::string label_column = "label";  // empty: every row Normal
  std::vector<std::string> feature_columns;  // empty: every other column
};

// Reads the [schema] table: timestamp, label, features = [...].
CsvSchema schema_from_config(const config::Value& root);

// Five sensor columns plus timestamp and label.
CsvSchema anoml_schema();

TimeSeriesFrame parse_csv(std::string_view text, const CsvSchema& schema);
TimeSeriesFrame load_csv(const std::string& path, const CsvSchema& schema);

// Header `timestamp,<features...>,label`; values printed with 17 significant
// digits so parse_csv(write_csv(f)) == f.
std::string write_csv(const TimeSeriesFrame& frame);
void save_csv(const TimeSeriesFrame& frame, const std::string& path);

enum class InjectionMode { Ramp, Spike, Stuck };

struct AnomalyInjection {
  std::size_t start_index = 0;
  std::size_t end_index = 0;  // exclusive
  InjectionMode mode = InjectionMode::Ramp;
  double magnitude = 1.0;
  std::vector<std::size_t> target_features;
};

struct SynthOptions {
  std::int64_t start_ms = 0;
  std::int64_t period_ms = 1000;
  double cycle_rows = 200.0;  // rows per sinusoid cycle
  double noise_std = 0.1;
};

// Per-feature sinusoid with Gaussian noise; injected rows are labeled
// Anomalous. Deterministic in seed.
TimeSeriesFrame synthesize(std::size_t n_rows, std::size_t n_features, std::uint64_t seed,
                           const std::vector<AnomalyInjection>& injections,
                           const SynthOptions& options = {});

// Chronological split. The training side keeps only Normal rows.
std::pair<TimeSeriesFrame, TimeSeriesFrame> split(const TimeSeriesFrame& frame,
                                                  double train_fraction);

}  // namespace anoml::data
