#include "anoml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace anoml::data {

std::string_view to_string(DatasetErrc code) {
  switch (code) {
    case DatasetErrc::MissingColumn: return "MissingColumn";
    case DatasetErrc::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case DatasetErrc::ParseError: return "ParseError";
    case DatasetErrc::InjectionOutOfBounds: return "InjectionOutOfBounds";
    case DatasetErrc::DegenerateSplit: return "DegenerateSplit";
    case DatasetErrc::InvalidFrame: return "InvalidFrame";
    case DatasetErrc::Io: return "Io";
  }
  return "?";
}

std::size_t TimeSeriesFrame::count(Label l) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

void TimeSeriesFrame::check() const {
  if (features.cols() < 1) throw DatasetError(DatasetErrc::InvalidFrame, "frame has no features");
  if (static_cast<std::size_t>(features.rows()) != timestamps.size() ||
      labels.size() != timestamps.size() ||
      feature_names.size() != static_cast<std::size_t>(features.cols())) {
    throw DatasetError(DatasetErrc::InvalidFrame, "frame dimensions disagree");
  }
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (timestamps[i] <= timestamps[i - 1])
      throw DatasetError(DatasetErrc::NonMonotonicTimestamps,
                         "timestamps not strictly increasing at row " + std::to_string(i + 1),
                         i + 1);
}

TimeSeriesFrame TimeSeriesFrame::rows(const std::vector<std::size_t>& indices) const {
  TimeSeriesFrame out;
  out.feature_names = feature_names;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    out.timestamps.push_back(timestamps[indices[k]]);
    out.labels.push_back(labels[indices[k]]);
    out.features.row(static_cast<Eigen::Index>(k)) =
        features.row(static_cast<Eigen::Index>(indices[k]));
  }
  return out;
}

bool operator==(const TimeSeriesFrame& a, const TimeSeriesFrame& b) {
  return a.timestamps == b.timestamps && a.labels == b.labels &&
         a.feature_names == b.feature_names && a.features.rows() == b.features.rows() &&
         a.features.cols() == b.features.cols() && a.features == b.features;
}

CsvSchema schema_from_config(const config::Value& root) {
  CsvSchema schema;
  schema.timestamp_column = root.get_string("schema.timestamp", schema.timestamp_column);
  schema.label_column = root.get_string("schema.label", schema.label_column);
  if (const auto* f = root.find("schema.features"))
    for (const auto& v : f->as_array()) schema.feature_columns.push_back(v.as_string());
  return schema;
}

CsvSchema anoml_schema() {
  return CsvSchema{"timestamp", "label", {"temperature", "humidity", "air_quality", "light", "sound"}};
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size() && !s.empty();
}

}  // namespace

TimeSeriesFrame parse_csv(std::string_view text, const CsvSchema& schema) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(start, end - start));
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw DatasetError(DatasetErrc::MissingColumn, "empty CSV: no header");

  const auto header = split_fields(lines[0]);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index.emplace(header[i], i);
  auto column = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw DatasetError(DatasetErrc::MissingColumn, "missing column: " + name);
    return it->second;
  };

  const std::size_t ts_col = column(schema.timestamp_column);
  const bool has_label = !schema.label_column.empty();
  const std::size_t label_col = has_label ? column(schema.label_column) : 0;
  std::vector<std::string> names = schema.feature_columns;
  if (names.empty()) {
    for (const auto& h : header)
      if (h != schema.timestamp_column && (!has_label || h != schema.label_column)) names.push_back(h);
  }
  std::vector<std::size_t> feature_cols;
  for (const auto& n : names) feature_cols.push_back(column(n));
  if (feature_cols.empty()) throw DatasetError(DatasetErrc::MissingColumn, "no feature columns");

  TimeSeriesFrame frame;
  frame.feature_names = names;
  const std::size_t n = lines.size() - 1;
  frame.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(names.size()));
  frame.timestamps.reserve(n);
  frame.labels.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t row_no = r + 1;
    const auto fields = split_fields(lines[r + 1]);
    auto bad = [&](const std::string& what) {
      return DatasetError(DatasetErrc::ParseError,
                          "row " + std::to_string(row_no) + ": " + what, row_no);
    };
    if (fields.size() != header.size()) throw bad("expected " + std::to_string(header.size()) + " fields");
    std::int64_t ts = 0;
    if (!parse_number(fields[ts_col], ts)) throw bad("bad timestamp '" + fields[ts_col] + "'");
    if (!frame.timestamps.empty() && ts <= frame.timestamps.back())
      throw DatasetError(DatasetErrc::NonMonotonicTimestamps,
                         "row " + std::to_string(row_no) + ": timestamp does not increase", row_no);
    frame.timestamps.push_back(ts);
    Label label = Label::Normal;
    if (has_label) {
      const auto& l = fields[label_col];
      if (l == "0") label = Label::Normal;
      else if (l == "1") label = Label::Anomalous;
      else throw bad("bad label '" + l + "'");
    }
    frame.labels.push_back(label);
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      double v = 0;
      if (!parse_number(fields[feature_cols[j]], v) || !std::isfinite(v))
        throw bad("bad value '" + fields[feature_cols[j]] + "' in " + names[j]);
      frame.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return frame;
}

TimeSeriesFrame load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(DatasetErrc::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), schema);
}

std::string write_csv(const TimeSeriesFrame& frame) {
  std::ostringstream out;
  out.precision(17);
  out << "timestamp";
  for (const auto& n : frame.feature_names) out << ',' << n;
  out << ",label\n";
  for (std::size_t r = 0; r < frame.n_rows(); ++r) {
    out << frame.timestamps[r];
    for (Eigen::Index j = 0; j < frame.features.cols(); ++j)
      out << ',' << frame.features(static_cast<Eigen::Index>(r), j);
    out << ',' << static_cast<int>(frame.labels[r]) << '\n';
  }
  return out.str();
}

void save_csv(const TimeSeriesFrame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError(DatasetErrc::Io, "cannot write " + path);
  out << write_csv(frame);
}

TimeSeriesFrame synthesize(std::size_t n_rows, std::size_t n_features, std::uint64_t seed,
                           const std::vector<AnomalyInjection>& injections,
                           const SynthOptions& options) {
  for (const auto& inj : injections) {
    if (inj.start_index >= inj.end_index || inj.end_index > n_rows)
      throw DatasetError(DatasetErrc::InjectionOutOfBounds,
                         "injection [" + std::to_string(inj.start_index) + ", " +
                             std::to_string(inj.end_index) + ") outside " + std::to_string(n_rows) +
                             " rows");
    for (auto f : inj.target_features)
      if (f >= n_features)
        throw DatasetError(DatasetErrc::InjectionOutOfBounds,
                           "injection targets feature " + std::to_string(f));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, options.noise_std);
  TimeSeriesFrame frame;
  frame.features.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_features));
  for (std::size_t j = 0; j < n_features; ++j) frame.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < n_rows; ++i) {
    frame.timestamps.push_back(options.start_ms + static_cast<std::int64_t>(i) * options.period_ms);
    for (std::size_t j = 0; j < n_features; ++j) {
      const double level = 10.0 * static_cast<double>(j + 1);
      const double amplitude = 1.0 + 0.5 * static_cast<double>(j);
      const double phase = 0.7 * static_cast<double>(j);
      const double angle =
          2.0 * std::numbers::pi * static_cast<double>(i) / options.cycle_rows + phase;
      frame.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          level + amplitude * std::sin(angle) + noise(rng);
    }
  }
  frame.labels.assign(n_rows, Label::Normal);

  for (const auto& inj : injections) {
    std::vector<std::size_t> targets = inj.target_features;
    if (targets.empty())
      for (std::size_t j = 0; j < n_features; ++j) targets.push_back(j);
    const double width = static_cast<double>(inj.end_index - inj.start_index);
    for (auto j : targets) {
      const auto col = static_cast<Eigen::Index>(j);
      const double held = frame.features(static_cast<Eigen::Index>(inj.start_index), col);
      for (std::size_t i = inj.start_index; i < inj.end_index; ++i) {
        double& v = frame.features(static_cast<Eigen::Index>(i), col);
        switch (inj.mode) {
          case InjectionMode::Ramp:
            v += inj.magnitude * static_cast<double>(i - inj.start_index + 1) / width;
            break;
          case InjectionMode::Spike: v += inj.magnitude; break;
          case InjectionMode::Stuck: v = held; break;
        }
      }
    }
    for (std::size_t i = inj.start_index; i < inj.end_index; ++i) frame.labels[i] = Label::Anomalous;
  }
  return frame;
}

std::pair<TimeSeriesFrame, TimeSeriesFrame> split(const TimeSeriesFrame& frame,
                                                  double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DatasetError(DatasetErrc::DegenerateSplit, "train_fraction must lie in (0, 1)");
  const std::size_t n = frame.n_rows();
  const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction + 1e-9));
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t i = 0; i < cut; ++i)
    if (frame.labels[i] == Label::Normal) train_idx.push_back(i);
  for (std::size_t i = cut; i < n; ++i) test_idx.push_back(i);
  if (train_idx.empty() || test_idx.empty())
    throw DatasetError(DatasetErrc::DegenerateSplit,
                       "split leaves " + std::to_string(train_idx.size()) + " train / " +
                           std::to_string(test_idx.size()) + " test rows");
  return {frame.rows(train_idx), frame.rows(test_idx)};
}

}  // namespace anoml::data
