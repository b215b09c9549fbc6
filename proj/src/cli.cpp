#include "anoml/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "anoml/artifact.hpp"
#include "anoml/codegen.hpp"
#include "anoml/config.hpp"
#include "anoml/dataset.hpp"
#include "anoml/metrics.hpp"
#include "anoml/preprocess.hpp"
#include "anoml/scenario.hpp"
#include "anoml/service.hpp"
#include "anoml/transport_sim.hpp"
#include "anoml/wire_format.hpp"

namespace anoml {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kApi = "native";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Failure {
  int exit_code;
  std::string code;
  std::string kind;
  std::string message;
};

template <typename E>
Failure module_failure(const E& e, bool is_io) {
  return {is_io ? kExitRuntime : kExitValidation, std::string(to_string(e.code())),
          is_io ? "runtime" : "validation", e.what()};
}

Failure classify(std::exception_ptr ex) {
  try {
    std::rethrow_exception(ex);
  } catch (const UsageError& e) {
    return {kExitUsage, "Usage", "usage", e.what()};
  } catch (const config::ConfigError& e) {
    return module_failure(e, e.code() == config::ConfigErrc::Io);
  } catch (const data::DatasetError& e) {
    return module_failure(e, e.code() == data::DatasetErrc::Io);
  } catch (const pipeline::ArtifactError& e) {
    return module_failure(e, e.code() == pipeline::ArtifactErrc::Io);
  } catch (const codegen::CodegenError& e) {
    return module_failure(e, e.code() == codegen::CodegenErrc::Io);
  } catch (const wire::WireError& e) {
    return module_failure(e, false);
  } catch (const sim::SimError& e) {
    return module_failure(e, false);
  } catch (const prep::PrepError& e) {
    return module_failure(e, false);
  } catch (const detect::DetectError& e) {
    return module_failure(e, false);
  } catch (const Error<metrics::MetricsErrc>& e) {
    return module_failure(e, false);
  } catch (const pipeline::ScenarioError& e) {
    return module_failure(e, false);
  } catch (const std::invalid_argument& e) {
    return {kExitValidation, "InvalidArgument", "validation", e.what()};
  } catch (const std::exception& e) {
    return {kExitRuntime, "Runtime", "runtime", e.what()};
  }
  return {kExitRuntime, "Unknown", "runtime", "unknown failure"};
}

void report_failure(const Failure& f, std::ostream& err) {
  err << json{{"error", f.code}, {"kind", f.kind}, {"message", f.message}}.dump() << '\n';
}

fs::path data_dir() {
  if (const char* env = std::getenv("ANOML_DATA_DIR"); env && *env) return env;
  return "anoml_data";
}

// A frame reference is a path, or a name inside the frame store.
std::string resolve_frame(const std::string& ref) {
  if (fs::exists(ref)) return ref;
  for (const auto& candidate : {data_dir() / ref, data_dir() / (ref + ".csv")})
    if (fs::exists(candidate)) return candidate.string();
  throw data::DatasetError(data::DatasetErrc::Io, "no such frame: " + ref);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data::DatasetError(data::DatasetErrc::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

data::TimeSeriesFrame load_frame(const std::string& ref, const std::string& schema_path) {
  const auto path = resolve_frame(ref);
  const auto text = read_text(path);
  data::CsvSchema schema;
  if (!schema_path.empty()) {
    schema = data::schema_from_config(config::parse_file(schema_path));
  } else {
    // Unlabeled CSVs are accepted as all-Normal.
    const auto header = text.substr(0, text.find('\n'));
    std::vector<std::string> cols;
    std::stringstream ss(header);
    for (std::string c; std::getline(ss, c, ',');) {
      while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
      cols.push_back(c);
    }
    if (std::find(cols.begin(), cols.end(), schema.label_column) == cols.end()) schema.label_column.clear();
  }
  return data::parse_csv(text, schema);
}

data::TimeSeriesFrame normal_rows(const data::TimeSeriesFrame& frame) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < frame.n_rows(); ++i)
    if (frame.labels[i] == data::Label::Normal) keep.push_back(i);
  return frame.rows(keep);
}

// Rows grouped into frames: one column per sensor stream, forward-filled,
// leading rows dropped until every stream has reported.
data::TimeSeriesFrame frame_from_wire(const std::string& text, std::int64_t period_ms) {
  struct Row {
    std::int64_t ts;
    std::map<std::size_t, double> values;
  };
  std::map<std::string, std::size_t> columns;
  std::vector<std::string> names;
  std::vector<Row> rows;
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::optional<std::int64_t> ts;
    std::string message = line;
    if (const auto sep = line.find_first_of(" ,"); sep != std::string::npos) {
      const auto ts_text = line.substr(0, sep);
      std::size_t used = 0;
      std::int64_t v = 0;
      try {
        v = std::stoll(ts_text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != ts_text.size() || ts_text.empty())
        throw std::invalid_argument("line " + std::to_string(line_no) + ": bad timestamp");
      ts = v;
      message = line.substr(sep + 1);
    }
    wire::SensorReading reading;
    try {
      reading = wire::decode_text(message, ts.value_or(0));
    } catch (const wire::WireError& e) {
      throw wire::WireError(e.code(), e.field(), "line " + std::to_string(line_no) + ": " + e.what());
    }
    char key[32];
    std::snprintf(key, sizeof(key), "%s_%02d_%d_%03d", std::string(wire::code(reading.sensor_type)).c_str(),
                  reading.identity.location_id, reading.identity.mcu_id, reading.identity.sensor_id);
    auto [it, added] = columns.emplace(key, names.size());
    if (added) names.push_back(key);
    const std::size_t col = it->second;
    if (ts) {
      if (rows.empty() || rows.back().ts != *ts) rows.push_back({*ts, {}});
    } else if (rows.empty() || rows.back().values.count(col)) {
      rows.push_back({static_cast<std::int64_t>(rows.size()) * period_ms, {}});
    }
    rows.back().values[col] = reading.value.as_double();
  }
  if (names.empty()) throw data::DatasetError(data::DatasetErrc::ParseError, "no wire messages in input");

  std::vector<std::optional<double>> last(names.size());
  std::vector<std::int64_t> ts_out;
  std::vector<std::vector<double>> values;
  for (const auto& row : rows) {
    for (const auto& [col, v] : row.values) last[col] = v;
    if (std::any_of(last.begin(), last.end(), [](const auto& v) { return !v.has_value(); })) continue;
    ts_out.push_back(row.ts);
    std::vector<double> r;
    for (const auto& v : last) r.push_back(*v);
    values.push_back(std::move(r));
  }
  data::TimeSeriesFrame frame;
  frame.timestamps = ts_out;
  frame.feature_names = names;
  frame.features.resize(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 0; r < values.size(); ++r)
    for (std::size_t j = 0; j < names.size(); ++j)
      frame.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = values[r][j];
  frame.labels.assign(values.size(), data::Label::Normal);
  frame.check();
  return frame;
}

data::InjectionMode injection_mode(const std::string& s) {
  if (s == "ramp") return data::InjectionMode::Ramp;
  if (s == "spike") return data::InjectionMode::Spike;
  if (s == "stuck") return data::InjectionMode::Stuck;
  throw std::invalid_argument("unknown injection mode: " + s);
}

// start:end[:mode[:magnitude]]
data::AnomalyInjection parse_injection(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() < 2 || parts.size() > 4)
    throw std::invalid_argument("anomaly must be start:end[:mode[:magnitude]]: " + text);
  data::AnomalyInjection inj;
  try {
    inj.start_index = std::stoul(parts[0]);
    inj.end_index = std::stoul(parts[1]);
    if (parts.size() > 2) inj.mode = injection_mode(parts[2]);
    if (parts.size() > 3) inj.magnitude = std::stod(parts[3]);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("bad anomaly spec: " + text);
  }
  return inj;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');)
    if (!p.empty()) out.push_back(p);
  return out;
}

prep::SrKind parse_sr(const std::string& s) {
  auto sr = prep::sr_from_string(s);
  if (!sr) throw std::invalid_argument("unknown scaler/reducer: " + s);
  return *sr;
}

detect::DetectorKind parse_detector(const std::string& s) {
  auto k = detect::detector_from_string(s);
  if (!k) throw std::invalid_argument("unknown detector: " + s);
  return *k;
}

// Training knobs shared by train, retrain and report. Flags win over the
// [train] table of --config.
struct TrainFlags {
  std::string config_path;
  std::optional<std::size_t> window;
  std::optional<std::uint64_t> seed;
  std::optional<double> contamination;
  std::optional<std::size_t> trees;
  std::optional<std::size_t> subsample;
  std::optional<double> nu;
  std::optional<std::size_t> rff_dim;
  std::optional<double> gamma;
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "Config file with a [train] table");
    app->add_option("--window", window, "Window length in rows");
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--contamination", contamination, "Isolation Forest anomaly fraction");
    app->add_option("--trees", trees, "Isolation Forest tree count");
    app->add_option("--subsample", subsample, "Isolation Forest subsample size");
    app->add_option("--nu", nu, "OC-SVM nu");
    app->add_option("--rff-dim", rff_dim, "OC-SVM random feature dimension");
    app->add_option("--gamma", gamma, "OC-SVM RBF gamma");
    app->add_option("--epochs", epochs, "OC-SVM / autoencoder epochs");
    app->add_option("--lr", learning_rate, "OC-SVM / autoencoder learning rate");
  }

  config::Value table() const {
    return config_path.empty() ? config::Value() : config::parse_file(config_path);
  }

  std::size_t window_len(const config::Value& cfg) const {
    const auto w = window.value_or(static_cast<std::size_t>(
        cfg.get_integer("train.window", static_cast<std::int64_t>(prep::kDefaultWindowLen))));
    if (w == 0) throw std::invalid_argument("window must be at least 1");
    return w;
  }

  std::uint64_t seed_value(const config::Value& cfg) const {
    return seed.value_or(static_cast<std::uint64_t>(cfg.get_integer("train.seed", 0)));
  }

  detect::TrainOptions options(const config::Value& cfg) const {
    detect::TrainOptions o;
    const auto s = seed_value(cfg);
    o.isolation_forest.seed = o.one_class_svm.seed = o.autoencoder.seed = s;
    o.isolation_forest.n_trees = trees.value_or(static_cast<std::size_t>(
        cfg.get_integer("train.trees", static_cast<std::int64_t>(o.isolation_forest.n_trees))));
    o.isolation_forest.subsample_size = subsample.value_or(static_cast<std::size_t>(cfg.get_integer(
        "train.subsample", static_cast<std::int64_t>(o.isolation_forest.subsample_size))));
    o.one_class_svm.nu = nu.value_or(cfg.get_double("train.nu", o.one_class_svm.nu));
    o.one_class_svm.rff_dim = rff_dim.value_or(static_cast<std::size_t>(
        cfg.get_integer("train.rff_dim", static_cast<std::int64_t>(o.one_class_svm.rff_dim))));
    o.one_class_svm.gamma = gamma.value_or(cfg.get_double("train.gamma", o.one_class_svm.gamma));
    if (epochs || cfg.find("train.epochs")) {
      const auto e = epochs.value_or(static_cast<std::size_t>(cfg.get_integer("train.epochs", 0)));
      o.one_class_svm.epochs = o.autoencoder.epochs = e;
    }
    if (learning_rate || cfg.find("train.learning_rate")) {
      const auto lr = learning_rate.value_or(cfg.get_double("train.learning_rate", 0.0));
      o.one_class_svm.learning_rate = o.autoencoder.learning_rate = lr;
    }
    if (contamination) {
      o.contamination = contamination;
    } else if (cfg.find("train.contamination")) {
      o.contamination = cfg.get_double("train.contamination", 0.0);
    }
    return o;
  }
};

json stats_json(const sim::LatencyStats& s) {
  return {{"mean_ms", s.mean_ms}, {"std_ms", s.std_ms}, {"min_ms", s.min_ms},
          {"max_ms", s.max_ms}, {"count", s.count}};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anomaly detection pipeline for edge, fog and cloud deployments", "anoml"};
  app.require_subcommand(1);

  // ingest
  struct {
    std::string in, name, format = "auto", schema;
    std::int64_t period_ms = 1000;
  } ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Load a CSV or wire-message stream into the frame store");
  ingest_cmd->add_option("--in", ingest.in, "Input file")->required();
  ingest_cmd->add_option("--name", ingest.name, "Frame name (default: input file stem)");
  ingest_cmd->add_option("--format", ingest.format, "csv, wire or auto")
      ->check(CLI::IsMember({"auto", "csv", "wire"}));
  ingest_cmd->add_option("--schema", ingest.schema, "Config file with a [schema] table");
  ingest_cmd->add_option("--period-ms", ingest.period_ms, "Row period for untimestamped wire input");

  // synth
  struct {
    std::size_t rows = 2000, features = 5;
    std::uint64_t seed = 7;
    std::string out, name;
    std::vector<std::string> anomalies;
  } synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic sensor frame");
  synth_cmd->add_option("--rows", synth.rows, "Row count");
  synth_cmd->add_option("--features", synth.features, "Feature count");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--anomaly", synth.anomalies, "start:end[:ramp|spike|stuck[:magnitude]]");
  auto* synth_out = synth_cmd->add_option("--out", synth.out, "Output CSV path");
  synth_cmd->add_option("--name", synth.name, "Store the frame under this name")->excludes(synth_out);

  // train
  struct {
    std::string in, out, sr, detector, schema;
    std::optional<double> train_fraction;
    TrainFlags flags;
  } train;
  auto* train_cmd = app.add_subcommand("train", "Fit a scaler/reducer and detector, write a model artifact");
  train_cmd->add_option("--in", train.in, "Frame path or store name")->required();
  train_cmd->add_option("--out", train.out, "Artifact path")->required();
  train_cmd->add_option("--sr", train.sr, "Scaler or reducer: none minmax standard average stdev skew kurtosis mad");
  train_cmd->add_option("--detector", train.detector, "if, ocsvm or ae");
  train_cmd->add_option("--train-fraction", train.train_fraction, "Leading fraction used for training");
  train_cmd->add_option("--schema", train.schema, "Config file with a [schema] table");
  train.flags.attach(train_cmd);

  // retrain
  struct {
    std::string in, model, out, schema;
    TrainFlags flags;
  } retrain;
  auto* retrain_cmd = app.add_subcommand("retrain", "Refit an artifact's pipeline on accumulated normal data");
  retrain_cmd->add_option("--in", retrain.in, "Accumulated frame")->required();
  retrain_cmd->add_option("--model", retrain.model, "Current artifact")->required();
  retrain_cmd->add_option("--out", retrain.out, "New artifact path")->required();
  retrain_cmd->add_option("--schema", retrain.schema, "Config file with a [schema] table");
  retrain.flags.attach(retrain_cmd);

  // deploy
  struct {
    std::string model, target, serve;
  } deploy;
  auto* deploy_cmd = app.add_subcommand("deploy", "Verify an artifact and copy it to a target or serve it");
  deploy_cmd->add_option("--model", deploy.model, "Artifact path")->required();
  auto* deploy_target = deploy_cmd->add_option("--target", deploy.target, "Destination file or directory");
  auto* deploy_serve = deploy_cmd->add_option("--serve", deploy.serve, "host:port to serve HTTP inference on");
  deploy_target->excludes(deploy_serve);

  // infer
  struct {
    std::string model, endpoint, in, schema, predictions, json_out;
    bool invert_positive = false;
  } infer;
  auto* infer_cmd = app.add_subcommand("infer", "Score a frame with a local artifact or an HTTP endpoint");
  auto* infer_model = infer_cmd->add_option("--model", infer.model, "Artifact path");
  auto* infer_endpoint = infer_cmd->add_option("--endpoint", infer.endpoint, "host:port of a running service");
  infer_model->excludes(infer_endpoint);
  infer_cmd->add_option("--in", infer.in, "Frame path or store name")->required();
  infer_cmd->add_option("--schema", infer.schema, "Config file with a [schema] table");
  infer_cmd->add_option("--predictions", infer.predictions, "Write per-window predictions CSV");
  infer_cmd->add_option("--json", infer.json_out, "Write the metric report as JSON");
  infer_cmd->add_flag("--invert-positive", infer.invert_positive, "Treat anomalous as the positive class");

  // simulate
  struct {
    std::string topology, trace;
    std::optional<std::size_t> packets;
    std::optional<std::uint64_t> seed;
    std::optional<double> period_ms;
  } simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Replay packets over every link of a topology");
  simulate_cmd->add_option("--topology", simulate.topology, "Topology config")->required();
  simulate_cmd->add_option("--packets", simulate.packets, "Packets per link (default 1000)");
  simulate_cmd->add_option("--seed", simulate.seed, "Random seed");
  simulate_cmd->add_option("--period-ms", simulate.period_ms, "Send interval per link");
  simulate_cmd->add_option("--trace", simulate.trace, "Write the trace (.csv or .ndjson)");

  // codegen
  struct {
    std::string spec, out;
  } gen;
  auto* codegen_cmd = app.add_subcommand("codegen", "Generate transmitter/receiver sources for a node");
  codegen_cmd->add_option("--spec", gen.spec, "Node spec config")->required();
  codegen_cmd->add_option("--out", gen.out, "Output directory")->required();

  // report
  struct {
    std::string in, schema, csv_out, json_out, topology, policy = "processed_binary", protocol = "wifi";
    std::string srs = "none,minmax,standard,average,stdev,skew,kurtosis,mad";
    std::string detectors = "if,ocsvm,ae";
    std::string placements = "edge,fog,cloud";
    double train_fraction = 0.5;
    bool realistic_edge = false, invert_positive = false;
    std::optional<double> fixed_inference_ms;
    TrainFlags flags;
  } report;
  auto* report_cmd = app.add_subcommand("report", "Train and evaluate across placements; emit a summary CSV");
  report_cmd->add_option("--in", report.in, "Frame path or store name")->required();
  report_cmd->add_option("--schema", report.schema, "Config file with a [schema] table");
  report_cmd->add_option("--sr", report.srs, "Comma-separated scalers/reducers");
  report_cmd->add_option("--detectors", report.detectors, "Comma-separated detectors");
  report_cmd->add_option("--placements", report.placements, "Comma-separated placements");
  report_cmd->add_option("--train-fraction", report.train_fraction, "Leading fraction used for training");
  report_cmd->add_option("--csv", report.csv_out, "CSV output path (default stdout)");
  report_cmd->add_option("--json", report.json_out, "JSON output path");
  report_cmd->add_option("--topology", report.topology, "Topology config");
  report_cmd->add_option("--protocol", report.protocol, "Edge protocol for the default topology");
  report_cmd->add_option("--forward-policy", report.policy, "raw_only, processed_binary or processed_score");
  report_cmd->add_option("--fixed-inference-ms", report.fixed_inference_ms, "Use this instead of measured inference time");
  report_cmd->add_flag("--realistic-edge", report.realistic_edge, "Only the autoencoder may run at the edge");
  report_cmd->add_flag("--invert-positive", report.invert_positive, "Treat anomalous as the positive class");
  report.flags.attach(report_cmd);

  std::vector<std::string> argv_store{"anoml"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    report_failure({kExitUsage, "Usage", "usage", e.what()}, err);
    return kExitUsage;
  }

  try {
    if (ingest_cmd->parsed()) {
      std::string format = ingest.format;
      if (format == "auto") format = fs::path(ingest.in).extension() == ".csv" ? "csv" : "wire";
      const auto frame = format == "csv" ? load_frame(ingest.in, ingest.schema)
                                         : frame_from_wire(read_text(ingest.in), ingest.period_ms);
      const std::string name = ingest.name.empty() ? fs::path(ingest.in).stem().string() : ingest.name;
      const auto path = data_dir() / (name + ".csv");
      write_text(path.string(), data::write_csv(frame));
      out << json{{"frame", path.string()}, {"rows", frame.n_rows()}, {"features", frame.n_features()},
                  {"anomalous_rows", frame.count(data::Label::Anomalous)}}
                 .dump()
          << '\n';
    } else if (synth_cmd->parsed()) {
      std::vector<data::AnomalyInjection> injections;
      for (const auto& a : synth.anomalies) injections.push_back(parse_injection(a));
      if (synth.anomalies.empty()) {
        const std::size_t len = std::max<std::size_t>(1, synth.rows / 50);
        const data::InjectionMode modes[] = {data::InjectionMode::Spike, data::InjectionMode::Ramp,
                                             data::InjectionMode::Stuck};
        const double at[] = {0.6, 0.75, 0.9};
        for (int k = 0; k < 3; ++k) {
          data::AnomalyInjection inj;
          inj.start_index = static_cast<std::size_t>(at[k] * static_cast<double>(synth.rows));
          inj.end_index = std::min(synth.rows, inj.start_index + len);
          inj.mode = modes[k];
          inj.magnitude = 5.0;
          if (inj.start_index < inj.end_index) injections.push_back(inj);
        }
      }
      auto frame = data::synthesize(synth.rows, synth.features, synth.seed, injections);
      if (synth.features == 5) frame.feature_names = data::anoml_schema().feature_columns;
      const std::string path =
          !synth.out.empty() ? synth.out : (data_dir() / ((synth.name.empty() ? "synth" : synth.name) + ".csv")).string();
      write_text(path, data::write_csv(frame));
      out << json{{"frame", path}, {"rows", frame.n_rows()}, {"features", frame.n_features()},
                  {"anomalous_rows", frame.count(data::Label::Anomalous)}}
                 .dump()
          << '\n';
    } else if (train_cmd->parsed() || retrain_cmd->parsed()) {
      const bool is_retrain = retrain_cmd->parsed();
      const auto& flags = is_retrain ? retrain.flags : train.flags;
      const auto cfg = flags.table();
      const auto frame = load_frame(is_retrain ? retrain.in : train.in, is_retrain ? retrain.schema : train.schema);

      prep::SrKind sr;
      detect::DetectorKind kind;
      std::size_t window_len;
      std::string previous_id;
      if (is_retrain) {
        const auto old_bytes = pipeline::read_file(retrain.model);
        const auto old = pipeline::load_model(old_bytes);
        previous_id = pipeline::model_id(old_bytes);
        sr = old.transform.kind;
        kind = old.kind();
        window_len = flags.window.value_or(old.window_len());
        if (old.raw_features() != frame.n_features())
          throw std::invalid_argument("accumulated data has " + std::to_string(frame.n_features()) +
                                      " features, model expects " + std::to_string(old.raw_features()));
      } else {
        sr = parse_sr(train.sr.empty() ? cfg.get_string("train.sr", "none") : train.sr);
        kind = parse_detector(train.detector.empty() ? cfg.get_string("train.detector", "if") : train.detector);
        window_len = flags.window_len(cfg);
      }

      data::TimeSeriesFrame train_frame;
      const double fraction = is_retrain ? 1.0 : train.train_fraction.value_or(cfg.get_double("train.train_fraction", 1.0));
      if (fraction < 1.0) {
        train_frame = data::split(frame, fraction).first;
      } else {
        train_frame = normal_rows(frame);
      }
      if (train_frame.n_rows() < window_len)
        throw std::invalid_argument("training data has " + std::to_string(train_frame.n_rows()) +
                                    " normal rows, fewer than the window length");

      const auto t0 = std::chrono::steady_clock::now();
      const auto model = pipeline::train_model(train_frame, sr, kind, window_len, flags.options(cfg),
                                               fs::path(is_retrain ? retrain.in : train.in).filename().string());
      const auto t1 = std::chrono::steady_clock::now();
      const auto bytes = pipeline::package_model(model);
      const auto& out_path = is_retrain ? retrain.out : train.out;
      pipeline::write_file(out_path, bytes);
      json j{{"model", out_path},
             {"model_id", pipeline::model_id(bytes)},
             {"detector", detect::to_string(kind)},
             {"sr", prep::to_string(sr)},
             {"window_len", window_len},
             {"train_rows", train_frame.n_rows()},
             {"train_seconds", std::chrono::duration<double>(t1 - t0).count()},
             {"size_bytes", bytes.size()}};
      if (is_retrain) j["previous_model_id"] = previous_id;
      out << j.dump() << '\n';
    } else if (deploy_cmd->parsed()) {
      const auto bytes = pipeline::read_file(deploy.model);
      const auto model = pipeline::load_model(bytes);
      const auto id = pipeline::model_id(bytes);
      if (!deploy.serve.empty()) {
        const auto endpoint = service::parse_endpoint(deploy.serve);
        service::InferenceService svc;
        svc.load(bytes);
        out << json{{"model_id", id}, {"serving", endpoint.host + ":" + std::to_string(endpoint.port)}}.dump()
            << std::endl;
        svc.serve_forever(endpoint.host, endpoint.port);
      } else if (!deploy.target.empty()) {
        fs::path target = deploy.target;
        // An existing directory, or a new path without an extension, is a
        // directory to copy into.
        const bool into_dir = fs::is_directory(target) || deploy.target.back() == '/' ||
                              (!fs::exists(target) && !target.has_extension());
        if (into_dir) {
          fs::create_directories(target);
          target /= fs::path(deploy.model).filename();
        }
        pipeline::write_file(target.string(), bytes);
        // Read back so a truncated copy is reported here rather than at load time.
        pipeline::load_model(pipeline::read_file(target.string()));
        out << json{{"model_id", id}, {"target", target.string()}, {"detector", detect::to_string(model.kind())}}
                   .dump()
            << '\n';
      } else {
        throw UsageError("deploy needs --target or --serve");
      }
    } else if (infer_cmd->parsed()) {
      if (infer.model.empty() == infer.endpoint.empty()) throw UsageError("infer needs exactly one of --model or --endpoint");
      const auto frame = load_frame(infer.in, infer.schema);
      std::vector<double> scores;
      std::vector<data::Label> predictions;
      std::vector<data::Label> truth;
      std::vector<std::size_t> starts;
      std::string algorithm, sr_label, platform;
      double inference_ms = 0, scale_s = 0, size_kb = 0;

      if (!infer.model.empty()) {
        const auto bytes = pipeline::read_file(infer.model);
        const auto model = pipeline::load_model(bytes);
        if (model.raw_features() != frame.n_features())
          throw std::invalid_argument("frame has " + std::to_string(frame.n_features()) +
                                      " features, model expects " + std::to_string(model.raw_features()));
        const auto t0 = std::chrono::steady_clock::now();
        const Eigen::MatrixXd rows = prep::apply_transform(model.transform, frame.features);
        const auto t1 = std::chrono::steady_clock::now();
        const auto windows = prep::make_windows(rows, frame.labels, model.window_len());
        const double threshold = model.threshold();
        const auto s0 = std::chrono::steady_clock::now();
        for (std::size_t w = 0; w < windows.n_windows(); ++w) {
          const double s =
              detect::score(model.detector, windows.data.row(static_cast<Eigen::Index>(w)).transpose()).value;
          scores.push_back(s);
          predictions.push_back(detect::classify(s, threshold));
        }
        const auto s1 = std::chrono::steady_clock::now();
        truth = windows.labels;
        starts = windows.start_rows;
        algorithm = detect::table_label(model.kind());
        sr_label = prep::short_label(model.transform.kind);
        platform = "local";
        scale_s = std::chrono::duration<double>(t1 - t0).count();
        inference_ms = windows.n_windows() ? std::chrono::duration<double, std::milli>(s1 - s0).count() /
                                                 static_cast<double>(windows.n_windows())
                                           : 0.0;
        size_kb = static_cast<double>(bytes.size()) / 1024.0;
      } else {
        const auto endpoint = service::parse_endpoint(infer.endpoint);
        const auto health = service::get_health(endpoint);
        if (health.status != 200) throw std::runtime_error("service not ready: " + health.body);
        const auto meta = json::parse(health.body);
        const auto window_len = meta.at("window_len").get<std::size_t>();
        const auto features = meta.at("features").get<std::size_t>();
        if (features != frame.n_features())
          throw std::invalid_argument("frame has " + std::to_string(frame.n_features()) +
                                      " features, service expects " + std::to_string(features));
        const auto windows = prep::make_windows(frame.features, frame.labels, window_len);
        for (std::size_t w = 0; w < windows.n_windows(); ++w) {
          const auto view = windows.window(w);
          const auto r = service::infer(endpoint, Eigen::MatrixXd(view));
          scores.push_back(r.score);
          predictions.push_back(r.label ? data::Label::Anomalous : data::Label::Normal);
          inference_ms += r.latency_ms;
        }
        if (!scores.empty()) inference_ms /= static_cast<double>(scores.size());
        truth = windows.labels;
        starts = windows.start_rows;
        algorithm = detect::table_label(parse_detector(meta.at("detector").get<std::string>()));
        sr_label = prep::short_label(parse_sr(meta.at("metadata").at("transform").at("sr").get<std::string>()));
        platform = "http";
      }
      if (scores.empty()) throw std::invalid_argument("frame is shorter than one window");

      auto rep = metrics::evaluate(predictions, scores, truth, infer.invert_positive);
      rep.inference_ms = inference_ms;
      rep.scale_reduce_s = scale_s;
      rep.model_size_kb = size_kb;
      out << metrics::report_csv_header() << '\n'
          << metrics::report_csv_row(algorithm, sr_label, kApi, platform, rep) << '\n';
      if (!infer.predictions.empty()) {
        std::ostringstream csv;
        csv << "window,start_row,timestamp,score,label,truth\n";
        for (std::size_t i = 0; i < scores.size(); ++i)
          csv << i << ',' << starts[i] << ',' << frame.timestamps[starts[i]] << ',' << format_double(scores[i])
              << ',' << static_cast<int>(predictions[i]) << ',' << static_cast<int>(truth[i]) << '\n';
        write_text(infer.predictions, csv.str());
      }
      if (!infer.json_out.empty()) write_text(infer.json_out, metrics::report_json(rep));
    } else if (simulate_cmd->parsed()) {
      const auto cfg = config::parse_file(simulate.topology);
      const auto topo = sim::build_topology(sim::topology_spec_from_config(cfg));
      const auto packets = simulate.packets.value_or(
          static_cast<std::size_t>(cfg.get_integer("workload.packets", 1000)));
      const auto seed = simulate.seed.value_or(static_cast<std::uint64_t>(cfg.get_integer("workload.seed", 42)));
      const double period = simulate.period_ms.value_or(cfg.get_double("workload.period_ms", 1000.0));
      if (packets == 0) throw std::invalid_argument("packets must be at least 1");

      std::vector<sim::Packet> workload;
      for (const auto& link : topo.links()) {
        for (std::size_t i = 0; i < packets; ++i) {
          wire::SensorReading reading;
          reading.sensor_type = wire::SensorType::Temperature;
          reading.value = wire::SensorValue::from_hundredths(static_cast<std::int64_t>(2000 + i % 1000));
          const auto text = wire::encode_text(reading);
          workload.push_back({{text.begin(), text.end()}, link.from, link.to,
                              sim::ms_to_ns(period * static_cast<double>(i))});
        }
      }
      const auto trace = sim::run(topo, workload, seed);
      json links = json::array();
      for (const auto& link : topo.links()) {
        sim::Trace sub;
        std::size_t dropped = 0;
        for (const auto& ev : trace) {
          if (ev.packet.source != link.from || ev.packet.destination != link.to) continue;
          if (ev.dropped()) ++dropped;
          sub.push_back(ev);
        }
        json entry{{"from", link.from},
                   {"to", link.to},
                   {"protocol", sim::to_string(link.model.protocol)},
                   {"configured_mean_ms", link.model.mean_latency_ms},
                   {"configured_jitter_ms", link.model.jitter_std_ms},
                   {"dropped", dropped}};
        if (dropped < sub.size()) entry["measured"] = stats_json(sim::measure_latency(sub));
        links.push_back(std::move(entry));
      }
      json result{{"packets_per_link", packets}, {"seed", seed}, {"links", links},
                  {"overall", stats_json(sim::measure_latency(trace))}};
      if (!simulate.trace.empty()) {
        const bool ndjson = fs::path(simulate.trace).extension() == ".ndjson";
        write_text(simulate.trace, ndjson ? sim::trace_to_ndjson(trace) : sim::trace_to_csv(trace));
        result["trace"] = simulate.trace;
      }
      out << result.dump() << '\n';
    } else if (codegen_cmd->parsed()) {
      const auto cfg = config::parse_file(gen.spec);
      auto spec = codegen::node_spec_from_config(cfg);
      if (!cfg.find("location_id") && !spec.location_name.empty()) {
        const auto registry_path = data_dir() / "locations.json";
        codegen::LocationRegistry registry;
        if (fs::exists(registry_path)) registry = json::parse(read_text(registry_path.string())).get<codegen::LocationRegistry>();
        auto [updated, id] = codegen::assign_location_id(registry, spec.location_name);
        spec.location_id = id;
        write_text(registry_path.string(), json(updated).dump(2));
      }
      const auto issues = codegen::validate_spec(spec);
      if (!issues.empty()) {
        json list = json::array();
        for (const auto& i : issues) list.push_back({{"code", codegen::to_string(i.code)}, {"field", i.field}});
        throw codegen::CodegenError(codegen::CodegenErrc::InvalidSpec, list.dump());
      }
      const auto bundle = codegen::generate(spec);
      codegen::write_bundle(bundle, spec, gen.out);
      out << json{{"out", gen.out}, {"location_id", spec.location_id}, {"protocol", sim::to_string(spec.protocol)}}.dump()
          << '\n';
    } else if (report_cmd->parsed()) {
      const auto cfg = report.flags.table();
      const auto frame = load_frame(report.in, report.schema);
      auto [train_frame, test_frame] = data::split(frame, report.train_fraction);
      const auto window_len = report.flags.window_len(cfg);
      const auto seed = report.flags.seed_value(cfg);
      const auto options = report.flags.options(cfg);

      pipeline::ScenarioConfig base;
      if (!report.topology.empty()) base = pipeline::scenario_from_config(config::parse_file(report.topology));
      auto protocol = sim::protocol_from_string(report.protocol);
      if (!protocol) throw std::invalid_argument("unknown protocol: " + report.protocol);
      if (report.topology.empty()) base.edge_protocol = *protocol;
      auto policy = pipeline::forward_policy_from_string(report.policy);
      if (!policy) throw std::invalid_argument("unknown forward policy: " + report.policy);
      base.forward_policy = *policy;
      base.realistic_edge = report.realistic_edge;
      base.invert_positive = report.invert_positive;
      if (report.fixed_inference_ms) base.fixed_inference_ms = report.fixed_inference_ms;

      std::vector<pipeline::Placement> placements;
      for (const auto& p : split_list(report.placements)) {
        auto pl = pipeline::placement_from_string(p);
        if (!pl) throw std::invalid_argument("unknown placement: " + p);
        placements.push_back(*pl);
      }
      std::vector<detect::DetectorKind> detectors;
      for (const auto& d : split_list(report.detectors)) detectors.push_back(parse_detector(d));
      std::vector<prep::SrKind> srs;
      for (const auto& s : split_list(report.srs)) srs.push_back(parse_sr(s));
      if (train_frame.n_rows() < window_len)
        throw std::invalid_argument("training split is shorter than one window");

      std::ostringstream csv;
      csv << metrics::report_csv_header() << '\n';
      json runs = json::array();
      json skipped = json::array();
      for (auto kind : detectors) {
        for (auto sr : srs) {
          const auto model = pipeline::train_model(train_frame, sr, kind, window_len, options, report.in);
          for (auto placement : placements) {
            auto sc = base;
            sc.placement = placement;
            try {
              const auto r = pipeline::run_scenario(sc, model, test_frame, seed);
              csv << metrics::report_csv_row(detect::table_label(kind), prep::short_label(sr), kApi,
                                             pipeline::to_string(placement), r.metrics)
                  << '\n';
              auto j = json::parse(pipeline::scenario_json(r));
              j["algorithm"] = detect::table_label(kind);
              j["sr"] = prep::short_label(sr);
              runs.push_back(std::move(j));
            } catch (const pipeline::ScenarioError& e) {
              if (e.code() != pipeline::ScenarioErrc::PlacementUnsupported) throw;
              skipped.push_back({{"algorithm", detect::table_label(kind)},
                                 {"sr", prep::short_label(sr)},
                                 {"placement", pipeline::to_string(placement)},
                                 {"reason", e.what()}});
            }
          }
        }
      }
      if (report.csv_out.empty()) {
        out << csv.str();
      } else {
        write_text(report.csv_out, csv.str());
      }
      if (!report.json_out.empty())
        write_text(report.json_out, json{{"runs", runs}, {"skipped", skipped}}.dump(2) + "\n");
      if (!report.csv_out.empty())
        out << json{{"csv", report.csv_out}, {"runs", runs.size()}, {"skipped", skipped.size()}}.dump() << '\n';
    }
  } catch (...) {
    const auto f = classify(std::current_exception());
    report_failure(f, err);
    return f.exit_code;
  }
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace anoml
