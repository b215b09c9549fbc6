#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "anoml/artifact.hpp"
#include "anoml/config.hpp"
#include "anoml/dataset.hpp"
#include "anoml/metrics.hpp"
#include "anoml/scenario.hpp"
#include "criteria.hpp"

namespace acceptance {

namespace {

using namespace anoml;
namespace fs = std::filesystem;

data::TimeSeriesFrame synthetic_plant() {
  using data::AnomalyInjection;
  using data::InjectionMode;
  return data::synthesize(1200, 5, 31,
                          {AnomalyInjection{700, 724, InjectionMode::Spike, 5.0, {}},
                           AnomalyInjection{860, 900, InjectionMode::Ramp, 6.0, {1, 2}},
                           AnomalyInjection{1020, 1050, InjectionMode::Stuck, 4.0, {}}});
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

Outcome placement_equivalence() {
  Outcome o;
  const auto frame = synthetic_plant();
  const auto [train, test] = data::split(frame, 0.5);
  detect::TrainOptions opts;
  opts.one_class_svm.epochs = 100;
  opts.autoencoder.epochs = 150;
  const struct {
    detect::DetectorKind kind;
    prep::SrKind sr;
  } combos[] = {{detect::DetectorKind::IsolationForest, prep::SrKind::MinMax},
                {detect::DetectorKind::OneClassSvm, prep::SrKind::Standard},
                {detect::DetectorKind::Autoencoder, prep::SrKind::Mad}};
  for (const auto& c : combos) {
    const auto model = pipeline::train_model(train, c.sr, c.kind, 10, opts, "acceptance");
    const auto label = cat(detect::to_string(c.kind), "+", prep::to_string(c.sr));
    pipeline::ScenarioConfig cfg;
    std::string reference;
    std::vector<double> path;
    for (auto placement : {pipeline::Placement::Edge, pipeline::Placement::Fog, pipeline::Placement::Cloud}) {
      cfg.placement = placement;
      const auto report = pipeline::run_scenario(cfg, model, test, 42);
      const auto block = metrics::metric_block(report.metrics);
      if (reference.empty()) {
        reference = block;
        o.note(cat(label, ": ", block));
      }
      o.expect(block == reference, cat(label, " at ", pipeline::to_string(placement), " differs: ", block));
      o.expect(report.rows_at_detection_tier == test.n_rows(),
               cat(label, " lost rows at ", pipeline::to_string(placement)));
      path.push_back(report.path_latency_ms);
    }
    o.expect(path[0] < path[1] && path[1] < path[2],
             cat(label, " path latency not increasing edge<fog<cloud: ", path[0], ", ", path[1], ", ", path[2]));
  }
  return o;
}

Outcome end_to_end_cli() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "anoml_acceptance_e2e";
  fs::remove_all(dir);
  fs::create_directories(dir);
  ::setenv("ANOML_DATA_DIR", (dir / "store").c_str(), 1);
  const std::string cli = quote(ANOML_CLI_PATH);

  const auto run = [&](const std::string& args, const std::string& stdout_file) {
    const std::string cmd = cli + " " + args + " > " + quote(dir / stdout_file) + " 2> " + quote(dir / (stdout_file + ".err"));
    const int rc = std::system(cmd.c_str());
    o.expect(rc == 0, cat("`anoml ", args, "` exited ", rc, ": ", slurp(dir / (stdout_file + ".err"))));
    return rc == 0;
  };

  data::save_csv(synthetic_plant(), (dir / "plant_raw.csv").string());
  bool ok = run("ingest --in " + quote(dir / "plant_raw.csv") + " --name plant", "ingest.json") &&
            run("train --in plant --out " + quote(dir / "model.anml") +
                    " --sr minmax --detector if --window 10 --train-fraction 0.5 --seed 3",
                "train.json") &&
            run("deploy --model " + quote(dir / "model.anml") + " --target " + quote(dir / "deployed"),
                "deploy.json") &&
            run("infer --model " + quote(dir / "deployed" / "model.anml") + " --in plant --predictions " +
                    quote(dir / "predictions.csv"),
                "infer.csv") &&
            run("report --in plant --sr minmax,average --detectors if,ae --placements edge,fog,cloud "
                "--window 10 --epochs 100 --train-fraction 0.5 --csv " +
                    quote(dir / "report.csv"),
                "report.json");
  ::unsetenv("ANOML_DATA_DIR");
  if (!ok) return o;

  const std::string header = metrics::report_csv_header();
  const auto report = lines_of(slurp(dir / "report.csv"));
  o.expect(!report.empty() && report[0] == header, cat("report header: ", report.empty() ? "" : report[0]));
  o.expect(report.size() == 1 + 2 * 2 * 3, cat("report has ", report.size() - 1, " rows, expected 12"));
  for (std::size_t i = 1; i < report.size(); ++i) {
    std::size_t commas = 0;
    for (char ch : report[i]) commas += ch == ',';
    o.expect(commas == 11, cat("report row ", i, " has ", commas + 1, " fields"));
  }
  const auto infer = lines_of(slurp(dir / "infer.csv"));
  o.expect(infer.size() == 2 && infer[0] == header, "infer did not print a header and one row");

  // Artifact round trip: the deployed file, and a package/load of it, score
  // the same windows identically.
  const auto bytes = pipeline::read_file((dir / "deployed" / "model.anml").string());
  const auto model = pipeline::load_model(bytes);
  const auto again = pipeline::load_model(pipeline::package_model(model));
  const auto frame = data::load_csv((dir / "store" / "plant.csv").string(), {});
  const Eigen::VectorXd a = model.score_rows(frame.features);
  const Eigen::VectorXd b = again.score_rows(frame.features);
  double worst = a.size() == b.size() ? (a - b).cwiseAbs().maxCoeff() : INFINITY;
  o.expect(worst <= 1e-15, cat("package/load score drift ", worst));

  const auto preds = lines_of(slurp(dir / "predictions.csv"));
  o.expect(preds.size() == static_cast<std::size_t>(a.size()) + 1, "prediction count mismatch");
  double cli_worst = 0;
  for (std::size_t i = 1; i < preds.size() && i <= static_cast<std::size_t>(a.size()); ++i) {
    std::istringstream row(preds[i]);
    std::string field;
    for (int k = 0; k < 4; ++k) std::getline(row, field, ',');
    cli_worst = std::max(cli_worst, std::fabs(std::stod(field) - a(static_cast<Eigen::Index>(i - 1))));
  }
  o.expect(cli_worst <= 1e-15, cat("CLI infer vs loaded artifact drift ", cli_worst));
  o.note(cat("report rows ", report.size() - 1, ", artifact drift ", worst, ", cli drift ", cli_worst));
  fs::remove_all(dir);
  return o;
}

Outcome wadi_accuracy() {
  Outcome o;
  const char* path = std::getenv("ANOML_WADI_CSV");
  if (!path || !*path) {
    o.skip("set ANOML_WADI_CSV to a prepared WADI frame to run this check");
    return o;
  }
  data::CsvSchema schema;
  if (const char* schema_path = std::getenv("ANOML_WADI_SCHEMA"); schema_path && *schema_path)
    schema = data::schema_from_config(config::parse_file(schema_path));
  const auto frame = data::load_csv(path, schema);
  const auto [train, test] = data::split(frame, 0.5);
  const auto model = pipeline::train_model(train, prep::SrKind::MinMax, detect::DetectorKind::IsolationForest,
                                           prep::kDefaultWindowLen, {}, path);
  pipeline::ScenarioConfig cfg;
  cfg.placement = pipeline::Placement::Cloud;
  const auto report = pipeline::run_scenario(cfg, model, test, 42);
  const double acc = report.metrics.accuracy;
  o.expect(std::fabs(acc - 0.8399) <= 0.10, cat("accuracy ", acc, " outside 0.8399 +/- 0.10"));
  o.note(cat("accuracy ", acc));
  return o;
}

}  // namespace acceptance
