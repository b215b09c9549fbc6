#pragma once

// Evaluation metrics. The positive class is NORMAL:
//   TP = normal predicted normal,     TN = anomalous predicted anomalous,
//   FP = normal predicted anomalous,  FN = anomalous predicted normal.
// AUC ranks scores with Anomalous as the positive class.

#include <chrono>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anoml/dataset.hpp"
#include "anoml/error.hpp"

namespace anoml::metrics {

enum class MetricsErrc { LengthMismatch, Empty, SingleClass, InvalidRepetitions };
std::string_view to_string(MetricsErrc code);
using MetricsError = Error<MetricsErrc>;

using data::Label;

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  // Anomalous-as-positive view for comparison with conventional tooling. FP
  // and FN already name "predicted anomalous" / "predicted normal" errors, so
  // only TP and TN swap.
  ConfusionCounts inverted() const { return {tn, tp, fp, fn}; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> truth);

// A zero denominator yields 0.
double accuracy(const ConfusionCounts& c);
double precision(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);
double f1(const ConfusionCounts& c);

// Mann-Whitney AUC, tied scores count one half.
double auc(std::span<const double> scores, std::span<const Label> truth);

struct Timing {
  double mean_ms = 0;
  double std_ms = 0;
};

// Wall-clock per call, population std.
Timing timeit(const std::function<void()>& op, std::size_t repetitions);

struct MetricReport {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double auc = 0;
  ConfusionCounts counts;
  double inference_ms = 0;       // per instance
  double scale_reduce_s = 0;     // transform time over the evaluated set
  double model_size_kb = 0;
};

MetricReport evaluate(std::span<const Label> predictions, std::span<const double> scores,
                      std::span<const Label> truth, bool invert_positive = false);

// One summary CSV row per run. The metric block is the portion without timing.
std::string report_csv_header();
std::string report_csv_row(std::string_view algorithm, std::string_view sr,
                           std::string_view api, std::string_view platform,
                           const MetricReport& r);
std::string metric_block(const MetricReport& r);  // accuracy..auc + counts, fixed format
std::string report_json(const MetricReport& r);

}  // namespace anoml::metrics
