#include "anoml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

namespace anoml::metrics {

std::string_view to_string(MetricsErrc code) {
  switch (code) {
    case MetricsErrc::LengthMismatch: return "LengthMismatch";
    case MetricsErrc::Empty: return "Empty";
    case MetricsErrc::SingleClass: return "SingleClass";
    case MetricsErrc::InvalidRepetitions: return "InvalidRepetitions";
  }
  return "?";
}

ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> truth) {
  if (predictions.size() != truth.size())
    throw MetricsError(MetricsErrc::LengthMismatch, "predictions and truth differ in length");
  if (truth.empty()) throw MetricsError(MetricsErrc::Empty, "nothing to evaluate");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool truly_normal = truth[i] == Label::Normal;
    const bool said_normal = predictions[i] == Label::Normal;
    if (truly_normal && said_normal) ++c.tp;
    else if (!truly_normal && !said_normal) ++c.tn;
    else if (truly_normal) ++c.fp;
    else ++c.fn;
  }
  return c;
}

namespace {
double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

double accuracy(const ConfusionCounts& c) { return ratio(c.tp + c.tn, c.total()); }
double precision(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fp); }
double recall(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fn); }
double f1(const ConfusionCounts& c) { return ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn); }

double auc(std::span<const double> scores, std::span<const Label> truth) {
  if (scores.size() != truth.size())
    throw MetricsError(MetricsErrc::LengthMismatch, "scores and truth differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  // Sum of average ranks (1-based) of the anomalous instances.
  double rank_sum = 0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (truth[order[k]] == Label::Anomalous) {
        rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0)
    throw MetricsError(MetricsErrc::SingleClass, "AUC needs both classes");
  const double p = static_cast<double>(positives);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

Timing timeit(const std::function<void()>& op, std::size_t repetitions) {
  if (repetitions < 1) throw MetricsError(MetricsErrc::InvalidRepetitions, "repetitions must be >= 1");
  std::vector<double> samples;
  samples.reserve(repetitions);
  for (std::size_t i = 0; i < repetitions; ++i) {
    const auto start = std::chrono::steady_clock::now();
    op();
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(repetitions);
  double sq = 0;
  for (double s : samples) sq += (s - mean) * (s - mean);
  return {mean, std::sqrt(sq / static_cast<double>(repetitions))};
}

MetricReport evaluate(std::span<const Label> predictions, std::span<const double> scores,
                      std::span<const Label> truth, bool invert_positive) {
  MetricReport r;
  r.counts = confusion(predictions, truth);
  const ConfusionCounts c = invert_positive ? r.counts.inverted() : r.counts;
  r.accuracy = accuracy(c);
  r.precision = precision(c);
  r.recall = recall(c);
  r.f1 = f1(c);
  const bool both = std::find(truth.begin(), truth.end(), Label::Normal) != truth.end() &&
                    std::find(truth.begin(), truth.end(), Label::Anomalous) != truth.end();
  r.auc = both ? auc(scores, truth) : 0.0;
  return r;
}

namespace {
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}
}  // namespace

std::string report_csv_header() {
  return "Algorithm,SR,API,Platform,Inference Time (ms),AUC,Accuracy,Recall,Precision,F1-Score,"
         "Scaling/Reduction Time (s),Model Size (KB)";
}

std::string report_csv_row(std::string_view algorithm, std::string_view sr,
                           std::string_view api, std::string_view platform, const MetricReport& r) {
  std::string row;
  row += algorithm;
  row += ',';
  row += sr;
  row += ',';
  row += api;
  row += ',';
  row += platform;
  for (double v : {r.inference_ms, r.auc, r.accuracy, r.recall, r.precision, r.f1,
                   r.scale_reduce_s, r.model_size_kb}) {
    row += ',';
    row += fmt(v);
  }
  return row;
}

std::string metric_block(const MetricReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "accuracy=%.17g precision=%.17g recall=%.17g f1=%.17g auc=%.17g "
                "tp=%zu tn=%zu fp=%zu fn=%zu",
                r.accuracy, r.precision, r.recall, r.f1, r.auc, r.counts.tp, r.counts.tn,
                r.counts.fp, r.counts.fn);
  return buf;
}

std::string report_json(const MetricReport& r) {
  nlohmann::json j;
  j["accuracy"] = r.accuracy;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["auc"] = r.auc;
  j["counts"] = {{"tp", r.counts.tp}, {"tn", r.counts.tn}, {"fp", r.counts.fp}, {"fn", r.counts.fn}};
  j["inference_ms"] = r.inference_ms;
  j["scale_reduce_s"] = r.scale_reduce_s;
  j["model_size_kb"] = r.model_size_kb;
  return j.dump();
}

}  // namespace anoml::metrics
