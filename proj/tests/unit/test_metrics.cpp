#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <thread>

#include "anoml/metrics.hpp"
#include "oracles.hpp"

using namespace anoml::metrics;
using anoml::data::Label;

namespace {

constexpr Label N = Label::Normal;
constexpr Label A = Label::Anomalous;

template <typename F>
MetricsErrc error_of(F&& f) {
  try {
    f();
  } catch (const MetricsError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no MetricsError thrown";
  return MetricsErrc::Empty;
}

}  // namespace

TEST(Metrics, ConfusionOrientation) {
  const std::vector<Label> preds{N, N, A, A}, truth{N, A, A, N};
  const auto c = confusion(preds, truth);
  EXPECT_EQ(c, (ConfusionCounts{1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(accuracy(c), 0.5);
  EXPECT_DOUBLE_EQ(precision(c), 0.5);
  EXPECT_DOUBLE_EQ(recall(c), 0.5);
  EXPECT_DOUBLE_EQ(f1(c), 0.5);

  const std::vector<Label> p2{N, A}, t2{N, A};
  EXPECT_EQ(confusion(p2, t2), (ConfusionCounts{1, 1, 0, 0}));
  const std::vector<Label> all_n(5, N), all_a(5, A);
  EXPECT_EQ(confusion(all_n, all_a).fn, 5u);
}

TEST(Metrics, Formulas) {
  const ConfusionCounts c{2, 0, 1, 4};
  EXPECT_DOUBLE_EQ(f1(c), 4.0 / 9.0);
  EXPECT_DOUBLE_EQ(precision({0, 3, 0, 2}), 0.0);
  EXPECT_DOUBLE_EQ(recall({0, 3, 2, 0}), 0.0);
  EXPECT_DOUBLE_EQ(f1({0, 3, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(accuracy({}), 0.0);
}

TEST(Metrics, Errors) {
  const std::vector<Label> a{N}, b{N, A}, empty;
  EXPECT_EQ(error_of([&] { confusion(a, b); }), MetricsErrc::LengthMismatch);
  EXPECT_EQ(error_of([&] { confusion(empty, empty); }), MetricsErrc::Empty);
  const std::vector<double> s{0.1, 0.2};
  const std::vector<Label> one_class{N, N};
  EXPECT_EQ(error_of([&] { auc(s, one_class); }), MetricsErrc::SingleClass);
  EXPECT_EQ(error_of([] { timeit([] {}, 0); }), MetricsErrc::InvalidRepetitions);
}

TEST(Metrics, AucExamples) {
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.9, 0.1}, std::vector<Label>{A, N}), 1.0);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<Label>{A, N, A}), 0.5);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.8, 0.6, 0.4, 0.2}, std::vector<Label>{A, N, A, N}), 0.75);
}

TEST(Metrics, AucMatchesPairwiseOracle) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 11;
    std::vector<double> scores(n);
    std::vector<Label> truth(n);
    std::vector<int> anomalous(n);
    std::uniform_int_distribution<int> level(0, 4);  // coarse scores force ties
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = level(rng) * 0.25;
      anomalous[i] = static_cast<int>(rng() % 2);
      truth[i] = anomalous[i] ? A : N;
    }
    anomalous[0] = 1, truth[0] = A;
    anomalous[1] = 0, truth[1] = N;
    EXPECT_DOUBLE_EQ(auc(scores, truth), oracle::pairwise_auc(scores, anomalous));
  }
}

TEST(Metrics, AucInvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(12), t(12);
    std::vector<Label> truth(12);
    for (int i = 0; i < 12; ++i) {
      s[static_cast<std::size_t>(i)] = g(rng);
      t[static_cast<std::size_t>(i)] = std::exp(3 * s[static_cast<std::size_t>(i)]) + 7;
      truth[static_cast<std::size_t>(i)] = i % 3 ? N : A;
    }
    EXPECT_DOUBLE_EQ(auc(s, truth), auc(t, truth));
  }
}

TEST(Metrics, PerfectAndInverted) {
  const std::vector<Label> truth{N, A, N, A, N};
  const auto perfect = evaluate(truth, std::vector<double>{0, 1, 0, 1, 0}, truth);
  EXPECT_DOUBLE_EQ(perfect.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(perfect.precision, 1.0);
  EXPECT_DOUBLE_EQ(perfect.recall, 1.0);
  EXPECT_DOUBLE_EQ(perfect.f1, 1.0);
  EXPECT_DOUBLE_EQ(perfect.auc, 1.0);

  const std::vector<Label> flipped{A, N, A, N, A};
  const auto worst = evaluate(flipped, std::vector<double>{1, 0, 1, 0, 1}, truth);
  EXPECT_DOUBLE_EQ(worst.accuracy, 0.0);
  EXPECT_DOUBLE_EQ(worst.precision, 0.0);
  EXPECT_DOUBLE_EQ(worst.recall, 0.0);
  EXPECT_DOUBLE_EQ(worst.f1, 0.0);
  EXPECT_DOUBLE_EQ(worst.auc, 0.0);
}

TEST(Metrics, InvertPositive) {
  const std::vector<Label> preds{A, A, A, N}, truth{N, N, A, A};
  const std::vector<double> scores{1, 1, 1, 0};
  const auto normal_pos = evaluate(preds, scores, truth, false);
  const auto anomal_pos = evaluate(preds, scores, truth, true);
  EXPECT_EQ(normal_pos.counts, (ConfusionCounts{0, 1, 2, 1}));
  // Counts keep the normal-positive orientation either way.
  EXPECT_EQ(anomal_pos.counts, normal_pos.counts);
  EXPECT_DOUBLE_EQ(normal_pos.precision, 0.0);
  EXPECT_DOUBLE_EQ(normal_pos.recall, 0.0);
  // Conventional view: 1 caught anomaly, 2 false alarms, 1 miss.
  EXPECT_DOUBLE_EQ(anomal_pos.precision, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(anomal_pos.recall, 0.5);
  EXPECT_DOUBLE_EQ(normal_pos.accuracy, anomal_pos.accuracy);
}

TEST(Metrics, Timeit) {
  const auto once = timeit([] {}, 1);
  EXPECT_EQ(once.std_ms, 0.0);
  EXPECT_GE(timeit([] {}, 100).mean_ms, 0.0);
  const auto sleepy = timeit([] { std::this_thread::sleep_for(std::chrono::milliseconds(1)); }, 50);
  EXPECT_GE(sleepy.mean_ms, 1.0);
  EXPECT_LE(sleepy.mean_ms, 50.0);
}

TEST(Metrics, Serialization) {
  MetricReport r;
  r.accuracy = 0.5;
  r.inference_ms = 1.25;
  const auto header = report_csv_header();
  EXPECT_EQ(header,
            "Algorithm,SR,API,Platform,Inference Time (ms),AUC,Accuracy,Recall,Precision,F1-Score,"
            "Scaling/Reduction Time (s),Model Size (KB)");
  const auto row = report_csv_row("IF", "MM", "native", "fog", r);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
  EXPECT_EQ(row.rfind("IF,MM,native,fog,1.250000,", 0), 0u);
  EXPECT_NE(metric_block(r).find("accuracy=0.5 "), std::string::npos);
  EXPECT_NE(report_json(r).find("\"accuracy\":0.5"), std::string::npos);
}
