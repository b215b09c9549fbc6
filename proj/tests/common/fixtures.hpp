#pragma once

#include <random>

#include <Eigen/Dense>

#include "anoml/artifact.hpp"
#include "anoml/dataset.hpp"

namespace fixture {

inline Eigen::MatrixXd gaussian(std::size_t n, std::size_t d, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = g(rng);
  return m;
}

// 600 rows, 3 sensors, spikes in the test half.
inline anoml::data::TimeSeriesFrame sensor_frame(std::uint64_t seed = 21) {
  using anoml::data::AnomalyInjection;
  using anoml::data::InjectionMode;
  return anoml::data::synthesize(600, 3, seed,
                                 {AnomalyInjection{380, 392, InjectionMode::Spike, 6.0, {}},
                                  AnomalyInjection{470, 490, InjectionMode::Ramp, 8.0, {}},
                                  AnomalyInjection{540, 552, InjectionMode::Spike, -6.0, {0}}});
}

inline anoml::pipeline::PipelineModel small_model(anoml::detect::DetectorKind kind,
                                                  anoml::prep::SrKind sr = anoml::prep::SrKind::MinMax,
                                                  std::size_t window = 4) {
  const auto frame = sensor_frame();
  const auto [train, test] = anoml::data::split(frame, 0.5);
  anoml::detect::TrainOptions opts;
  opts.isolation_forest.n_trees = 50;
  opts.one_class_svm.epochs = 100;
  opts.autoencoder.epochs = 100;
  return anoml::pipeline::train_model(train, sr, kind, window, opts, "fixture");
}

}  // namespace fixture
