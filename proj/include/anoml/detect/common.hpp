#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "anoml/dataset.hpp"
#include "anoml/error.hpp"

namespace anoml::detect {

enum class DetectErrc {
  TooFewSamples,
  DimensionMismatch,
  InvalidNu,
  BadArchitecture,
  InvalidParameter,
  CorruptPayload,
};

std::string_view to_string(DetectErrc code);
using DetectError = Error<DetectErrc>;

using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstVectorRef = Eigen::Ref<const Eigen::VectorXd>;

// Higher is more anomalous for every detector. `normalized` marks scores with
// a fixed range: (0,1] for Isolation Forest, (-1,1) for One-Class SVM.
struct AnomalyScore {
  double value = 0;
  bool normalized = false;
};

// Anomalous iff score > threshold; a score equal to the threshold is Normal.
inline data::Label classify(double score, double threshold) {
  return score > threshold ? data::Label::Anomalous : data::Label::Normal;
}
inline data::Label classify(const AnomalyScore& score, double threshold) {
  return classify(score.value, threshold);
}

// splitmix64 step; derives independent per-component seeds from one seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline void check_dim(Eigen::Index got, Eigen::Index want) {
  if (got != want)
    throw DetectError(DetectErrc::DimensionMismatch,
                      "expected " + std::to_string(want) + " features, got " + std::to_string(got));
}

}  // namespace anoml::detect
