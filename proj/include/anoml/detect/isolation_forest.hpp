#pragma once

// Isolation Forest: random axis-aligned partition trees built on small
// subsamples. Anomalies are isolated in fewer splits, so their average path
// length is short and the score 2^(-E[h(x)] / c(psi)) is high.

#include <cstdint>
#include <vector>

#include "anoml/bytes.hpp"
#include "anoml/detect/common.hpp"

namespace anoml::detect {

inline constexpr double kEulerGamma = 0.5772156649;

// H(i) ~ ln(i) + Euler-Mascheroni, used for every i >= 1.
double harmonic_approx(double i);

// Average unsuccessful-search path length of a BST with m nodes:
// c(m) = 2 H(m-1) - 2 (m-1) / m, and 0 for m <= 1.
double average_path_length(double m);

struct IsolationNode {
  std::int32_t feature = -1;  // -1 marks an external node
  double split = 0;           // x[feature] < split goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t size = 0;     // training points reaching an external node

  bool external() const { return feature < 0; }
};

struct IsolationTree {
  std::vector<IsolationNode> nodes;  // nodes[0] is the root
};

class IsolationForest {
 public:
  struct Params {
    std::size_t n_trees = 100;
    std::size_t subsample_size = 256;
    std::uint64_t seed = 0;
  };

  static constexpr double kDefaultThreshold = 0.5;

  // Each tree sees `subsample_size` rows drawn without replacement, or with
  // replacement when the training set is smaller than that.
  static IsolationForest fit(const MatrixXd& train, const Params& params);

  double path_length(const ConstVectorRef& x) const;  // E[h(x)] over trees
  AnomalyScore score(const ConstVectorRef& x) const;
  VectorXd score_all(const MatrixXd& rows) const;

  double threshold() const { return threshold_; }
  void set_threshold(double t) { threshold_ = t; }
  // Threshold at the (1 - contamination) quantile of the given scores.
  void set_contamination(const VectorXd& train_scores, double contamination);

  std::size_t n_features() const { return n_features_; }
  std::size_t subsample_size() const { return subsample_size_; }
  std::size_t height_limit() const { return height_limit_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<IsolationTree>& trees() const { return trees_; }

  void save(bytes::Writer& out) const;
  static IsolationForest load(bytes::Reader& in);

 private:
  std::vector<IsolationTree> trees_;
  std::size_t n_features_ = 0;
  std::size_t subsample_size_ = 0;
  std::size_t height_limit_ = 0;
  std::uint64_t seed_ = 0;
  double threshold_ = kDefaultThreshold;
};

}  // namespace anoml::detect
