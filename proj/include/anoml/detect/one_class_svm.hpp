#pragma once

// One-Class SVM in the primal, trained by sub-gradient descent on
//   1/2 |w|^2 + 1/(nu n) sum_i max(0, rho - <w, phi(x_i)>) - rho
// with phi either the identity or random Fourier features approximating an
// RBF kernel exp(-gamma |x - y|^2).

#include <cstdint>

#include "anoml/bytes.hpp"
#include "anoml/detect/common.hpp"

namespace anoml::detect {

struct FeatureMap {
  enum class Kind : std::uint8_t { Linear = 0, RandomFourier = 1 };

  Kind kind = Kind::Linear;
  std::size_t input_dim = 0;
  std::size_t dim = 0;  // output dimension
  double gamma = 0;
  std::uint64_t seed = 0;
  MatrixXd omega;  // dim x input_dim, entries ~ Normal(0, variance 2 gamma)
  VectorXd phase;  // dim, ~ Uniform[0, 2 pi)

  static FeatureMap linear(std::size_t input_dim);
  static FeatureMap random_fourier(std::size_t input_dim, std::size_t dim, double gamma,
                                   std::uint64_t seed);

  VectorXd apply(const ConstVectorRef& x) const;
  MatrixXd apply_rows(const MatrixXd& rows) const;  // n x dim
};

class OneClassSvm {
 public:
  struct Params {
    double nu = 0.1;
    FeatureMap::Kind map = FeatureMap::Kind::RandomFourier;
    std::size_t rff_dim = 128;
    double gamma = 0;  // <= 0 selects 1 / n_features
    std::size_t epochs = 300;
    double learning_rate = 0.5;
    std::uint64_t seed = 0;
  };

  static constexpr double kDefaultThreshold = 0.0;

  static OneClassSvm fit(const MatrixXd& train, const Params& params);

  // <w, phi(x)> - rho; positive inside the learned support.
  double decision_raw(const ConstVectorRef& x) const;
  // -tanh(raw): in (-1, 1), higher is more anomalous.
  AnomalyScore score(const ConstVectorRef& x) const;
  VectorXd score_all(const MatrixXd& rows) const;

  double threshold() const { return kDefaultThreshold; }
  double nu() const { return nu_; }
  double rho() const { return rho_; }
  const VectorXd& weights() const { return w_; }
  const FeatureMap& feature_map() const { return map_; }
  std::size_t n_features() const { return map_.input_dim; }

  void save(bytes::Writer& out) const;
  static OneClassSvm load(bytes::Reader& in);

 private:
  FeatureMap map_;
  VectorXd w_;
  double rho_ = 0;
  double nu_ = 0.1;
};

}  // namespace anoml::detect
