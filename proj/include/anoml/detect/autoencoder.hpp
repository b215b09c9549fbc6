#pragma once

// Dense autoencoder d -> h -> b -> h -> d with tanh hidden layers and a linear
// output, trained by full-batch gradient descent on mean squared
// reconstruction error. The anomaly score is the per-sample MSE.

#include <array>
#include <cstdint>
#include <vector>

#include "anoml/bytes.hpp"
#include "anoml/detect/common.hpp"

namespace anoml::detect {

struct AutoencoderWeights {
  std::array<MatrixXd, 4> W;  // W[k] is out_k x in_k
  std::array<VectorXd, 4> b;

  static AutoencoderWeights zeros_like(const AutoencoderWeights& other);
  std::size_t parameter_count() const;
  VectorXd flatten() const;
  void assign(const VectorXd& flat);  // inverse of flatten for the same shapes
};

// Mean over samples and coordinates of the squared reconstruction error of
// `rows` (n x d).
double reconstruction_loss(const AutoencoderWeights& w, const MatrixXd& rows);

// Analytic gradient of reconstruction_loss by backpropagation.
AutoencoderWeights reconstruction_gradient(const AutoencoderWeights& w, const MatrixXd& rows,
                                           double* loss = nullptr);

MatrixXd reconstruct(const AutoencoderWeights& w, const MatrixXd& rows);

class Autoencoder {
 public:
  struct Params {
    std::size_t hidden = 0;      // 0 selects max(2, d / 2)
    std::size_t bottleneck = 0;  // 0 selects max(1, d / 4)
    std::size_t epochs = 500;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    double threshold_quantile = 0.99;
  };

  // Weights start Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases at zero.
  static AutoencoderWeights initial_weights(std::size_t d, std::size_t hidden,
                                            std::size_t bottleneck, std::uint64_t seed);

  static Autoencoder fit(const MatrixXd& train, const Params& params);

  double reconstruction_error(const ConstVectorRef& x) const;
  AnomalyScore score(const ConstVectorRef& x) const;
  VectorXd score_all(const MatrixXd& rows) const;

  double threshold() const { return threshold_; }
  const AutoencoderWeights& weights() const { return weights_; }
  const std::vector<double>& loss_history() const { return loss_history_; }
  std::size_t n_features() const { return static_cast<std::size_t>(weights_.W[0].cols()); }
  std::array<std::size_t, 3> layer_sizes() const;  // d, h, b
  std::size_t epochs() const { return epochs_; }
  double learning_rate() const { return learning_rate_; }
  std::uint64_t seed() const { return seed_; }

  void save(bytes::Writer& out) const;
  static Autoencoder load(bytes::Reader& in);

 private:
  AutoencoderWeights weights_;
  double threshold_ = 0;
  double quantile_ = 0.99;
  std::size_t epochs_ = 0;
  double learning_rate_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> loss_history_;  // loss before each epoch, plus final
};

// Linear-interpolated quantile (q in [0,1]) of the values.
double quantile(std::vector<double> values, double q);

}  // namespace anoml::detect
