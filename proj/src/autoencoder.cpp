#include "anoml/detect/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace anoml::detect {

AutoencoderWeights AutoencoderWeights::zeros_like(const AutoencoderWeights& other) {
  AutoencoderWeights z;
  for (std::size_t k = 0; k < 4; ++k) {
    z.W[k] = MatrixXd::Zero(other.W[k].rows(), other.W[k].cols());
    z.b[k] = VectorXd::Zero(other.b[k].size());
  }
  return z;
}

std::size_t AutoencoderWeights::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < 4; ++k) n += static_cast<std::size_t>(W[k].size() + b[k].size());
  return n;
}

VectorXd AutoencoderWeights::flatten() const {
  VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    flat.segment(at, W[k].size()) = W[k].reshaped();
    at += W[k].size();
    flat.segment(at, b[k].size()) = b[k];
    at += b[k].size();
  }
  return flat;
}

void AutoencoderWeights::assign(const VectorXd& flat) {
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    W[k].reshaped() = flat.segment(at, W[k].size());
    at += W[k].size();
    b[k] = flat.segment(at, b[k].size());
    at += b[k].size();
  }
}

namespace {

// Columns are samples throughout: activations are (units x n).
struct ForwardPass {
  std::array<MatrixXd, 5> a;  // a[0] = input, a[4] = output
};

ForwardPass forward(const AutoencoderWeights& w, const MatrixXd& rows) {
  ForwardPass f;
  f.a[0] = rows.transpose();
  for (std::size_t k = 0; k < 4; ++k) {
    MatrixXd z = (w.W[k] * f.a[k]).colwise() + w.b[k];
    f.a[k + 1] = k < 3 ? MatrixXd(z.array().tanh()) : z;
  }
  return f;
}

void check_input(const AutoencoderWeights& w, const MatrixXd& rows) {
  check_dim(rows.cols(), w.W[0].cols());
}

}  // namespace

double reconstruction_loss(const AutoencoderWeights& w, const MatrixXd& rows) {
  check_input(w, rows);
  const auto f = forward(w, rows);
  return (f.a[4] - f.a[0]).squaredNorm() / static_cast<double>(f.a[0].size());
}

AutoencoderWeights reconstruction_gradient(const AutoencoderWeights& w, const MatrixXd& rows,
                                           double* loss) {
  check_input(w, rows);
  const auto f = forward(w, rows);
  const MatrixXd diff = f.a[4] - f.a[0];
  const double scale = 1.0 / static_cast<double>(f.a[0].size());
  if (loss) *loss = diff.squaredNorm() * scale;

  AutoencoderWeights g = AutoencoderWeights::zeros_like(w);
  MatrixXd delta = 2.0 * scale * diff;  // dL/dz at the linear output
  for (std::size_t k = 4; k-- > 0;) {
    g.W[k] = delta * f.a[k].transpose();
    g.b[k] = delta.rowwise().sum();
    if (k > 0) {
      // tanh'(z) = 1 - a^2
      delta = (w.W[k].transpose() * delta).array() * (1.0 - f.a[k].array().square());
    }
  }
  return g;
}

MatrixXd reconstruct(const AutoencoderWeights& w, const MatrixXd& rows) {
  check_input(w, rows);
  return forward(w, rows).a[4].transpose();
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DetectError(DetectErrc::InvalidParameter, "quantile of nothing");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

AutoencoderWeights Autoencoder::initial_weights(std::size_t d, std::size_t hidden,
                                                std::size_t bottleneck, std::uint64_t seed) {
  const std::array<std::size_t, 5> sizes = {d, hidden, bottleneck, hidden, d};
  std::mt19937_64 rng(seed);
  AutoencoderWeights w;
  for (std::size_t k = 0; k < 4; ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[k]));
    std::uniform_real_distribution<double> u(-bound, bound);
    w.W[k].resize(static_cast<Eigen::Index>(sizes[k + 1]), static_cast<Eigen::Index>(sizes[k]));
    for (Eigen::Index j = 0; j < w.W[k].cols(); ++j)
      for (Eigen::Index i = 0; i < w.W[k].rows(); ++i) w.W[k](i, j) = u(rng);
    w.b[k] = VectorXd::Zero(static_cast<Eigen::Index>(sizes[k + 1]));
  }
  return w;
}

Autoencoder Autoencoder::fit(const MatrixXd& train, const Params& params) {
  const auto d = static_cast<std::size_t>(train.cols());
  const std::size_t hidden = params.hidden ? params.hidden : std::max<std::size_t>(2, d / 2);
  const std::size_t bottleneck =
      params.bottleneck ? params.bottleneck : std::max<std::size_t>(1, d / 4);
  if (d < 2 || bottleneck < 1 || bottleneck >= d || hidden < 1)
    throw DetectError(DetectErrc::BadArchitecture,
                      "need d >= 2 and 1 <= bottleneck < d (d=" + std::to_string(d) +
                          ", b=" + std::to_string(bottleneck) + ")");
  if (train.rows() < 1) throw DetectError(DetectErrc::TooFewSamples, "no training rows");
  if (!(params.threshold_quantile >= 0 && params.threshold_quantile <= 1))
    throw DetectError(DetectErrc::InvalidParameter, "threshold quantile must lie in [0, 1]");

  Autoencoder model;
  model.weights_ = initial_weights(d, hidden, bottleneck, params.seed);
  model.epochs_ = params.epochs;
  model.learning_rate_ = params.learning_rate;
  model.seed_ = params.seed;
  model.quantile_ = params.threshold_quantile;

  for (std::size_t e = 0; e < params.epochs; ++e) {
    double loss = 0;
    const auto g = reconstruction_gradient(model.weights_, train, &loss);
    model.loss_history_.push_back(loss);
    for (std::size_t k = 0; k < 4; ++k) {
      model.weights_.W[k] -= params.learning_rate * g.W[k];
      model.weights_.b[k] -= params.learning_rate * g.b[k];
    }
  }
  model.loss_history_.push_back(reconstruction_loss(model.weights_, train));

  const VectorXd errors = model.score_all(train);
  model.threshold_ =
      quantile(std::vector<double>(errors.data(), errors.data() + errors.size()), params.threshold_quantile);
  return model;
}

double Autoencoder::reconstruction_error(const ConstVectorRef& x) const {
  check_dim(x.size(), weights_.W[0].cols());
  VectorXd a = x;
  for (std::size_t k = 0; k < 4; ++k) {
    VectorXd z = weights_.W[k] * a + weights_.b[k];
    a = k < 3 ? VectorXd(z.array().tanh()) : z;
  }
  return (a - x).squaredNorm() / static_cast<double>(x.size());
}

AnomalyScore Autoencoder::score(const ConstVectorRef& x) const {
  return {reconstruction_error(x), false};
}

VectorXd Autoencoder::score_all(const MatrixXd& rows) const {
  const MatrixXd out = reconstruct(weights_, rows);
  return (out - rows).rowwise().squaredNorm() / static_cast<double>(rows.cols());
}

std::array<std::size_t, 3> Autoencoder::layer_sizes() const {
  return {static_cast<std::size_t>(weights_.W[0].cols()), static_cast<std::size_t>(weights_.W[0].rows()),
          static_cast<std::size_t>(weights_.W[1].rows())};
}

void Autoencoder::save(bytes::Writer& out) const {
  const auto sizes = layer_sizes();
  for (auto s : sizes) out.put<std::uint64_t>(s);
  out.put<std::uint64_t>(epochs_);
  out.put<double>(learning_rate_);
  out.put<std::uint64_t>(seed_);
  out.put<double>(quantile_);
  out.put<double>(threshold_);
  const VectorXd flat = weights_.flatten();
  for (Eigen::Index i = 0; i < flat.size(); ++i) out.put<double>(flat(i));
}

Autoencoder Autoencoder::load(bytes::Reader& in) {
  Autoencoder m;
  std::array<std::size_t, 3> sizes{};
  for (auto& s : sizes) s = in.get<std::uint64_t>();
  m.epochs_ = in.get<std::uint64_t>();
  m.learning_rate_ = in.get<double>();
  m.seed_ = in.get<std::uint64_t>();
  m.quantile_ = in.get<double>();
  m.threshold_ = in.get<double>();
  const auto [d, h, b] = sizes;
  if (d < 2 || b < 1 || b >= d || h < 1 || d > in.remaining() || h > in.remaining())
    throw DetectError(DetectErrc::CorruptPayload, "bad autoencoder architecture");
  m.weights_ = AutoencoderWeights::zeros_like(initial_weights(d, h, b, 0));
  const std::size_t count = m.weights_.parameter_count();
  if (count * 8 != in.remaining())
    throw DetectError(DetectErrc::CorruptPayload, "autoencoder weight count mismatch");
  VectorXd flat(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = in.get<double>();
  m.weights_.assign(flat);
  return m;
}

}  // namespace anoml::detect
