#include "anoml/detect/one_class_svm.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace anoml::detect {

FeatureMap FeatureMap::linear(std::size_t input_dim) {
  FeatureMap m;
  m.kind = Kind::Linear;
  m.input_dim = input_dim;
  m.dim = input_dim;
  return m;
}

FeatureMap FeatureMap::random_fourier(std::size_t input_dim, std::size_t dim, double gamma,
                                      std::uint64_t seed) {
  if (dim < 1 || !(gamma > 0))
    throw DetectError(DetectErrc::InvalidParameter, "random Fourier map needs dim >= 1, gamma > 0");
  FeatureMap m;
  m.kind = Kind::RandomFourier;
  m.input_dim = input_dim;
  m.dim = dim;
  m.gamma = gamma;
  m.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 * gamma));
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
  m.omega.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(input_dim));
  for (Eigen::Index i = 0; i < m.omega.rows(); ++i)
    for (Eigen::Index j = 0; j < m.omega.cols(); ++j) m.omega(i, j) = normal(rng);
  m.phase.resize(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.phase.size(); ++i) m.phase(i) = uniform(rng);
  return m;
}

VectorXd FeatureMap::apply(const ConstVectorRef& x) const {
  check_dim(x.size(), static_cast<Eigen::Index>(input_dim));
  if (kind == Kind::Linear) return x;
  return std::sqrt(2.0 / static_cast<double>(dim)) * (omega * x + phase).array().cos().matrix();
}

MatrixXd FeatureMap::apply_rows(const MatrixXd& rows) const {
  check_dim(rows.cols(), static_cast<Eigen::Index>(input_dim));
  if (kind == Kind::Linear) return rows;
  MatrixXd z = (rows * omega.transpose()).rowwise() + phase.transpose();
  return std::sqrt(2.0 / static_cast<double>(dim)) * z.array().cos().matrix();
}

OneClassSvm OneClassSvm::fit(const MatrixXd& train, const Params& params) {
  if (!(params.nu > 0 && params.nu < 1))
    throw DetectError(DetectErrc::InvalidNu, "nu must lie in (0, 1)");
  if (train.rows() < 1) throw DetectError(DetectErrc::TooFewSamples, "no training rows");
  if (!(params.learning_rate > 0))
    throw DetectError(DetectErrc::InvalidParameter, "learning rate must be positive");

  const auto d = static_cast<std::size_t>(train.cols());
  OneClassSvm model;
  model.nu_ = params.nu;
  if (params.map == FeatureMap::Kind::Linear) {
    model.map_ = FeatureMap::linear(d);
  } else {
    const double gamma = params.gamma > 0 ? params.gamma : 1.0 / static_cast<double>(std::max<std::size_t>(d, 1));
    model.map_ = FeatureMap::random_fourier(d, params.rff_dim, gamma, mix_seed(params.seed));
  }

  const MatrixXd phi = model.map_.apply_rows(train);  // n x D
  const double n = static_cast<double>(phi.rows());
  const double inv_nu_n = 1.0 / (params.nu * n);

  VectorXd w = VectorXd::Zero(phi.cols());
  double rho = 0;
  VectorXd w_avg = VectorXd::Zero(phi.cols());
  double rho_avg = 0;
  std::size_t averaged = 0;
  // The returned model is the mean of the second-half iterates.
  const std::size_t average_from = params.epochs / 2;

  for (std::size_t t = 0; t < params.epochs; ++t) {
    const VectorXd margins = phi * w;
    VectorXd grad_w = w;
    double grad_rho = -1.0;
    const Eigen::Array<bool, Eigen::Dynamic, 1> violated = margins.array() < rho;
    for (Eigen::Index i = 0; i < phi.rows(); ++i) {
      if (violated(i)) {
        grad_w.noalias() -= inv_nu_n * phi.row(i).transpose();
        grad_rho += inv_nu_n;
      }
    }
    const double step = params.learning_rate / std::sqrt(static_cast<double>(t) + 1.0);
    w -= step * grad_w;
    rho -= step * grad_rho;
    if (t >= average_from) {
      w_avg += w;
      rho_avg += rho;
      ++averaged;
    }
  }
  if (averaged > 0) {
    model.w_ = w_avg / static_cast<double>(averaged);
    model.rho_ = rho_avg / static_cast<double>(averaged);
  } else {
    model.w_ = w;
    model.rho_ = rho;
  }
  return model;
}

double OneClassSvm::decision_raw(const ConstVectorRef& x) const {
  return w_.dot(map_.apply(x)) - rho_;
}

AnomalyScore OneClassSvm::score(const ConstVectorRef& x) const {
  return {-std::tanh(decision_raw(x)), true};
}

VectorXd OneClassSvm::score_all(const MatrixXd& rows) const {
  const VectorXd raw = (map_.apply_rows(rows) * w_).array() - rho_;
  return -raw.array().tanh();
}

void OneClassSvm::save(bytes::Writer& out) const {
  out.put<std::uint8_t>(static_cast<std::uint8_t>(map_.kind));
  out.put<std::uint64_t>(map_.input_dim);
  out.put<std::uint64_t>(map_.dim);
  out.put<double>(map_.gamma);
  out.put<std::uint64_t>(map_.seed);
  out.put<double>(nu_);
  out.put<double>(rho_);
  for (Eigen::Index i = 0; i < w_.size(); ++i) out.put<double>(w_(i));
  if (map_.kind == FeatureMap::Kind::RandomFourier) {
    for (Eigen::Index i = 0; i < map_.omega.rows(); ++i)
      for (Eigen::Index j = 0; j < map_.omega.cols(); ++j) out.put<double>(map_.omega(i, j));
    for (Eigen::Index i = 0; i < map_.phase.size(); ++i) out.put<double>(map_.phase(i));
  }
}

OneClassSvm OneClassSvm::load(bytes::Reader& in) {
  OneClassSvm m;
  const auto kind = in.get<std::uint8_t>();
  if (kind > 1) throw DetectError(DetectErrc::CorruptPayload, "unknown feature map");
  m.map_.kind = static_cast<FeatureMap::Kind>(kind);
  m.map_.input_dim = in.get<std::uint64_t>();
  m.map_.dim = in.get<std::uint64_t>();
  m.map_.gamma = in.get<double>();
  m.map_.seed = in.get<std::uint64_t>();
  m.nu_ = in.get<double>();
  m.rho_ = in.get<double>();
  const std::size_t doubles =
      m.map_.dim + (kind == 1 ? m.map_.dim * m.map_.input_dim + m.map_.dim : 0);
  if (m.map_.dim == 0 || m.map_.dim > in.remaining() || m.map_.input_dim > in.remaining() ||
      doubles * 8 > in.remaining() ||
      (m.map_.kind == FeatureMap::Kind::Linear && m.map_.dim != m.map_.input_dim))
    throw DetectError(DetectErrc::CorruptPayload, "bad one-class SVM dimensions");
  m.w_.resize(static_cast<Eigen::Index>(m.map_.dim));
  for (Eigen::Index i = 0; i < m.w_.size(); ++i) m.w_(i) = in.get<double>();
  if (m.map_.kind == FeatureMap::Kind::RandomFourier) {
    m.map_.omega.resize(static_cast<Eigen::Index>(m.map_.dim), static_cast<Eigen::Index>(m.map_.input_dim));
    for (Eigen::Index i = 0; i < m.map_.omega.rows(); ++i)
      for (Eigen::Index j = 0; j < m.map_.omega.cols(); ++j) m.map_.omega(i, j) = in.get<double>();
    m.map_.phase.resize(static_cast<Eigen::Index>(m.map_.dim));
    for (Eigen::Index i = 0; i < m.map_.phase.size(); ++i) m.map_.phase(i) = in.get<double>();
  }
  return m;
}

}  // namespace anoml::detect
