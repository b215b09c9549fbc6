#pragma once

// Scaling, reduction and sliding windows.
//
// Scalers keep the feature axis; reducers collapse each time step's feature
// vector to a single statistic so the series becomes univariate. All moments
// are population moments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "anoml/dataset.hpp"
#include "anoml/error.hpp"

namespace anoml::prep {

enum class PrepErrc {
  FrameTooShort,
  FeatureCountMismatch,
  EmptyFeatureVector,
  EmptyData,
  UnknownTransform,
  BadTensor,
};

std::string_view to_string(PrepErrc code);
using PrepError = Error<PrepErrc>;

enum class ScalerKind { None, MinMax, Standard };
enum class ReducerKind { Average, StDev, Skew, Kurtosis, Mad };

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct ScalerParams {
  ScalerKind kind = ScalerKind::None;
  RowVector<Scalar> offset;  // min or mean
  RowVector<Scalar> scale;   // max - min or population std
  std::vector<bool> degenerate;

  Eigen::Index n_features() const { return offset.size(); }
  bool any_degenerate() const {
    return std::find(degenerate.begin(), degenerate.end(), true) != degenerate.end();
  }
};

// Fits per-feature statistics on training rows. A feature whose range (MinMax)
// or standard deviation (Standard) is zero is flagged degenerate and maps to 0.
template <typename Derived>
ScalerParams<typename Derived::Scalar> fit_scaler(ScalerKind kind,
                                                  const Eigen::MatrixBase<Derived>& train) {
  using Scalar = typename Derived::Scalar;
  if (train.rows() == 0 || train.cols() == 0)
    throw PrepError(PrepErrc::EmptyData, "cannot fit a scaler on empty data");
  const Eigen::Index d = train.cols();
  ScalerParams<Scalar> p;
  p.kind = kind;
  p.offset = RowVector<Scalar>::Zero(d);
  p.scale = RowVector<Scalar>::Ones(d);
  p.degenerate.assign(static_cast<std::size_t>(d), false);
  switch (kind) {
    case ScalerKind::None: break;
    case ScalerKind::MinMax:
      p.offset = train.colwise().minCoeff();
      p.scale = train.colwise().maxCoeff() - p.offset;
      break;
    case ScalerKind::Standard: {
      p.offset = train.colwise().mean();
      const auto centered = (train.rowwise() - p.offset).eval();
      p.scale = (centered.array().square().colwise().sum() / static_cast<Scalar>(train.rows()))
                    .sqrt()
                    .matrix();
      break;
    }
  }
  // A constant column can leave a rounding-level std behind, so test the
  // range directly.
  if (kind != ScalerKind::None)
    for (Eigen::Index j = 0; j < d; ++j)
      p.degenerate[static_cast<std::size_t>(j)] =
          !(p.scale(j) > Scalar(0)) || train.col(j).minCoeff() == train.col(j).maxCoeff();
  return p;
}

template <typename Scalar, typename Derived>
Matrix<Scalar> apply_scaler(const ScalerParams<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != p.n_features())
    throw PrepError(PrepErrc::FeatureCountMismatch,
                    "scaler fitted on " + std::to_string(p.n_features()) + " features, got " +
                        std::to_string(x.cols()));
  Matrix<Scalar> out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (p.degenerate[static_cast<std::size_t>(j)])
      out.col(j).setZero();
    else
      out.col(j) = (x.col(j).array() - p.offset(j)) / p.scale(j);
  }
  return out;
}

namespace detail {

template <typename Scalar>
Scalar median_inplace(std::vector<Scalar>& v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const Scalar upper = *mid;
  if (n % 2 == 1) return upper;
  const Scalar lower = *std::max_element(v.begin(), mid);
  return (lower + upper) / Scalar(2);
}

}  // namespace detail

// One statistic over a feature vector. Skew and Kurtosis (excess) are 0 when
// every entry is equal.
template <typename Derived>
typename Derived::Scalar reduce_vector(const Eigen::DenseBase<Derived>& x, ReducerKind kind) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  if (n == 0) throw PrepError(PrepErrc::EmptyFeatureVector, "cannot reduce an empty vector");
  const Scalar mean = x.mean();
  switch (kind) {
    case ReducerKind::Average: return mean;
    case ReducerKind::StDev:
      return std::sqrt((x.derived().array() - mean).square().mean());
    case ReducerKind::Skew:
    case ReducerKind::Kurtosis: {
      if (x.minCoeff() == x.maxCoeff()) return Scalar(0);
      const auto dev = (x.derived().array() - mean).eval();
      const Scalar m2 = dev.square().mean();
      if (!(m2 > Scalar(0))) return Scalar(0);
      if (kind == ReducerKind::Skew) return dev.cube().mean() / std::pow(m2, Scalar(1.5));
      return dev.square().square().mean() / (m2 * m2) - Scalar(3);
    }
    case ReducerKind::Mad: {
      std::vector<Scalar> v(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = x.derived()(i);
      const Scalar med = detail::median_inplace(v);
      for (Eigen::Index i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = std::abs(x.derived()(i) - med);
      return detail::median_inplace(v);
    }
  }
  return Scalar(0);
}

// Collapses a (time x features) block row-wise into a (time x 1) column.
template <typename Derived>
Vector<typename Derived::Scalar> reduce(const Eigen::MatrixBase<Derived>& block, ReducerKind kind) {
  if (block.cols() == 0)
    throw PrepError(PrepErrc::EmptyFeatureVector, "cannot reduce zero features");
  Vector<typename Derived::Scalar> out(block.rows());
  for (Eigen::Index i = 0; i < block.rows(); ++i) {
    const RowVector<typename Derived::Scalar> row = block.row(i);
    out(i) = reduce_vector(row, kind);
  }
  return out;
}

// Scaler or reducer applied ahead of windowing ("SR").
enum class SrKind { None, MinMax, Standard, Average, StDev, Skew, Kurtosis, Mad };

std::string_view to_string(SrKind kind);       // "none", "minmax", ...
std::string_view short_label(SrKind kind);     // "NS", "MM", "SS", "Average", ...
std::optional<SrKind> sr_from_string(std::string_view s);
bool is_reducer(SrKind kind);
ScalerKind scaler_kind(SrKind kind);   // None for reducers
ReducerKind reducer_kind(SrKind kind); // precondition: is_reducer(kind)

struct Transform {
  SrKind kind = SrKind::None;
  ScalerParams<double> scaler;  // fitted parameters when kind is a scaler

  std::size_t input_features() const { return static_cast<std::size_t>(scaler.n_features()); }
  std::size_t output_features() const { return is_reducer(kind) ? 1 : input_features(); }
};

// Scalers are fitted here; reducers carry no state but still record the
// input width so dimension checks work at inference.
Transform fit_transform(SrKind kind, const Eigen::MatrixXd& train);
Eigen::MatrixXd apply_transform(const Transform& t, const Eigen::MatrixXd& rows);

// n_windows x window_len x n_features, stored as one row-major row per window.
struct WindowTensor {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> data;
  std::size_t window_len = 0;
  std::size_t n_features = 0;
  std::vector<data::Label> labels;  // Anomalous iff any covered row is
  std::vector<std::size_t> start_rows;
  std::string source_id;
  std::vector<std::string> transform_chain;

  std::size_t n_windows() const { return static_cast<std::size_t>(data.rows()); }
  // window_len x n_features view of window i.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> window(
      std::size_t i) const;
};

inline constexpr std::size_t kDefaultWindowLen = 30;

WindowTensor make_windows(const Eigen::MatrixXd& rows, const std::vector<data::Label>& labels,
                          std::size_t window_len, std::size_t stride = 1);
WindowTensor make_windows(const data::TimeSeriesFrame& frame, std::size_t window_len,
                          std::size_t stride = 1);

// Header: three u64 dims; body: row-major f64, little-endian.
std::vector<std::uint8_t> serialize(const WindowTensor& t);
WindowTensor deserialize_tensor(std::span<const std::uint8_t> bytes);

}  // namespace anoml::prep
