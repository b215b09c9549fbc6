#include "anoml/preprocess.hpp"

#include <cctype>

#include "anoml/bytes.hpp"

namespace anoml::prep {

std::string_view to_string(PrepErrc code) {
  switch (code) {
    case PrepErrc::FrameTooShort: return "FrameTooShort";
    case PrepErrc::FeatureCountMismatch: return "FeatureCountMismatch";
    case PrepErrc::EmptyFeatureVector: return "EmptyFeatureVector";
    case PrepErrc::EmptyData: return "EmptyData";
    case PrepErrc::UnknownTransform: return "UnknownTransform";
    case PrepErrc::BadTensor: return "BadTensor";
  }
  return "?";
}

std::string_view to_string(SrKind kind) {
  switch (kind) {
    case SrKind::None: return "none";
    case SrKind::MinMax: return "minmax";
    case SrKind::Standard: return "standard";
    case SrKind::Average: return "average";
    case SrKind::StDev: return "stdev";
    case SrKind::Skew: return "skew";
    case SrKind::Kurtosis: return "kurtosis";
    case SrKind::Mad: return "mad";
  }
  return "?";
}

std::string_view short_label(SrKind kind) {
  switch (kind) {
    case SrKind::None: return "NS";
    case SrKind::MinMax: return "MM";
    case SrKind::Standard: return "SS";
    case SrKind::Average: return "Average";
    case SrKind::StDev: return "StDev";
    case SrKind::Skew: return "Skew";
    case SrKind::Kurtosis: return "Kurtosis";
    case SrKind::Mad: return "MAD";
  }
  return "?";
}

std::optional<SrKind> sr_from_string(std::string_view s) {
  std::string lower(s);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "none" || lower == "ns") return SrKind::None;
  if (lower == "minmax" || lower == "mm") return SrKind::MinMax;
  if (lower == "standard" || lower == "ss") return SrKind::Standard;
  if (lower == "average" || lower == "avg" || lower == "mean") return SrKind::Average;
  if (lower == "stdev" || lower == "std") return SrKind::StDev;
  if (lower == "skew") return SrKind::Skew;
  if (lower == "kurtosis") return SrKind::Kurtosis;
  if (lower == "mad") return SrKind::Mad;
  return std::nullopt;
}

bool is_reducer(SrKind kind) {
  return kind != SrKind::None && kind != SrKind::MinMax && kind != SrKind::Standard;
}

ScalerKind scaler_kind(SrKind kind) {
  switch (kind) {
    case SrKind::MinMax: return ScalerKind::MinMax;
    case SrKind::Standard: return ScalerKind::Standard;
    default: return ScalerKind::None;
  }
}

ReducerKind reducer_kind(SrKind kind) {
  switch (kind) {
    case SrKind::Average: return ReducerKind::Average;
    case SrKind::StDev: return ReducerKind::StDev;
    case SrKind::Skew: return ReducerKind::Skew;
    case SrKind::Kurtosis: return ReducerKind::Kurtosis;
    case SrKind::Mad: return ReducerKind::Mad;
    default: throw PrepError(PrepErrc::UnknownTransform, "not a reducer");
  }
}

Transform fit_transform(SrKind kind, const Eigen::MatrixXd& train) {
  Transform t;
  t.kind = kind;
  t.scaler = fit_scaler(scaler_kind(kind), train);
  return t;
}

Eigen::MatrixXd apply_transform(const Transform& t, const Eigen::MatrixXd& rows) {
  if (is_reducer(t.kind)) {
    if (static_cast<std::size_t>(rows.cols()) != t.input_features())
      throw PrepError(PrepErrc::FeatureCountMismatch,
                      "transform expects " + std::to_string(t.input_features()) + " features, got " +
                          std::to_string(rows.cols()));
    return reduce(rows, reducer_kind(t.kind));
  }
  return apply_scaler(t.scaler, rows);
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
WindowTensor::window(std::size_t i) const {
  return {data.row(static_cast<Eigen::Index>(i)).data(), static_cast<Eigen::Index>(window_len),
          static_cast<Eigen::Index>(n_features)};
}

WindowTensor make_windows(const Eigen::MatrixXd& rows, const std::vector<data::Label>& labels,
                          std::size_t window_len, std::size_t stride) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (window_len < 1 || stride < 1 || n < window_len)
    throw PrepError(PrepErrc::FrameTooShort, std::to_string(n) + " rows cannot hold a window of " +
                                                 std::to_string(window_len));
  const std::size_t d = static_cast<std::size_t>(rows.cols());
  const std::size_t count = (n - window_len) / stride + 1;
  WindowTensor t;
  t.window_len = window_len;
  t.n_features = d;
  t.data.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(window_len * d));
  t.labels.reserve(count);
  t.start_rows.reserve(count);
  // Running count of anomalous rows inside the window.
  std::vector<std::size_t> prefix(n + 1, 0);
  for (std::size_t r = 0; r < n; ++r)
    prefix[r + 1] = prefix[r] + (r < labels.size() && labels[r] == data::Label::Anomalous ? 1 : 0);
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t start = w * stride;
    for (std::size_t k = 0; k < window_len; ++k)
      for (std::size_t j = 0; j < d; ++j)
        t.data(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(k * d + j)) =
            rows(static_cast<Eigen::Index>(start + k), static_cast<Eigen::Index>(j));
    t.labels.push_back(prefix[start + window_len] > prefix[start] ? data::Label::Anomalous
                                                                  : data::Label::Normal);
    t.start_rows.push_back(start);
  }
  return t;
}

WindowTensor make_windows(const data::TimeSeriesFrame& frame, std::size_t window_len,
                          std::size_t stride) {
  return make_windows(frame.features, frame.labels, window_len, stride);
}

std::vector<std::uint8_t> serialize(const WindowTensor& t) {
  bytes::Writer w;
  w.put<std::uint64_t>(t.n_windows());
  w.put<std::uint64_t>(t.window_len);
  w.put<std::uint64_t>(t.n_features);
  const double* p = t.data.data();
  for (Eigen::Index i = 0; i < t.data.size(); ++i) w.put<double>(p[i]);
  return w.release();
}

WindowTensor deserialize_tensor(std::span<const std::uint8_t> data) {
  bytes::Reader r(data);
  try {
    const auto n = r.get<std::uint64_t>();
    const auto len = r.get<std::uint64_t>();
    const auto d = r.get<std::uint64_t>();
    if (len != 0 && d != 0 && (r.remaining() / 8 / len / d) < n)
      throw PrepError(PrepErrc::BadTensor, "tensor body shorter than its header claims");
    if (r.remaining() != n * len * d * 8)
      throw PrepError(PrepErrc::BadTensor, "tensor body size does not match header");
    WindowTensor t;
    t.window_len = len;
    t.n_features = d;
    t.data.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(len * d));
    double* p = t.data.data();
    for (Eigen::Index i = 0; i < t.data.size(); ++i) p[i] = r.get<double>();
    return t;
  } catch (const bytes::Truncated&) {
    throw PrepError(PrepErrc::BadTensor, "tensor header truncated");
  }
}

}  // namespace anoml::prep
