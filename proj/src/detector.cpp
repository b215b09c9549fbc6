#include "anoml/detect/detector.hpp"

#include <cctype>
#include <string>

namespace anoml::detect {

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::IsolationForest: return "if";
    case DetectorKind::OneClassSvm: return "ocsvm";
    case DetectorKind::Autoencoder: return "ae";
  }
  return "?";
}

std::string_view table_label(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::IsolationForest: return "IF";
    case DetectorKind::OneClassSvm: return "OC-SVM";
    case DetectorKind::Autoencoder: return "AE";
  }
  return "?";
}

std::optional<DetectorKind> detector_from_string(std::string_view s) {
  std::string lower(s);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "if" || lower == "isolation_forest" || lower == "iforest")
    return DetectorKind::IsolationForest;
  if (lower == "ocsvm" || lower == "oc-svm" || lower == "one_class_svm")
    return DetectorKind::OneClassSvm;
  if (lower == "ae" || lower == "autoencoder") return DetectorKind::Autoencoder;
  return std::nullopt;
}

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
}  // namespace

DetectorKind kind_of(const DetectorModel& model) {
  return std::visit(overloaded{[](const IsolationForest&) { return DetectorKind::IsolationForest; },
                               [](const OneClassSvm&) { return DetectorKind::OneClassSvm; },
                               [](const Autoencoder&) { return DetectorKind::Autoencoder; }},
                    model);
}

std::size_t input_dim(const DetectorModel& model) {
  return std::visit([](const auto& m) { return m.n_features(); }, model);
}

double threshold(const DetectorModel& model) {
  return std::visit([](const auto& m) { return m.threshold(); }, model);
}

AnomalyScore score(const DetectorModel& model, const ConstVectorRef& x) {
  return std::visit([&](const auto& m) { return m.score(x); }, model);
}

VectorXd score_all(const DetectorModel& model, const MatrixXd& rows) {
  return std::visit([&](const auto& m) { return m.score_all(rows); }, model);
}

DetectorModel fit(DetectorKind kind, const MatrixXd& train, const TrainOptions& options) {
  switch (kind) {
    case DetectorKind::IsolationForest: {
      auto m = IsolationForest::fit(train, options.isolation_forest);
      if (options.contamination) m.set_contamination(m.score_all(train), *options.contamination);
      return m;
    }
    case DetectorKind::OneClassSvm: return OneClassSvm::fit(train, options.one_class_svm);
    case DetectorKind::Autoencoder: return Autoencoder::fit(train, options.autoencoder);
  }
  throw DetectError(DetectErrc::InvalidParameter, "unknown detector");
}

void save_payload(const DetectorModel& model, bytes::Writer& out) {
  std::visit([&](const auto& m) { m.save(out); }, model);
}

DetectorModel load_payload(DetectorKind kind, bytes::Reader& in) {
  try {
    switch (kind) {
      case DetectorKind::IsolationForest: return IsolationForest::load(in);
      case DetectorKind::OneClassSvm: return OneClassSvm::load(in);
      case DetectorKind::Autoencoder: return Autoencoder::load(in);
    }
  } catch (const bytes::Truncated&) {
    throw DetectError(DetectErrc::CorruptPayload, "detector payload truncated");
  }
  throw DetectError(DetectErrc::CorruptPayload, "unknown detector tag");
}

}  // namespace anoml::detect
