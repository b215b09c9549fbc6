#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "anoml/detect/autoencoder.hpp"
#include "anoml/detect/isolation_forest.hpp"
#include "anoml/detect/one_class_svm.hpp"

namespace anoml::detect {

enum class DetectorKind : std::uint8_t { IsolationForest = 1, OneClassSvm = 2, Autoencoder = 3 };

std::string_view to_string(DetectorKind kind);     // "if", "ocsvm", "ae"
std::string_view table_label(DetectorKind kind);   // "IF", "OC-SVM", "AE"
std::optional<DetectorKind> detector_from_string(std::string_view s);

using DetectorModel = std::variant<IsolationForest, OneClassSvm, Autoencoder>;

DetectorKind kind_of(const DetectorModel& model);
std::size_t input_dim(const DetectorModel& model);
double threshold(const DetectorModel& model);
AnomalyScore score(const DetectorModel& model, const ConstVectorRef& x);
VectorXd score_all(const DetectorModel& model, const MatrixXd& rows);

struct TrainOptions {
  IsolationForest::Params isolation_forest;
  OneClassSvm::Params one_class_svm;
  Autoencoder::Params autoencoder;
  std::optional<double> contamination;  // IF threshold override
};

DetectorModel fit(DetectorKind kind, const MatrixXd& train, const TrainOptions& options);

void save_payload(const DetectorModel& model, bytes::Writer& out);
DetectorModel load_payload(DetectorKind kind, bytes::Reader& in);

}  // namespace anoml::detect
