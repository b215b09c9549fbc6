#pragma once

// Model artifact container:
//
//   "ANML" | version u16 | detector tag u8 | metadata length u32 | metadata
//   (UTF-8 JSON) | payload length u64 | payload | CRC-32 u32
//
// All integers little-endian; the CRC covers every preceding byte.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "anoml/detect/detector.hpp"
#include "anoml/error.hpp"
#include "anoml/preprocess.hpp"

namespace anoml::pipeline {

inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr char kMagic[4] = {'A', 'N', 'M', 'L'};

enum class ArtifactErrc {
  BadMagic,
  UnsupportedVersion,
  ChecksumMismatch,
  UnknownDetectorTag,
  Truncated,
  BadMetadata,
  Io,
};

std::string_view to_string(ArtifactErrc code);
using ArtifactError = Error<ArtifactErrc>;

struct ModelMetadata {
  std::string train_fingerprint;  // CRC-32 of the training matrix, hex
  std::vector<std::string> feature_names;
  std::size_t window_len = prep::kDefaultWindowLen;
  std::string source;  // free-form provenance, e.g. input file name
};

// A fitted transform, window length and detector: everything inference needs.
struct PipelineModel {
  prep::Transform transform;
  detect::DetectorModel detector;
  ModelMetadata metadata;

  std::size_t raw_features() const { return transform.input_features(); }
  std::size_t window_len() const { return metadata.window_len; }
  detect::DetectorKind kind() const { return detect::kind_of(detector); }

  // Transform, window and score a raw (rows x raw_features) block. Returns one
  // score per window.
  Eigen::VectorXd score_rows(const Eigen::MatrixXd& raw_rows) const;
  // Score of one raw window (window_len x raw_features).
  double score_window(const Eigen::MatrixXd& raw_window) const;
  double threshold() const { return detect::threshold(detector); }
};

// Fits the transform on the training rows, windows them, and fits the
// detector on the windows.
PipelineModel train_model(const data::TimeSeriesFrame& train, prep::SrKind sr,
                          detect::DetectorKind kind, std::size_t window_len,
                          const detect::TrainOptions& options, const std::string& source = {});

std::string fingerprint(const Eigen::MatrixXd& train);
std::uint32_t crc32(std::span<const std::uint8_t> data);

std::vector<std::uint8_t> package_model(const PipelineModel& model);
PipelineModel load_model(std::span<const std::uint8_t> bytes);

// The header fields without decoding the payload.
struct ArtifactInfo {
  std::uint16_t version = 0;
  detect::DetectorKind kind = detect::DetectorKind::IsolationForest;
  std::string metadata_json;
  std::uint32_t checksum = 0;
};
ArtifactInfo inspect(std::span<const std::uint8_t> bytes);

std::string model_id(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace anoml::pipeline
