#include "anoml/artifact.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

#include <json.hpp>
#include <zlib.h>

#include "anoml/bytes.hpp"

namespace anoml::pipeline {

std::string_view to_string(ArtifactErrc code) {
  switch (code) {
    case ArtifactErrc::BadMagic: return "BadMagic";
    case ArtifactErrc::UnsupportedVersion: return "UnsupportedVersion";
    case ArtifactErrc::ChecksumMismatch: return "ChecksumMismatch";
    case ArtifactErrc::UnknownDetectorTag: return "UnknownDetectorTag";
    case ArtifactErrc::Truncated: return "Truncated";
    case ArtifactErrc::BadMetadata: return "BadMetadata";
    case ArtifactErrc::Io: return "Io";
  }
  return "?";
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, data.data(), static_cast<uInt>(data.size()));
  return static_cast<std::uint32_t>(crc);
}

namespace {

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", v);
  return buf;
}

nlohmann::json metadata_json(const PipelineModel& m) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["detector"] = detect::to_string(m.kind());
  j["threshold"] = m.threshold();
  j["transform"] = {
      {"sr", prep::to_string(m.transform.kind)},
      {"scaler_kind", static_cast<int>(m.transform.scaler.kind)},
      {"offset", std::vector<double>(m.transform.scaler.offset.data(),
                                     m.transform.scaler.offset.data() + m.transform.scaler.offset.size())},
      {"scale", std::vector<double>(m.transform.scaler.scale.data(),
                                    m.transform.scaler.scale.data() + m.transform.scaler.scale.size())},
      {"degenerate", m.transform.scaler.degenerate},
  };
  j["window_len"] = m.metadata.window_len;
  j["feature_names"] = m.metadata.feature_names;
  j["train_fingerprint"] = m.metadata.train_fingerprint;
  j["source"] = m.metadata.source;
  j["input_dim"] = detect::input_dim(m.detector);
  return j;
}

void parse_metadata(const std::string& text, PipelineModel& m) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& t = j.at("transform");
    auto sr = prep::sr_from_string(t.at("sr").get<std::string>());
    if (!sr) throw ArtifactError(ArtifactErrc::BadMetadata, "unknown transform");
    m.transform.kind = *sr;
    const int sk = t.at("scaler_kind").get<int>();
    if (sk < 0 || sk > 2) throw ArtifactError(ArtifactErrc::BadMetadata, "unknown scaler kind");
    m.transform.scaler.kind = static_cast<prep::ScalerKind>(sk);
    const auto offset = t.at("offset").get<std::vector<double>>();
    const auto scale = t.at("scale").get<std::vector<double>>();
    const auto degenerate = t.at("degenerate").get<std::vector<bool>>();
    if (offset.size() != scale.size() || offset.size() != degenerate.size() || offset.empty())
      throw ArtifactError(ArtifactErrc::BadMetadata, "scaler parameter lengths disagree");
    m.transform.scaler.offset = Eigen::Map<const Eigen::RowVectorXd>(offset.data(), static_cast<Eigen::Index>(offset.size()));
    m.transform.scaler.scale = Eigen::Map<const Eigen::RowVectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
    m.transform.scaler.degenerate = degenerate;
    m.metadata.window_len = j.at("window_len").get<std::size_t>();
    m.metadata.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.metadata.train_fingerprint = j.at("train_fingerprint").get<std::string>();
    m.metadata.source = j.at("source").get<std::string>();
    if (m.metadata.window_len < 1) throw ArtifactError(ArtifactErrc::BadMetadata, "window_len < 1");
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(ArtifactErrc::BadMetadata, e.what());
  }
}

struct Parsed {
  ArtifactInfo info;
  std::span<const std::uint8_t> payload;
};

Parsed parse_container(std::span<const std::uint8_t> data) {
  Parsed p;
  try {
    bytes::Reader r(data);
    const auto magic = r.get_bytes(4);
    if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic)))
      throw ArtifactError(ArtifactErrc::BadMagic, "not an ANML artifact");
    p.info.version = r.get<std::uint16_t>();
    if (p.info.version != kFormatVersion)
      throw ArtifactError(ArtifactErrc::UnsupportedVersion,
                          "artifact version " + std::to_string(p.info.version) + " (supported: " +
                              std::to_string(kFormatVersion) + ")");
    // magic, version, tag, metadata length, payload length, CRC
    constexpr std::size_t kMinSize = 4 + 2 + 1 + 4 + 8 + 4;
    if (data.size() < kMinSize) throw bytes::Truncated();
    const std::size_t body = data.size() - 4;
    const std::uint32_t stored = bytes::Reader(data.subspan(body)).get<std::uint32_t>();
    if (crc32(data.first(body)) != stored)
      throw ArtifactError(ArtifactErrc::ChecksumMismatch, "artifact checksum mismatch");
    p.info.checksum = stored;

    const auto tag = r.get<std::uint8_t>();
    if (tag < 1 || tag > 3)
      throw ArtifactError(ArtifactErrc::UnknownDetectorTag, "detector tag " + std::to_string(tag));
    p.info.kind = static_cast<detect::DetectorKind>(tag);
    const auto meta_len = r.get<std::uint32_t>();
    p.info.metadata_json = r.get_string(meta_len);
    const auto payload_len = r.get<std::uint64_t>();
    if (r.remaining() < 4) throw bytes::Truncated();
    if (payload_len != r.remaining() - 4)
      throw ArtifactError(ArtifactErrc::Truncated, "payload length does not match container");
    p.payload = r.get_bytes(payload_len);
  } catch (const bytes::Truncated&) {
    throw ArtifactError(ArtifactErrc::Truncated, "artifact truncated");
  }
  return p;
}

}  // namespace

std::string fingerprint(const Eigen::MatrixXd& train) {
  bytes::Writer w;
  w.put<std::uint64_t>(static_cast<std::uint64_t>(train.rows()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(train.cols()));
  for (Eigen::Index i = 0; i < train.rows(); ++i)
    for (Eigen::Index j = 0; j < train.cols(); ++j) w.put<double>(train(i, j));
  return hex32(crc32(w.data()));
}

Eigen::VectorXd PipelineModel::score_rows(const Eigen::MatrixXd& raw_rows) const {
  const Eigen::MatrixXd rows = prep::apply_transform(transform, raw_rows);
  const auto windows = prep::make_windows(rows, {}, metadata.window_len);
  Eigen::VectorXd out(static_cast<Eigen::Index>(windows.n_windows()));
  for (std::size_t i = 0; i < windows.n_windows(); ++i)
    out(static_cast<Eigen::Index>(i)) =
        detect::score(detector, windows.data.row(static_cast<Eigen::Index>(i)).transpose()).value;
  return out;
}

PipelineModel train_model(const data::TimeSeriesFrame& train, prep::SrKind sr,
                          detect::DetectorKind kind, std::size_t window_len,
                          const detect::TrainOptions& options, const std::string& source) {
  train.check();
  PipelineModel model;
  model.transform = prep::fit_transform(sr, train.features);
  const Eigen::MatrixXd rows = prep::apply_transform(model.transform, train.features);
  const auto windows = prep::make_windows(rows, {}, window_len);
  model.detector = detect::fit(kind, Eigen::MatrixXd(windows.data), options);
  model.metadata.train_fingerprint = fingerprint(train.features);
  model.metadata.feature_names = train.feature_names;
  model.metadata.window_len = window_len;
  model.metadata.source = source;
  return model;
}

double PipelineModel::score_window(const Eigen::MatrixXd& raw_window) const {
  if (static_cast<std::size_t>(raw_window.rows()) != metadata.window_len)
    throw detect::DetectError(detect::DetectErrc::DimensionMismatch,
                              "window has " + std::to_string(raw_window.rows()) + " rows, expected " +
                                  std::to_string(metadata.window_len));
  return score_rows(raw_window)(0);
}

std::vector<std::uint8_t> package_model(const PipelineModel& model) {
  const std::string meta = metadata_json(model).dump();
  bytes::Writer payload;
  detect::save_payload(model.detector, payload);

  bytes::Writer out;
  out.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
  out.put<std::uint16_t>(kFormatVersion);
  out.put<std::uint8_t>(static_cast<std::uint8_t>(model.kind()));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(meta.size()));
  out.put_string(meta);
  out.put<std::uint64_t>(payload.data().size());
  out.put_bytes(payload.data());
  out.put<std::uint32_t>(crc32(out.data()));
  return out.release();
}

ArtifactInfo inspect(std::span<const std::uint8_t> data) { return parse_container(data).info; }

PipelineModel load_model(std::span<const std::uint8_t> data) {
  const auto parsed = parse_container(data);
  PipelineModel m{prep::Transform{}, detect::IsolationForest{}, ModelMetadata{}};
  parse_metadata(parsed.info.metadata_json, m);
  bytes::Reader r(parsed.payload);
  try {
    m.detector = detect::load_payload(parsed.info.kind, r);
  } catch (const detect::DetectError& e) {
    throw ArtifactError(ArtifactErrc::Truncated, e.what());
  }
  if (r.remaining() != 0) throw ArtifactError(ArtifactErrc::Truncated, "trailing payload bytes");
  const std::size_t expected_dim =
      m.metadata.window_len * m.transform.output_features();
  if (detect::input_dim(m.detector) != expected_dim)
    throw ArtifactError(ArtifactErrc::BadMetadata, "detector input width disagrees with transform");
  return m;
}

std::string model_id(std::span<const std::uint8_t> data) {
  return "anml-" + hex32(inspect(data).checksum);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError(ArtifactErrc::Io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError(ArtifactErrc::Io, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

}  // namespace anoml::pipeline
