#pragma once

// HTTP inference service over a packaged model.
//   POST /infer   {"window": [[...], ...]}  window_len rows of raw features
//   GET  /health  model metadata, or 503 until a model is loaded

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "anoml/artifact.hpp"

namespace httplib {
class Server;
}

namespace anoml::service {

struct InferenceResponse {
  int label = 0;  // 0 normal, 1 anomalous
  double score = 0;
  std::string model_id;
  double latency_ms = 0;
};

struct HttpResult {
  int status = 200;
  std::string body;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 8080;
};

// Accepts "host:port", "http://host:port" or ":port".
Endpoint parse_endpoint(const std::string& text);

class InferenceService {
 public:
  InferenceService();
  ~InferenceService();
  InferenceService(const InferenceService&) = delete;
  InferenceService& operator=(const InferenceService&) = delete;

  // Verifies and installs the artifact. The model is set once and never
  // mutated afterwards.
  void load(std::span<const std::uint8_t> artifact);
  bool ready() const;

  // Request handlers, usable without a socket.
  HttpResult handle_infer(const std::string& body) const;
  HttpResult handle_health() const;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port.
  int start(const std::string& host, int port);
  // Blocks the caller until stop() is called from elsewhere.
  void serve_forever(const std::string& host, int port);
  void stop();

 private:
  struct Loaded {
    pipeline::PipelineModel model;
    std::string id;
    std::string metadata_json;
  };
  std::shared_ptr<const Loaded> current() const;
  void install_routes();

  mutable std::mutex mu_;
  std::shared_ptr<const Loaded> loaded_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

// Client side.
InferenceResponse infer(const Endpoint& endpoint, const Eigen::MatrixXd& window);
HttpResult get_health(const Endpoint& endpoint);
InferenceResponse parse_response(const std::string& body);

}  // namespace anoml::service
