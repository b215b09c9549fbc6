#include "anoml/service.hpp"

#include <chrono>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "anoml/detect/common.hpp"

namespace anoml::service {

using nlohmann::json;

Endpoint parse_endpoint(const std::string& text) {
  std::string rest = text;
  if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
  while (!rest.empty() && rest.back() == '/') rest.pop_back();
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("endpoint needs host:port: " + text);
  Endpoint e;
  if (colon > 0) e.host = rest.substr(0, colon);
  const auto port_text = rest.substr(colon + 1);
  std::size_t used = 0;
  int port = 0;
  try {
    port = std::stoi(port_text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port_text.size() || port_text.empty() || port < 0 || port > 65535)
    throw std::invalid_argument("bad port in endpoint: " + text);
  e.port = port;
  return e;
}

namespace {

HttpResult error_result(int status, const std::string& code, const std::string& message) {
  return {status, json{{"error", code}, {"message", message}}.dump()};
}

}  // namespace

InferenceService::InferenceService() = default;

InferenceService::~InferenceService() { stop(); }

void InferenceService::load(std::span<const std::uint8_t> artifact) {
  auto loaded = std::make_shared<Loaded>();
  loaded->model = pipeline::load_model(artifact);
  loaded->id = pipeline::model_id(artifact);
  loaded->metadata_json = pipeline::inspect(artifact).metadata_json;
  std::lock_guard lock(mu_);
  if (loaded_) throw std::logic_error("model already loaded");
  loaded_ = std::move(loaded);
}

bool InferenceService::ready() const { return current() != nullptr; }

std::shared_ptr<const InferenceService::Loaded> InferenceService::current() const {
  std::lock_guard lock(mu_);
  return loaded_;
}

HttpResult InferenceService::handle_health() const {
  const auto loaded = current();
  if (!loaded) return error_result(503, "NotReady", "no model loaded");
  json body;
  body["status"] = "ok";
  body["model_id"] = loaded->id;
  body["detector"] = detect::to_string(loaded->model.kind());
  body["window_len"] = loaded->model.window_len();
  body["features"] = loaded->model.raw_features();
  body["metadata"] = json::parse(loaded->metadata_json);
  return {200, body.dump()};
}

HttpResult InferenceService::handle_infer(const std::string& text) const {
  const auto loaded = current();
  if (!loaded) return error_result(503, "NotReady", "no model loaded");
  const auto& model = loaded->model;

  json request;
  try {
    request = json::parse(text);
  } catch (const json::parse_error& e) {
    return error_result(400, "MalformedPayload", e.what());
  }
  if (!request.is_object() || !request.contains("window") || !request["window"].is_array())
    return error_result(400, "MalformedPayload", "expected {\"window\": [[...], ...]}");
  const auto& rows = request["window"];
  const std::size_t len = model.window_len();
  const std::size_t d = model.raw_features();
  if (rows.size() != len)
    return error_result(400, "DimensionMismatch",
                        "window has " + std::to_string(rows.size()) + " rows, model expects " +
                            std::to_string(len));
  Eigen::MatrixXd window(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < len; ++r) {
    const auto& row = rows[r];
    if (!row.is_array()) return error_result(400, "MalformedPayload", "window rows must be arrays");
    if (row.size() != d)
      return error_result(400, "DimensionMismatch",
                          "row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                              " features, model expects " + std::to_string(d));
    for (std::size_t j = 0; j < d; ++j) {
      if (!row[j].is_number()) return error_result(400, "MalformedPayload", "non-numeric feature");
      window(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = row[j].get<double>();
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  const double score = model.score_window(window);
  const auto t1 = std::chrono::steady_clock::now();
  json body;
  body["label"] = detect::classify(score, model.threshold()) == data::Label::Anomalous ? 1 : 0;
  body["score"] = score;
  body["model_id"] = loaded->id;
  body["latency_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return {200, body.dump()};
}

void InferenceService::install_routes() {
  server_ = std::make_unique<httplib::Server>();
  server_->Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    const auto r = handle_health();
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
  server_->Post("/infer", [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle_infer(req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
}

int InferenceService::start(const std::string& host, int port) {
  if (server_) throw std::logic_error("service already started");
  install_routes();
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    server_.reset();
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void InferenceService::serve_forever(const std::string& host, int port) {
  if (server_) throw std::logic_error("service already started");
  install_routes();
  if (!server_->listen(host, port))
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void InferenceService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

InferenceResponse parse_response(const std::string& body) {
  const auto j = json::parse(body);
  InferenceResponse r;
  r.label = j.at("label").get<int>();
  r.score = j.at("score").get<double>();
  r.model_id = j.at("model_id").get<std::string>();
  r.latency_ms = j.at("latency_ms").get<double>();
  return r;
}

InferenceResponse infer(const Endpoint& endpoint, const Eigen::MatrixXd& window) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < window.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index j = 0; j < window.cols(); ++j) row.push_back(window(r, j));
    rows.push_back(std::move(row));
  }
  httplib::Client client(endpoint.host, endpoint.port);
  auto res = client.Post("/infer", json{{"window", rows}}.dump(), "application/json");
  if (!res) throw std::runtime_error("no response from " + endpoint.host + ":" + std::to_string(endpoint.port));
  if (res->status != 200)
    throw std::runtime_error("inference failed with HTTP " + std::to_string(res->status) + ": " + res->body);
  return parse_response(res->body);
}

HttpResult get_health(const Endpoint& endpoint) {
  httplib::Client client(endpoint.host, endpoint.port);
  auto res = client.Get("/health");
  if (!res) throw std::runtime_error("no response from " + endpoint.host + ":" + std::to_string(endpoint.port));
  return {res->status, res->body};
}

}  // namespace anoml::service
