#include "anoml/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "anoml/wire_format.hpp"

namespace anoml::pipeline {

std::string_view to_string(Placement p) {
  switch (p) {
    case Placement::Edge: return "edge";
    case Placement::Fog: return "fog";
    case Placement::Cloud: return "cloud";
  }
  return "?";
}

std::string_view to_string(ForwardPolicy p) {
  switch (p) {
    case ForwardPolicy::RawOnly: return "raw_only";
    case ForwardPolicy::ProcessedBinary: return "processed_binary";
    case ForwardPolicy::ProcessedScore: return "processed_score";
  }
  return "?";
}

std::optional<Placement> placement_from_string(std::string_view s) {
  if (s == "edge") return Placement::Edge;
  if (s == "fog") return Placement::Fog;
  if (s == "cloud") return Placement::Cloud;
  return std::nullopt;
}

std::optional<ForwardPolicy> forward_policy_from_string(std::string_view s) {
  if (s == "raw_only" || s == "raw") return ForwardPolicy::RawOnly;
  if (s == "processed_binary" || s == "binary") return ForwardPolicy::ProcessedBinary;
  if (s == "processed_score" || s == "score") return ForwardPolicy::ProcessedScore;
  return std::nullopt;
}

sim::Tier tier_of(Placement p) {
  switch (p) {
    case Placement::Edge: return sim::Tier::Edge;
    case Placement::Fog: return sim::Tier::Fog;
    case Placement::Cloud: return sim::Tier::Cloud;
  }
  return sim::Tier::Cloud;
}

std::string_view to_string(ScenarioErrc code) {
  switch (code) {
    case ScenarioErrc::PlacementUnsupported: return "PlacementUnsupported";
    case ScenarioErrc::InvalidConfig: return "InvalidConfig";
  }
  return "?";
}

ScenarioConfig scenario_from_config(const config::Value& root) {
  ScenarioConfig c;
  auto invalid = [](const std::string& what) { return ScenarioError(ScenarioErrc::InvalidConfig, what); };
  const auto placement = root.get_string("scenario.placement", "cloud");
  auto p = placement_from_string(placement);
  if (!p) throw invalid("unknown placement: " + placement);
  c.placement = *p;
  const auto policy = root.get_string("scenario.forward_policy", "processed_binary");
  auto fp = forward_policy_from_string(policy);
  if (!fp) throw invalid("unknown forward policy: " + policy);
  c.forward_policy = *fp;
  const auto proto = root.get_string("scenario.edge_protocol", "wifi");
  auto pr = sim::protocol_from_string(proto);
  if (!pr) throw invalid("unknown protocol: " + proto);
  c.edge_protocol = *pr;
  c.jitter_fraction = root.get_double("scenario.jitter_fraction", c.jitter_fraction);
  c.edge_node = root.get_string("scenario.edge_node", c.edge_node);
  c.fog_node = root.get_string("scenario.fog_node", c.fog_node);
  c.cloud_node = root.get_string("scenario.cloud_node", c.cloud_node);
  c.mcu_id = static_cast<int>(root.get_integer("scenario.mcu_id", c.mcu_id));
  c.location_id = static_cast<int>(root.get_integer("scenario.location_id", c.location_id));
  c.realistic_edge = root.get_bool("scenario.realistic_edge", false);
  c.invert_positive = root.get_bool("scenario.invert_positive", false);
  if (const auto* v = root.find("scenario.fixed_inference_ms")) c.fixed_inference_ms = v->as_double();
  if (root.find("node")) c.topology = sim::topology_spec_from_config(root);
  return c;
}

namespace {

using Clock = std::chrono::steady_clock;

sim::TopologySpec default_chain(const ScenarioConfig& c) {
  sim::TopologySpec spec;
  spec.nodes = {{c.edge_node, sim::Tier::Edge}, {c.fog_node, sim::Tier::Fog}, {c.cloud_node, sim::Tier::Cloud}};
  auto edge = sim::default_link(c.edge_protocol, sim::TierPair::EdgeFog);
  edge.jitter_std_ms = c.jitter_fraction * edge.mean_latency_ms;
  auto cloud = sim::default_link(sim::Protocol::WiFi, sim::TierPair::FogCloud);
  cloud.jitter_std_ms = c.jitter_fraction * cloud.mean_latency_ms;
  spec.links = {{c.edge_node, c.fog_node, edge}, {c.fog_node, c.cloud_node, cloud}};
  return spec;
}

// A message in flight: where it came from and when it first left the edge.
struct Tracked {
  std::vector<std::uint8_t> payload;
  std::size_t row = 0;
  std::int64_t origin_ns = 0;   // first send time
  std::int64_t at_ns = 0;       // arrival at the current node
};

// Moves messages across one hop; dropped messages disappear.
std::vector<Tracked> hop(const sim::Topology& topo, const std::string& from, const std::string& to,
                         const std::vector<Tracked>& in, std::uint64_t seed) {
  std::vector<sim::Packet> workload;
  workload.reserve(in.size());
  for (const auto& m : in) workload.push_back({m.payload, from, to, m.at_ns});
  const auto trace = sim::run(topo, workload, seed);
  std::vector<Tracked> out;
  out.reserve(in.size());
  for (const auto& ev : trace) {
    if (ev.dropped()) continue;
    Tracked t = in[ev.sequence];
    t.at_ns = *ev.deliver_time_ns;
    out.push_back(std::move(t));
  }
  return out;
}

double mean_latency_ms(const std::vector<Tracked>& msgs) {
  if (msgs.empty()) return 0.0;
  long double sum = 0;
  for (const auto& m : msgs) sum += static_cast<long double>(m.at_ns - m.origin_ns);
  return static_cast<double>(sum / static_cast<long double>(msgs.size())) / 1e6;
}

}  // namespace

ScenarioReport run_scenario(const ScenarioConfig& config, const PipelineModel& model,
                            const data::TimeSeriesFrame& dataset, std::uint64_t seed) {
  dataset.check();
  const std::size_t n = dataset.n_rows();
  const std::size_t d = dataset.n_features();
  if (d != model.raw_features())
    throw ScenarioError(ScenarioErrc::InvalidConfig,
                        "dataset has " + std::to_string(d) + " features, model expects " +
                            std::to_string(model.raw_features()));
  if (d > static_cast<std::size_t>(wire::kMaxSensorId))
    throw ScenarioError(ScenarioErrc::InvalidConfig, "too many features for sensor ids");
  if (config.realistic_edge && config.placement == Placement::Edge &&
      model.kind() != detect::DetectorKind::Autoencoder)
    throw ScenarioError(ScenarioErrc::PlacementUnsupported,
                        std::string(detect::table_label(model.kind())) +
                            " cannot run on edge hardware");

  const auto topo = sim::build_topology(config.topology ? *config.topology : default_chain(config));
  auto require_node = [&](const std::string& id, sim::Tier tier) {
    const auto* node = topo.node(id);
    if (!node || node->tier != tier)
      throw ScenarioError(ScenarioErrc::PlacementUnsupported,
                          "topology lacks " + std::string(sim::to_string(tier)) + " node " + id);
  };
  const bool edge_fog = topo.link_index(config.edge_node, config.fog_node).has_value();
  const bool fog_cloud = topo.link_index(config.fog_node, config.cloud_node).has_value();
  require_node(config.edge_node, sim::Tier::Edge);
  if (config.placement != Placement::Edge) {
    require_node(config.fog_node, sim::Tier::Fog);
    if (!edge_fog)
      throw ScenarioError(ScenarioErrc::PlacementUnsupported, "no edge -> fog link");
  }
  if (config.placement == Placement::Cloud) {
    require_node(config.cloud_node, sim::Tier::Cloud);
    if (!fog_cloud)
      throw ScenarioError(ScenarioErrc::PlacementUnsupported, "no fog -> cloud link");
  }
  const auto* edge_link = edge_fog ? &topo.links()[*topo.link_index(config.edge_node, config.fog_node)] : nullptr;
  const bool ble = edge_link && edge_link->model.protocol == sim::Protocol::BLE;

  // Edge: sensor readings at wire resolution.
  std::vector<Tracked> messages;
  messages.reserve(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    const std::int64_t ts_ns = dataset.timestamps[r] * 1'000'000;
    for (std::size_t j = 0; j < d; ++j) {
      wire::SensorReading reading;
      reading.identity = wire::NodeIdentity::make(config.mcu_id, config.location_id, static_cast<int>(j) + 1);
      reading.sensor_type = wire::kAllSensorTypes[j % wire::kAllSensorTypes.size()];
      reading.value = wire::SensorValue::from_float(
          dataset.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
      reading.timestamp_ms = dataset.timestamps[r];
      std::vector<std::uint8_t> payload;
      if (ble) {
        payload = wire::encode_ble(reading);
      } else {
        const auto text = wire::encode_text(reading);
        payload.assign(text.begin(), text.end());
      }
      messages.push_back({std::move(payload), r, ts_ns, ts_ns});
    }
  }

  ScenarioReport report;
  report.placement = config.placement;
  report.policy = config.effective_policy();
  report.rows_sent = n;
  report.tiers.push_back({sim::Tier::Edge, 0.0, messages.size()});

  // Raw data travels up to the detection tier.
  std::vector<Tracked> at_detection = messages;
  if (config.placement != Placement::Edge) {
    at_detection = hop(topo, config.edge_node, config.fog_node, at_detection, detect::mix_seed(seed + 1));
    report.tiers.push_back({sim::Tier::Fog, mean_latency_ms(at_detection), at_detection.size()});
  }
  if (config.placement == Placement::Cloud) {
    at_detection = hop(topo, config.fog_node, config.cloud_node, at_detection, detect::mix_seed(seed + 2));
    report.tiers.push_back({sim::Tier::Cloud, mean_latency_ms(at_detection), at_detection.size()});
  }
  report.messages_at_detection_tier = at_detection.size();
  report.path_latency_ms = mean_latency_ms(at_detection);

  // Detection tier: decode and rebuild rows.
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::size_t> received(n, 0);
  std::vector<std::int64_t> row_ready_ns(n, 0);
  for (const auto& m : at_detection) {
    const auto reading =
        ble ? wire::decode_ble(m.payload)
            : wire::decode_text(std::string_view(reinterpret_cast<const char*>(m.payload.data()), m.payload.size()));
    const auto j = static_cast<std::size_t>(reading.identity.sensor_id - 1);
    rows(static_cast<Eigen::Index>(m.row), static_cast<Eigen::Index>(j)) = reading.value.as_double();
    ++received[m.row];
    row_ready_ns[m.row] = std::max(row_ready_ns[m.row], m.at_ns);
  }
  report.rows_at_detection_tier =
      static_cast<std::size_t>(std::count(received.begin(), received.end(), d));

  const auto t0 = Clock::now();
  const Eigen::MatrixXd transformed = prep::apply_transform(model.transform, rows);
  const auto t1 = Clock::now();
  const auto windows = prep::make_windows(transformed, dataset.labels, model.window_len());
  const double threshold = model.threshold();

  std::vector<std::size_t> complete(n + 1, 0);
  for (std::size_t r = 0; r < n; ++r) complete[r + 1] = complete[r] + (received[r] == d ? 1 : 0);

  std::vector<std::size_t> scored_windows;
  double inference_total_ms = 0;
  for (std::size_t w = 0; w < windows.n_windows(); ++w) {
    const std::size_t start = windows.start_rows[w];
    if (complete[start + model.window_len()] - complete[start] != model.window_len()) continue;
    const auto s0 = Clock::now();
    const double s = detect::score(model.detector, windows.data.row(static_cast<Eigen::Index>(w)).transpose()).value;
    const auto s1 = Clock::now();
    inference_total_ms += std::chrono::duration<double, std::milli>(s1 - s0).count();
    report.scores.push_back(s);
    report.predictions.push_back(detect::classify(s, threshold));
    report.truth.push_back(windows.labels[w]);
    scored_windows.push_back(w);
  }
  report.windows = scored_windows.size();
  if (scored_windows.empty())
    throw ScenarioError(ScenarioErrc::InvalidConfig, "no complete window reached the detection tier");

  report.inference_ms = config.fixed_inference_ms
                            ? *config.fixed_inference_ms
                            : inference_total_ms / static_cast<double>(scored_windows.size());
  report.metrics = metrics::evaluate(report.predictions, report.scores, report.truth, config.invert_positive);
  report.metrics.inference_ms = report.inference_ms;
  report.metrics.scale_reduce_s = std::chrono::duration<double>(t1 - t0).count();
  report.metrics.model_size_kb = static_cast<double>(package_model(model).size()) / 1024.0;

  const auto inference_ns = sim::ms_to_ns(report.inference_ms);
  long double detection_sum = 0;
  for (auto w : scored_windows) {
    const std::size_t last = windows.start_rows[w] + model.window_len() - 1;
    const std::int64_t send_ns = dataset.timestamps[last] * 1'000'000;
    detection_sum += static_cast<long double>(row_ready_ns[last] - send_ns + inference_ns);
  }
  report.detection_latency_ms =
      static_cast<double>(detection_sum / static_cast<long double>(scored_windows.size())) / 1e6;

  // Forward from the detection tier to the top of the chain.
  std::vector<Tracked> onward;
  if (report.policy == ForwardPolicy::RawOnly) {
    onward = at_detection;
  } else {
    for (std::size_t k = 0; k < scored_windows.size(); ++k) {
      const std::size_t w = scored_windows[k];
      const std::size_t last = windows.start_rows[w] + model.window_len() - 1;
      char buf[64];
      if (report.policy == ForwardPolicy::ProcessedBinary)
        std::snprintf(buf, sizeof(buf), "W%zu:L%d", w, static_cast<int>(report.predictions[k]));
      else
        std::snprintf(buf, sizeof(buf), "W%zu:S%.6f", w, report.scores[k]);
      const std::string text = buf;
      const std::int64_t send_ns = dataset.timestamps[last] * 1'000'000;
      onward.push_back({{text.begin(), text.end()}, last, send_ns, row_ready_ns[last] + inference_ns});
    }
  }
  if (config.placement == Placement::Edge && edge_fog) {
    onward = hop(topo, config.edge_node, config.fog_node, onward, detect::mix_seed(seed + 3));
    report.tiers.push_back({sim::Tier::Fog, mean_latency_ms(onward), onward.size()});
  }
  if (config.placement != Placement::Cloud && fog_cloud && (edge_fog || config.placement == Placement::Fog)) {
    onward = hop(topo, config.fog_node, config.cloud_node, onward, detect::mix_seed(seed + 4));
    report.tiers.push_back({sim::Tier::Cloud, mean_latency_ms(onward), onward.size()});
  }
  return report;
}

std::string scenario_json(const ScenarioReport& r) {
  nlohmann::json j;
  j["placement"] = to_string(r.placement);
  j["forward_policy"] = to_string(r.policy);
  j["metrics"] = nlohmann::json::parse(metrics::report_json(r.metrics));
  j["path_latency_ms"] = r.path_latency_ms;
  j["inference_ms"] = r.inference_ms;
  j["detection_latency_ms"] = r.detection_latency_ms;
  j["rows_sent"] = r.rows_sent;
  j["rows_at_detection_tier"] = r.rows_at_detection_tier;
  j["messages_at_detection_tier"] = r.messages_at_detection_tier;
  j["windows"] = r.windows;
  nlohmann::json tiers = nlohmann::json::array();
  for (const auto& t : r.tiers)
    tiers.push_back({{"tier", sim::to_string(t.tier)}, {"mean_latency_ms", t.mean_ms}, {"messages", t.messages}});
  j["tiers"] = tiers;
  return j.dump();
}

}  // namespace anoml::pipeline
