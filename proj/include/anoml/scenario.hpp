#pragma once

// Detection-placement scenarios: a dataset is replayed as wire messages from
// an edge node through the simulated topology, and the transform + detector
// run at the configured tier. Everything upstream of that tier forwards raw
// readings; the detection tier forwards raw data, labels or scores onward.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "anoml/artifact.hpp"
#include "anoml/config.hpp"
#include "anoml/dataset.hpp"
#include "anoml/error.hpp"
#include "anoml/metrics.hpp"
#include "anoml/transport_sim.hpp"

namespace anoml::pipeline {

enum class Placement { Edge, Fog, Cloud };
enum class ForwardPolicy { RawOnly, ProcessedBinary, ProcessedScore };

std::string_view to_string(Placement p);
std::string_view to_string(ForwardPolicy p);
std::optional<Placement> placement_from_string(std::string_view s);
std::optional<ForwardPolicy> forward_policy_from_string(std::string_view s);
sim::Tier tier_of(Placement p);

enum class ScenarioErrc { PlacementUnsupported, InvalidConfig };
std::string_view to_string(ScenarioErrc code);
using ScenarioError = Error<ScenarioErrc>;

struct ScenarioConfig {
  Placement placement = Placement::Cloud;
  ForwardPolicy forward_policy = ForwardPolicy::ProcessedBinary;
  sim::Protocol edge_protocol = sim::Protocol::WiFi;
  double jitter_fraction = sim::kDefaultJitterFraction;

  // Custom topology; when absent a single edge -> fog -> cloud chain is built
  // from edge_protocol (edge hop) and Wi-Fi (cloud hop).
  std::optional<sim::TopologySpec> topology;
  std::string edge_node = "edge0";
  std::string fog_node = "fog0";
  std::string cloud_node = "cloud0";

  int mcu_id = 1;
  int location_id = 1;

  // Only the autoencoder (the convolutional-model stand-in) may run on edge
  // hardware when set.
  bool realistic_edge = false;
  bool invert_positive = false;
  // Replaces measured inference time, making every latency field reproducible.
  std::optional<double> fixed_inference_ms;

  // Placement=Cloud forces raw forwarding at edge and fog.
  ForwardPolicy effective_policy() const {
    return placement == Placement::Cloud ? ForwardPolicy::RawOnly : forward_policy;
  }
};

// Reads the [scenario] table plus optional [[node]] / [[link]] topology.
ScenarioConfig scenario_from_config(const config::Value& root);

struct TierLatency {
  sim::Tier tier = sim::Tier::Edge;
  double mean_ms = 0;        // mean arrival latency of traffic reaching the tier
  std::size_t messages = 0;
};

struct ScenarioReport {
  Placement placement = Placement::Cloud;
  ForwardPolicy policy = ForwardPolicy::RawOnly;
  metrics::MetricReport metrics;

  // Mean link latency of raw messages from edge send to the detection tier.
  double path_latency_ms = 0;
  double inference_ms = 0;  // per window
  // Link latency of each window's last row plus inference time, averaged.
  double detection_latency_ms = 0;
  std::vector<TierLatency> tiers;

  std::size_t rows_sent = 0;
  std::size_t messages_at_detection_tier = 0;
  std::size_t rows_at_detection_tier = 0;
  std::size_t windows = 0;
  std::vector<double> scores;
  std::vector<data::Label> predictions;
  std::vector<data::Label> truth;
};

ScenarioReport run_scenario(const ScenarioConfig& config, const PipelineModel& model,
                            const data::TimeSeriesFrame& dataset, std::uint64_t seed);

std::string scenario_json(const ScenarioReport& report);

}  // namespace anoml::pipeline
