#pragma once

// Discrete-event simulation of protocol-typed links between edge, fog and
// cloud nodes. Time is kept in integer nanoseconds so zero-jitter runs are
// exact; the public surface reports milliseconds.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "anoml/config.hpp"
#include "anoml/error.hpp"

namespace anoml::sim {

enum class SimErrc {
  UnsupportedPair,
  BtClassicFanoutExceeded,
  BlePeripheralLimitExceeded,
  FogCloudRequiresWiFi,
  UnknownNode,
  DuplicateNode,
  TierMismatch,
  InvalidLink,
  UnknownLink,
  EmptyTrace,
};

std::string_view to_string(SimErrc code);
using SimError = Error<SimErrc>;

enum class Protocol { WiFi, BluetoothClassic, BLE, Zigbee };
enum class Tier { Edge, Fog, Cloud };
enum class TierPair { EdgeEdge, EdgeFog, FogFog, FogCloud };

std::string_view to_string(Protocol p);
std::string_view to_string(Tier t);
std::string_view to_string(TierPair t);
std::optional<Protocol> protocol_from_string(std::string_view s);
std::optional<Tier> tier_from_string(std::string_view s);

// Unordered tier pair for two endpoint tiers; nullopt for combinations the
// link table does not cover (anything involving Edge<->Cloud or Cloud<->Cloud).
std::optional<TierPair> tier_pair_of(Tier a, Tier b);

inline constexpr std::size_t kBtClassicMaxPeers = 7;
inline constexpr std::size_t kBleMaxPeers = 20;
inline constexpr double kDefaultJitterFraction = 0.1;

struct LinkModel {
  Protocol protocol = Protocol::WiFi;
  TierPair tier_pair = TierPair::EdgeFog;
  double mean_latency_ms = 1.0;
  double jitter_std_ms = 0.0;
  double drop_probability = 0.0;
};

// Measured mean latencies (ms) per protocol and tier pair; nullopt for pairs
// the protocol cannot serve.
std::optional<double> table_latency_ms(Protocol protocol, TierPair pair);

// Link with the tabulated mean, 10% jitter and no drops. Throws UnsupportedPair.
LinkModel default_link(Protocol protocol, TierPair pair);

struct Node {
  std::string id;
  Tier tier = Tier::Edge;
};

struct LinkSpec {
  std::string from;
  std::string to;
  LinkModel model;
};

struct TopologySpec {
  std::vector<Node> nodes;
  std::vector<LinkSpec> links;
};

class Topology {
 public:
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<LinkSpec>& links() const { return links_; }

  const Node* node(std::string_view id) const;
  // Index into links() of the directed link from -> to, if any.
  std::optional<std::size_t> link_index(std::string_view from, std::string_view to) const;
  bool has_tier(Tier t) const;

 private:
  friend Topology build_topology(const TopologySpec& spec);
  std::vector<Node> nodes_;
  std::vector<LinkSpec> links_;
};

struct TopologyIssue {
  SimErrc code;
  std::string detail;
};

class TopologyError : public SimError {
 public:
  explicit TopologyError(std::vector<TopologyIssue> issues);
  const std::vector<TopologyIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<TopologyIssue> issues_;
};

// Validates every structural constraint; throws TopologyError listing all of
// the violations found.
Topology build_topology(const TopologySpec& spec);

// Reads [[node]] and [[link]] tables:
//   [[node]]  id = "fog0"  tier = "fog"
//   [[link]]  from = "e0"  to = "fog0"  protocol = "wifi"
//             mean_ms = ..., jitter_ms = ..., drop = ...   (optional overrides)
TopologySpec topology_spec_from_config(const config::Value& root);

struct Packet {
  std::vector<std::uint8_t> payload;
  std::string source;
  std::string destination;
  std::int64_t send_time_ns = 0;
};

struct TraceEvent {
  Packet packet;
  std::optional<std::int64_t> deliver_time_ns;  // nullopt: dropped
  std::size_t sequence = 0;                     // index in the workload

  bool dropped() const { return !deliver_time_ns.has_value(); }
  double latency_ms() const;
};

using Trace = std::vector<TraceEvent>;

inline constexpr std::int64_t ms_to_ns(double ms) {
  return static_cast<std::int64_t>(ms * 1e6 + (ms >= 0 ? 0.5 : -0.5));
}
inline constexpr double ns_to_ms(std::int64_t ns) { return static_cast<double>(ns) / 1e6; }

// Deterministic in (topology, workload, seed). Events are ordered by delivery
// time, ties broken by (send time, workload order); dropped packets sort last.
Trace run(const Topology& topology, const std::vector<Packet>& workload, std::uint64_t seed);

struct LatencyStats {
  double mean_ms = 0;
  double std_ms = 0;  // population
  double min_ms = 0;
  double max_ms = 0;
  std::size_t count = 0;
};

// Statistics over delivered events. Throws EmptyTrace when none were delivered.
LatencyStats measure_latency(const Trace& trace);

std::string trace_to_csv(const Trace& trace);
std::string trace_to_ndjson(const Trace& trace);

}  // namespace anoml::sim
