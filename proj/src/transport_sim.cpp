#include "anoml/transport_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace anoml::sim {

std::string_view to_string(SimErrc code) {
  switch (code) {
    case SimErrc::UnsupportedPair: return "UnsupportedPair";
    case SimErrc::BtClassicFanoutExceeded: return "BtClassicFanoutExceeded";
    case SimErrc::BlePeripheralLimitExceeded: return "BlePeripheralLimitExceeded";
    case SimErrc::FogCloudRequiresWiFi: return "FogCloudRequiresWiFi";
    case SimErrc::UnknownNode: return "UnknownNode";
    case SimErrc::DuplicateNode: return "DuplicateNode";
    case SimErrc::TierMismatch: return "TierMismatch";
    case SimErrc::InvalidLink: return "InvalidLink";
    case SimErrc::UnknownLink: return "UnknownLink";
    case SimErrc::EmptyTrace: return "EmptyTrace";
  }
  return "?";
}

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::WiFi: return "wifi";
    case Protocol::BluetoothClassic: return "bluetooth_classic";
    case Protocol::BLE: return "ble";
    case Protocol::Zigbee: return "zigbee";
  }
  return "?";
}

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::Edge: return "edge";
    case Tier::Fog: return "fog";
    case Tier::Cloud: return "cloud";
  }
  return "?";
}

std::string_view to_string(TierPair t) {
  switch (t) {
    case TierPair::EdgeEdge: return "edge_edge";
    case TierPair::EdgeFog: return "edge_fog";
    case TierPair::FogFog: return "fog_fog";
    case TierPair::FogCloud: return "fog_cloud";
  }
  return "?";
}

std::optional<Protocol> protocol_from_string(std::string_view s) {
  if (s == "wifi" || s == "WF") return Protocol::WiFi;
  if (s == "bluetooth_classic" || s == "bt_classic" || s == "BC") return Protocol::BluetoothClassic;
  if (s == "ble" || s == "BL") return Protocol::BLE;
  if (s == "zigbee" || s == "ZB") return Protocol::Zigbee;
  return std::nullopt;
}

std::optional<Tier> tier_from_string(std::string_view s) {
  if (s == "edge") return Tier::Edge;
  if (s == "fog") return Tier::Fog;
  if (s == "cloud") return Tier::Cloud;
  return std::nullopt;
}

std::optional<TierPair> tier_pair_of(Tier a, Tier b) {
  if (a > b) std::swap(a, b);
  if (a == Tier::Edge && b == Tier::Edge) return TierPair::EdgeEdge;
  if (a == Tier::Edge && b == Tier::Fog) return TierPair::EdgeFog;
  if (a == Tier::Fog && b == Tier::Fog) return TierPair::FogFog;
  if (a == Tier::Fog && b == Tier::Cloud) return TierPair::FogCloud;
  return std::nullopt;
}

std::optional<double> table_latency_ms(Protocol protocol, TierPair pair) {
  // Rows: WiFi, Bluetooth Classic, BLE, Zigbee.
  // Columns: edge-edge, edge-fog, fog-fog, fog-cloud (negative = not applicable).
  static constexpr double kTable[4][4] = {
      {18.24, 14.566, 17.25, 21.23},
      {195.13, 171.15, 187.15, -1},
      {11.23, 13.45, 13.21, -1},
      {18.56, 16.66, 14.56, -1},
  };
  const double v = kTable[static_cast<int>(protocol)][static_cast<int>(pair)];
  if (v < 0) return std::nullopt;
  return v;
}

LinkModel default_link(Protocol protocol, TierPair pair) {
  auto mean = table_latency_ms(protocol, pair);
  if (!mean)
    throw SimError(SimErrc::UnsupportedPair, std::string(to_string(protocol)) + " does not serve " +
                                                 std::string(to_string(pair)));
  return LinkModel{protocol, pair, *mean, kDefaultJitterFraction * *mean, 0.0};
}

const Node* Topology::node(std::string_view id) const {
  for (const auto& n : nodes_)
    if (n.id == id) return &n;
  return nullptr;
}

std::optional<std::size_t> Topology::link_index(std::string_view from, std::string_view to) const {
  for (std::size_t i = 0; i < links_.size(); ++i)
    if (links_[i].from == from && links_[i].to == to) return i;
  return std::nullopt;
}

bool Topology::has_tier(Tier t) const {
  return std::any_of(nodes_.begin(), nodes_.end(), [t](const Node& n) { return n.tier == t; });
}

TopologyError::TopologyError(std::vector<TopologyIssue> issues)
    : SimError(issues.empty() ? SimErrc::InvalidLink : issues.front().code,
               [&] {
                 std::string msg = "invalid topology:";
                 for (const auto& i : issues)
                   msg += " [" + std::string(to_string(i.code)) + ": " + i.detail + "]";
                 return msg;
               }()),
      issues_(std::move(issues)) {}

Topology build_topology(const TopologySpec& spec) {
  std::vector<TopologyIssue> issues;
  std::map<std::string, Tier> tiers;
  for (const auto& n : spec.nodes) {
    if (!tiers.emplace(n.id, n.tier).second)
      issues.push_back({SimErrc::DuplicateNode, n.id});
  }

  std::map<std::string, std::set<std::string>> bt_peers;
  std::map<std::string, std::set<std::string>> ble_peers;
  for (const auto& l : spec.links) {
    const auto& m = l.model;
    const auto name = l.from + "->" + l.to;
    auto a = tiers.find(l.from);
    auto b = tiers.find(l.to);
    if (a == tiers.end() || b == tiers.end()) {
      issues.push_back({SimErrc::UnknownNode, name});
      continue;
    }
    if (!(m.mean_latency_ms > 0) || !(m.jitter_std_ms >= 0) || !(m.drop_probability >= 0) ||
        !(m.drop_probability <= 1) || l.from == l.to) {
      issues.push_back({SimErrc::InvalidLink, name});
    }
    auto pair = tier_pair_of(a->second, b->second);
    if (!pair || *pair != m.tier_pair) issues.push_back({SimErrc::TierMismatch, name});
    if (m.tier_pair == TierPair::FogCloud && m.protocol != Protocol::WiFi)
      issues.push_back({SimErrc::FogCloudRequiresWiFi, name});
    if (m.protocol == Protocol::BluetoothClassic) {
      bt_peers[l.from].insert(l.to);
      bt_peers[l.to].insert(l.from);
    } else if (m.protocol == Protocol::BLE) {
      ble_peers[l.from].insert(l.to);
      ble_peers[l.to].insert(l.from);
    }
  }
  for (const auto& [hub, peers] : bt_peers)
    if (peers.size() > kBtClassicMaxPeers)
      issues.push_back({SimErrc::BtClassicFanoutExceeded,
                        hub + " has " + std::to_string(peers.size()) + " peers"});
  for (const auto& [hub, peers] : ble_peers)
    if (peers.size() > kBleMaxPeers)
      issues.push_back({SimErrc::BlePeripheralLimitExceeded,
                        hub + " has " + std::to_string(peers.size()) + " peers"});

  if (!issues.empty()) throw TopologyError(std::move(issues));
  Topology t;
  t.nodes_ = spec.nodes;
  t.links_ = spec.links;
  return t;
}

TopologySpec topology_spec_from_config(const config::Value& root) {
  TopologySpec spec;
  auto bad = [](const std::string& what) {
    return config::ConfigError(config::ConfigErrc::WrongType, what);
  };
  if (const auto* nodes = root.find("node")) {
    for (const auto& n : nodes->as_array()) {
      auto tier = tier_from_string(n.require_string("tier"));
      if (!tier) throw bad("unknown tier: " + n.require_string("tier"));
      spec.nodes.push_back({n.require_string("id"), *tier});
    }
  }
  std::map<std::string, Tier> tiers;
  for (const auto& n : spec.nodes) tiers.emplace(n.id, n.tier);
  if (const auto* links = root.find("link")) {
    for (const auto& l : links->as_array()) {
      LinkSpec ls;
      ls.from = l.require_string("from");
      ls.to = l.require_string("to");
      auto protocol = protocol_from_string(l.require_string("protocol"));
      if (!protocol) throw bad("unknown protocol: " + l.require_string("protocol"));
      auto a = tiers.find(ls.from);
      auto b = tiers.find(ls.to);
      std::optional<TierPair> pair;
      if (a != tiers.end() && b != tiers.end()) pair = tier_pair_of(a->second, b->second);
      ls.model.protocol = *protocol;
      ls.model.tier_pair = pair.value_or(TierPair::EdgeFog);
      auto table_mean = pair ? table_latency_ms(*protocol, *pair) : std::nullopt;
      // Explicit values win; otherwise fall back to the latency table.
      ls.model.mean_latency_ms = l.get_double("mean_ms", table_mean.value_or(1.0));
      ls.model.jitter_std_ms =
          l.get_double("jitter_ms", kDefaultJitterFraction * ls.model.mean_latency_ms);
      if (const auto* frac = l.find("jitter_fraction"))
        ls.model.jitter_std_ms = frac->as_double() * ls.model.mean_latency_ms;
      ls.model.drop_probability = l.get_double("drop", 0.0);
      spec.links.push_back(std::move(ls));
    }
  }
  return spec;
}

double TraceEvent::latency_ms() const {
  return deliver_time_ns ? ns_to_ms(*deliver_time_ns - packet.send_time_ns) : 0.0;
}

Trace run(const Topology& topology, const std::vector<Packet>& workload, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> standard_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Trace trace;
  trace.reserve(workload.size());
  for (std::size_t i = 0; i < workload.size(); ++i) {
    const Packet& p = workload[i];
    auto idx = topology.link_index(p.source, p.destination);
    if (!idx) throw SimError(SimErrc::UnknownLink, p.source + "->" + p.destination);
    const LinkModel& m = topology.links()[*idx].model;

    double latency_ms = m.mean_latency_ms;
    if (m.jitter_std_ms > 0)
      latency_ms = std::max(0.0, m.mean_latency_ms + m.jitter_std_ms * standard_normal(rng));
    bool dropped = false;
    if (m.drop_probability > 0) dropped = unit(rng) < m.drop_probability;

    TraceEvent ev{p, std::nullopt, i};
    if (!dropped) ev.deliver_time_ns = p.send_time_ns + ms_to_ns(latency_ms);
    trace.push_back(std::move(ev));
  }

  std::sort(trace.begin(), trace.end(), [](const TraceEvent& a, const TraceEvent& b) {
    if (a.dropped() != b.dropped()) return !a.dropped();
    if (!a.dropped() && *a.deliver_time_ns != *b.deliver_time_ns)
      return *a.deliver_time_ns < *b.deliver_time_ns;
    if (a.packet.send_time_ns != b.packet.send_time_ns)
      return a.packet.send_time_ns < b.packet.send_time_ns;
    return a.sequence < b.sequence;
  });
  return trace;
}

LatencyStats measure_latency(const Trace& trace) {
  std::vector<std::int64_t> latencies;
  latencies.reserve(trace.size());
  for (const auto& ev : trace)
    if (!ev.dropped()) latencies.push_back(*ev.deliver_time_ns - ev.packet.send_time_ns);
  if (latencies.empty()) throw SimError(SimErrc::EmptyTrace, "no delivered packets");

  // Integer nanosecond sums keep constant-latency traces exact.
  long double sum = 0;
  for (auto l : latencies) sum += static_cast<long double>(l);
  const long double n = static_cast<long double>(latencies.size());
  const long double mean_ns = sum / n;
  long double sq = 0;
  for (auto l : latencies) {
    const long double d = static_cast<long double>(l) - mean_ns;
    sq += d * d;
  }
  auto [lo, hi] = std::minmax_element(latencies.begin(), latencies.end());
  LatencyStats s;
  s.mean_ms = static_cast<double>(mean_ns) / 1e6;
  s.std_ms = static_cast<double>(std::sqrt(sq / n) / 1e6L);
  s.min_ms = ns_to_ms(*lo);
  s.max_ms = ns_to_ms(*hi);
  s.count = latencies.size();
  return s;
}

std::string trace_to_csv(const Trace& trace) {
  std::ostringstream out;
  out << "sequence,source,destination,send_time_ms,deliver_time_ms,latency_ms,dropped\n";
  out.precision(17);
  for (const auto& ev : trace) {
    out << ev.sequence << ',' << ev.packet.source << ',' << ev.packet.destination << ','
        << ns_to_ms(ev.packet.send_time_ns) << ',';
    if (ev.deliver_time_ns) out << ns_to_ms(*ev.deliver_time_ns);
    out << ',';
    if (!ev.dropped()) out << ev.latency_ms();
    out << ',' << (ev.dropped() ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string trace_to_ndjson(const Trace& trace) {
  std::string out;
  for (const auto& ev : trace) {
    nlohmann::json j;
    j["sequence"] = ev.sequence;
    j["source"] = ev.packet.source;
    j["destination"] = ev.packet.destination;
    j["send_time_ms"] = ns_to_ms(ev.packet.send_time_ns);
    if (ev.deliver_time_ns) {
      j["deliver_time_ms"] = ns_to_ms(*ev.deliver_time_ns);
      j["latency_ms"] = ev.latency_ms();
    } else {
      j["dropped"] = true;
    }
    j["payload"] = std::string(ev.packet.payload.begin(), ev.packet.payload.end());
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace anoml::sim
