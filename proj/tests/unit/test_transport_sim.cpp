#include <gtest/gtest.h>

#include <cmath>

#include "anoml/transport_sim.hpp"

using namespace anoml::sim;

namespace {

template <typename F>
SimErrc error_of(F&& f) {
  try {
    f();
  } catch (const SimError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no SimError thrown";
  return SimErrc::InvalidLink;
}

TopologySpec pair_spec(const LinkModel& m) {
  TopologySpec s;
  s.nodes = {{"e", Tier::Edge}, {"f", Tier::Fog}};
  s.links = {{"e", "f", m}};
  return s;
}

std::vector<Packet> packets(std::size_t n, const std::string& from, const std::string& to) {
  std::vector<Packet> w;
  for (std::size_t i = 0; i < n; ++i)
    w.push_back({{'x'}, from, to, static_cast<std::int64_t>(i) * 1'000'000'000});
  return w;
}

TopologySpec star(Protocol p, std::size_t edges) {
  TopologySpec s;
  s.nodes.push_back({"fog", Tier::Fog});
  for (std::size_t i = 0; i < edges; ++i) {
    const auto id = "e" + std::to_string(i);
    s.nodes.push_back({id, Tier::Edge});
    s.links.push_back({id, "fog", default_link(p, TierPair::EdgeFog)});
  }
  return s;
}

}  // namespace

TEST(TransportSim, LatencyTable) {
  EXPECT_DOUBLE_EQ(default_link(Protocol::WiFi, TierPair::EdgeFog).mean_latency_ms, 14.566);
  EXPECT_DOUBLE_EQ(default_link(Protocol::BluetoothClassic, TierPair::EdgeFog).mean_latency_ms, 171.15);
  EXPECT_DOUBLE_EQ(default_link(Protocol::WiFi, TierPair::FogCloud).mean_latency_ms, 21.23);
  EXPECT_DOUBLE_EQ(default_link(Protocol::BLE, TierPair::EdgeEdge).mean_latency_ms, 11.23);
  EXPECT_DOUBLE_EQ(default_link(Protocol::Zigbee, TierPair::FogFog).mean_latency_ms, 14.56);
  EXPECT_EQ(error_of([] { default_link(Protocol::Zigbee, TierPair::FogCloud); }), SimErrc::UnsupportedPair);
  EXPECT_EQ(error_of([] { default_link(Protocol::BLE, TierPair::FogCloud); }), SimErrc::UnsupportedPair);
  EXPECT_DOUBLE_EQ(default_link(Protocol::WiFi, TierPair::EdgeFog).jitter_std_ms, 1.4566);
}

TEST(TransportSim, ProtocolNames) {
  EXPECT_EQ(protocol_from_string("bt_classic"), Protocol::BluetoothClassic);
  EXPECT_EQ(protocol_from_string("ble"), Protocol::BLE);
  EXPECT_FALSE(protocol_from_string("lora").has_value());
  EXPECT_EQ(tier_pair_of(Tier::Cloud, Tier::Fog), TierPair::FogCloud);
  EXPECT_FALSE(tier_pair_of(Tier::Edge, Tier::Cloud).has_value());
}

TEST(TransportSim, TopologyConstraints) {
  EXPECT_NO_THROW(build_topology(star(Protocol::BluetoothClassic, 7)));
  EXPECT_EQ(error_of([] { build_topology(star(Protocol::BluetoothClassic, 8)); }),
            SimErrc::BtClassicFanoutExceeded);
  EXPECT_NO_THROW(build_topology(star(Protocol::BLE, 20)));
  EXPECT_EQ(error_of([] { build_topology(star(Protocol::BLE, 21)); }), SimErrc::BlePeripheralLimitExceeded);
  EXPECT_NO_THROW(build_topology(TopologySpec{}));

  TopologySpec zig;
  zig.nodes = {{"f", Tier::Fog}, {"c", Tier::Cloud}};
  LinkModel m{Protocol::Zigbee, TierPair::FogCloud, 10.0, 0.0, 0.0};
  zig.links = {{"f", "c", m}};
  EXPECT_EQ(error_of([&] { build_topology(zig); }), SimErrc::FogCloudRequiresWiFi);
}

TEST(TransportSim, TopologyCollectsEveryIssue) {
  auto spec = star(Protocol::BluetoothClassic, 8);
  spec.nodes.push_back({"fog", Tier::Fog});
  try {
    build_topology(spec);
    FAIL();
  } catch (const TopologyError& e) {
    EXPECT_EQ(e.issues().size(), 2u);
  }
}

TEST(TransportSim, ZeroJitterIsExact) {
  LinkModel m{Protocol::WiFi, TierPair::EdgeFog, 10.0, 0.0, 0.0};
  const auto topo = build_topology(pair_spec(m));
  std::vector<Packet> w{{{'a'}, "e", "f", 0}};
  const auto trace = run(topo, w, 1);
  ASSERT_EQ(trace.size(), 1u);
  EXPECT_EQ(*trace[0].deliver_time_ns, 10'000'000);
  EXPECT_DOUBLE_EQ(trace[0].latency_ms(), 10.0);
}

TEST(TransportSim, TableMeansReproducedAtZeroJitter) {
  for (auto p : {Protocol::WiFi, Protocol::BluetoothClassic, Protocol::BLE, Protocol::Zigbee}) {
    auto m = default_link(p, TierPair::EdgeFog);
    m.jitter_std_ms = 0;
    const auto stats = measure_latency(run(build_topology(pair_spec(m)), packets(1000, "e", "f"), 3));
    EXPECT_EQ(stats.mean_ms, m.mean_latency_ms);
    EXPECT_EQ(stats.std_ms, 0.0);
    EXPECT_EQ(stats.count, 1000u);
  }
}

TEST(TransportSim, JitteredMeanWithinSamplingBound) {
  const auto m = default_link(Protocol::WiFi, TierPair::EdgeFog);
  const auto stats = measure_latency(run(build_topology(pair_spec(m)), packets(1000, "e", "f"), 42));
  EXPECT_NEAR(stats.mean_ms, 14.566, 0.15);
  EXPECT_NEAR(stats.mean_ms, 14.566, 3 * 1.4566 / std::sqrt(1000.0));
  EXPECT_NEAR(stats.std_ms, 1.4566, 0.2);
}

TEST(TransportSim, SameSeedSameTrace) {
  const auto m = default_link(Protocol::BLE, TierPair::EdgeFog);
  const auto topo = build_topology(pair_spec(m));
  const auto a = run(topo, packets(200, "e", "f"), 9);
  const auto b = run(topo, packets(200, "e", "f"), 9);
  EXPECT_EQ(trace_to_csv(a), trace_to_csv(b));
  EXPECT_NE(trace_to_csv(a), trace_to_csv(run(topo, packets(200, "e", "f"), 10)));
}

TEST(TransportSim, TraceIsOrderedByDelivery) {
  const auto m = default_link(Protocol::WiFi, TierPair::EdgeFog);
  std::vector<Packet> w;
  for (int i = 0; i < 500; ++i) w.push_back({{'x'}, "e", "f", i * 100'000});  // 0.1 ms apart
  const auto trace = run(build_topology(pair_spec(m)), w, 5);
  for (std::size_t i = 1; i < trace.size(); ++i)
    EXPECT_LE(*trace[i - 1].deliver_time_ns, *trace[i].deliver_time_ns);
}

TEST(TransportSim, DropsAreReportedAndExcluded) {
  LinkModel m{Protocol::WiFi, TierPair::EdgeFog, 5.0, 0.0, 0.5};
  const auto trace = run(build_topology(pair_spec(m)), packets(400, "e", "f"), 2);
  std::size_t dropped = 0;
  for (const auto& ev : trace) dropped += ev.dropped();
  EXPECT_GT(dropped, 120u);
  EXPECT_LT(dropped, 280u);
  const auto stats = measure_latency(trace);
  EXPECT_EQ(stats.count, 400 - dropped);
  EXPECT_EQ(stats.mean_ms, 5.0);
}

TEST(TransportSim, MeasureLatency) {
  LinkModel m{Protocol::WiFi, TierPair::EdgeFog, 10.0, 0.0, 0.0};
  const auto topo = build_topology(pair_spec(m));
  auto trace = run(topo, packets(2, "e", "f"), 0);
  *trace[1].deliver_time_ns += 10'000'000;
  const auto s = measure_latency(trace);
  EXPECT_DOUBLE_EQ(s.mean_ms, 15.0);
  EXPECT_DOUBLE_EQ(s.min_ms, 10.0);
  EXPECT_DOUBLE_EQ(s.max_ms, 20.0);
  EXPECT_EQ(error_of([] { measure_latency({}); }), SimErrc::EmptyTrace);
}

TEST(TransportSim, UnknownLinkInWorkload) {
  const auto topo = build_topology(pair_spec(default_link(Protocol::WiFi, TierPair::EdgeFog)));
  EXPECT_EQ(error_of([&] { run(topo, packets(1, "f", "e"), 0); }), SimErrc::UnknownLink);
}

TEST(TransportSim, ConfigTopology) {
  const auto cfg = anoml::config::parse(R"(
[[node]]
id = "e"
tier = "edge"
[[node]]
id = "f"
tier = "fog"
[[node]]
id = "c"
tier = "cloud"
[[link]]
from = "e"
to = "f"
protocol = "ble"
[[link]]
from = "f"
to = "c"
protocol = "wifi"
jitter_ms = 0
)");
  const auto topo = build_topology(topology_spec_from_config(cfg));
  ASSERT_EQ(topo.links().size(), 2u);
  EXPECT_DOUBLE_EQ(topo.links()[0].model.mean_latency_ms, 13.45);
  EXPECT_DOUBLE_EQ(topo.links()[1].model.mean_latency_ms, 21.23);
  EXPECT_EQ(topo.links()[1].model.jitter_std_ms, 0.0);
}

TEST(TransportSim, Exports) {
  LinkModel m{Protocol::WiFi, TierPair::EdgeFog, 10.0, 0.0, 0.0};
  const auto trace = run(build_topology(pair_spec(m)), packets(3, "e", "f"), 0);
  const auto csv = trace_to_csv(trace);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const auto nd = trace_to_ndjson(trace);
  EXPECT_EQ(std::count(nd.begin(), nd.end(), '\n'), 3);
  EXPECT_EQ(nd.front(), '{');
}
