#include <gtest/gtest.h>

#include <json.hpp>

#include "anoml/scenario.hpp"
#include "fixtures.hpp"

using namespace anoml;
using namespace anoml::pipeline;

namespace {

struct Setup {
  data::TimeSeriesFrame test;
  PipelineModel model;
};

const Setup& setup() {
  static const Setup s = [] {
    const auto frame = fixture::sensor_frame();
    auto [train, test] = data::split(frame, 0.5);
    detect::TrainOptions opts;
    opts.isolation_forest.n_trees = 50;
    return Setup{test, train_model(train, prep::SrKind::MinMax,
                                   detect::DetectorKind::IsolationForest, 4, opts)};
  }();
  return s;
}

ScenarioConfig quiet(Placement p) {
  ScenarioConfig c;
  c.placement = p;
  c.jitter_fraction = 0.0;
  c.fixed_inference_ms = 0.25;
  return c;
}

}  // namespace

TEST(Scenario, CloudPathLatencyIsSumOfTableMeans) {
  const auto r = run_scenario(quiet(Placement::Cloud), setup().model, setup().test, 1);
  EXPECT_NEAR(r.path_latency_ms, 14.566 + 21.23, 1e-9);
  EXPECT_NEAR(r.detection_latency_ms, 14.566 + 21.23 + 0.25, 1e-9);
  EXPECT_EQ(r.policy, ForwardPolicy::RawOnly);
}

TEST(Scenario, FogAndEdgePathLatency) {
  const auto fog = run_scenario(quiet(Placement::Fog), setup().model, setup().test, 1);
  EXPECT_NEAR(fog.path_latency_ms, 14.566, 1e-9);
  const auto edge = run_scenario(quiet(Placement::Edge), setup().model, setup().test, 1);
  EXPECT_EQ(edge.path_latency_ms, 0.0);
  EXPECT_NEAR(edge.detection_latency_ms, 0.25, 1e-12);
}

TEST(Scenario, RawForwardingConservesRows) {
  const auto& s = setup();
  const auto r = run_scenario(quiet(Placement::Cloud), s.model, s.test, 3);
  EXPECT_EQ(r.rows_sent, s.test.n_rows());
  EXPECT_EQ(r.rows_at_detection_tier, s.test.n_rows());
  EXPECT_EQ(r.messages_at_detection_tier, s.test.n_rows() * s.test.n_features());
  EXPECT_EQ(r.windows, s.test.n_rows() - 4 + 1);
  EXPECT_EQ(r.scores.size(), r.windows);
  EXPECT_EQ(r.predictions.size(), r.windows);
}

TEST(Scenario, PlacementDoesNotChangeMetrics) {
  const auto& s = setup();
  ScenarioConfig base;
  base.fixed_inference_ms = 0.1;
  std::string reference;
  for (auto p : {Placement::Edge, Placement::Fog, Placement::Cloud}) {
    base.placement = p;
    const auto r = run_scenario(base, s.model, s.test, 42);
    const auto block = metrics::metric_block(r.metrics);
    if (reference.empty()) reference = block;
    EXPECT_EQ(block, reference) << to_string(p);
  }
}

TEST(Scenario, SameSeedSameReport) {
  const auto& s = setup();
  ScenarioConfig c;
  c.placement = Placement::Fog;
  c.fixed_inference_ms = 0.5;
  const auto a = run_scenario(c, s.model, s.test, 9);
  const auto b = run_scenario(c, s.model, s.test, 9);
  // Everything but the measured transform time repeats.
  auto ja = nlohmann::json::parse(scenario_json(a));
  auto jb = nlohmann::json::parse(scenario_json(b));
  ja["metrics"].erase("scale_reduce_s");
  jb["metrics"].erase("scale_reduce_s");
  EXPECT_EQ(ja, jb);
  const auto other = run_scenario(c, s.model, s.test, 10);
  EXPECT_NE(a.path_latency_ms, other.path_latency_ms);
}

TEST(Scenario, ForwardPoliciesAddTiers) {
  const auto& s = setup();
  auto c = quiet(Placement::Edge);
  c.forward_policy = ForwardPolicy::ProcessedScore;
  const auto r = run_scenario(c, s.model, s.test, 1);
  ASSERT_EQ(r.tiers.size(), 3u);
  EXPECT_EQ(r.tiers[1].tier, sim::Tier::Fog);
  EXPECT_EQ(r.tiers[1].messages, r.windows);
  // Forwarded results leave after inference.
  EXPECT_NEAR(r.tiers[1].mean_ms, 0.25 + 14.566, 1e-9);
  EXPECT_NEAR(r.tiers[2].mean_ms, 0.25 + 14.566 + 21.23, 1e-9);
}

TEST(Scenario, BleEdgeLink) {
  auto c = quiet(Placement::Fog);
  c.edge_protocol = sim::Protocol::BLE;
  const auto r = run_scenario(c, setup().model, setup().test, 1);
  EXPECT_NEAR(r.path_latency_ms, 13.45, 1e-9);
  const auto cloud = run_scenario(quiet(Placement::Fog), setup().model, setup().test, 1);
  EXPECT_EQ(metrics::metric_block(r.metrics), metrics::metric_block(cloud.metrics));
}

TEST(Scenario, UnsupportedPlacements) {
  auto c = quiet(Placement::Edge);
  c.realistic_edge = true;
  try {
    run_scenario(c, setup().model, setup().test, 1);
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.code(), ScenarioErrc::PlacementUnsupported);
  }

  auto no_cloud = quiet(Placement::Cloud);
  no_cloud.topology = sim::TopologySpec{
      {{"edge0", sim::Tier::Edge}, {"fog0", sim::Tier::Fog}},
      {{"edge0", "fog0", sim::default_link(sim::Protocol::WiFi, sim::TierPair::EdgeFog)}}};
  try {
    run_scenario(no_cloud, setup().model, setup().test, 1);
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.code(), ScenarioErrc::PlacementUnsupported);
  }
}

TEST(Scenario, ConfigParsing) {
  const auto root = config::parse(R"(
[scenario]
placement = "fog"
forward_policy = "processed_score"
edge_protocol = "ble"
jitter_fraction = 0.0
realistic_edge = true
)");
  const auto c = scenario_from_config(root);
  EXPECT_EQ(c.placement, Placement::Fog);
  EXPECT_EQ(c.forward_policy, ForwardPolicy::ProcessedScore);
  EXPECT_EQ(c.edge_protocol, sim::Protocol::BLE);
  EXPECT_EQ(c.jitter_fraction, 0.0);
  EXPECT_TRUE(c.realistic_edge);
  EXPECT_FALSE(c.topology.has_value());
  EXPECT_EQ(quiet(Placement::Cloud).effective_policy(), ForwardPolicy::RawOnly);
}
