#include <cmath>
#include <random>

#include "anoml/preprocess.hpp"
#include "anoml/transport_sim.hpp"
#include "anoml/wire_format.hpp"
#include "criteria.hpp"
#include "oracles.hpp"

namespace acceptance {

namespace {

using namespace anoml;

template <typename F>
std::optional<wire::WireErrc> wire_error(F&& f) {
  try {
    f();
  } catch (const wire::WireError& e) {
    return e.code();
  }
  return std::nullopt;
}

template <typename F>
std::optional<sim::SimErrc> sim_error(F&& f) {
  try {
    f();
  } catch (const sim::SimError& e) {
    return e.code();
  }
  return std::nullopt;
}

sim::TopologySpec star(sim::Protocol p, std::size_t edges) {
  sim::TopologySpec s;
  s.nodes.push_back({"fog", sim::Tier::Fog});
  for (std::size_t i = 0; i < edges; ++i) {
    const auto id = "e" + std::to_string(i);
    s.nodes.push_back({id, sim::Tier::Edge});
    s.links.push_back({id, "fog", sim::default_link(p, sim::TierPair::EdgeFog)});
  }
  return s;
}

sim::Tier lower(sim::TierPair p) {
  switch (p) {
    case sim::TierPair::EdgeEdge:
    case sim::TierPair::EdgeFog: return sim::Tier::Edge;
    default: return sim::Tier::Fog;
  }
}

sim::Tier upper(sim::TierPair p) {
  switch (p) {
    case sim::TierPair::EdgeEdge: return sim::Tier::Edge;
    case sim::TierPair::FogCloud: return sim::Tier::Cloud;
    default: return sim::Tier::Fog;
  }
}

sim::LatencyStats measure_link(const sim::LinkModel& m, std::uint64_t seed) {
  sim::TopologySpec spec;
  spec.nodes = {{"a", lower(m.tier_pair)}, {"b", upper(m.tier_pair)}};
  spec.links = {{"a", "b", m}};
  std::vector<sim::Packet> workload;
  for (std::int64_t i = 0; i < 1000; ++i) workload.push_back({{'x'}, "a", "b", i * 1'000'000'000});
  return sim::measure_latency(sim::run(sim::build_topology(spec), workload, seed));
}

// Relative error against max(|expected|, scale); `scale` is the natural unit
// of the quantity so values that are zero in exact arithmetic compare sanely.
double rel(double got, double expected, double scale) {
  return std::fabs(got - expected) / std::max({std::fabs(expected), scale, 1e-300});
}

}  // namespace

Outcome wire_round_trip() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> mcu(0, wire::kMaxMcuId), loc(0, wire::kMaxLocationId),
      sen(0, wire::kMaxSensorId), kind(0, 2);
  std::uniform_int_distribution<std::int64_t> hundredths(-9'999'999, 99'999'999), integer(-999'999'999, 999'999'999);
  std::uniform_real_distribution<double> real(-5000.0, 5000.0);
  std::size_t text_ok = 0, ble_ok = 0;
  for (int i = 0; i < 10'000; ++i) {
    wire::SensorReading r;
    r.identity = wire::NodeIdentity::make(mcu(rng), loc(rng), sen(rng));
    r.sensor_type = wire::kAllSensorTypes[static_cast<std::size_t>(i) % wire::kAllSensorTypes.size()];
    double source = 0;
    switch (kind(rng)) {
      case 0: r.value = wire::SensorValue::from_hundredths(hundredths(rng)); break;
      case 1: r.value = wire::SensorValue::from_integer(integer(rng)); break;
      default:
        source = real(rng);
        r.value = wire::SensorValue::from_float(source);
        break;
    }
    const auto line = wire::encode_text(r);
    const auto back = wire::decode_text(line);
    text_ok += back == r ? 1 : 0;
    if (source != 0 && std::fabs(back.value.as_double() - source) > 0.005 + 1e-9)
      o.expect(false, cat("float ", source, " decoded as ", back.value.as_double()));
    if (line.size() > wire::kBlePayloadLimit) {
      o.expect(false, cat("reading too long for BLE: ", line));
      continue;
    }
    const auto bytes = wire::encode_ble(r);
    const auto ble_back = wire::decode_ble(bytes);
    ble_ok += ble_back == r && wire::encode_text(ble_back) == line ? 1 : 0;
  }
  o.expect(text_ok == 10'000, cat(10'000 - text_ok, " text round trips differ"));
  o.expect(ble_ok == 10'000, cat(10'000 - ble_ok, " BLE round trips differ"));

  using E = wire::WireErrc;
  const auto expect_error = [&](auto f, E want, const char* what) {
    const auto got = wire_error(f);
    o.expect(got == want, cat(what, ": expected ", wire::to_string(want), ", got ",
                              got ? wire::to_string(*got) : "no error"));
  };
  expect_error([] { wire::decode_text("101001TH"); }, E::MalformedLength, "short line");
  expect_error([] { wire::decode_text("101001XXF24.45"); }, E::UnknownSensorType, "unknown type");
  expect_error([] { wire::decode_text("101001THQ24.45"); }, E::UnknownIndicator, "unknown indicator");
  expect_error([] { wire::decode_text("101001THF24.4"); }, E::NonNumericValue, "one decimal");
  expect_error([] { wire::decode_text("101001LII12a"); }, E::NonNumericValue, "non-numeric integer");
  expect_error([] { wire::decode_text("199001THF24.45"); }, E::LocationOutOfRange, "location 99");
  expect_error([] { wire::decode_ble(std::vector<std::uint8_t>{'1', '0', '1', 0x80, '0', '1', 'T', 'H', 'I', '1'}); },
               E::NonAsciiByte, "non-ASCII byte");
  expect_error([] { wire::decode_ble(std::vector<std::uint8_t>(21, '1')); }, E::PayloadTooLong, "21-byte BLE payload");
  expect_error(
      [] {
        wire::SensorReading r;
        r.identity = wire::NodeIdentity::make(1, 1, 1);
        r.value = wire::SensorValue::from_integer(-999'999'999'999);
        wire::encode_ble(r);
      },
      E::PayloadTooLong, "oversized BLE encode");
  expect_error([] { wire::NodeIdentity::make(10, 1, 1); }, E::InvalidIdentity, "mcu 10");
  return o;
}

Outcome simulator_fidelity() {
  Outcome o;
  using sim::Protocol;
  using sim::TierPair;
  for (auto p : {Protocol::WiFi, Protocol::BluetoothClassic, Protocol::BLE, Protocol::Zigbee}) {
    for (auto pair : {TierPair::EdgeEdge, TierPair::EdgeFog, TierPair::FogFog, TierPair::FogCloud}) {
      if (!sim::table_latency_ms(p, pair)) continue;
      auto m = sim::default_link(p, pair);
      const auto label = cat(sim::to_string(p), "/", sim::to_string(pair));

      const auto jittered = measure_link(m, 42);
      const double sigma = m.jitter_std_ms;
      const double bound = 3 * sigma / std::sqrt(1000.0);
      o.expect(std::fabs(jittered.mean_ms - m.mean_latency_ms) <= bound,
               cat(label, " jittered mean ", jittered.mean_ms, " vs ", m.mean_latency_ms, " bound ", bound));

      m.jitter_std_ms = 0;
      const auto exact = measure_link(m, 42);
      o.expect(exact.mean_ms == m.mean_latency_ms && exact.count == 1000,
               cat(label, " zero-jitter mean ", exact.mean_ms, " != ", m.mean_latency_ms));
    }
  }

  using E = sim::SimErrc;
  o.expect(!sim_error([] { sim::build_topology(star(Protocol::BluetoothClassic, 7)); }), "7 BT Classic peers rejected");
  o.expect(sim_error([] { sim::build_topology(star(Protocol::BluetoothClassic, 8)); }) == E::BtClassicFanoutExceeded,
           "8 BT Classic peers accepted");
  o.expect(!sim_error([] { sim::build_topology(star(Protocol::BLE, 20)); }), "20 BLE peripherals rejected");
  o.expect(sim_error([] { sim::build_topology(star(Protocol::BLE, 21)); }) == E::BlePeripheralLimitExceeded,
           "21 BLE peripherals accepted");
  for (auto p : {Protocol::WiFi, Protocol::BluetoothClassic, Protocol::BLE, Protocol::Zigbee}) {
    sim::TopologySpec spec;
    spec.nodes = {{"f", sim::Tier::Fog}, {"c", sim::Tier::Cloud}};
    spec.links = {{"f", "c", sim::LinkModel{p, TierPair::FogCloud, 20.0, 0.0, 0.0}}};
    const auto err = sim_error([&] { sim::build_topology(spec); });
    if (p == Protocol::WiFi)
      o.expect(!err, "Wi-Fi fog->cloud rejected");
    else
      o.expect(err == E::FogCloudRequiresWiFi, cat(sim::to_string(p), " fog->cloud accepted"));
  }
  return o;
}

Outcome reducer_scaler_oracles() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(1, 50);
  std::uniform_real_distribution<double> value(-100.0, 100.0), offset(-1e3, 1e3);
  const double tol = 1e-9;
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int rows = dim(rng), cols = dim(rng);
    const double shift = offset(rng);
    oracle::Table table(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(cols)));
    const bool constant = trial % 10 == 0;
    const double c = value(rng);
    for (auto& row : table)
      for (auto& v : row) v = constant ? c : shift + value(rng);
    // Constant columns inside otherwise random data.
    if (trial % 10 == 5)
      for (auto& row : table) row[0] = 3.25;

    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

    for (int i = 0; i < rows; ++i) {
      const auto& row = table[static_cast<std::size_t>(i)];
      double scale = 0;
      for (double v : row) scale = std::max(scale, std::fabs(v));
      const Eigen::RowVectorXd x = m.row(i);
      const struct {
        prep::ReducerKind kind;
        double expected;
        double unit;
      } cases[] = {
          {prep::ReducerKind::Average, oracle::mean(row), scale},
          {prep::ReducerKind::StDev, oracle::stdev(row), scale},
          {prep::ReducerKind::Skew, oracle::skew(row), 1.0},
          {prep::ReducerKind::Kurtosis, oracle::kurtosis(row), 1.0},
          {prep::ReducerKind::Mad, oracle::mad(row), scale},
      };
      o.tally(std::size(cases));
      for (const auto& k : cases) {
        const double err = rel(prep::reduce_vector(x, k.kind), k.expected, k.unit);
        worst = std::max(worst, err);
        if (err > tol) o.expect(false, cat("trial ", trial, " row ", i, " reducer ", static_cast<int>(k.kind), " err ", err));
      }
    }

    // Fit on the first half of the rows (at least one), apply to all.
    const std::size_t fit_rows = std::max<std::size_t>(1, table.size() / 2);
    const oracle::Table fit(table.begin(), table.begin() + static_cast<std::ptrdiff_t>(fit_rows));
    const struct {
      prep::ScalerKind kind;
      oracle::Table expected;
    } scalers[] = {{prep::ScalerKind::MinMax, oracle::minmax(fit, table)},
                   {prep::ScalerKind::Standard, oracle::standard(fit, table)}};
    for (const auto& s : scalers) {
      const auto params = prep::fit_scaler(s.kind, m.topRows(static_cast<Eigen::Index>(fit_rows)));
      const auto got = prep::apply_scaler(params, m);
      o.tally(static_cast<std::size_t>(rows * cols));
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
          const double err = rel(got(i, j), s.expected[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 1.0);
          worst = std::max(worst, err);
          if (err > tol) o.expect(false, cat("trial ", trial, " scaler ", static_cast<int>(s.kind), " (", i, ",", j, ") err ", err));
        }
    }
  }
  o.note(cat("worst relative error ", worst));
  return o;
}

}  // namespace acceptance
