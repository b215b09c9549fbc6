#pragma once

// Edge-node code generator: validates a declarative node specification and
// expands it into a transmitter sketch, a fog-side receiver script, optional
// Bluetooth Classic setup commands and a Node-RED hint.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "anoml/config.hpp"
#include "anoml/error.hpp"
#include "anoml/transport_sim.hpp"
#include "anoml/wire_format.hpp"

namespace anoml::codegen {

enum class Mcu { Nano33BleSense = 1, NanoRp2040Connect = 2, RaspberryPiPico = 3 };
enum class Aggregation { Lowest, Mean, Highest };

std::string_view to_string(Mcu mcu);
std::string_view to_string(Aggregation agg);
inline int mcu_id(Mcu mcu) { return static_cast<int>(mcu); }

struct WifiParams {
  std::string ssid;
  std::string password;
  std::string host_ip;
  int host_port = 0;
};

// Shared by Bluetooth Classic and BLE; only the MAC address is required.
struct BluetoothParams {
  std::string mac;
  std::string module_name;
  std::string pin;
};

struct ZigbeeParams {
  std::string pan_id;
  std::string dest_addr_high;
  std::string dest_addr_low;
};

using ProtocolParams = std::variant<WifiParams, BluetoothParams, ZigbeeParams>;

inline constexpr std::int64_t kMinTransferRateMs = 30000;
inline constexpr std::int64_t kMaxTransferRateMs = 300000;
inline constexpr std::int64_t kSamplePeriodMs = 1000;
inline constexpr std::size_t kMaxLocations = 99;

struct NodeSpec {
  std::vector<wire::SensorType> sensors;
  sim::Protocol protocol = sim::Protocol::WiFi;
  Mcu mcu = Mcu::Nano33BleSense;
  std::string location_name;
  int location_id = 0;
  std::int64_t transfer_rate_ms = kMinTransferRateMs;
  Aggregation aggregation = Aggregation::Mean;
  ProtocolParams params = WifiParams{};
};

// Fixed sensor numbering on a node: TH=1, HU=2, AQ=3, LI=4, SO=5.
int sensor_id(wire::SensorType type);
// Temperature and humidity travel as floats, the rest as integers.
bool sends_float(wire::SensorType type);

enum class SpecErrc {
  RateOutOfRange,
  MissingMac,
  EmptySensorSet,
  LocationOutOfRange,
  IllegalCharacters,
  ProtocolParamsMismatch,
};

std::string_view to_string(SpecErrc code);

struct SpecIssue {
  SpecErrc code;
  std::string field;
  friend bool operator==(const SpecIssue&, const SpecIssue&) = default;
};

bool is_allowed_char(char c);
// Drops every character outside [A-Za-z0-9 _.:-].
std::string sanitize(std::string_view text);

// Every violated constraint, in field order. Empty means valid.
std::vector<SpecIssue> validate_spec(const NodeSpec& spec);

struct GeneratedBundle {
  std::string transmitter_source;
  std::string receiver_source;
  std::vector<std::string> shell_commands;  // Bluetooth Classic only
  std::string node_red_hint;
};

enum class CodegenErrc { InvalidSpec, RegistryFull, Io };
using CodegenError = Error<CodegenErrc>;
std::string_view to_string(CodegenErrc code);

GeneratedBundle generate(const NodeSpec& spec);

using LocationRegistry = std::map<std::string, int>;

// Existing names keep their id; new names take the smallest unused id from 0.
std::pair<LocationRegistry, int> assign_location_id(const LocationRegistry& registry,
                                                    const std::string& name);

NodeSpec node_spec_from_config(const config::Value& root);

// transmitter.ino.txt, receiver.py.txt, setup.sh.txt and manifest.json.
void write_bundle(const GeneratedBundle& bundle, const NodeSpec& spec, const std::string& dir);

}  // namespace anoml::codegen
