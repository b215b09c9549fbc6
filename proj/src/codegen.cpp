#include "anoml/codegen.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace anoml::codegen {

std::string_view to_string(CodegenErrc code) {
  switch (code) {
    case CodegenErrc::InvalidSpec: return "InvalidSpec";
    case CodegenErrc::RegistryFull: return "RegistryFull";
    case CodegenErrc::Io: return "Io";
  }
  return "?";
}

std::string_view to_string(Mcu mcu) {
  switch (mcu) {
    case Mcu::Nano33BleSense: return "Nano33BleSense";
    case Mcu::NanoRp2040Connect: return "NanoRp2040Connect";
    case Mcu::RaspberryPiPico: return "RaspberryPiPico";
  }
  return "?";
}

std::string_view to_string(Aggregation agg) {
  switch (agg) {
    case Aggregation::Lowest: return "lowest";
    case Aggregation::Mean: return "mean";
    case Aggregation::Highest: return "highest";
  }
  return "?";
}

std::string_view to_string(SpecErrc code) {
  switch (code) {
    case SpecErrc::RateOutOfRange: return "RateOutOfRange";
    case SpecErrc::MissingMac: return "MissingMac";
    case SpecErrc::EmptySensorSet: return "EmptySensorSet";
    case SpecErrc::LocationOutOfRange: return "LocationOutOfRange";
    case SpecErrc::IllegalCharacters: return "IllegalCharacters";
    case SpecErrc::ProtocolParamsMismatch: return "ProtocolParamsMismatch";
  }
  return "?";
}

int sensor_id(wire::SensorType type) { return static_cast<int>(type) + 1; }

bool sends_float(wire::SensorType type) {
  return type == wire::SensorType::Temperature || type == wire::SensorType::Humidity;
}

bool is_allowed_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == ' ' ||
         c == '_' || c == '.' || c == ':' || c == '-';
}

std::string sanitize(std::string_view text) {
  std::string out;
  std::copy_if(text.begin(), text.end(), std::back_inserter(out), is_allowed_char);
  return out;
}

namespace {

bool is_bluetooth(sim::Protocol p) {
  return p == sim::Protocol::BluetoothClassic || p == sim::Protocol::BLE;
}

bool params_match(const NodeSpec& spec) {
  switch (spec.protocol) {
    case sim::Protocol::WiFi: return std::holds_alternative<WifiParams>(spec.params);
    case sim::Protocol::BluetoothClassic:
    case sim::Protocol::BLE: return std::holds_alternative<BluetoothParams>(spec.params);
    case sim::Protocol::Zigbee: return std::holds_alternative<ZigbeeParams>(spec.params);
  }
  return false;
}

std::vector<std::pair<std::string, std::string>> text_fields(const NodeSpec& spec) {
  std::vector<std::pair<std::string, std::string>> fields{{"location_name", spec.location_name}};
  if (const auto* w = std::get_if<WifiParams>(&spec.params)) {
    fields.insert(fields.end(),
                  {{"wifi.ssid", w->ssid}, {"wifi.password", w->password}, {"wifi.host_ip", w->host_ip}});
  } else if (const auto* b = std::get_if<BluetoothParams>(&spec.params)) {
    fields.insert(fields.end(), {{"bluetooth.mac", b->mac},
                                 {"bluetooth.module_name", b->module_name},
                                 {"bluetooth.pin", b->pin}});
  } else if (const auto* z = std::get_if<ZigbeeParams>(&spec.params)) {
    fields.insert(fields.end(), {{"zigbee.pan_id", z->pan_id},
                                 {"zigbee.dest_addr_high", z->dest_addr_high},
                                 {"zigbee.dest_addr_low", z->dest_addr_low}});
  }
  return fields;
}

std::vector<wire::SensorType> canonical_sensors(const std::vector<wire::SensorType>& sensors) {
  std::set<wire::SensorType> unique(sensors.begin(), sensors.end());
  return {unique.begin(), unique.end()};
}

std::string pad(int value, int width) {
  std::string s = std::to_string(value);
  return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

std::string protocol_include(sim::Protocol p) {
  switch (p) {
    case sim::Protocol::WiFi: return "#include <WiFiNINA.h>\n";
    case sim::Protocol::BluetoothClassic: return "#include <SoftwareSerial.h>\n";
    case sim::Protocol::BLE: return "#include <ArduinoBLE.h>\n";
    case sim::Protocol::Zigbee: return "#include <XBee.h>\n";
  }
  return "";
}

std::string sensor_read_stub(wire::SensorType t) {
  switch (t) {
    case wire::SensorType::Temperature: return "HTS.readTemperature()";
    case wire::SensorType::Humidity: return "HTS.readHumidity()";
    case wire::SensorType::AirQuality: return "analogRead(AIR_QUALITY_PIN)";
    case wire::SensorType::Light: return "analogRead(LIGHT_PIN)";
    case wire::SensorType::Sound: return "analogRead(SOUND_PIN)";
  }
  return "0";
}

std::string transmitter(const NodeSpec& spec, const std::vector<wire::SensorType>& sensors) {
  std::string s;
  s += "// Edge transmitter for location \"" + spec.location_name + "\" (" +
       pad(spec.location_id, 2) + ")\n";
  s += "// board: " + std::string(to_string(spec.mcu)) +
       ", protocol: " + std::string(sim::to_string(spec.protocol)) + "\n";
  s += protocol_include(spec.protocol);
  const bool uses_hts = std::any_of(sensors.begin(), sensors.end(), [](wire::SensorType t) {
    return t == wire::SensorType::Temperature || t == wire::SensorType::Humidity;
  });
  if (uses_hts) s += "#include <Arduino_HTS221.h>\n";
  s += "\n";
  s += "#define MCU_ID " + std::to_string(mcu_id(spec.mcu)) + "\n";
  s += "#define LOCATION_ID " + std::to_string(spec.location_id) + "\n";
  s += "#define TRANSFER_RATE_MS " + std::to_string(spec.transfer_rate_ms) + "UL\n";
  s += "#define SAMPLE_PERIOD_MS " + std::to_string(kSamplePeriodMs) + "UL\n";
  s += "#define AIR_QUALITY_PIN A0\n#define LIGHT_PIN A1\n#define SOUND_PIN A2\n";
  s += "\n";

  if (const auto* w = std::get_if<WifiParams>(&spec.params)) {
    s += "const char* WIFI_SSID = \"" + w->ssid + "\";\n";
    s += "const char* WIFI_PASSWORD = \"" + w->password + "\";\n";
    s += "const char* HOST_IP = \"" + w->host_ip + "\";\n";
    s += "const uint16_t HOST_PORT = " + std::to_string(w->host_port) + ";\n";
    s += "WiFiClient client;\n";
  } else if (const auto* b = std::get_if<BluetoothParams>(&spec.params)) {
    s += "const char* PEER_MAC = \"" + b->mac + "\";\n";
    s += "const char* MODULE_NAME = \"" + b->module_name + "\";\n";
    s += "const char* MODULE_PIN = \"" + b->pin + "\";\n";
    if (spec.protocol == sim::Protocol::BLE) {
      s += "BLEService sensorService(\"181A\");\n";
      s += "BLECharacteristic sensorChar(\"2A6E\", BLERead | BLENotify, 20);\n";
    } else {
      s += "SoftwareSerial btSerial(2, 3);\n";
    }
  } else if (const auto* z = std::get_if<ZigbeeParams>(&spec.params)) {
    s += "const char* PAN_ID = \"" + z->pan_id + "\";\n";
    s += "XBeeAddress64 destination(0x" + z->dest_addr_high + ", 0x" + z->dest_addr_low + ");\n";
    s += "XBee xbee;\n";
  }
  s += "\n";

  s += "struct SensorChannel {\n"
       "  const char* type;\n"
       "  int sensorId;\n"
       "  char indicator;\n"
       "  float lowest;\n"
       "  float highest;\n"
       "  float sum;\n"
       "  unsigned count;\n"
       "};\n\n";
  s += "SensorChannel channels[] = {\n";
  for (auto t : sensors) {
    s += "  {\"" + std::string(wire::code(t)) + "\", " + std::to_string(sensor_id(t)) + ", '" +
         (sends_float(t) ? "F" : "I") + "', 1e9, -1e9, 0, 0},\n";
  }
  s += "};\n";
  s += "const int CHANNEL_COUNT = " + std::to_string(sensors.size()) + ";\n\n";

  s += "float readSensor(int index) {\n  switch (index) {\n";
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    s += "    case " + std::to_string(i) + ": return " + sensor_read_stub(sensors[i]) + ";\n";
  }
  s += "  }\n  return 0;\n}\n\n";

  s += "// message: <mcu:1><location:2><sensor:3><type:2><F|I><value>\n";
  s += "void buildMessage(char* out, size_t cap, const SensorChannel& ch, float value) {\n"
       "  char valueText[16];\n"
       "  if (ch.indicator == 'F') {\n"
       "    dtostrf(value, 1, 2, valueText);\n"
       "  } else {\n"
       "    ltoa(lround(value), valueText, 10);\n"
       "  }\n"
       "  snprintf(out, cap, \"%1d%02d%03d%s%c%s\", MCU_ID, LOCATION_ID, ch.sensorId, ch.type, "
       "ch.indicator, valueText);\n"
       "}\n\n";

  s += "float aggregate(const SensorChannel& ch) {\n";
  switch (spec.aggregation) {
    case Aggregation::Lowest: s += "  return ch.lowest;\n"; break;
    case Aggregation::Mean: s += "  return ch.count ? ch.sum / ch.count : 0;\n"; break;
    case Aggregation::Highest: s += "  return ch.highest;\n"; break;
  }
  s += "}\n\n";

  s += "void transmit(const char* message) {\n";
  switch (spec.protocol) {
    case sim::Protocol::WiFi:
      s += "  if (client.connect(HOST_IP, HOST_PORT)) {\n"
           "    client.println(message);\n"
           "    client.stop();\n"
           "  }\n";
      break;
    case sim::Protocol::BluetoothClassic: s += "  btSerial.println(message);\n"; break;
    case sim::Protocol::BLE:
      s += "  sensorChar.writeValue((const uint8_t*)message, strlen(message));\n";
      break;
    case sim::Protocol::Zigbee:
      s += "  ZBTxRequest request(destination, (uint8_t*)message, strlen(message));\n"
           "  xbee.send(request);\n";
      break;
  }
  s += "}\n\n";

  s += "void setup() {\n  Serial.begin(9600);\n";
  if (uses_hts) s += "  HTS.begin();\n";
  switch (spec.protocol) {
    case sim::Protocol::WiFi:
      s += "  while (WiFi.begin(WIFI_SSID, WIFI_PASSWORD) != WL_CONNECTED) delay(5000);\n";
      break;
    case sim::Protocol::BluetoothClassic: s += "  btSerial.begin(9600);\n"; break;
    case sim::Protocol::BLE:
      s += "  BLE.begin();\n"
           "  BLE.setLocalName(MODULE_NAME);\n"
           "  sensorService.addCharacteristic(sensorChar);\n"
           "  BLE.addService(sensorService);\n"
           "  BLE.advertise();\n";
      break;
    case sim::Protocol::Zigbee: s += "  Serial1.begin(9600);\n  xbee.setSerial(Serial1);\n"; break;
  }
  s += "}\n\n";

  s += "void loop() {\n"
       "  for (unsigned long elapsed = 0; elapsed < TRANSFER_RATE_MS; elapsed += SAMPLE_PERIOD_MS) {\n"
       "    for (int i = 0; i < CHANNEL_COUNT; ++i) {\n"
       "      float v = readSensor(i);\n"
       "      SensorChannel& ch = channels[i];\n"
       "      if (v < ch.lowest) ch.lowest = v;\n"
       "      if (v > ch.highest) ch.highest = v;\n"
       "      ch.sum += v;\n"
       "      ch.count++;\n"
       "    }\n"
       "    delay(SAMPLE_PERIOD_MS);\n"
       "  }\n"
       "  char message[32];\n"
       "  for (int i = 0; i < CHANNEL_COUNT; ++i) {\n"
       "    SensorChannel& ch = channels[i];\n"
       "    buildMessage(message, sizeof(message), ch, aggregate(ch));\n"
       "    transmit(message);\n"
       "    ch.lowest = 1e9;\n"
       "    ch.highest = -1e9;\n"
       "    ch.sum = 0;\n"
       "    ch.count = 0;\n"
       "  }\n"
       "}\n";
  return s;
}

std::string receiver(const NodeSpec& spec) {
  std::string s = "#!/usr/bin/env python3\n";
  s += "# Fog receiver for location \"" + spec.location_name + "\"; prints one message per line.\n";
  switch (spec.protocol) {
    case sim::Protocol::WiFi: {
      const auto& w = std::get<WifiParams>(spec.params);
      s += "import socket\n\n"
           "HOST = \"0.0.0.0\"\n"
           "PORT = " + std::to_string(w.host_port) + "\n\n"
           "def main():\n"
           "    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as server:\n"
           "        server.bind((HOST, PORT))\n"
           "        server.listen()\n"
           "        while True:\n"
           "            conn, _ = server.accept()\n"
           "            with conn:\n"
           "                data = conn.recv(64)\n"
           "                if data:\n"
           "                    print(data.decode(\"ascii\").strip(), flush=True)\n";
      break;
    }
    case sim::Protocol::BluetoothClassic:
      s += "import serial\n\n"
           "def main():\n"
           "    with serial.Serial(\"/dev/rfcomm0\", 9600) as port:\n"
           "        while True:\n"
           "            print(port.readline().decode(\"ascii\").strip(), flush=True)\n";
      break;
    case sim::Protocol::BLE: {
      const auto& b = std::get<BluetoothParams>(spec.params);
      s += "import asyncio\n"
           "from bleak import BleakClient\n\n"
           "ADDRESS = \"" + b.mac + "\"\n"
           "CHARACTERISTIC = \"00002a6e-0000-1000-8000-00805f9b34fb\"\n\n"
           "def on_notify(_, data: bytearray):\n"
           "    print(bytes(data).decode(\"ascii\"), flush=True)\n\n"
           "async def run():\n"
           "    async with BleakClient(ADDRESS) as client:\n"
           "        await client.start_notify(CHARACTERISTIC, on_notify)\n"
           "        while True:\n"
           "            await asyncio.sleep(1)\n\n"
           "def main():\n"
           "    asyncio.run(run())\n";
      break;
    }
    case sim::Protocol::Zigbee:
      s += "import serial\n"
           "from digi.xbee.devices import XBeeDevice\n\n"
           "def main():\n"
           "    device = XBeeDevice(\"/dev/ttyUSB0\", 9600)\n"
           "    device.open()\n"
           "    device.add_data_received_callback(\n"
           "        lambda msg: print(msg.data.decode(\"ascii\"), flush=True))\n"
           "    input()\n";
      break;
  }
  s += "\nif __name__ == \"__main__\":\n    main()\n";
  return s;
}

std::vector<std::string> shell_commands(const NodeSpec& spec) {
  if (spec.protocol != sim::Protocol::BluetoothClassic) return {};
  const auto& b = std::get<BluetoothParams>(spec.params);
  return {
      "sudo apt-get install -y bluez python3-serial",
      "sudo systemctl start bluetooth",
      "sudo hciconfig hci0 up",
      "sudo rfcomm bind /dev/rfcomm0 " + b.mac + " 1",
  };
}

std::string node_red_hint(const NodeSpec& spec) {
  std::string input;
  switch (spec.protocol) {
    case sim::Protocol::WiFi:
      input = "tcp in node listening on port " +
              std::to_string(std::get<WifiParams>(spec.params).host_port);
      break;
    case sim::Protocol::BluetoothClassic: input = "serial in node on /dev/rfcomm0"; break;
    case sim::Protocol::BLE: input = "exec node running receiver.py"; break;
    case sim::Protocol::Zigbee: input = "xbee in node on /dev/ttyUSB0"; break;
  }
  return "Node-RED: " + input + " -> function node splitting the 9-character header " +
         "(mcu, location, sensor, type, indicator) from the value -> mqtt/http out to the cloud.";
}

}  // namespace

std::vector<SpecIssue> validate_spec(const NodeSpec& spec) {
  std::vector<SpecIssue> issues;
  if (spec.sensors.empty()) issues.push_back({SpecErrc::EmptySensorSet, "sensors"});
  if (!params_match(spec)) issues.push_back({SpecErrc::ProtocolParamsMismatch, "protocol"});
  if (spec.location_id < 0 || spec.location_id > wire::kMaxLocationId)
    issues.push_back({SpecErrc::LocationOutOfRange, "location_id"});
  if (spec.transfer_rate_ms < kMinTransferRateMs || spec.transfer_rate_ms > kMaxTransferRateMs)
    issues.push_back({SpecErrc::RateOutOfRange, "transfer_rate_ms"});
  if (is_bluetooth(spec.protocol)) {
    const auto* b = std::get_if<BluetoothParams>(&spec.params);
    if (b && b->mac.empty()) issues.push_back({SpecErrc::MissingMac, "bluetooth.mac"});
  }
  for (const auto& [name, value] : text_fields(spec)) {
    if (!std::all_of(value.begin(), value.end(), is_allowed_char))
      issues.push_back({SpecErrc::IllegalCharacters, name});
  }
  return issues;
}

GeneratedBundle generate(const NodeSpec& spec) {
  auto issues = validate_spec(spec);
  if (!issues.empty()) {
    std::string msg = "invalid node spec:";
    for (const auto& i : issues) msg += " " + std::string(to_string(i.code)) + "(" + i.field + ")";
    throw CodegenError(CodegenErrc::InvalidSpec, msg);
  }
  const auto sensors = canonical_sensors(spec.sensors);
  GeneratedBundle bundle;
  bundle.transmitter_source = transmitter(spec, sensors);
  bundle.receiver_source = receiver(spec);
  bundle.shell_commands = shell_commands(spec);
  bundle.node_red_hint = node_red_hint(spec);
  return bundle;
}

std::pair<LocationRegistry, int> assign_location_id(const LocationRegistry& registry,
                                                    const std::string& name) {
  if (auto it = registry.find(name); it != registry.end()) return {registry, it->second};
  std::set<int> used;
  for (const auto& [_, id] : registry) used.insert(id);
  for (int id = 0; id < static_cast<int>(kMaxLocations); ++id) {
    if (!used.count(id)) {
      LocationRegistry next = registry;
      next.emplace(name, id);
      return {std::move(next), id};
    }
  }
  throw CodegenError(CodegenErrc::RegistryFull, "all 99 location ids are taken");
}

NodeSpec node_spec_from_config(const config::Value& root) {
  auto bad = [](const std::string& what) {
    return config::ConfigError(config::ConfigErrc::WrongType, what);
  };
  NodeSpec spec;
  if (const auto* sensors = root.find("sensors")) {
    for (const auto& v : sensors->as_array()) {
      auto t = wire::sensor_type_from_code(v.as_string());
      if (!t) throw bad("unknown sensor type: " + v.as_string());
      spec.sensors.push_back(*t);
    }
  }
  const auto protocol_name = root.require_string("protocol");
  auto protocol = sim::protocol_from_string(protocol_name);
  if (!protocol) throw bad("unknown protocol: " + protocol_name);
  spec.protocol = *protocol;

  const auto mcu = root.get_string("mcu", "Nano33BleSense");
  if (mcu == "Nano33BleSense") spec.mcu = Mcu::Nano33BleSense;
  else if (mcu == "NanoRp2040Connect") spec.mcu = Mcu::NanoRp2040Connect;
  else if (mcu == "RaspberryPiPico") spec.mcu = Mcu::RaspberryPiPico;
  else throw bad("unknown mcu: " + mcu);

  spec.location_name = root.get_string("location_name", "");
  spec.location_id = static_cast<int>(root.get_integer("location_id", 0));
  spec.transfer_rate_ms = root.get_integer("transfer_rate_ms", kMinTransferRateMs);
  const auto agg = root.get_string("aggregation", "mean");
  if (agg == "lowest") spec.aggregation = Aggregation::Lowest;
  else if (agg == "mean") spec.aggregation = Aggregation::Mean;
  else if (agg == "highest") spec.aggregation = Aggregation::Highest;
  else throw bad("unknown aggregation: " + agg);

  switch (spec.protocol) {
    case sim::Protocol::WiFi:
      spec.params = WifiParams{root.get_string("wifi.ssid", ""), root.get_string("wifi.password", ""),
                               root.get_string("wifi.host_ip", ""),
                               static_cast<int>(root.get_integer("wifi.host_port", 0))};
      break;
    case sim::Protocol::BluetoothClassic:
    case sim::Protocol::BLE:
      spec.params = BluetoothParams{root.get_string("bluetooth.mac", ""),
                                    root.get_string("bluetooth.module_name", ""),
                                    root.get_string("bluetooth.pin", "")};
      break;
    case sim::Protocol::Zigbee:
      spec.params = ZigbeeParams{root.get_string("zigbee.pan_id", ""),
                                 root.get_string("zigbee.dest_addr_high", ""),
                                 root.get_string("zigbee.dest_addr_low", "")};
      break;
  }
  return spec;
}

void write_bundle(const GeneratedBundle& bundle, const NodeSpec& spec, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CodegenError(CodegenErrc::Io, "cannot create " + dir + ": " + ec.message());

  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw CodegenError(CodegenErrc::Io, "cannot write " + name);
    out << content;
  };
  std::string setup;
  for (const auto& cmd : bundle.shell_commands) setup += cmd + "\n";
  write("transmitter.ino.txt", bundle.transmitter_source);
  write("receiver.py.txt", bundle.receiver_source);
  write("setup.sh.txt", setup);

  nlohmann::json manifest;
  manifest["files"] = {"transmitter.ino.txt", "receiver.py.txt", "setup.sh.txt"};
  manifest["location_name"] = spec.location_name;
  manifest["location_id"] = spec.location_id;
  manifest["mcu"] = to_string(spec.mcu);
  manifest["mcu_id"] = mcu_id(spec.mcu);
  manifest["protocol"] = sim::to_string(spec.protocol);
  manifest["transfer_rate_ms"] = spec.transfer_rate_ms;
  manifest["aggregation"] = to_string(spec.aggregation);
  manifest["node_red_hint"] = bundle.node_red_hint;
  nlohmann::json sensors = nlohmann::json::array();
  for (auto t : canonical_sensors(spec.sensors))
    sensors.push_back({{"type", wire::code(t)}, {"sensor_id", sensor_id(t)}});
  manifest["sensors"] = sensors;
  write("manifest.json", manifest.dump(2) + "\n");
}

}  // namespace anoml::codegen
