#pragma once

// Sensor message codec.
//
// Line layout (no delimiters, fixed-width header):
//
//   <MCU:1 digit><LOC:2 digits><SEN:3 digits><TYPE:2 letters><IND:F|I><VALUE>
//
// e.g. "101001THF24.45". Float values carry exactly two fractional digits.
// The BLE form is the ASCII byte image of the same line, capped at 20 bytes.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anoml/error.hpp"

namespace anoml::wire {

enum class WireErrc {
  MalformedLength,
  UnknownSensorType,
  UnknownIndicator,
  NonNumericValue,
  LocationOutOfRange,
  NonAsciiByte,
  PayloadTooLong,
  InvalidIdentity,
};

enum class Field { Whole, Mcu, Location, Sensor, Type, Indicator, Value };

std::string_view to_string(WireErrc code);
std::string_view to_string(Field field);

class WireError : public Error<WireErrc> {
 public:
  WireError(WireErrc code, Field field, const std::string& detail)
      : Error<WireErrc>(code, detail), field_(field) {}
  Field field() const noexcept { return field_; }

 private:
  Field field_;
};

enum class SensorType { Temperature, Humidity, AirQuality, Light, Sound };

inline constexpr std::array<SensorType, 5> kAllSensorTypes = {
    SensorType::Temperature, SensorType::Humidity, SensorType::AirQuality,
    SensorType::Light, SensorType::Sound};

// Two-letter wire code: TH HU AQ LI SO.
std::string_view code(SensorType type);
std::optional<SensorType> sensor_type_from_code(std::string_view code);

inline constexpr int kMaxLocationId = 98;
inline constexpr int kMaxSensorId = 999;
inline constexpr int kMaxMcuId = 9;
inline constexpr std::size_t kHeaderWidth = 9;
inline constexpr std::size_t kBlePayloadLimit = 20;

struct NodeIdentity {
  int location_id = 0;
  int sensor_id = 0;
  int mcu_id = 0;

  // Throws WireError(InvalidIdentity / LocationOutOfRange) when out of range.
  static NodeIdentity make(int mcu_id, int location_id, int sensor_id);

  friend bool operator==(const NodeIdentity&, const NodeIdentity&) = default;
};

// Decimal with two fractional digits stored as an integer count of hundredths,
// or a plain integer. Both forms are exact on the wire.
class SensorValue {
 public:
  enum class Kind { Float, Integer };

  static SensorValue from_float(double v);  // rounds half away from zero
  static SensorValue from_hundredths(std::int64_t hundredths);
  static SensorValue from_integer(std::int64_t v);

  Kind kind() const noexcept { return kind_; }
  bool is_float() const noexcept { return kind_ == Kind::Float; }
  std::int64_t raw() const noexcept { return raw_; }  // hundredths or integer
  double as_double() const noexcept;

  friend bool operator==(const SensorValue&, const SensorValue&) = default;

 private:
  SensorValue(Kind k, std::int64_t raw) : kind_(k), raw_(raw) {}
  Kind kind_ = Kind::Integer;
  std::int64_t raw_ = 0;
};

struct SensorReading {
  NodeIdentity identity;
  SensorType sensor_type = SensorType::Temperature;
  SensorValue value = SensorValue::from_integer(0);
  std::int64_t timestamp_ms = 0;

  friend bool operator==(const SensorReading&, const SensorReading&) = default;
};

std::string encode_text(const SensorReading& reading);

// The line carries no timestamp; the receiver stamps it with `received_at_ms`.
SensorReading decode_text(std::string_view line, std::int64_t received_at_ms = 0);

std::vector<std::uint8_t> encode_ble(const SensorReading& reading);
SensorReading decode_ble(std::span<const std::uint8_t> buffer, std::int64_t received_at_ms = 0);

}  // namespace anoml::wire
