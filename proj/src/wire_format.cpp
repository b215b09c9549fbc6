#include "anoml/wire_format.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace anoml::wire {

std::string_view to_string(WireErrc code) {
  switch (code) {
    case WireErrc::MalformedLength: return "MalformedLength";
    case WireErrc::UnknownSensorType: return "UnknownSensorType";
    case WireErrc::UnknownIndicator: return "UnknownIndicator";
    case WireErrc::NonNumericValue: return "NonNumericValue";
    case WireErrc::LocationOutOfRange: return "LocationOutOfRange";
    case WireErrc::NonAsciiByte: return "NonAsciiByte";
    case WireErrc::PayloadTooLong: return "PayloadTooLong";
    case WireErrc::InvalidIdentity: return "InvalidIdentity";
  }
  return "?";
}

std::string_view to_string(Field field) {
  switch (field) {
    case Field::Whole: return "line";
    case Field::Mcu: return "mcu_id";
    case Field::Location: return "location_id";
    case Field::Sensor: return "sensor_id";
    case Field::Type: return "sensor_type";
    case Field::Indicator: return "indicator";
    case Field::Value: return "value";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(WireErrc code, Field field, std::string_view detail) {
  throw WireError(code, field,
                  std::string(to_string(code)) + " (" + std::string(to_string(field)) +
                      "): " + std::string(detail));
}

int parse_digits(std::string_view s, Field field) {
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') fail(WireErrc::NonNumericValue, field, s);
    v = v * 10 + (c - '0');
  }
  return v;
}

// [-]digits
std::optional<std::int64_t> parse_int64(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t start = s[0] == '-' ? 1 : 0;
  if (start == s.size()) return std::nullopt;
  for (std::size_t i = start; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

void put_padded(std::string& out, int value, int width) {
  std::string digits = std::to_string(value);
  out.append(static_cast<std::size_t>(width) - digits.size(), '0');
  out += digits;
}

}  // namespace

std::string_view code(SensorType type) {
  switch (type) {
    case SensorType::Temperature: return "TH";
    case SensorType::Humidity: return "HU";
    case SensorType::AirQuality: return "AQ";
    case SensorType::Light: return "LI";
    case SensorType::Sound: return "SO";
  }
  return "??";
}

std::optional<SensorType> sensor_type_from_code(std::string_view c) {
  for (auto t : kAllSensorTypes)
    if (code(t) == c) return t;
  return std::nullopt;
}

NodeIdentity NodeIdentity::make(int mcu_id, int location_id, int sensor_id) {
  if (mcu_id < 0 || mcu_id > kMaxMcuId)
    fail(WireErrc::InvalidIdentity, Field::Mcu, std::to_string(mcu_id));
  if (location_id < 0 || location_id > kMaxLocationId)
    fail(WireErrc::LocationOutOfRange, Field::Location, std::to_string(location_id));
  if (sensor_id < 0 || sensor_id > kMaxSensorId)
    fail(WireErrc::InvalidIdentity, Field::Sensor, std::to_string(sensor_id));
  return NodeIdentity{location_id, sensor_id, mcu_id};
}

SensorValue SensorValue::from_float(double v) {
  return SensorValue(Kind::Float, static_cast<std::int64_t>(std::llround(v * 100.0)));
}

SensorValue SensorValue::from_hundredths(std::int64_t hundredths) {
  return SensorValue(Kind::Float, hundredths);
}

SensorValue SensorValue::from_integer(std::int64_t v) { return SensorValue(Kind::Integer, v); }

double SensorValue::as_double() const noexcept {
  return kind_ == Kind::Float ? static_cast<double>(raw_) / 100.0 : static_cast<double>(raw_);
}

std::string encode_text(const SensorReading& r) {
  std::string out;
  out.reserve(24);
  put_padded(out, r.identity.mcu_id, 1);
  put_padded(out, r.identity.location_id, 2);
  put_padded(out, r.identity.sensor_id, 3);
  out += code(r.sensor_type);
  if (r.value.is_float()) {
    out += 'F';
    const std::int64_t raw = r.value.raw();
    // Magnitude via unsigned arithmetic so INT64_MIN stays representable.
    const std::uint64_t mag = raw < 0 ? 0 - static_cast<std::uint64_t>(raw)
                                      : static_cast<std::uint64_t>(raw);
    if (raw < 0) out += '-';
    out += std::to_string(mag / 100);
    out += '.';
    const auto frac = static_cast<unsigned>(mag % 100);
    out += static_cast<char>('0' + frac / 10);
    out += static_cast<char>('0' + frac % 10);
  } else {
    out += 'I';
    out += std::to_string(r.value.raw());
  }
  return out;
}

SensorReading decode_text(std::string_view line, std::int64_t received_at_ms) {
  if (line.size() < kHeaderWidth + 1)
    fail(WireErrc::MalformedLength, Field::Whole, "need at least 10 characters");

  SensorReading r;
  r.identity.mcu_id = parse_digits(line.substr(0, 1), Field::Mcu);
  r.identity.location_id = parse_digits(line.substr(1, 2), Field::Location);
  if (r.identity.location_id > kMaxLocationId)
    fail(WireErrc::LocationOutOfRange, Field::Location, line.substr(1, 2));
  r.identity.sensor_id = parse_digits(line.substr(3, 3), Field::Sensor);

  auto type = sensor_type_from_code(line.substr(6, 2));
  if (!type) fail(WireErrc::UnknownSensorType, Field::Type, line.substr(6, 2));
  r.sensor_type = *type;

  const char indicator = line[8];
  const std::string_view body = line.substr(kHeaderWidth);
  if (indicator == 'I') {
    auto v = parse_int64(body);
    if (!v) fail(WireErrc::NonNumericValue, Field::Value, body);
    r.value = SensorValue::from_integer(*v);
  } else if (indicator == 'F') {
    const auto dot = body.find('.');
    if (dot == std::string_view::npos || body.size() - dot != 3)
      fail(WireErrc::NonNumericValue, Field::Value, body);
    const std::string_view whole = body.substr(0, dot);
    const std::string_view frac = body.substr(dot + 1);
    const bool negative = !whole.empty() && whole[0] == '-';
    auto w = parse_int64(whole);
    if (!w || (negative && whole.size() < 2)) fail(WireErrc::NonNumericValue, Field::Value, body);
    if (frac[0] < '0' || frac[0] > '9' || frac[1] < '0' || frac[1] > '9')
      fail(WireErrc::NonNumericValue, Field::Value, body);
    const std::int64_t f = (frac[0] - '0') * 10 + (frac[1] - '0');
    const std::int64_t mag = negative ? -*w : *w;
    constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
    if (mag > (kMax - f) / 100) fail(WireErrc::NonNumericValue, Field::Value, body);
    const std::int64_t hundredths = mag * 100 + f;
    r.value = SensorValue::from_hundredths(negative ? -hundredths : hundredths);
  } else {
    fail(WireErrc::UnknownIndicator, Field::Indicator, line.substr(8, 1));
  }
  r.timestamp_ms = received_at_ms;
  return r;
}

std::vector<std::uint8_t> encode_ble(const SensorReading& reading) {
  const std::string text = encode_text(reading);
  if (text.size() > kBlePayloadLimit)
    fail(WireErrc::PayloadTooLong, Field::Value,
         std::to_string(text.size()) + " bytes exceeds " + std::to_string(kBlePayloadLimit));
  return {text.begin(), text.end()};
}

SensorReading decode_ble(std::span<const std::uint8_t> buffer, std::int64_t received_at_ms) {
  if (buffer.size() > kBlePayloadLimit)
    fail(WireErrc::PayloadTooLong, Field::Whole,
         std::to_string(buffer.size()) + " bytes exceeds the BLE limit of " + std::to_string(kBlePayloadLimit));
  for (std::size_t i = 0; i < buffer.size(); ++i)
    if (buffer[i] > 0x7F) fail(WireErrc::NonAsciiByte, Field::Whole, "byte " + std::to_string(i));
  std::string text(buffer.begin(), buffer.end());
  return decode_text(text, received_at_ms);
}

}  // namespace anoml::wire
