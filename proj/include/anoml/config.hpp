#pragma once

// Minimal reader for the project's configuration dialect: a TOML subset with
// `key = value` pairs, `[table]` / `[table.sub]` headers, `[[array]]` tables,
// strings, integers, floats, booleans and one-line arrays.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "anoml/error.hpp"

namespace anoml::config {

enum class ConfigErrc { Syntax, MissingKey, WrongType, Io };
using ConfigError = Error<ConfigErrc>;
std::string_view to_string(ConfigErrc code);

class Value;
using Array = std::vector<Value>;
using Table = std::map<std::string, Value>;

class Value {
 public:
  using Storage = std::variant<std::monostate, bool, std::int64_t, double, std::string,
                               std::shared_ptr<Array>, std::shared_ptr<Table>>;

  Value() = default;
  Value(bool b) : v_(b) {}
  Value(std::int64_t i) : v_(i) {}
  Value(double d) : v_(d) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(Array a) : v_(std::make_shared<Array>(std::move(a))) {}
  Value(Table t) : v_(std::make_shared<Table>(std::move(t))) {}

  bool is_null() const { return std::holds_alternative<std::monostate>(v_); }
  bool is_table() const { return std::holds_alternative<std::shared_ptr<Table>>(v_); }
  bool is_array() const { return std::holds_alternative<std::shared_ptr<Array>>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_number() const { return is_integer() || std::holds_alternative<double>(v_); }

  const Table& as_table() const;
  Table& as_table();
  const Array& as_array() const;
  Array& as_array();
  const std::string& as_string() const;
  std::int64_t as_integer() const;
  double as_double() const;  // integers widen
  bool as_bool() const;

  // Dotted-path lookup ("topology.jitter"); nullptr when absent.
  const Value* find(const std::string& dotted) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_integer(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::string& require_string(const std::string& key) const;
  std::int64_t require_integer(const std::string& key) const;

 private:
  Storage v_;
};

Value parse(const std::string& text);
Value parse_file(const std::string& path);

}  // namespace anoml::config
