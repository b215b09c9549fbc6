#include "anoml/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace anoml::config {

std::string_view to_string(ConfigErrc code) {
  switch (code) {
    case ConfigErrc::Syntax: return "Syntax";
    case ConfigErrc::MissingKey: return "MissingKey";
    case ConfigErrc::WrongType: return "WrongType";
    case ConfigErrc::Io: return "Io";
  }
  return "?";
}

namespace {

[[noreturn]] void wrong_type(const char* want) {
  throw ConfigError(ConfigErrc::WrongType, std::string("config value is not ") + want);
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Value run() {
    Value root{Table{}};
    Table* current = &root.as_table();
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        current = parse_header(root);
      } else {
        parse_pair(*current);
      }
    }
    return root;
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(ConfigErrc::Syntax, "line " + std::to_string(line_) + ": " + what);
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      break;
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("trailing characters");
    ++pos_;
    ++line_;
  }

  std::string parse_key_part() {
    skip_ws();
    if (peek() == '"') return parse_string();
    std::string key;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '-')) {
      key += text_[pos_++];
    }
    if (key.empty()) fail("expected key");
    skip_ws();
    return key;
  }

  std::vector<std::string> parse_dotted_key() {
    std::vector<std::string> parts{parse_key_part()};
    while (peek() == '.') {
      ++pos_;
      parts.push_back(parse_key_part());
    }
    return parts;
  }

  Table* descend(Table* table, const std::vector<std::string>& path, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      auto& slot = (*table)[path[i]];
      if (slot.is_null()) slot = Value{Table{}};
      if (slot.is_array()) {
        auto& arr = slot.as_array();
        if (arr.empty() || !arr.back().is_table()) fail("key is not a table: " + path[i]);
        table = &arr.back().as_table();
      } else if (slot.is_table()) {
        table = &slot.as_table();
      } else {
        fail("key is not a table: " + path[i]);
      }
    }
    return table;
  }

  Table* parse_header(Value& root) {
    ++pos_;
    const bool array_table = peek() == '[';
    if (array_table) ++pos_;
    auto path = parse_dotted_key();
    if (peek() != ']') fail("expected ']'");
    ++pos_;
    if (array_table) {
      if (peek() != ']') fail("expected ']]'");
      ++pos_;
    }
    end_of_line();
    Table* parent = descend(&root.as_table(), path, path.size() - 1);
    auto& slot = (*parent)[path.back()];
    if (array_table) {
      if (slot.is_null()) slot = Value{Array{}};
      if (!slot.is_array()) fail("key is not an array: " + path.back());
      slot.as_array().push_back(Value{Table{}});
      return &slot.as_array().back().as_table();
    }
    if (slot.is_null()) slot = Value{Table{}};
    if (!slot.is_table()) fail("key is not a table: " + path.back());
    return &slot.as_table();
  }

  void parse_pair(Table& table) {
    auto path = parse_dotted_key();
    if (peek() != '=') fail("expected '='");
    ++pos_;
    skip_ws();
    Value value = parse_value();
    Table* target = descend(&table, path, path.size() - 1);
    if (target->count(path.back())) fail("duplicate key: " + path.back());
    (*target)[path.back()] = std::move(value);
    end_of_line();
  }

  std::string parse_string() {
    ++pos_;  // opening quote
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = text_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("bad escape");
        char e = text_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail("unsupported escape");
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  Value parse_value() {
    char c = peek();
    if (c == '"') return Value{parse_string()};
    if (c == '[') {
      ++pos_;
      Array items;
      while (true) {
        skip_blank_lines();
        if (peek() == ']') {
          ++pos_;
          break;
        }
        items.push_back(parse_value());
        skip_blank_lines();
        if (peek() == ',') {
          ++pos_;
        } else if (peek() != ']') {
          fail("expected ',' or ']'");
        }
      }
      return Value{std::move(items)};
    }
    std::string token;
    while (!eof() && peek() != ',' && peek() != ']' && peek() != '\n' && peek() != '#' &&
           peek() != ' ' && peek() != '\t' && peek() != '\r') {
      token += text_[pos_++];
    }
    if (token == "true") return Value{true};
    if (token == "false") return Value{false};
    std::string digits;
    for (char ch : token)
      if (ch != '_') digits += ch;
    if (digits.empty()) fail("expected value");
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
    if (ec == std::errc{} && p == digits.data() + digits.size()) return Value{i};
    double d = 0;
    auto [pd, ecd] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
    if (ecd == std::errc{} && pd == digits.data() + digits.size()) return Value{d};
    fail("bad value: " + token);
  }
};

}  // namespace

const Table& Value::as_table() const {
  if (!is_table()) wrong_type("a table");
  return *std::get<std::shared_ptr<Table>>(v_);
}
Table& Value::as_table() {
  if (!is_table()) wrong_type("a table");
  return *std::get<std::shared_ptr<Table>>(v_);
}
const Array& Value::as_array() const {
  if (!is_array()) wrong_type("an array");
  return *std::get<std::shared_ptr<Array>>(v_);
}
Array& Value::as_array() {
  if (!is_array()) wrong_type("an array");
  return *std::get<std::shared_ptr<Array>>(v_);
}
const std::string& Value::as_string() const {
  if (!is_string()) wrong_type("a string");
  return std::get<std::string>(v_);
}
std::int64_t Value::as_integer() const {
  if (!is_integer()) wrong_type("an integer");
  return std::get<std::int64_t>(v_);
}
double Value::as_double() const {
  if (is_integer()) return static_cast<double>(std::get<std::int64_t>(v_));
  if (!std::holds_alternative<double>(v_)) wrong_type("a number");
  return std::get<double>(v_);
}
bool Value::as_bool() const {
  if (!std::holds_alternative<bool>(v_)) wrong_type("a boolean");
  return std::get<bool>(v_);
}

const Value* Value::find(const std::string& dotted) const {
  const Value* node = this;
  std::size_t start = 0;
  while (true) {
    if (!node->is_table()) return nullptr;
    auto dot = dotted.find('.', start);
    auto key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    const auto& table = node->as_table();
    auto it = table.find(key);
    if (it == table.end()) return nullptr;
    node = &it->second;
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

std::string Value::get_string(const std::string& key, const std::string& fallback) const {
  const Value* v = find(key);
  return v ? v->as_string() : fallback;
}
std::int64_t Value::get_integer(const std::string& key, std::int64_t fallback) const {
  const Value* v = find(key);
  return v ? v->as_integer() : fallback;
}
double Value::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key);
  return v ? v->as_double() : fallback;
}
bool Value::get_bool(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  return v ? v->as_bool() : fallback;
}

const std::string& Value::require_string(const std::string& key) const {
  const Value* v = find(key);
  if (!v) throw ConfigError(ConfigErrc::MissingKey, "missing key: " + key);
  return v->as_string();
}
std::int64_t Value::require_integer(const std::string& key) const {
  const Value* v = find(key);
  if (!v) throw ConfigError(ConfigErrc::MissingKey, "missing key: " + key);
  return v->as_integer();
}

Value parse(const std::string& text) { return Parser(text).run(); }

Value parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigErrc::Io, "cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace anoml::config
