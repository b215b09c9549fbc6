#include <gtest/gtest.h>

#include "anoml/config.hpp"

using namespace anoml::config;

TEST(Config, ScalarsTablesAndArrays) {
  const auto v = parse(R"(
# comment
name = "edge \"one\""
count = 1_000
ratio = 0.25
on = true

[scenario]
placement = "fog"
limits = [1, 2,
          3]

[[node]]
id = "a"
[[node]]
id = "b"
)");
  EXPECT_EQ(v.get_string("name", ""), "edge \"one\"");
  EXPECT_EQ(v.get_integer("count", 0), 1000);
  EXPECT_DOUBLE_EQ(v.get_double("ratio", 0), 0.25);
  EXPECT_TRUE(v.get_bool("on", false));
  EXPECT_EQ(v.get_string("scenario.placement", ""), "fog");
  ASSERT_NE(v.find("scenario.limits"), nullptr);
  EXPECT_EQ(v.find("scenario.limits")->as_array().size(), 3u);
  const auto& nodes = v.find("node")->as_array();
  ASSERT_EQ(nodes.size(), 2u);
  EXPECT_EQ(nodes[1].require_string("id"), "b");
}

TEST(Config, IntegersWidenToDouble) {
  EXPECT_DOUBLE_EQ(parse("x = 3").get_double("x", 0), 3.0);
}

TEST(Config, FallbacksOnMissingKeys) {
  const Value empty;
  EXPECT_EQ(empty.find("a.b"), nullptr);
  EXPECT_EQ(empty.get_integer("a.b", 7), 7);
  EXPECT_EQ(parse("[t]\nx = 1").get_string("t.y", "dflt"), "dflt");
}

TEST(Config, Errors) {
  auto code_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return e.code();
    }
    return ConfigErrc::Io;
  };
  EXPECT_EQ(code_of("x = "), ConfigErrc::Syntax);
  EXPECT_EQ(code_of("x = \"unterminated"), ConfigErrc::Syntax);
  EXPECT_EQ(code_of("[t\nx = 1"), ConfigErrc::Syntax);
  EXPECT_EQ(code_of("x = 1\nx = 2"), ConfigErrc::Syntax);

  const auto v = parse("x = \"s\"");
  EXPECT_THROW(v.get_integer("x", 0), ConfigError);
  try {
    v.require_integer("missing");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.code(), ConfigErrc::MissingKey);
  }
  try {
    parse_file("/nonexistent/file.toml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.code(), ConfigErrc::Io);
  }
}
