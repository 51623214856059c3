#include <gtest/gtest.h>

#include "coarselab/config.hpp"

using namespace coarselab;

namespace {

const char* kMinimal = R"(seed = 5
[space]
spec = free_group(2)
[test.one]
kind = morse
r = 4
R = 40
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalConfigGetsDefaults) {
  auto cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.seed, 5u);
  ASSERT_EQ(cfg.tests.size(), 1u);
  const auto& t = cfg.tests[0];
  EXPECT_EQ(t.integer("probes"), 200);
  EXPECT_EQ(t.num("q"), 1);
  EXPECT_EQ(t.str("kappa"), "1");
  EXPECT_EQ(t.str("gauge"), "constant:1");
  EXPECT_TRUE(t.expect_pass);
}

TEST(Config, SeedRequired) {
  EXPECT_EQ(error_of("[space]\nspec = grid(2)\n"), "cfg:0: seed required");
  auto cfg = parse_config("[space]\nspec = grid(2)\n", "cfg", 9);
  EXPECT_EQ(cfg.seed, 9u);
}

TEST(Config, LinearKappaRejectedWithLine) {
  auto e = error_of("seed = 1\n[space]\nspec = grid(2)\n[kappa]\ntag = linear\n");
  EXPECT_EQ(e.rfind("cfg:5:", 0), 0u) << e;
}

TEST(Config, UnknownKeysAndSections) {
  EXPECT_EQ(error_of(std::string(kMinimal) + "probez = 3\n").rfind("cfg:8:", 0), 0u);
  EXPECT_EQ(error_of("seed = 1\n[spaces]\n").rfind("cfg:2:", 0), 0u);
  EXPECT_EQ(error_of(std::string(kMinimal) + "[test.one]\nkind = gauge\n").rfind("cfg:8:", 0), 0u);
}

TEST(Config, TypeChecks) {
  EXPECT_NE(error_of(std::string(kMinimal) + "probes = many\n").find("integer"), std::string::npos);
  EXPECT_NE(error_of("seed = -3\n").find("unsigned"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\n[space]\nspec = torus(2)\n").find("cfg:3:"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\n[space]\nspec = grid(2)\n[test.x]\nkind = surgery\nr = 1\nR = 2\n").find("alpha"),
            std::string::npos);
}

TEST(Config, ExpectFailAnnotation) {
  auto cfg = parse_config(std::string(kMinimal) + "expect = fail\n");
  EXPECT_FALSE(cfg.tests[0].expect_pass);
}
