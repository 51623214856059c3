#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coarselab {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ConfigValue {
  std::string text;
  int line = 0;  // 0 for filled-in defaults
};

struct TestSpec {
  std::string name;
  std::string kind;
  bool expect_pass = true;
  int line = 0;
  std::map<std::string, ConfigValue> params;  // every schema key, defaults filled

  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> nums(const std::string& key) const;
};

struct ExperimentConfig {
  std::string source;
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string space;
  std::string kappa = "1";
  std::string kappa_prime = "1";
  std::vector<TestSpec> tests;
};

// Test kinds and their keys with defaults ("" means required).
const std::map<std::string, std::map<std::string, std::string>>& test_schema();

// seed, when given, replaces (or stands in for) the file's seed
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>",
                              std::optional<std::uint64_t> seed = std::nullopt);
// first error reported as ConfigError with its line
ExperimentConfig validate_config(const std::string& path);

}  // namespace coarselab
