#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coarselab/morse.hpp"

namespace coarselab {

constexpr int kSchemaVersion = 1;

std::string version_string();
// "# coarse-lab v<semver> schema=<n>"
std::string schema_header();

// Shortest round-trip form, so reruns write identical bytes.
std::string fmt_num(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t width_;
};

void write_json(const std::string& path, const nlohmann::json& j);

// Witness vertices are formatted through sp and capped at `max_points`.
nlohmann::json verdict_json(const Verdict& v, const GraphSpace* sp = nullptr, std::size_t max_points = 64);

}  // namespace coarselab
