#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coarselab/config.hpp"
#include "coarselab/space.hpp"

namespace coarselab {

// Ray Z of the given length from the base point:
//   loopy_ray: "" or "ray";
//   Cayley graphs: a word repeated periodically ("" = first generator, "ab" =
//   staircase), or "excursion:<log|linear|const>" = t a^{s_1} t a^{s_2} ...
//   with s_k = ceil(ln k), k, or 1 (first free letter t, first peripheral axis a).
PathSeg build_ray(const GraphSpace& sp, const std::string& spec, std::int64_t length);

struct TestResult {
  std::string name;
  std::string kind;
  bool expect_pass = true;
  bool pass = false;
  bool error = false;
  std::string message;
  std::uint64_t seed = 0;
  nlohmann::json metrics = nlohmann::json::object();
  bool matched() const { return !error && pass == expect_pass; }
};

struct RunSummary {
  std::vector<TestResult> results;
  nlohmann::json json;
  int exit_code = 0;  // 0 iff every verdict matches its expectation
};

std::uint64_t test_seed(std::uint64_t seed, const std::string& name);
nlohmann::json config_echo(const ExperimentConfig& cfg);

// Runs every test, writing <out>/<test>/... CSVs and <out>/summary.json.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);
TestResult run_test(const ExperimentConfig& cfg, const TestSpec& t, const std::string& dir);

}  // namespace coarselab
