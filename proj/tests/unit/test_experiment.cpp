#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "coarselab/experiment.hpp"
#include "coarselab/parallel.hpp"
#include "coarselab/spaces.hpp"

namespace fs = std::filesystem;
using namespace coarselab;

namespace {

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = ss.str();
  }
  return out;
}

const char* kSmall = R"(seed = 42
[space]
spec = free_product(grid(2), free_group(1))
[kappa]
tag = log
[test.contract_t]
kind = contract
ray = t
samples = 600
max_norm = 128
[test.walk]
kind = walk
n = 1024
count = 300
ops = drift,growth,tracking,hitting
[test.excursion]
kind = excursion
ray = excursion:log
length = 200
fit_samples = 60
samples = 400
max_norm = 128
[test.morse_t]
kind = morse
ray = t
r = 24
R = 96
q = 2
Q = 2
gauge = constant:2
probes = 40
)";

}  // namespace

TEST(Experiment, BuildRayCertificates) {
  auto f2 = build_space("free_group(2)");
  auto stair = build_ray(*f2, "ab", 20);
  EXPECT_EQ(stair.length(), 20u);
  ASSERT_TRUE(stair.certificate().has_value());
  EXPECT_EQ(f2->norm(stair.back()), 20);
  EXPECT_FALSE(build_ray(*f2, "aA", 10).certificate().has_value());
  auto z = build_space("free_product(grid(2), free_group(1))");
  auto ex = build_ray(*z, "excursion:linear", 1 + 1 + 1 + 2 + 1 + 3);
  EXPECT_EQ(z->format(ex.back()), "t a t a^2 t a^3");
  EXPECT_THROW(build_ray(*f2, "excursion:log", 10), std::invalid_argument);
}

TEST(Experiment, ExitCodeFollowsExpectations) {
  auto cfg = parse_config(R"(seed = 1
[space]
spec = grid(2)
[test.diag]
kind = morse
ray = ab
r = 24
R = 64
q = 2
gauge = constant:4
probes = 40
expect = fail
)");
  auto dir = fs::temp_directory_path() / "coarselab_exit";
  fs::remove_all(dir);
  auto sum = run_experiment(cfg, dir.string());
  EXPECT_EQ(sum.exit_code, 0);
  EXPECT_FALSE(sum.results[0].pass);
  cfg.tests[0].expect_pass = true;
  EXPECT_EQ(run_experiment(cfg, dir.string()).exit_code, 1);
  fs::remove_all(dir);
}

TEST(Experiment, ErrorsAreRecordedNotThrown) {
  auto cfg = parse_config("seed = 1\n[space]\nspec = loopy_ray(5)\n[test.w]\nkind = walk\n");
  auto dir = fs::temp_directory_path() / "coarselab_err";
  auto sum = run_experiment(cfg, dir.string());
  EXPECT_TRUE(sum.results[0].error);
  EXPECT_EQ(sum.exit_code, 1);
  fs::remove_all(dir);
}

TEST(Experiment, ByteIdenticalAcrossJobs) {
  auto cfg = parse_config(kSmall);
  auto a = fs::temp_directory_path() / "coarselab_j1", b = fs::temp_directory_path() / "coarselab_j3";
  fs::remove_all(a);
  fs::remove_all(b);
  set_jobs(1);
  EXPECT_EQ(run_experiment(cfg, a.string()).exit_code, 0);
  set_jobs(3);
  EXPECT_EQ(run_experiment(cfg, b.string()).exit_code, 0);
  set_jobs(1);
  auto ta = read_tree(a), tb = read_tree(b);
  EXPECT_TRUE(ta.count("summary.json"));
  EXPECT_GE(ta.size(), 9u);
  EXPECT_EQ(ta, tb);
  fs::remove_all(a);
  fs::remove_all(b);
}
