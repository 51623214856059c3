#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "coarselab/config.hpp"
#include "coarselab/experiment.hpp"
#include "coarselab/parallel.hpp"
#include "coarselab/report.hpp"

namespace fs = std::filesystem;
using namespace coarselab;

namespace {

struct Common {
  std::string config;
  std::string seed;
  int jobs = 0;
  std::string out;
  bool regen = false;
  std::string fixtures = "fixtures";
  // inline single test, when --config is absent
  std::string space;
  std::string kappa;
  std::vector<std::string> sets;
  std::string expect = "pass";
  std::vector<std::string> only;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Seed precedence: --seed, then COARSELAB_SEED, then the file.
std::string seed_override(const Common& c) {
  if (!c.seed.empty()) return c.seed;
  if (const char* env = std::getenv("COARSELAB_SEED")) return env;
  return "";
}

// Config text for one test given on the command line.
std::string inline_config(const Common& c, const std::string& kind) {
  if (c.space.empty()) throw ConfigError("<command line>", 0, "--space or --config required");
  std::ostringstream s;
  s << "[space]\nspec = " << c.space << "\n";
  if (!c.kappa.empty()) s << "[kappa]\ntag = " << c.kappa << "\n";
  s << "[test." << kind << "]\nkind = " << kind << "\nexpect = " << c.expect << "\n";
  for (auto& kv : c.sets) {
    if (kv.find('=') == std::string::npos) throw ConfigError("<command line>", 0, "--set expects key=value");
    s << kv << "\n";
  }
  return s.str();
}

ExperimentConfig load(const Common& c, const std::string& kind) {
  std::string text, source;
  if (!c.config.empty()) {
    text = read_file(c.config);
    source = c.config;
  } else {
    text = inline_config(c, kind);
    source = "<command line>";
  }
  std::optional<std::uint64_t> seed;
  if (auto o = seed_override(c); !o.empty()) {
    std::uint64_t v = 0;
    auto r = std::from_chars(o.data(), o.data() + o.size(), v);
    if (r.ec != std::errc() || r.ptr != o.data() + o.size()) throw ConfigError("<command line>", 0, "seed must be an unsigned integer");
    seed = v;
  }
  auto cfg = parse_config(text, source, seed);
  if (!kind.empty() && !c.config.empty()) {
    std::vector<std::string> kinds = {kind};
    if (kind == "morse") kinds.push_back("chain");
    std::erase_if(cfg.tests, [&](const TestSpec& t) { return std::find(kinds.begin(), kinds.end(), t.kind) == kinds.end(); });
  }
  if (!c.only.empty())
    std::erase_if(cfg.tests, [&](const TestSpec& t) { return std::find(c.only.begin(), c.only.end(), t.name) == c.only.end(); });
  return cfg;
}

int execute(const ExperimentConfig& cfg, const std::string& out) {
  auto sum = run_experiment(cfg, out);
  for (auto& r : sum.results) {
    std::cout << (r.matched() ? "ok   " : "FAIL ") << r.name << " [" << r.kind << "] pass=" << (r.pass ? "yes" : "no")
              << " expect=" << (r.expect_pass ? "pass" : "fail");
    if (!r.message.empty()) std::cout << " (" << r.message << ")";
    std::cout << "\n";
  }
  std::cout << out << "/summary.json\n";
  return sum.exit_code;
}

int regen_fixtures(const Common& c) {
  std::vector<fs::path> inis;
  for (auto& e : fs::directory_iterator(c.fixtures))
    if (e.path().extension() == ".ini") inis.push_back(e.path());
  std::sort(inis.begin(), inis.end());
  int rc = 0;
  for (auto& p : inis) {
    Common cc = c;
    cc.config = p.string();
    auto out = (p.parent_path() / p.stem()).string();
    fs::remove_all(out);
    std::cout << "regenerating " << out << "\n";
    rc |= execute(load(cc, ""), out);
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coarse-lab: experiments on sublinearly Morse rays and boundaries"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(0, 1);
  Common c;
  app.add_option("--config", c.config, "experiment config (key = value sections)")->check(CLI::ExistingFile);
  app.add_option("--seed", c.seed, "u64 seed, overrides COARSELAB_SEED and the config");
  app.add_option("--jobs", c.jobs, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", c.out, "output directory");
  app.add_flag("--regen-fixtures", c.regen, "rerun every fixtures/*.ini into fixtures/<name>/");
  app.add_option("--fixtures-dir", c.fixtures, "fixture directory for --regen-fixtures");

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"run", ""},
      {"morse-test", "morse"},
      {"contract-test", "contract"},
      {"excursion", "excursion"},
      {"walk", "walk"},
      {"gauge", "gauge"},
      {"surgery", "surgery"},
      {"distance-formula", "distance-formula"},
  };
  std::map<std::string, CLI::App*> cmds;
  for (auto& [name, kind] : subs) {
    auto* s = app.add_subcommand(name, kind.empty() ? "run every test of a config" : "run " + kind + " tests");
    s->fallthrough();
    s->add_option("--only", c.only, "restrict to the named tests");
    if (!kind.empty()) {
      s->add_option("--space", c.space, "space spec, when no --config is given");
      s->add_option("--kappa", c.kappa, "kappa tag for the inline test");
      s->add_option("--set", c.sets, "key=value for the inline test");
      s->add_option("--expect", c.expect, "pass or fail")->check(CLI::IsMember({"pass", "fail"}));
    }
    cmds[name] = s;
  }
  CLI11_PARSE(app, argc, argv);

  try {
    set_jobs(c.jobs > 0 ? c.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
    if (c.regen) return regen_fixtures(c);
    std::string kind;
    bool chosen = false;
    for (auto& [name, k] : subs)
      if (cmds[name]->parsed()) {
        kind = k;
        chosen = true;
      }
    if (!chosen) {
      if (c.config.empty()) {
        std::cerr << app.help();
        return 2;
      }
    }
    if (kind.empty() && c.config.empty()) throw ConfigError("<command line>", 0, "run needs --config");
    auto cfg = load(c, kind);
    if (cfg.tests.empty()) throw ConfigError(cfg.source, 0, "no tests selected");
    return execute(cfg, c.out.empty() ? cfg.out : c.out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
