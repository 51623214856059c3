#include "coarselab/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "coarselab/spaces.hpp"
#include "coarselab/sublinear.hpp"

namespace coarselab {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
  std::istringstream ss(s);
  ss >> out;
  return ss && ss.peek() == EOF;
}

bool parse_int(const std::string& s, std::int64_t& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// keys whose values are numbers / integers / flags / number lists / kappa tags
const std::set<std::string> kNum = {"r", "R", "q", "Q", "C1", "C2", "D1", "D2", "fraction", "tolerance",
                                    "drift_min", "drift_max"};
const std::set<std::string> kInt = {"length", "probes", "samples", "min_norm", "max_norm", "n", "count", "depth",
                                    "D0", "D", "deep_R", "fit_radius", "fit_samples", "pairs", "radius",
                                    "max_loop", "tracking_min_n", "max_R", "proxy_rays"};
const std::set<std::string> kFlag = {"fit_projection", "contract"};
const std::set<std::string> kList = {"qs", "Qs", "Ks", "horizons"};
const std::set<std::string> kKappa = {"kappa", "kappa_prime"};

void check_kappa(const std::string& tag) {
  if (tag.empty()) return;
  kappa_from_tag(tag);
}

}  // namespace

const std::map<std::string, std::map<std::string, std::string>>& test_schema() {
  static const std::map<std::string, std::map<std::string, std::string>> s = {
      {"morse",
       {{"ray", "-"}, {"length", "0"}, {"r", ""}, {"R", ""}, {"q", "1"}, {"Q", "0"}, {"probes", "200"},
        {"gauge", "constant:1"}, {"kappa", "-"}, {"kappa_prime", "-"}, {"C1", "0.5"}, {"C2", "0"}, {"D1", "1"},
        {"D2", "0"}}},
      {"contract",
       {{"ray", "-"}, {"length", "1024"}, {"kappa", "-"}, {"C1", "0.5"}, {"samples", "4000"}, {"min_norm", "8"},
        {"max_norm", "512"}, {"fit_projection", "false"}}},
      {"chain",
       {{"ray", "-"}, {"kappa", "-"}, {"kappa_prime", "-"}, {"C1", "0.5"}, {"samples", "2000"}, {"min_norm", "8"},
        {"max_norm", "256"}, {"qs", "1.5,2,3"}, {"Qs", "0,4"}, {"probes", "200"}, {"max_R", "20000"}}},
      {"excursion",
       {{"ray", "-"}, {"length", "1024"}, {"kappa", "-"}, {"D", "1"}, {"deep_R", "2"}, {"fit_radius", "6"},
        {"fit_samples", "200"}, {"contract", "true"}, {"C1", "0.5"}, {"samples", "2000"}, {"min_norm", "8"},
        {"max_norm", "512"}}},
      {"walk",
       {{"measure", "uniform"}, {"n", "4096"}, {"count", "2000"}, {"ops", "drift,tail"}, {"fraction", "0.8"},
        {"depth", "1"}, {"horizons", "-"}, {"kappa", "-"}, {"D0", "0"}, {"tracking_min_n", "16"},
        {"drift_min", "-"}, {"drift_max", "-"}, {"proxy_rays", "8"}, {"q", "2"}, {"Q", "4"}, {"probes", "200"}}},
      {"gauge",
       {{"q", "2"}, {"Q", "0"}, {"C1", "0.5"}, {"C2", "0"}, {"D1", "1"}, {"D2", "0"}, {"kappa", "-"},
        {"kappa_prime", "-"}, {"r", "0"}}},
      {"surgery", {{"ray", "-"}, {"alpha", ""}, {"r", ""}, {"R", ""}, {"q", "1"}, {"Q", "0"}}},
      {"distance-formula", {{"pairs", "500"}, {"radius", "30"}, {"Ks", "5,10"}, {"A", "tied"}, {"tolerance", "0.1"}}},
      {"loopy-profile", {{"max_loop", "30"}}},
  };
  return s;
}

const std::string& TestSpec::str(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw std::out_of_range("test '" + name + "' has no key '" + key + "'");
  return it->second.text;
}

double TestSpec::num(const std::string& key) const {
  double v = 0;
  if (!parse_double(str(key), v)) throw std::invalid_argument("key '" + key + "' is not a number");
  return v;
}

std::int64_t TestSpec::integer(const std::string& key) const {
  std::int64_t v = 0;
  if (!parse_int(str(key), v)) throw std::invalid_argument("key '" + key + "' is not an integer");
  return v;
}

bool TestSpec::flag(const std::string& key) const { return str(key) == "true"; }

std::vector<double> TestSpec::nums(const std::string& key) const {
  std::vector<double> out;
  for (auto& s : split_list(str(key))) {
    double v = 0;
    if (!parse_double(s, v)) throw std::invalid_argument("key '" + key + "' holds a non-number");
    out.push_back(v);
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source, std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg;
  cfg.source = source;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::string section;  // "", "space", "kappa", "test"
  TestSpec* cur = nullptr;
  std::set<std::string> top_seen, space_seen, kappa_seen, names;
  bool have_seed = false, have_space = false;
  bool prime_set = false;
  auto fail = [&](int line, const std::string& msg) { throw ConfigError(source, line, msg); };

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "unterminated section header");
      std::string name = trim(line.substr(1, line.size() - 2));
      cur = nullptr;
      if (name == "space" || name == "kappa") {
        section = name;
      } else if (name.rfind("test.", 0) == 0 && name.size() > 5) {
        section = "test";
        std::string tname = name.substr(5);
        if (!names.insert(tname).second) fail(lineno, "duplicate test '" + tname + "'");
        cfg.tests.push_back({});
        cur = &cfg.tests.back();
        cur->name = tname;
        cur->line = lineno;
      } else {
        fail(lineno, "unknown section [" + name + "]");
      }
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty()) fail(lineno, "empty key");

    if (section.empty()) {
      if (!top_seen.insert(key).second) fail(lineno, "duplicate key '" + key + "'");
      if (key == "seed") {
        std::uint64_t s = 0;
        auto r = std::from_chars(val.data(), val.data() + val.size(), s);
        if (r.ec != std::errc() || r.ptr != val.data() + val.size()) fail(lineno, "seed must be an unsigned integer");
        cfg.seed = s;
        have_seed = true;
      } else if (key == "out") {
        cfg.out = val;
      } else {
        fail(lineno, "unknown key '" + key + "'");
      }
    } else if (section == "space") {
      if (!space_seen.insert(key).second) fail(lineno, "duplicate key '" + key + "'");
      if (key != "spec") fail(lineno, "unknown key '" + key + "' in [space]");
      try {
        build_space(val);
      } catch (const std::exception& e) {
        fail(lineno, std::string("invalid space spec: ") + e.what());
      }
      cfg.space = val;
      have_space = true;
    } else if (section == "kappa") {
      if (!kappa_seen.insert(key).second) fail(lineno, "duplicate key '" + key + "'");
      if (key != "tag" && key != "prime") fail(lineno, "unknown key '" + key + "' in [kappa]");
      try {
        check_kappa(val);
      } catch (const std::exception& e) {
        fail(lineno, e.what());
      }
      if (key == "tag") {
        cfg.kappa = val;
      } else {
        cfg.kappa_prime = val;
        prime_set = true;
      }
    } else {
      if (cur->params.count(key) || (key == "kind" && !cur->kind.empty()) || (key == "expect" && cur->params.count("#expect")))
        fail(lineno, "duplicate key '" + key + "'");
      if (key == "kind") {
        if (!test_schema().count(val)) fail(lineno, "unknown test kind '" + val + "'");
        cur->kind = val;
        continue;
      }
      if (key == "expect") {
        if (val != "pass" && val != "fail") fail(lineno, "expect must be pass or fail");
        cur->expect_pass = val == "pass";
        cur->params["#expect"] = {val, lineno};
        continue;
      }
      cur->params[key] = {val, lineno};
    }
  }
  if (seed) cfg.seed = *seed;
  else if (!have_seed) fail(0, "seed required");
  if (!have_space) fail(0, "[space] spec required");
  if (!prime_set) cfg.kappa_prime = cfg.kappa;

  for (auto& t : cfg.tests) {
    if (t.kind.empty()) fail(t.line, "test '" + t.name + "' needs a kind");
    t.params.erase("#expect");
    const auto& schema = test_schema().at(t.kind);
    for (auto& [k, v] : t.params) {
      if (!schema.count(k)) fail(v.line, "unknown key '" + k + "' for kind " + t.kind);
      double d;
      std::int64_t n;
      if (kNum.count(k) && !parse_double(v.text, d)) fail(v.line, "'" + k + "' must be a number");
      if (kInt.count(k) && !parse_int(v.text, n)) fail(v.line, "'" + k + "' must be an integer");
      if (k == "A" && v.text != "tied" && !(parse_double(v.text, d) && d >= 0))
        fail(v.line, "'A' must be tied or a nonnegative number");
      if (kFlag.count(k) && v.text != "true" && v.text != "false") fail(v.line, "'" + k + "' must be true or false");
      if (kList.count(k))
        for (auto& s : split_list(v.text))
          if (!parse_double(s, d)) fail(v.line, "'" + k + "' must be a comma list of numbers");
      if (kKappa.count(k)) {
        try {
          check_kappa(v.text);
        } catch (const std::exception& e) {
          fail(v.line, e.what());
        }
      }
    }
    for (auto& [k, def] : schema) {
      if (t.params.count(k)) continue;
      if (def.empty()) fail(t.line, "test '" + t.name + "' requires '" + k + "'");
      std::string fill = def;
      if (def == "-") {
        if (k == "kappa") fill = cfg.kappa;
        else if (k == "kappa_prime") fill = t.params.count("kappa") ? t.params.at("kappa").text : cfg.kappa_prime;
        else fill = "";  // resolved by the runner
      }
      t.params[k] = {fill, 0};
    }
  }
  return cfg;
}

ExperimentConfig validate_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace coarselab
