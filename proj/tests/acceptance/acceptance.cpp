// One line per acceptance criterion. Exit status counts failing criteria,
// except those named with --known-fail.

#include <chrono>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coarselab/config.hpp"
#include "coarselab/experiment.hpp"
#include "coarselab/morse.hpp"
#include "coarselab/parallel.hpp"
#include "coarselab/relhyp.hpp"
#include "coarselab/spaces.hpp"
#include "coarselab/sublinear.hpp"

namespace fs = std::filesystem;
using namespace coarselab;
using json = nlohmann::json;

namespace {

fs::path g_configs = COARSELAB_CONFIG_DIR;
fs::path g_out = "acceptance_out";

struct Line {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

RunSummary run_config(const std::string& name, const fs::path& out) {
  std::ifstream in(g_configs / name);
  std::stringstream ss;
  ss << in.rdbuf();
  auto cfg = parse_config(ss.str(), name);
  fs::remove_all(out);
  return run_experiment(cfg, out.string());
}

const TestResult& result(const RunSummary& s, const std::string& name) {
  for (auto& r : s.results)
    if (r.name == name) return r;
  throw std::runtime_error("no test " + name);
}

VertexMap<std::int64_t> bfs(const GraphSpace& sp, const Vertex& c, std::int64_t r) {
  VertexMap<std::int64_t> dist{{c, 0}};
  std::deque<Vertex> q{c};
  while (!q.empty()) {
    Vertex v = q.front();
    q.pop_front();
    auto d = dist[v];
    if (d == r) continue;
    for (auto& w : sp.neighbors(v))
      if (dist.emplace(w, d + 1).second) q.push_back(w);
  }
  return dist;
}

bool brute_qg(const GraphSpace& sp, const PathSeg& p, double q, double Q) {
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      double d = static_cast<double>(sp.distance(p.vertex(i), p.vertex(j))), t = static_cast<double>(j - i);
      if (d < t / q - Q - 1e-9 || d > q * t + Q + 1e-9) return false;
    }
  return true;
}

const std::vector<std::pair<std::string, std::vector<std::string>>> kSpaces = {
    {"free_group(2)", {"a", "ab", "abAB"}},
    {"grid(2)", {"a", "ab", "aab"}},
    {"free_product(grid(2), free_group(1))", {"a", "t", "ta", "excursion:log"}},
    {"loopy_ray(30)", {"ray"}},
};

Line lemma_suite() {
  auto t0 = std::chrono::steady_clock::now();
  std::size_t pairs = 0, bad = 0;
  for (auto& [spec, rays] : kSpaces) {
    auto sp = build_space(spec);
    std::vector<PathSeg> Zs;
    std::vector<Projection> pis;
    for (auto& r : rays) {
      Zs.push_back(build_ray(*sp, r, 400));
      pis.push_back(nearest_projection(Zs.back()));
    }
    Rng rng(derive_seed(11, pairs));
    for (int i = 0; i < 1000; ++i, ++pairs) {
      std::size_t k = rng.below(Zs.size());
      Vertex x = sp->sample(rng, 150);
      for (auto idx : pis[k](x)) bad += Zs[k].norm(idx) > 2 * sp->norm(x);
    }
  }
  std::size_t tags = 0, scaling_bad = 0;
  for (auto& tag : registered_tags()) {
    auto f = kappa_from_tag(tag);
    ++tags;
    for (double lambda : {1.5, 2.0, 10.0, 1000.0}) scaling_bad += !check_scaling(f, lambda, default_grid()).ok;
  }
  auto sp = std::dynamic_pointer_cast<const CayleySpace>(build_space("free_group(2)"));
  const auto& g = sp->group();
  Rng rng(12);
  std::size_t surg_bad = 0;
  for (int k = 0; k < 50; ++k) {
    std::int64_t r = rng.range(8, 20), R = rng.range(r, 3 * r);
    PathSeg gamma = build_ray(*sp, k % 2 ? "a" : "ab", 2 * R + 8);
    Element end = sp->element(gamma.vertex(static_cast<std::size_t>(r + rng.range(0, 5))));
    for (int j = 0, len = static_cast<int>(rng.range(5, 40)); j < len; ++j) {
      int gen = static_cast<int>(rng.below(g.num_generators()));
      if (j == 0 && gen == FreeProductGroup::inverse_gen(0)) gen = 2;
      g.right_mul_gen(end, gen);
    }
    PathSeg alpha = sp->geodesic(Element{}, end);
    try {
      PathSeg out = surgery(*sp, gamma, alpha, 1, 0, r, R);
      bool ok = true;
      std::size_t cut = first_time_at_norm(alpha, r / 2);
      for (std::size_t i = 0; i <= cut; ++i) ok = ok && out.vertex(i) == alpha.vertex(i);
      std::size_t gR = first_time_at_norm(gamma, R), tail = gamma.size() - gR;
      for (std::size_t i = 0; i < tail; ++i) ok = ok && out.vertex(out.size() - tail + i) == gamma.vertex(gR + i);
      surg_bad += !(ok && brute_qg(*sp, out, 9, 0));
    } catch (const SurgeryError&) {
      ++surg_bad;
    }
  }
  double secs = seconds_since(t0);
  return {bad == 0 && scaling_bad == 0 && surg_bad == 0 && secs <= 60,
          std::to_string(pairs) + " projection pairs, " + std::to_string(bad) + " violations; " + std::to_string(tags) +
              " kappa tags x 4 scalings, " + std::to_string(scaling_bad) + " violations; 50 surgeries, " +
              std::to_string(surg_bad) + " failures; " + fmt(secs) + " s (limit 60)"};
}

Line oracle_equivalence() {
  std::size_t checked = 0, bad = 0, proj = 0;
  auto check_ball = [&](const GraphSpace& sp, const Vertex& c, const std::function<void(const VertexMap<std::int64_t>&)>& extra) {
    auto ball = bfs(sp, c, 8);
    for (auto& [v, d] : ball) {
      ++checked;
      bad += sp.distance(c, v) != d;
      if (c == sp.base()) bad += sp.norm(v) != d;
    }
    if (extra) extra(ball);
  };
  Rng rng(31);
  for (auto& [spec, rays] : kSpaces) {
    auto sp = build_space(spec);
    std::vector<Vertex> centers{sp->base()};
    if (auto loopy = std::dynamic_pointer_cast<const LoopyRaySpace>(sp)) {
      centers.push_back(loopy->ray(50));
      centers.push_back(loopy->apex(5));
      centers.push_back(loopy->apex(12));
    } else {
      for (int i = 0; i < 3; ++i) centers.push_back(sp->sample(rng, 6));
    }
    auto cay = std::dynamic_pointer_cast<const CayleySpace>(sp);
    std::unique_ptr<RelHypGroup> G;
    if (cay && spec.rfind("free_product", 0) == 0) G = std::make_unique<RelHypGroup>(cay);
    for (auto& c : centers) {
      std::function<void(const VertexMap<std::int64_t>&)> extra;
      if (G) {
        extra = [&](const VertexMap<std::int64_t>& ball) {
          Coset P = G->coset(0, cay->element(c));
          std::vector<Vertex> verts;
          for (auto& kv : ball) verts.push_back(kv.first);
          std::sort(verts.begin(), verts.end(), [](const Vertex& a, const Vertex& b) { return a.code < b.code; });
          for (int s = 0; s < 200; ++s) {
            Vertex x = verts[rng.below(verts.size())];
            // first BFS layer from x meeting P
            VertexMap<std::int64_t> dist{{x, 0}};
            std::vector<Vertex> layer{x}, hits;
            while (hits.empty()) {
              for (auto& v : layer)
                if (G->in_coset(cay->element(v), P)) hits.push_back(v);
              if (!hits.empty()) break;
              std::vector<Vertex> next;
              for (auto& v : layer)
                for (auto& w : sp->neighbors(v))
                  if (dist.emplace(w, 0).second) next.push_back(w);
              layer = std::move(next);
            }
            ++proj;
            bad += hits.size() != 1 || cay->element(hits[0]) != G->coset_projection(cay->element(x), P);
          }
        };
      }
      check_ball(*sp, c, extra);
    }
  }
  return {bad == 0, std::to_string(checked) + " norm/distance checks over 16 radius-8 balls, " + std::to_string(proj) +
                        " coset projections, " + std::to_string(bad) + " mismatches"};
}

Line theorem_chain() {
  auto t0 = std::chrono::steady_clock::now();
  std::size_t ran = 0, failed = 0;
  std::string detail;
  bool ok = true;
  for (auto [cfg, test] : {std::pair{"chain_f2.ini", "a_axis"}, {"chain_free_product.ini", "t_axis"}}) {
    auto s = run_config(cfg, g_out / fs::path(cfg).stem());
    auto& r = result(s, test);
    ok = ok && r.pass && !r.error;
    for (auto& row : r.metrics.value("rows", json::array())) {
      if (row["status"] == "skipped") ok = false;
      else ++ran;
      if (row["status"] == "fail") ++failed;
    }
    detail += std::string(cfg) + " " + (r.pass ? "pass" : "fail") + "; ";
  }
  auto s = run_config("chain_loopy.ini", g_out / "chain_loopy");
  double rmin = 0;
  for (auto& row : result(s, "sqrt_chain").metrics.value("rows", json::array()))
    if (rmin == 0 || row["r"].get<double>() < rmin) rmin = row["r"].get<double>();
  double secs = seconds_since(t0);
  ok = ok && failed == 0 && ran == 12 && secs <= 600;
  return {ok, detail + std::to_string(ran) + "/12 (q,Q) probed, " + std::to_string(failed) +
                  " falsifications; loopy sqrt chain skipped (r_min " + fmt(rmin) + "); " + fmt(secs) + " s (limit 600)"};
}

Line loopy_example() {
  auto s = run_config("loopy.ini", g_out / "loopy");
  auto& prof = result(s, "projection_profile");
  auto& sq = result(s, "sqrt_contracting");
  auto& one = result(s, "not_contracting");
  bool ok = prof.pass && sq.pass && !one.pass && !one.error && s.exit_code == 0;
  return {ok, "profile rows " + prof.metrics.value("rows", json(0)).dump() + " with " +
                  prof.metrics.value("violations", json(-1)).dump() + " violations; sqrt contracting " +
                  (sq.pass ? "pass" : "fail") + ", kappa=1 contracting " + (one.pass ? "pass" : "fail")};
}

Line negative_controls() {
  auto s = run_config("z2_negative_controls.ini", g_out / "z2_negative_controls");
  std::size_t triggered = 0;
  for (auto& r : s.results) triggered += r.matched();
  auto& diag = result(s, "diagonal_not_morse");
  auto v = diag.metrics.value("verdict", json::object());
  bool witness = v.contains("witness_point");
  return {triggered == s.results.size() && witness,
          std::to_string(triggered) + "/" + std::to_string(s.results.size()) + " expected failures triggered; witness " +
              (witness ? v["witness_point"].get<std::string>() : std::string("missing"))};
}

Line drift_calibration() {
  auto t0 = std::chrono::steady_clock::now();
  auto s = run_config("drift_f2.ini", g_out / "drift_f2");
  auto& r = result(s, "uniform_drift");
  double ell = r.metrics["drift"]["ell"].get<double>();
  double secs = seconds_since(t0);
  return {ell >= 0.48 && ell <= 0.52 && secs <= 300,
          "ell = " + fmt(ell, 5) + " (target [0.48, 0.52]); " + fmt(secs) + " s (limit 300)"};
}

Line walk_statistics() {
  auto t0 = std::chrono::steady_clock::now();
  auto s = run_config("free_product_walk.ini", g_out / "free_product_walk");
  auto& r = result(s, "walk_statistics");
  double secs = seconds_since(t0);
  if (r.error) return {false, "error: " + r.message};
  auto& m = r.metrics;
  bool a = m["growth"]["verdict"]["pass"], b = m["tracking"]["verdict_log2"]["pass"],
       c = m["excursion"]["verdict"]["pass"], d = m["proxy_morse"]["verdict"]["pass"];
  auto yn = [](bool x) { return x ? "pass" : "fail"; };
  std::string detail = std::string("(a) sup d_P/log n trend p = ") + fmt(m["growth"]["p_increasing"].get<double>()) + " " +
                       yn(a) + "; (b) tracking/log^2 " + yn(b) + "; (c) E_gamma q95 " + yn(c) + "; (d) proxy rays " +
                       yn(d) + "; " + fmt(secs) + " s (limit 1800)";
  return {a && b && c && d && secs <= 1800, detail};
}

Line distance_formula() {
  auto s = run_config("distance_formula.ini", g_out / "distance_formula");
  auto& r = result(s, "clip_5_vs_10");
  if (r.error) return {false, "error: " + r.message};
  std::string ms;
  for (auto& f : r.metrics["fits"]) ms += "M(K=" + f["K"].dump() + ") = " + fmt(f["M"].get<double>()) + ", ";
  double change = r.metrics["max_relative_change"].get<double>();
  return {change < 0.1, ms + "relative change " + fmt(change) + " (limit 0.1)"};
}

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

Line reproducibility() {
  std::size_t files = 0, differ = 0;
  std::string names;
  for (auto cfg : {"loopy.ini", "excursion.ini", "drift_f2.ini"}) {
    auto stem = fs::path(cfg).stem().string();
    set_jobs(1);
    run_config(cfg, g_out / "repro" / (stem + "_j1"));
    set_jobs(4);
    run_config(cfg, g_out / "repro" / (stem + "_j4"));
    set_jobs(1);
    auto a = read_tree(g_out / "repro" / (stem + "_j1")), b = read_tree(g_out / "repro" / (stem + "_j4"));
    files += a.size();
    differ += a != b;
    names += std::string(names.empty() ? "" : ", ") + stem;
  }
  return {differ == 0 && files > 0, names + " at --jobs 1 vs 4: " + std::to_string(files) + " files, " +
                                        std::to_string(differ) + " configs differ"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known_fail, only;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--known-fail" && i + 1 < argc) known_fail.insert(std::stoi(argv[++i]));
    else if (a == "--only" && i + 1 < argc) only.insert(std::stoi(argv[++i]));
    else if (a == "--configs" && i + 1 < argc) g_configs = argv[++i];
    else if (a == "--out" && i + 1 < argc) g_out = argv[++i];
    else {
      std::cerr << "usage: acceptance [--only N] [--known-fail N] [--configs DIR] [--out DIR]\n";
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Line()>>> criteria = {
      {"exact lemma suite", lemma_suite},
      {"oracle equivalence", oracle_equivalence},
      {"theorem chain", theorem_chain},
      {"loopy ray example", loopy_example},
      {"negative controls", negative_controls},
      {"drift calibration", drift_calibration},
      {"free product walk statistics", walk_statistics},
      {"distance formula stability", distance_formula},
      {"reproducibility across jobs", reproducibility},
  };
  set_jobs(1);
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Line l;
    try {
      l = criteria[i].second();
    } catch (const std::exception& e) {
      l = {false, std::string("error: ") + e.what()};
    }
    std::cout << (l.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << ": " << l.detail;
    if (!l.pass && known_fail.count(id)) std::cout << " [known failure]";
    if (l.pass && known_fail.count(id)) std::cout << " [listed as known failure but passed]";
    std::cout << std::endl;
    failures += !l.pass && !known_fail.count(id);
  }
  return failures;
}
