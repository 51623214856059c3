#include "coarselab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <filesystem>
#include <sstream>

#include "coarselab/gauge.hpp"
#include "coarselab/randwalk.hpp"
#include "coarselab/relhyp.hpp"
#include "coarselab/report.hpp"
#include "coarselab/spaces.hpp"

namespace coarselab {

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    auto a = item.find_first_not_of(' ');
    auto b = item.find_last_not_of(' ');
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

std::shared_ptr<const CayleySpace> as_cayley(const std::shared_ptr<const GraphSpace>& sp, const std::string& what) {
  auto c = std::dynamic_pointer_cast<const CayleySpace>(sp);
  if (!c || !c->standard_generators()) throw std::invalid_argument(what + " needs a Cayley graph with standard generators");
  return c;
}

int first_gen(const FreeProductGroup& g, bool peripheral) {
  for (std::size_t a = 0; a < g.atoms().size(); ++a)
    if (g.atoms()[a].peripheral == peripheral) return g.gen_index(static_cast<int>(a), 0, 1);
  throw std::invalid_argument(peripheral ? "group has no peripheral factor" : "group has no free letter");
}

json bands_json(const std::vector<BandStat>& bands) {
  json a = json::array();
  for (auto& b : bands) a.push_back({{"lo", b.lo}, {"value", b.value}, {"count", b.count}});
  return a;
}

void write_bands(const std::string& path, const std::vector<BandStat>& bands) {
  CsvWriter w(path, {"band_lo", "value", "count"});
  for (auto& b : bands) w.row({std::to_string(b.lo), fmt_num(b.value), std::to_string(b.count)});
}

SampleParams sample_params(const TestSpec& t, std::uint64_t seed) {
  SampleParams p;
  p.min_norm = t.integer("min_norm");
  p.max_norm = t.integer("max_norm");
  p.samples = static_cast<std::size_t>(t.integer("samples"));
  p.seed = seed;
  return p;
}

MorseGauge parse_gauge(const TestSpec& t, const SublinearFn& kappa) {
  const auto& g = t.str("gauge");
  if (g.rfind("constant:", 0) == 0) return MorseGauge(std::stod(g.substr(9)));
  if (g == "derived") return derived_gauge(t.num("C1"), t.num("C2"), t.num("D1"), t.num("D2"), kappa);
  throw std::invalid_argument("gauge must be constant:<m> or derived");
}

json gauge_json(const GaugeDerivation& g) {
  return {{"q", g.in.q},   {"Q", g.in.Q},   {"C1", g.in.C1}, {"C2", g.in.C2}, {"D1", g.in.D1},
          {"D2", g.in.D2}, {"kappa", g.kappa}, {"m0", g.m0}, {"m1", g.m1}, {"C3", g.C3},
          {"A", g.A},      {"A_at", g.A_at}, {"m2", g.m2},   {"m3", g.m3},   {"m4", g.m4}, {"mZ", g.mZ}};
}

void run_morse(const GraphSpace& sp, const TestSpec& t, const std::string& dir, TestResult& res) {
  auto kappa = kappa_from_tag(t.str("kappa"));
  auto kp = kappa_from_tag(t.str("kappa_prime"));
  double R = t.num("R");
  std::int64_t len = t.integer("length");
  if (len <= 0) len = static_cast<std::int64_t>(std::ceil(2 * R)) + 8;
  PathSeg Z = build_ray(sp, t.str("ray"), len);
  MorseTestParams p{t.num("r"), R, t.num("q"), t.num("Q"), static_cast<std::size_t>(t.integer("probes")), res.seed};
  auto gauge = parse_gauge(t, kappa);
  Verdict v = test_kappa_morse(sp, Z, kappa, kp, gauge, p);
  res.pass = v.pass;
  res.metrics["verdict"] = verdict_json(v, &sp);
  res.metrics["m"] = gauge(p.q, p.Q);
  res.metrics["gauge"] = gauge.provenance();
  CsvWriter w(dir + "/morse.csv", {"r", "R", "q", "Q", "m", "pass", "margin", "checked", "witness_point"});
  std::string wp = v.witness_index < v.witness_path.size() ? sp.format(v.witness_path[v.witness_index]) : "";
  w.row({fmt_num(p.r), fmt_num(p.R), fmt_num(p.q), fmt_num(p.Q), fmt_num(gauge(p.q, p.Q)), v.pass ? "1" : "0",
         fmt_num(v.margin), std::to_string(v.checked), wp});
}

void run_contract(const GraphSpace& sp, const TestSpec& t, const std::string& dir, TestResult& res) {
  auto kappa = kappa_from_tag(t.str("kappa"));
  PathSeg Z = build_ray(sp, t.str("ray"), t.integer("length"));
  auto p = sample_params(t, res.seed);
  auto fit = test_kappa_contracting(sp, Z, nearest_projection(Z), kappa, t.num("C1"), p);
  res.pass = fit.verdict.pass;
  res.metrics["C1"] = fit.C1;
  res.metrics["C2"] = fit.C2;
  res.metrics["pairs"] = fit.pairs;
  res.metrics["bands"] = bands_json(fit.bands);
  res.metrics["verdict"] = verdict_json(fit.verdict, &sp);
  write_bands(dir + "/contract_bands.csv", fit.bands);
  if (t.flag("fit_projection")) {
    auto pf = fit_kappa_projection(sp, Z, nearest_projection(Z), kappa, p);
    res.metrics["projection"] = {{"D1", pf.D1}, {"D2", pf.D2}, {"derived_worst", pf.derived_worst},
                                 {"verdict", verdict_json(pf.verdict, &sp)}};
    res.pass = res.pass && pf.verdict.pass;
  }
}

void run_chain(const GraphSpace& sp, const TestSpec& t, const std::string& dir, TestResult& res) {
  auto kappa = kappa_from_tag(t.str("kappa"));
  auto kp = kappa_from_tag(t.str("kappa_prime"));
  auto p = sample_params(t, res.seed);
  const double C1 = t.num("C1");
  PathSeg Zfit = build_ray(sp, t.str("ray"), 4 * p.max_norm);
  auto fit = test_kappa_contracting(sp, Zfit, nearest_projection(Zfit), kappa, C1, p);
  auto pf = fit_kappa_projection(sp, Zfit, nearest_projection(Zfit), kappa, p);
  res.metrics["contraction"] = {{"C2", fit.C2}, {"pass", fit.verdict.pass}, {"bands", bands_json(fit.bands)}};
  res.metrics["projection"] = {{"D1", pf.D1}, {"D2", pf.D2}, {"pass", pf.verdict.pass}};
  if (!fit.verdict.pass || !pf.verdict.pass) {
    res.pass = false;
    res.message = "contraction or projection fit failed; chain not applicable";
    return;
  }
  const auto max_R = static_cast<double>(t.integer("max_R"));
  auto gauge = derived_gauge(C1, fit.C2, pf.D1, pf.D2, kappa);
  CsvWriter w(dir + "/chain.csv", {"q", "Q", "mZ", "r", "R", "status", "checked", "margin"});
  json rows = json::array();
  std::size_t ran = 0, failed = 0;
  std::uint64_t k = 0;
  for (double q : t.nums("qs"))
    for (double Q : t.nums("Qs")) {
      auto g = derive_gauge({std::max(q, 1.5), Q, C1, fit.C2, pf.D1, pf.D2}, kappa);
      double r = least_small_radius(g.mZ, kappa, 1e30);
      double R = std::numeric_limits<double>::infinity();
      try {
        R = theorem_radius(g, kappa, kp, r);
      } catch (const Inconclusive&) {
      }
      json row = {{"q", q}, {"Q", Q}, {"mZ", g.mZ}, {"r", r}, {"R", std::isfinite(R) ? json(R) : json("inf")}};
      std::string status;
      Verdict v;
      if (R > max_R) {
        status = "skipped";
      } else {
        PathSeg Z = build_ray(sp, t.str("ray"), static_cast<std::int64_t>(std::ceil(2 * R)) + 8);
        MorseTestParams mp{r, R, q, Q, static_cast<std::size_t>(t.integer("probes")), derive_seed(res.seed, ++k)};
        v = test_kappa_morse(sp, Z, kappa, kp, gauge, mp);
        ++ran;
        failed += !v.pass;
        status = v.pass ? "pass" : "fail";
        row["verdict"] = verdict_json(v, &sp, 8);
      }
      row["status"] = status;
      rows.push_back(row);
      w.row({fmt_num(q), fmt_num(Q), fmt_num(g.mZ), fmt_num(r), fmt_num(R), status, std::to_string(v.checked),
             fmt_num(v.margin)});
    }
  res.metrics["rows"] = rows;
  res.metrics["ran"] = ran;
  res.pass = ran > 0 && failed == 0;
  if (ran == 0) res.message = "every (q, Q) needs R beyond max_R";
}

void run_excursion(const std::shared_ptr<const GraphSpace>& base, const TestSpec& t, const std::string& dir,
                   TestResult& res) {
  auto sp = as_cayley(base, "excursion");
  RelHypGroup G(sp);
  auto kappa = kappa_from_tag(t.str("kappa"));
  auto cf = fit_constants(G, t.integer("fit_radius"), static_cast<std::size_t>(t.integer("fit_samples")),
                          derive_seed(res.seed, 1), t.integer("D"), t.integer("deep_R"));
  const auto& c = cf.constants;
  res.metrics["constants"] = {{"D0", c.D0}, {"L0", c.L0}, {"L1", c.L1}, {"R0", c.R0}, {"R1", c.R1},
                              {"L", c.L},   {"K0", c.K0}, {"D", c.D},   {"R", c.R},   {"lemma_checked", cf.lemma_checked},
                              {"lemma_violations", cf.lemma_violations}};
  PathSeg gamma = build_ray(*sp, t.str("ray"), t.integer("length"));
  auto prof = excursion_profile(G, gamma, c.D0, kappa);
  CsvWriter w(dir + "/excursion.csv", {"coset_id", "excursion", "coned_norm", "ratio"});
  for (auto& row : prof.rows)
    w.row({row.coset, fmt_num(row.excursion), std::to_string(row.coned_norm), fmt_num(row.ratio)});
  res.metrics["E"] = prof.E;
  res.metrics["excursion_verdict"] = verdict_json(prof.verdict);
  res.pass = prof.verdict.pass && cf.lemma_violations == 0;
  if (t.flag("contract")) {
    auto geo = std::make_shared<const RayGeometry>(G, gamma);
    auto ec = test_excursion_contracting(G, geo, c, kappa, t.num("C1"), sample_params(t, derive_seed(res.seed, 2)));
    res.metrics["contraction"] = {{"C2", ec.fit.C2}, {"D2_hat", ec.D2_hat}, {"bands", bands_json(ec.fit.bands)},
                                  {"hat_bands", bands_json(ec.hat_bands)}, {"verdict", verdict_json(ec.verdict, sp.get())}};
    write_bands(dir + "/contract_bands.csv", ec.fit.bands);
    res.pass = res.pass && ec.verdict.pass;
  }
}

void run_walk(const std::shared_ptr<const GraphSpace>& base, const TestSpec& t, const std::string& dir,
              TestResult& res) {
  auto sp = as_cayley(base, "walk");
  const auto& g = sp->group();
  auto mu = StepMeasure::parse(g, t.str("measure"));
  const std::int64_t n = t.integer("n");
  auto paths = sample_paths(*sp, mu, n, static_cast<std::size_t>(t.integer("count")), res.seed);
  auto ops = split(t.str("ops"), ',');
  auto has = [&](const std::string& op) { return std::find(ops.begin(), ops.end(), op) != ops.end(); };
  for (auto& op : ops)
    if (op != "drift" && op != "tail" && op != "growth" && op != "tracking" && op != "hitting" && op != "excursion" &&
        op != "proxy_morse")
      throw std::invalid_argument("unknown walk op '" + op + "'");
  res.metrics["measure"] = t.str("measure");
  res.metrics["reaches_ball3"] = mu.reaches_ball(g);
  res.pass = true;

  auto table = walk_table(*sp, mu, paths);
  {
    CsvWriter w(dir + "/walk_stats.csv", {"path_id", "n", "dist", "coned_dist"});
    for (std::size_t i = 0; i < paths.size(); ++i)
      for (std::size_t k = 0; k < table.times.size(); ++k)
        w.row({std::to_string(i), std::to_string(table.times[k]), std::to_string(table.dist[i][k]),
               std::to_string(table.coned[i][k])});
  }
  double ell = 0;
  if (has("drift") || has("tail")) {
    auto d = drift(table);
    ell = d.ell.estimate;
    bool ok = d.subadditive;
    if (!t.str("drift_min").empty()) ok = ok && ell >= t.num("drift_min");
    if (!t.str("drift_max").empty()) ok = ok && ell <= t.num("drift_max");
    json prof = json::array();
    for (auto& [nn, m] : d.profile) prof.push_back({nn, m});
    res.metrics["drift"] = {{"ell", ell}, {"lo", d.ell.lo}, {"hi", d.ell.hi}, {"subadditive", d.subadditive},
                            {"profile", prof}, {"note", d.note}, {"pass", ok}};
    if (has("drift")) res.pass = res.pass && ok;
  }
  if (has("tail")) {
    auto tail = progress_tail(table, ell, t.num("fraction"));
    CsvWriter w(dir + "/tail.csv", {"n", "hits", "total", "p"});
    for (auto& r : tail.rows) w.row({std::to_string(r.n), std::to_string(r.hits), std::to_string(r.total), fmt_num(r.p)});
    res.metrics["tail"] = {{"slope", tail.fit.slope}, {"slope_lo", tail.fit.slope_lo}, {"slope_hi", tail.fit.slope_hi},
                           {"verdict", verdict_json(tail.verdict)}};
    res.pass = res.pass && tail.verdict.pass;
  }
  if (has("growth")) {
    auto gr = peripheral_projection_growth(g, table);
    CsvWriter w(dir + "/growth.csv", {"n", "q50", "q95", "q99", "max", "q99_over_log_n"});
    for (auto& r : gr.rows)
      w.row({std::to_string(r.n), fmt_num(r.q50), fmt_num(r.q95), fmt_num(r.q99), fmt_num(r.max), fmt_num(r.ratio)});
    res.metrics["growth"] = {{"mann_kendall_S", gr.trend.s}, {"p_increasing", gr.trend.p_increasing},
                             {"verdict", verdict_json(gr.verdict)}};
    res.pass = res.pass && gr.verdict.pass;
  }
  std::unique_ptr<RelHypGroup> G;
  if (has("tracking") || has("excursion") || has("proxy_morse")) G = std::make_unique<RelHypGroup>(sp);
  if (has("tracking")) {
    auto tr = tracking_profile(*G, mu, paths, n, t.integer("tracking_min_n"));
    CsvWriter w(dir + "/tracking.csv", {"path_id", "n", "dist_to_proxy"});
    for (auto& r : tr.rows) w.row({std::to_string(r.path), std::to_string(r.n), std::to_string(r.d)});
    std::vector<double> st(tr.stability.begin(), tr.stability.end());
    res.metrics["tracking"] = {{"times", tr.times},
                               {"median_ratio_n", tr.median_ratio_n},
                               {"median_ratio_log2", tr.median_ratio_log2},
                               {"inconclusive", tr.inconclusive},
                               {"stability_q95", quantile(st, 0.95)},
                               {"verdict_n", verdict_json(tr.verdict_n)},
                               {"verdict_log2", verdict_json(tr.verdict_log2)}};
    res.pass = res.pass && tr.verdict_n.pass && tr.verdict_log2.pass;
  }
  if (has("hitting")) {
    auto h = hitting_histogram(g, mu, paths, n, static_cast<int>(t.integer("depth")));
    CsvWriter w(dir + "/hitting.csv", {"cell", "count", "mass"});
    for (auto& [cell, cnt] : h.counts) w.row({cell, std::to_string(cnt), fmt_num(h.mass(cell))});
    res.metrics["hitting"] = {{"other", h.other}, {"verdict", verdict_json(h.symmetry)}};
    res.pass = res.pass && h.symmetry.pass;
  }
  if (has("excursion")) {
    std::vector<std::int64_t> Ns;
    if (t.str("horizons").empty()) Ns = {n / 4, n / 2, n};
    else
      for (double v : t.nums("horizons")) Ns.push_back(static_cast<std::int64_t>(v));
    auto ex = excursion_of_walk_ray(*G, mu, paths, Ns, kappa_from_tag(t.str("kappa")), t.integer("D0"));
    CsvWriter w(dir + "/excursion.csv", {"N", "path_id", "E"});
    json q = json::array();
    for (auto& d : ex.by_N) {
      for (std::size_t i = 0; i < d.E.size(); ++i) w.row({std::to_string(d.N), std::to_string(i), fmt_num(d.E[i])});
      q.push_back({{"N", d.N}, {"q95", d.q95}, {"below_coned_10", d.inconclusive}});
    }
    res.metrics["excursion"] = {{"q95", q}, {"verdict", verdict_json(ex.verdict)}};
    res.pass = res.pass && ex.verdict.pass;
  }
  if (has("proxy_morse")) {
    auto pm = proxy_morse(*G, mu, paths, n, kappa_from_tag(t.str("kappa")), t.integer("D0"),
                          static_cast<std::size_t>(t.integer("proxy_rays")), t.num("q"), t.num("Q"),
                          static_cast<std::size_t>(t.integer("probes")), derive_seed(res.seed, 7));
    CsvWriter w(dir + "/proxy_morse.csv", {"path_id", "length", "E", "m", "r", "R", "pass", "checked", "margin"});
    for (auto& r : pm.rows)
      w.row({std::to_string(r.path), std::to_string(r.length), fmt_num(r.E), fmt_num(r.m), fmt_num(r.r), fmt_num(r.R),
             r.verdict.pass ? "1" : "0", std::to_string(r.verdict.checked), fmt_num(r.verdict.margin)});
    res.metrics["proxy_morse"] = {{"skipped", pm.skipped}, {"verdict", verdict_json(pm.verdict, sp.get(), 16)}};
    res.pass = res.pass && pm.verdict.pass;
  }
}

void run_gauge(const TestSpec& t, TestResult& res) {
  auto kappa = kappa_from_tag(t.str("kappa"));
  auto g = derive_gauge({t.num("q"), t.num("Q"), t.num("C1"), t.num("C2"), t.num("D1"), t.num("D2")}, kappa);
  res.metrics["gauge"] = gauge_json(g);
  if (t.num("r") > 0) res.metrics["R"] = theorem_radius(g, kappa, kappa_from_tag(t.str("kappa_prime")), t.num("r"));
  res.pass = true;
}

void run_surgery(const GraphSpace& sp, const TestSpec& t, const std::string& dir, TestResult& res) {
  auto c = as_cayley(std::shared_ptr<const GraphSpace>(&sp, [](const GraphSpace*) {}), "surgery");
  auto r = static_cast<std::int64_t>(t.num("r")), R = static_cast<std::int64_t>(t.num("R"));
  PathSeg gamma = build_ray(sp, t.str("ray"), 2 * R + 8);
  PathSeg alpha = c->geodesic(Element{}, c->group().parse_word(t.str("alpha")));
  try {
    PathSeg out = surgery(sp, gamma, alpha, t.num("q"), t.num("Q"), r, R);
    CsvWriter w(dir + "/surgery.csv", {"index", "vertex", "norm"});
    for (std::size_t i = 0; i < out.size(); ++i) w.row({std::to_string(i), sp.format(out.vertex(i)), std::to_string(out.norm(i))});
    res.pass = true;
    res.metrics["length"] = out.length();
    res.metrics["certificate"] = {9 * t.num("q"), t.num("Q")};
  } catch (const SurgeryError& e) {
    res.pass = false;
    res.message = e.what();
    res.metrics["witness"] = {{"i", e.witness().i}, {"j", e.witness().j}, {"d", e.witness().d}};
  }
}

void run_distance_formula(const std::shared_ptr<const GraphSpace>& base, const TestSpec& t, const std::string& dir,
                          TestResult& res) {
  auto sp = as_cayley(base, "distance-formula");
  RelHypGroup G(sp);
  const auto count = static_cast<std::size_t>(t.integer("pairs"));
  const std::int64_t radius = t.integer("radius");
  std::vector<std::pair<Element, Element>> pairs(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(res.seed, i));
    pairs[i].first = sp->element(sp->sample(rng, radius));
    pairs[i].second = sp->element(sp->sample(rng, radius));
  }
  const double A = t.str("A") == "tied" ? -1 : t.num("A");
  CsvWriter w(dir + "/residuals.csv", {"K", "pair", "d_G", "S"});
  json fits = json::array();
  std::vector<double> Ms;
  for (double Kd : t.nums("Ks")) {
    auto K = static_cast<std::int64_t>(Kd);
    auto fit = fit_distance_formula(G, pairs, K, A);
    for (std::size_t i = 0; i < fit.rows.size(); ++i)
      w.row({std::to_string(K), std::to_string(i), std::to_string(fit.rows[i].dG), fmt_num(fit.rows[i].S)});
    fits.push_back({{"K", K}, {"A", fit.A}, {"M", fit.M}});
    Ms.push_back(fit.M);
  }
  double worst = 0;
  for (std::size_t k = 1; k < Ms.size(); ++k) worst = std::max(worst, std::abs(Ms[k] - Ms[k - 1]) / Ms[k - 1]);
  res.metrics["fits"] = fits;
  res.metrics["max_relative_change"] = worst;
  res.pass = worst < t.num("tolerance");
}

void run_loopy_profile(const std::shared_ptr<const GraphSpace>& base, const TestSpec& t, const std::string& dir,
                       TestResult& res) {
  auto sp = std::dynamic_pointer_cast<const LoopyRaySpace>(base);
  if (!sp) throw std::invalid_argument("loopy-profile needs a loopy_ray space");
  int N = static_cast<int>(t.integer("max_loop"));
  if (N > sp->max_loop()) throw std::invalid_argument("max_loop exceeds the space");
  PathSeg Z = sp->ray_prefix(sp->attach(sp->max_loop()) + sp->max_loop() + 8);
  std::vector<std::pair<Vertex, std::int64_t>> balls;
  for (int k = 2; k <= N; ++k) balls.emplace_back(sp->apex(k), 0);
  auto prof = projection_diameter_profile(*sp, Z, nearest_projection(Z), balls);
  CsvWriter w(dir + "/profile.csv", {"n", "center", "center_norm", "radius", "diameter", "ok"});
  std::size_t bad = 0;
  for (std::size_t i = 0; i < prof.rows.size(); ++i) {
    const auto& row = prof.rows[i];
    auto k = static_cast<std::int64_t>(i + 2);
    bool ok = !row.skipped && row.diameter >= static_cast<double>(k) && row.center_norm >= k * k;
    bad += !ok;
    w.row({std::to_string(k), row.center, std::to_string(row.center_norm), std::to_string(row.radius),
           fmt_num(row.diameter), ok ? "1" : "0"});
  }
  res.metrics["envelope"] = prof.envelope;
  res.metrics["rows"] = prof.rows.size();
  res.metrics["violations"] = bad;
  res.pass = bad == 0;
}

}  // namespace

PathSeg build_ray(const GraphSpace& sp, const std::string& spec, std::int64_t length) {
  if (length < 1) throw std::invalid_argument("ray length must be positive");
  if (auto loopy = dynamic_cast<const LoopyRaySpace*>(&sp)) {
    if (!spec.empty() && spec != "ray") throw std::invalid_argument("loopy_ray only has the ray");
    return loopy->ray_prefix(length);
  }
  auto c = dynamic_cast<const CayleySpace*>(&sp);
  if (!c || !c->standard_generators()) throw std::invalid_argument("rays need loopy_ray or a standard Cayley graph");
  const auto& g = c->group();
  std::vector<int> steps;
  if (spec.rfind("excursion:", 0) == 0) {
    std::string law = spec.substr(10);
    if (law != "log" && law != "linear" && law != "const") throw std::invalid_argument("unknown excursion law " + law);
    int t = first_gen(g, false), a = first_gen(g, true);
    for (std::int64_t k = 1; static_cast<std::int64_t>(steps.size()) < length; ++k) {
      steps.push_back(t);
      std::int64_t s = law == "log" ? static_cast<std::int64_t>(std::ceil(std::log(static_cast<double>(k))))
                       : law == "linear" ? k : 1;
      for (std::int64_t j = 0; j < s; ++j) steps.push_back(a);
    }
  } else {
    std::vector<int> word;
    if (spec.empty()) word.push_back(0);
    else
      for (char ch : spec) {
        auto w = g.lex_word(g.parse_word(std::string(1, ch)));
        word.insert(word.end(), w.begin(), w.end());
      }
    if (word.empty()) throw std::invalid_argument("empty ray word");
    for (std::size_t k = 0; static_cast<std::int64_t>(steps.size()) < length; ++k) steps.push_back(word[k % word.size()]);
  }
  steps.resize(static_cast<std::size_t>(length));
  PathSeg p = c->path_from_steps(Element{}, std::move(steps));
  if (p.norm(p.size() - 1) == length) p.set_certificate({1, 0});
  return p;
}

std::uint64_t test_seed(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) h = (h ^ ch) * 0x100000001b3ULL;
  return derive_seed(seed, h);
}

nlohmann::json config_echo(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["space"] = cfg.space;
  j["kappa"] = cfg.kappa;
  j["kappa_prime"] = cfg.kappa_prime;
  json tests = json::array();
  for (auto& t : cfg.tests) {
    json params;
    for (auto& [k, v] : t.params) params[k] = v.text;
    tests.push_back({{"name", t.name}, {"kind", t.kind}, {"expect", t.expect_pass ? "pass" : "fail"}, {"params", params}});
  }
  j["tests"] = tests;
  return j;
}

TestResult run_test(const ExperimentConfig& cfg, const TestSpec& t, const std::string& dir) {
  TestResult res;
  res.name = t.name;
  res.kind = t.kind;
  res.expect_pass = t.expect_pass;
  res.seed = test_seed(cfg.seed, t.name);
  try {
    auto sp = build_space(cfg.space);
    std::filesystem::create_directories(dir);
    if (t.kind == "morse") run_morse(*sp, t, dir, res);
    else if (t.kind == "contract") run_contract(*sp, t, dir, res);
    else if (t.kind == "chain") run_chain(*sp, t, dir, res);
    else if (t.kind == "excursion") run_excursion(sp, t, dir, res);
    else if (t.kind == "walk") run_walk(sp, t, dir, res);
    else if (t.kind == "gauge") run_gauge(t, res);
    else if (t.kind == "surgery") run_surgery(*sp, t, dir, res);
    else if (t.kind == "distance-formula") run_distance_formula(sp, t, dir, res);
    else if (t.kind == "loopy-profile") run_loopy_profile(sp, t, dir, res);
    else throw std::invalid_argument("unknown kind " + t.kind);
  } catch (const std::exception& e) {
    res.error = true;
    res.pass = false;
    res.message = e.what();
  }
  return res;
}

RunSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  RunSummary sum;
  json tests = json::array();
  for (auto& t : cfg.tests) {
    auto res = run_test(cfg, t, out_dir + "/" + t.name);
    json params;
    for (auto& [k, v] : t.params) params[k] = v.text;
    json j = {{"test", res.name},     {"kind", res.kind},     {"space", cfg.space},
              {"parameters", params}, {"seed", res.seed},     {"expect", res.expect_pass ? "pass" : "fail"},
              {"pass", res.pass},     {"matched", res.matched()}, {"error", res.error},
              {"message", res.message}, {"metrics", res.metrics}};
    tests.push_back(j);
    if (!res.matched()) sum.exit_code = 1;
    sum.results.push_back(std::move(res));
  }
  sum.json = {{"tool", "coarse-lab"},
              {"version", version_string()},
              {"schema", kSchemaVersion},
              {"config", config_echo(cfg)},
              {"tests", tests},
              {"all_matched", sum.exit_code == 0}};
  write_json(out_dir + "/summary.json", sum.json);
  return sum;
}

}  // namespace coarselab
