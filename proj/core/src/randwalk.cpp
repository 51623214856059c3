#include "coarselab/randwalk.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "coarselab/parallel.hpp"

namespace coarselab {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::int64_t max_peripheral_syllable(const FreeProductGroup& g, const Element& w) {
  std::int64_t m = 0;
  for (const auto& s : w)
    if (g.atoms()[static_cast<std::size_t>(s.atom)].peripheral) m = std::max(m, l1(s.c));
  return m;
}

double median(std::vector<double> v) { return v.empty() ? 0 : quantile(std::move(v), 0.5); }

}  // namespace

StepMeasure StepMeasure::parse(const FreeProductGroup& g, const std::string& spec) {
  StepMeasure mu;
  std::string s = trim(spec);
  if (s == "uniform" || s.rfind("uniform:", 0) == 0) {
    std::vector<std::string> words;
    if (s == "uniform") {
      for (std::size_t k = 0; k < g.num_generators(); ++k) words.push_back(g.gen_name(static_cast<int>(k)));
    } else {
      for (char c : s.substr(8))
        if (c != ' ') words.emplace_back(1, c);
    }
    for (auto& w : words) {
      mu.support.push_back(g.parse_word(w));
      mu.labels.push_back(w);
      mu.prob.push_back(1.0 / static_cast<double>(words.size()));
    }
  } else {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto colon = item.rfind(':');
      if (colon == std::string::npos) throw std::invalid_argument("measure entry '" + item + "' needs word:probability");
      std::string w = trim(item.substr(0, colon));
      std::size_t used = 0;
      double p = std::stod(item.substr(colon + 1), &used);
      mu.support.push_back(g.parse_word(w));
      mu.labels.push_back(w);
      mu.prob.push_back(p);
    }
  }
  mu.validate();
  return mu;
}

void StepMeasure::validate() const {
  if (support.empty()) throw std::invalid_argument("empty step measure");
  if (support.size() > 255) throw std::invalid_argument("step measure support above 255 elements");
  if (prob.size() != support.size()) throw std::invalid_argument("support and probabilities differ in length");
  double sum = 0;
  for (double p : prob) {
    if (!(p > 0)) throw std::invalid_argument("step probabilities must be positive");
    sum += p;
  }
  if (std::abs(sum - 1) > 1e-12) throw std::invalid_argument("step probabilities sum to " + std::to_string(sum));
}

std::vector<double> StepMeasure::cdf() const {
  std::vector<double> c;
  double acc = 0;
  for (double p : prob) c.push_back(acc += p);
  c.back() = 1;
  return c;
}

std::int64_t StepMeasure::max_norm(const FreeProductGroup& g) const {
  std::int64_t m = 0;
  for (const auto& e : support) m = std::max(m, g.norm(e));
  return m;
}

bool StepMeasure::reaches_ball(const FreeProductGroup& g, int radius, int max_len) const {
  std::set<std::vector<std::int64_t>> ball{g.encode(Element{})};
  std::vector<Element> frontier{Element{}};
  for (int r = 0; r < radius; ++r) {
    std::vector<Element> next;
    for (const auto& x : frontier)
      for (std::size_t k = 0; k < g.num_generators(); ++k) {
        Element y = x;
        g.right_mul_gen(y, static_cast<int>(k));
        if (ball.insert(g.encode(y)).second) next.push_back(std::move(y));
      }
    frontier = std::move(next);
  }
  std::set<std::vector<std::int64_t>> seen{g.encode(Element{})};
  std::vector<Element> layer{Element{}};
  for (int len = 0; len < max_len && !layer.empty(); ++len) {
    std::vector<Element> next;
    for (const auto& x : layer)
      for (const auto& s : support) {
        Element y = g.multiply(x, s);
        if (seen.insert(g.encode(y)).second && seen.size() < 200000) next.push_back(std::move(y));
      }
    layer = std::move(next);
  }
  for (const auto& b : ball)
    if (!seen.count(b)) return false;
  return true;
}

std::vector<SamplePath> sample_paths(const CayleySpace& sp, const StepMeasure& mu, std::int64_t n, std::size_t count,
                                     std::uint64_t seed) {
  mu.validate();
  if (n < 1 || count < 1) throw std::invalid_argument("sample_paths needs n, count >= 1");
  const auto& g = sp.group();
  for (const auto& e : mu.support)
    for (const auto& s : e)
      if (s.atom < 0 || static_cast<std::size_t>(s.atom) >= g.atoms().size())
        throw std::invalid_argument("support element outside the group");
  auto cdf = mu.cdf();
  std::vector<SamplePath> out(count);
  parallel_for(count, [&](std::size_t i) {
    SamplePath& p = out[i];
    p.seed = derive_seed(seed, i);
    Rng rng(p.seed);
    p.steps.resize(static_cast<std::size_t>(n));
    for (auto& st : p.steps) st = static_cast<std::uint8_t>(mu.support.size() == 1 ? 0 : rng.pick(cdf));
  });
  return out;
}

std::vector<Element> positions(const FreeProductGroup& g, const StepMeasure& mu, const SamplePath& p,
                               const std::vector<std::int64_t>& times) {
  std::vector<Element> out;
  Element w;
  std::int64_t t = 0;
  for (auto target : times) {
    if (target < t || target > static_cast<std::int64_t>(p.steps.size()))
      throw std::invalid_argument("times must be ascending and within the path");
    for (; t < target; ++t) g.right_mul(w, mu.support[p.steps[static_cast<std::size_t>(t)]]);
    out.push_back(w);
  }
  return out;
}

std::vector<std::int64_t> dyadic_times(std::int64_t n) {
  std::vector<std::int64_t> t;
  for (std::int64_t k = 1; k <= n; k *= 2) t.push_back(k);
  if (t.empty() || t.back() != n) t.push_back(n);
  return t;
}

WalkTable walk_table(const CayleySpace& sp, const StepMeasure& mu, const std::vector<SamplePath>& paths) {
  if (paths.empty()) throw std::invalid_argument("no paths");
  const auto& g = sp.group();
  WalkTable t;
  t.times = dyadic_times(static_cast<std::int64_t>(paths[0].steps.size()));
  for (const auto& p : paths)
    if (p.steps.size() != paths[0].steps.size()) throw std::invalid_argument("paths differ in length");
  const std::int64_t gmax = mu.max_norm(g);
  t.dist.resize(paths.size());
  t.coned.resize(paths.size());
  t.sup_periph.resize(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) {
    auto ws = positions(g, mu, paths[i], t.times);
    for (std::size_t k = 0; k < ws.size(); ++k) {
      std::int64_t d = g.norm(ws[k]);
      if (d > t.times[k] * gmax) throw std::logic_error("walk outran n * max generator norm");
      t.dist[i].push_back(d);
      t.coned[i].push_back(g.coned_norm(ws[k]));
      t.sup_periph[i].push_back(max_peripheral_syllable(g, ws[k]));
    }
  });
  return t;
}

DriftEstimate drift(const WalkTable& t) {
  const std::size_t P = t.dist.size();
  if (P < 30) throw Inconclusive("drift needs at least 30 paths, got " + std::to_string(P));
  DriftEstimate est;
  std::vector<double> se;
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    std::vector<double> r;
    for (std::size_t i = 0; i < P; ++i) r.push_back(static_cast<double>(t.dist[i][k]) / static_cast<double>(t.times[k]));
    est.profile.emplace_back(t.times[k], mean(r));
    se.push_back(sample_sd(r) / std::sqrt(static_cast<double>(P)));
    if (k + 1 == t.times.size()) est.ell = batch_means(r, 20);
  }
  for (std::size_t k = 1; k < est.profile.size(); ++k) {
    double tol = 3 * std::hypot(se[k], se[k - 1]);
    if (est.profile[k].second > est.profile[k - 1].second + tol + kTol) {
      est.subadditive = false;
      est.note = "mean d/n rises between n=" + std::to_string(est.profile[k - 1].first) + " and n=" +
                 std::to_string(est.profile[k].first);
    }
  }
  if (est.subadditive) est.note = "mean d/n nonincreasing within 3 standard errors";
  return est;
}

TailTable progress_tail(const WalkTable& t, double ell, double fraction, std::size_t min_events) {
  if (!(fraction > 0 && fraction < 1)) throw std::invalid_argument("fraction must lie in (0, 1)");
  if (!(ell >= 0)) throw std::invalid_argument("drift must be nonnegative");
  const std::size_t P = t.dist.size();
  if (P < 100) throw Inconclusive("tail estimation needs at least 100 paths");
  TailTable tab;
  tab.ell = ell;
  tab.fraction = fraction;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    TailRow row;
    row.n = t.times[k];
    row.total = P;
    double thr = fraction * ell * static_cast<double>(row.n);
    for (std::size_t i = 0; i < P; ++i) row.hits += static_cast<double>(t.dist[i][k]) < thr;
    row.p = static_cast<double>(row.hits) / static_cast<double>(P);
    if (row.hits >= min_events) {
      xs.push_back(static_cast<double>(row.n));
      ys.push_back(std::log(row.p));
    }
    tab.rows.push_back(row);
  }
  std::size_t tail_hits = 0;
  for (std::size_t k = tab.rows.size() / 2; k < tab.rows.size(); ++k) tail_hits += tab.rows[k].hits;
  tab.verdict.checked = xs.size();
  if (xs.size() < 3) {
    tab.verdict.pass = tail_hits == 0;
    tab.verdict.note = tab.verdict.pass ? "no events in the upper half of the times" : "too few bands with events to fit";
    return tab;
  }
  tab.fit = ols(xs, ys);
  tab.verdict.pass = tab.fit.slope_hi < 0;
  tab.verdict.margin = -tab.fit.slope_hi;
  tab.verdict.note = tab.verdict.pass ? "log-probability decreases linearly" : "no exponential decay";
  return tab;
}

GrowthTable peripheral_projection_growth(const FreeProductGroup& g, const WalkTable& t, double alpha) {
  if (!g.has_peripherals()) throw std::domain_error("group has no peripheral subgroups");
  GrowthTable tab;
  std::vector<double> ratios;
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    std::int64_t n = t.times[k];
    if (n < 128 || n > 8192) continue;
    std::vector<double> v;
    for (const auto& row : t.sup_periph) v.push_back(static_cast<double>(row[k]));
    GrowthRow r;
    r.n = n;
    r.q50 = quantile(v, 0.5);
    r.q95 = quantile(v, 0.95);
    r.q99 = quantile(v, 0.99);
    r.max = *std::max_element(v.begin(), v.end());
    r.ratio = r.q99 / std::log(static_cast<double>(n));
    ratios.push_back(r.ratio);
    tab.rows.push_back(r);
  }
  if (ratios.size() < 3) throw Inconclusive("peripheral growth needs at least 3 dyadic times in [128, 8192]");
  tab.trend = mann_kendall(ratios);
  tab.verdict.pass = tab.trend.p_increasing > alpha;
  tab.verdict.margin = tab.trend.p_increasing - alpha;
  tab.verdict.checked = ratios.size();
  tab.verdict.note = tab.verdict.pass ? "q99/log n shows no increasing trend" : "q99/log n increases";
  return tab;
}

RayProxy limit_ray_proxy(const RelHypGroup& G, const StepMeasure& mu, const SamplePath& p, std::int64_t N) {
  if (N < 2 || N > static_cast<std::int64_t>(p.steps.size())) throw std::invalid_argument("proxy index out of range");
  const auto& g = G.group();
  auto ws = positions(g, mu, p, {N / 2, N});
  RayProxy px;
  px.end = ws[1];
  px.coned_norm = g.coned_norm(px.end);
  if (px.coned_norm < 10)
    throw Inconclusive("walk did not progress in the coned graph (d_hat = " + std::to_string(px.coned_norm) + ")");
  px.ray = G.space().geodesic(Element{}, px.end);
  px.stability = RayGeometry(G, px.ray).coned_distance_to(ws[0]);
  return px;
}

TrackingTable tracking_profile(const RelHypGroup& G, const StepMeasure& mu, const std::vector<SamplePath>& paths,
                               std::int64_t N, std::int64_t min_n) {
  const auto& g = G.group();
  const auto& sp = G.space();
  TrackingTable tab;
  for (auto n : dyadic_times(N / 2))
    if (n >= min_n && (n & (n - 1)) == 0) tab.times.push_back(n);
  if (tab.times.empty()) throw std::invalid_argument("no dyadic tracking times");
  struct Out {
    bool ok = false;
    std::vector<std::int64_t> d;
    std::int64_t stability = 0;
  };
  std::vector<Out> res(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) {
    RayProxy px;
    try {
      px = limit_ray_proxy(G, mu, paths[i], N);
    } catch (const Inconclusive&) {
      return;
    }
    auto ws = positions(g, mu, paths[i], tab.times);
    Out& o = res[i];
    o.ok = true;
    o.stability = px.stability;
    for (auto& w : ws) o.d.push_back(px.ray.distance_to(sp.vertex(w)));
  });
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (!res[i].ok) {
      ++tab.inconclusive;
      continue;
    }
    tab.stability.push_back(res[i].stability);
    for (std::size_t k = 0; k < tab.times.size(); ++k) tab.rows.push_back({i, tab.times[k], res[i].d[k]});
  }
  if (tab.stability.empty()) throw Inconclusive("no path progressed in the coned graph");
  for (std::size_t k = 0; k < tab.times.size(); ++k) {
    std::vector<double> rn, rl;
    auto n = static_cast<double>(tab.times[k]);
    for (auto& o : res)
      if (o.ok) {
        rn.push_back(static_cast<double>(o.d[k]) / n);
        rl.push_back(static_cast<double>(o.d[k]) / (std::log(n) * std::log(n)));
      }
    tab.median_ratio_n.push_back(median(rn));
    tab.median_ratio_log2.push_back(median(rl));
  }
  double first = tab.median_ratio_n.front(), last = tab.median_ratio_n.back();
  tab.verdict_n.pass = last < 0.05 && last <= first + kTol;
  tab.verdict_n.margin = 0.05 - last;
  tab.verdict_n.note = "median d/n at the largest time " + std::to_string(last);
  auto mk = mann_kendall(tab.median_ratio_log2);
  tab.verdict_log2.pass = mk.p_increasing > 0.05;
  tab.verdict_log2.margin = mk.p_increasing - 0.05;
  tab.verdict_log2.note = tab.verdict_log2.pass ? "median d/log^2 n shows no increasing trend"
                                                : "median d/log^2 n increases";
  return tab;
}

double Histogram::mass(const std::string& cell) const {
  auto it = counts.find(cell);
  return it == counts.end() || total == 0 ? 0 : static_cast<double>(it->second) / static_cast<double>(total);
}

namespace {

std::string syllable_cell(const FreeProductGroup& g, const Syllable& s) {
  const auto& atom = g.atoms()[static_cast<std::size_t>(s.atom)];
  if (!atom.peripheral) return g.gen_name(g.gen_index(s.atom, 0, s.c[0] > 0 ? 1 : -1));
  std::string out = "[";
  for (auto v : s.c) out += v > 0 ? '+' : v < 0 ? '-' : '0';
  return out + "]" + std::to_string(s.atom);
}

std::vector<std::string> depth_one_cells(const FreeProductGroup& g) {
  std::vector<std::string> cells;
  for (std::size_t a = 0; a < g.atoms().size(); ++a) {
    const auto& atom = g.atoms()[a];
    if (!atom.peripheral) {
      for (int sgn : {1, -1}) cells.push_back(g.gen_name(g.gen_index(static_cast<int>(a), 0, sgn)));
      continue;
    }
    std::size_t total = 1;
    for (int d = 0; d < atom.dim; ++d) total *= 3;
    for (std::size_t code = 1; code < total; ++code) {
      std::string pat;
      std::size_t c = code;
      for (int d = 0; d < atom.dim; ++d, c /= 3) pat += "0+-"[c % 3];
      cells.push_back("[" + pat + "]" + std::to_string(a));
    }
  }
  return cells;
}

}  // namespace

std::string direction_cell(const FreeProductGroup& g, const Element& w, int depth) {
  if (depth < 1) throw std::invalid_argument("depth must be positive");
  if (w.empty()) return "other";
  std::string out;
  for (int k = 0; k < depth && static_cast<std::size_t>(k) < w.size(); ++k) {
    if (k) out += '.';
    out += syllable_cell(g, w[static_cast<std::size_t>(k)]);
  }
  return out;
}

std::string cell_orbit(const std::string& cell) {
  if (cell == "other") return "other";
  std::string out;
  std::stringstream ss(cell);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!out.empty()) out += '.';
    if (part.empty() || part[0] != '[') {
      out += "Z";
      continue;
    }
    auto close = part.find(']');
    std::string pat = part.substr(1, close - 1);
    auto nz = std::count_if(pat.begin(), pat.end(), [](char c) { return c != '0'; });
    out += "P" + part.substr(close + 1) + "/" + std::to_string(nz);
  }
  return out;
}

Histogram hitting_histogram(const FreeProductGroup& g, const StepMeasure& mu, const std::vector<SamplePath>& paths,
                            std::int64_t N, int depth, double alpha) {
  std::vector<std::string> cells(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) {
    cells[i] = direction_cell(g, positions(g, mu, paths[i], {N})[0], depth);
  });
  Histogram h;
  if (depth == 1)
    for (auto& c : depth_one_cells(g)) h.counts[c] = 0;
  for (auto& c : cells) {
    if (c == "other") ++h.other;
    ++h.counts[c];
    ++h.total;
  }
  std::map<std::string, std::vector<std::size_t>> orbits;
  for (auto& [c, n] : h.counts)
    if (c != "other") orbits[cell_orbit(c)].push_back(n);
  std::size_t tests = 0;
  for (auto& [o, v] : orbits) tests += v.size() > 1;
  double worst = 1;
  for (auto& [o, v] : orbits) {
    if (v.size() < 2) continue;
    double tot = 0;
    for (auto n : v) tot += static_cast<double>(n);
    if (tot == 0) continue;
    double e = tot / static_cast<double>(v.size()), chi = 0;
    for (auto n : v) chi += (static_cast<double>(n) - e) * (static_cast<double>(n) - e) / e;
    boost::math::chi_squared dist(static_cast<double>(v.size() - 1));
    double p = boost::math::cdf(boost::math::complement(dist, chi));
    if (p < worst) {
      worst = p;
      h.symmetry.note = "orbit " + o;
    }
  }
  double level = tests ? alpha / static_cast<double>(tests) : alpha;
  h.symmetry.pass = worst > level;
  h.symmetry.margin = worst - level;
  h.symmetry.checked = tests;
  h.symmetry.note = (h.symmetry.pass ? "masses symmetric within orbits; least p at " : "asymmetric masses; least p at ") +
                    (h.symmetry.note.empty() ? std::string("none") : h.symmetry.note);
  return h;
}

WalkExcursion excursion_of_walk_ray(const RelHypGroup& G, const StepMeasure& mu, const std::vector<SamplePath>& paths,
                                    const std::vector<std::int64_t>& Ns, const SublinearFn& kappa, std::int64_t D0,
                                    double factor) {
  if (!G.group().has_peripherals()) throw std::domain_error("group has no peripheral subgroups");
  if (Ns.empty()) throw std::invalid_argument("no horizons");
  const auto& g = G.group();
  WalkExcursion out;
  for (auto N : Ns) {
    ExcursionDist dist;
    dist.N = N;
    dist.E.assign(paths.size(), 0);
    std::vector<char> low(paths.size(), 0);
    parallel_for(paths.size(), [&](std::size_t i) {
      Element w = positions(g, mu, paths[i], {N})[0];
      low[i] = g.coned_norm(w) < 10;
      // measured on the geodesic even when the proxy precondition fails
      dist.E[i] = excursion_profile(G, G.space().geodesic(Element{}, w), D0, kappa).E;
    });
    for (char l : low) dist.inconclusive += l;
    dist.q95 = quantile(dist.E, 0.95);
    out.by_N.push_back(std::move(dist));
  }
  out.verdict.checked = out.by_N.size();
  for (std::size_t k = 1; k < out.by_N.size(); ++k) {
    double prev = out.by_N[k - 1].q95, cur = out.by_N[k].q95;
    double slack = factor * prev - cur;
    if (k == 1 || slack < out.verdict.margin) out.verdict.margin = slack;
    if (cur > factor * prev + kTol) out.verdict.pass = false;
  }
  out.verdict.note = out.verdict.pass ? "E_gamma q95 stable as N doubles" : "E_gamma q95 grows as N doubles";
  return out;
}

ProxyMorse proxy_morse(const RelHypGroup& G, const StepMeasure& mu, const std::vector<SamplePath>& paths,
                       std::int64_t N, const SublinearFn& kappa, std::int64_t D0, std::size_t rays, double q,
                       double Q, std::size_t probes, std::uint64_t seed) {
  ProxyMorse out;
  const auto& sp = G.space();
  for (std::size_t i = 0; i < paths.size() && out.rows.size() < rays; ++i) {
    RayProxy px;
    try {
      px = limit_ray_proxy(G, mu, paths[i], N);
    } catch (const Inconclusive&) {
      ++out.skipped;
      continue;
    }
    ProxyMorseRow row;
    row.path = i;
    row.length = static_cast<std::int64_t>(px.ray.length());
    row.E = excursion_profile(G, px.ray, D0, kappa).E;
    row.m = q * (row.E + 1) + Q;
    row.R = std::floor(static_cast<double>(row.length) / 2);
    row.r = std::min(std::floor(row.R / 2), least_small_radius(row.m, kappa));
    MorseTestParams p{row.r, row.R, q, Q, probes, derive_seed(seed, i)};
    row.verdict = test_kappa_morse(sp, px.ray, kappa, kappa, MorseGauge(row.m), p);
    out.rows.push_back(std::move(row));
  }
  out.verdict.checked = out.rows.size();
  for (auto& r : out.rows) {
    if (!r.verdict.pass && out.verdict.pass) {
      out.verdict.pass = false;
      out.verdict.witness_path = r.verdict.witness_path;
      out.verdict.witness_index = r.verdict.witness_index;
    }
    if (&r == &out.rows.front() || r.verdict.margin < out.verdict.margin) out.verdict.margin = r.verdict.margin;
  }
  if (out.rows.empty()) {
    out.verdict.pass = false;
    out.verdict.note = "no proxy reached the coned-norm threshold";
  } else {
    out.verdict.note = out.verdict.pass ? "every proxy ray passes" : "a proxy ray fails";
  }
  return out;
}

}  // namespace coarselab
