#include "coarselab/sublinear.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace coarselab {

double SublinearFn::operator()(double t) const {
  if (!(t >= 0)) throw std::domain_error("sublinear function evaluated at negative argument");
  return (*f_)(t);
}

double evaluate(const SublinearFn& f, double t) { return f(t); }

std::vector<double> default_grid(double cap, std::size_t n) {
  std::vector<double> g;
  g.reserve(n);
  g.push_back(0.0);
  double lo = -3.0, hi = std::log10(cap);
  std::size_t m = n - 1;
  for (std::size_t k = 0; k < m; ++k) {
    double e = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m - 1);
    g.push_back(std::pow(10.0, e));
  }
  // exact decades keep fixtures readable
  for (double& t : g) {
    double r = std::round(t);
    if (t >= 1 && std::abs(t - r) < 1e-9 * t) t = r;
  }
  return g;
}

namespace {

struct Hull {
  std::vector<double> t, v;       // hull vertices
  std::vector<char> keep_raw;     // per hull segment
};

double hull_eval(const Hull& h, const SublinearFn::Eval& raw, double t) {
  if (t >= h.t.back()) return raw(t);
  auto it = std::upper_bound(h.t.begin(), h.t.end(), t);
  std::size_t j = static_cast<std::size_t>(it - h.t.begin()) - 1;
  if (h.t[j] == t) return h.v[j];
  if (h.keep_raw[j]) return raw(t);
  double w = (t - h.t[j]) / (h.t[j + 1] - h.t[j]);
  return h.v[j] + w * (h.v[j + 1] - h.v[j]);
}

}  // namespace

Concavified concavify(const std::string& tag, const SublinearFn::Eval& raw,
                      const std::vector<double>& grid) {
  if (grid.size() < 8) throw std::invalid_argument("concavify: grid too small");
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    f[i] = raw(grid[i]);
    if (!(f[i] >= 1 - kTol)) throw std::invalid_argument("concavify: value below 1 at t=" + std::to_string(grid[i]));
  }

  // tail of f(t)/t must come down somewhere in the last quarter
  std::size_t from = grid.size() * 3 / 4;
  bool nondecreasing = true;
  for (std::size_t i = from + 1; i < grid.size(); ++i) {
    double a = f[i - 1] / grid[i - 1], b = f[i] / grid[i];
    if (b < a * (1 - kTol)) { nondecreasing = false; break; }
  }
  if (nondecreasing)
    throw NotSublinear("f(t)/t does not decay on the grid tail", grid.back());

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    while (idx.size() >= 2) {
      std::size_t a = idx[idx.size() - 2], b = idx.back();
      double cross = (grid[b] - grid[a]) * (f[i] - f[a]) - (f[b] - f[a]) * (grid[i] - grid[a]);
      if (cross >= 0) idx.pop_back(); else break;
    }
    idx.push_back(i);
  }

  auto h = std::make_shared<Hull>();
  for (std::size_t i : idx) { h->t.push_back(grid[i]); h->v.push_back(f[i]); }
  h->keep_raw.assign(idx.size() > 0 ? idx.size() - 1 : 0, 0);
  for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
    if (idx[j + 1] != idx[j] + 1) continue;
    // keep the raw function only where it is itself concave between the nodes
    double a = grid[idx[j]], b = grid[idx[j + 1]];
    bool ok = true;
    for (double w : {0.25, 0.5, 0.75}) {
      double x = a + w * (b - a);
      double chord = f[idx[j]] + w * (f[idx[j + 1]] - f[idx[j]]);
      if (raw(x) < chord - kTol) ok = false;
    }
    h->keep_raw[j] = ok;
  }

  Concavified out;
  auto rawc = raw;
  out.fn = SublinearFn(tag, [h, rawc](double t) { return hull_eval(*h, rawc, t); }, grid.back());
  out.hull_t = h->t;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double r = hull_eval(*h, raw, grid[i]) / f[i];
    if (r > out.C) { out.C = r; out.C_at = grid[i]; }
  }
  return out;
}

ScalingCheck check_scaling(const SublinearFn& f, double lambda, const std::vector<double>& grid) {
  if (!(lambda > 1)) throw std::domain_error("check_scaling needs lambda > 1");
  ScalingCheck out;
  for (double t : grid) {
    double lhs = f(lambda * t), rhs = lambda * f(t);
    double r = lhs / rhs;
    if (r > out.worst_ratio) { out.worst_ratio = r; out.worst_t = t; }
    if (lhs > rhs + kTol) out.ok = false;
  }
  return out;
}

bool small_compared(double D, double r, const SublinearFn& f) {
  if (!(r > 0)) throw std::domain_error("small_compared needs r > 0");
  return D <= r / (2 * f(r)) + kTol;
}

double least_small_radius(double D, const SublinearFn& f, double cap) {
  double hi = 1;
  while (!small_compared(D, hi, f)) {
    hi *= 2;
    if (hi > cap) throw Inconclusive("no radius below cap is large compared to " + std::to_string(D));
  }
  double lo = std::floor(hi / 2);
  if (lo < 1) return 1;
  // r / f(r) is nondecreasing, so the predicate is monotone
  while (hi - lo > 1) {
    double mid = std::floor((lo + hi) / 2);
    if (small_compared(D, mid, f)) hi = mid; else lo = mid;
  }
  return hi;
}

EstimationConstant estimation_constant(const SublinearFn& f, double c) {
  if (!(c >= 0)) throw std::domain_error("estimation_constant needs c >= 0");
  EstimationConstant out;
  out.c = c;
  out.tail_bound = 1 + c;
  if (c == 0) return out;
  auto grid = default_grid(f.grid_cap());
  std::vector<double> ratio(grid.size());
  bool tail_set = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double t = grid[i], ft = f(t);
    ratio[i] = f(t + c * ft) / ft;
    if (ratio[i] > out.m) { out.m = ratio[i]; out.witness_t = t; }
    if (!tail_set && t > 0 && ft <= t) { out.tail_from = t; tail_set = true; }
  }
  // the last eighth of the grid must not climb above the eighth before it
  std::size_t n = grid.size(), e = n / 8;
  double last = 0, prev = 0;
  for (std::size_t i = n - e; i < n; ++i) last = std::max(last, ratio[i]);
  for (std::size_t i = n - 2 * e; i < n - e; ++i) prev = std::max(prev, ratio[i]);
  if (last > prev + kTol) {
    std::vector<std::pair<double, double>> prof;
    for (std::size_t i = n - 2 * e; i < n; ++i) prof.emplace_back(grid[i], ratio[i]);
    throw Inconclusive("estimation ratio still rising at grid cap", std::move(prof));
  }
  return out;
}

ShapeReport check_shape(const SublinearFn& f, const std::vector<double>& grid) {
  ShapeReport rep;
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (v[i] < 1 - kTol && rep.at_least_one) {
      rep.at_least_one = false;
      rep.first_violation = "below 1 at t=" + std::to_string(grid[i]);
    }
    if (i > 0 && v[i] < v[i - 1] - kTol && rep.monotone) {
      rep.monotone = false;
      if (rep.first_violation.empty()) rep.first_violation = "decreasing at t=" + std::to_string(grid[i]);
    }
  }
  for (std::size_t i = 0; i < grid.size() && rep.midpoint_concave; ++i)
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      double mid = f((grid[i] + grid[j]) / 2);
      double avg = (v[i] + v[j]) / 2;
      if (mid < avg - kTol * std::max(1.0, avg)) {
        rep.midpoint_concave = false;
        if (rep.first_violation.empty())
          rep.first_violation = "midpoint concavity fails for s=" + std::to_string(grid[i]) +
                                " t=" + std::to_string(grid[j]);
        break;
      }
    }
  rep.decay_T = grid.back();
  for (std::size_t i = grid.size(); i-- > 1;) {
    if (v[i] / grid[i] > rep.decay_eps) break;
    rep.decay_T = grid[i];
  }
  return rep;
}

namespace {

double parse_num(const std::string& s, const std::string& tag) {
  double x = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad exponent in kappa tag '" + tag + "'");
  return x;
}

SublinearFn power_envelope(const std::string& tag, double a) {
  // exact concave envelope of max(1, t^a): tangent line from (0,1)
  double t0 = std::pow(1 / (1 - a), 1 / a);
  double s = a * std::pow(t0, a - 1);
  return SublinearFn(tag, [a, t0, s](double t) { return t < t0 ? 1 + s * t : std::pow(t, a); });
}

}  // namespace

SublinearFn kappa_from_tag(const std::string& tag) {
  if (tag == "1" || tag == "const") return SublinearFn("1", [](double) { return 1.0; });
  if (tag == "log") return SublinearFn("log", [](double t) { return std::log(std::exp(1.0) + t); });
  if (tag == "sqrt") return power_envelope("sqrt", 0.5);
  if (tag == "linear" || tag == "t")
    throw NotSublinear("kappa '" + tag + "' is not sublinear", 1e6);
  if (tag.rfind("log^", 0) == 0) {
    double p = parse_num(tag.substr(4), tag);
    if (!(p > 0)) throw std::invalid_argument("log power must be positive");
    if (p == 1) return kappa_from_tag("log");
    auto raw = [p](double t) { return std::pow(std::log(std::exp(1.0) + t), p); };
    return concavify(tag, raw, default_grid()).fn;
  }
  if (tag.rfind("t^", 0) == 0) {
    double a = parse_num(tag.substr(2), tag);
    if (!(a > 0)) throw std::invalid_argument("power must be positive");
    if (a >= 1) throw NotSublinear("kappa '" + tag + "' is not sublinear", 1e6);
    return power_envelope(tag, a);
  }
  throw std::invalid_argument("unknown kappa tag '" + tag + "'");
}

std::vector<std::string> registered_tags() {
  return {"1", "log", "log^2", "log^3", "sqrt", "t^0.25"};
}

SublinearFn kappa_from_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open kappa table " + path);
  std::vector<std::pair<double, double>> pts;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    double t, v;
    if (ss >> t >> v) pts.emplace_back(t, v);
  }
  if (pts.size() < 2) throw std::invalid_argument("kappa table needs at least two rows");
  std::sort(pts.begin(), pts.end());
  auto raw = [pts](double t) {
    if (t <= pts.front().first) return pts.front().second;
    if (t >= pts.back().first) return pts.back().second;
    auto it = std::upper_bound(pts.begin(), pts.end(), std::make_pair(t, -1e300));
    auto a = *(it - 1), b = *it;
    return a.second + (t - a.first) / (b.first - a.first) * (b.second - a.second);
  };
  std::vector<double> grid{0.0};
  for (auto& p : pts) if (p.first > 0) grid.push_back(p.first);
  for (double t : default_grid(pts.back().first)) if (t > 0) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return concavify("table:" + path, raw, grid).fn;
}

}  // namespace coarselab
