#include "coarselab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "coarselab/parallel.hpp"

namespace coarselab {

namespace {
std::atomic<int> g_jobs{1};

double t_crit(double df, double conf) {
  boost::math::students_t dist(df);
  return boost::math::quantile(boost::math::complement(dist, (1 - conf) / 2));
}

double mk_s(const std::vector<double>& v) {
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      s += (v[j] > v[i]) - (v[j] < v[i]);
  return s;
}
}  // namespace

int jobs() { return g_jobs.load(); }
void set_jobs(int n) { g_jobs.store(n < 1 ? 1 : n); }

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0;
  double m = mean(v), acc = 0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(v.begin(), v.end());
  double h = (static_cast<double>(v.size()) - 1) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

TrendTest mann_kendall(const std::vector<double>& v) {
  TrendTest out;
  std::size_t n = v.size();
  if (n < 3) return out;
  out.s = mk_s(v);
  if (n <= 9) {
    // permute the observed values themselves, so ties are handled exactly
    std::vector<double> w = v;
    std::sort(w.begin(), w.end());
    std::size_t total = 0, ge = 0;
    do {
      ++total;
      if (mk_s(w) >= out.s) ++ge;
    } while (std::next_permutation(w.begin(), w.end()));
    out.p_increasing = static_cast<double>(ge) / static_cast<double>(total);
    out.exact = true;
    return out;
  }
  double nn = static_cast<double>(n);
  double var = nn * (nn - 1) * (2 * nn + 5) / 18;
  double z = out.s > 0 ? (out.s - 1) / std::sqrt(var) : (out.s < 0 ? (out.s + 1) / std::sqrt(var) : 0);
  boost::math::normal nd;
  out.p_increasing = boost::math::cdf(boost::math::complement(nd, z));
  out.exact = false;
  return out;
}

Interval batch_means(const std::vector<double>& v, std::size_t batches, double conf) {
  if (batches < 2 || v.size() < batches) throw std::invalid_argument("batch_means: too few draws");
  std::size_t per = v.size() / batches;
  std::vector<double> bm(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double acc = 0;
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) acc += v[i];
    bm[b] = acc / static_cast<double>(per);
  }
  Interval out;
  out.estimate = mean(v);
  double hw = t_crit(static_cast<double>(batches - 1), conf) * sample_sd(bm) /
              std::sqrt(static_cast<double>(batches));
  out.lo = out.estimate - hw;
  out.hi = out.estimate + hw;
  return out;
}

LinearFit ols(const std::vector<double>& x, const std::vector<double>& y, double conf) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("ols: need >= 3 points");
  LinearFit f;
  f.n = x.size();
  double mx = mean(x), my = mean(y), sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  double df = static_cast<double>(x.size()) - 2;
  f.slope_se = std::sqrt(rss / df / sxx);
  double t = t_crit(df, conf);
  f.slope_lo = f.slope - t * f.slope_se;
  f.slope_hi = f.slope + t * f.slope_se;
  return f;
}

Interval wilson(std::size_t hits, std::size_t n, double conf) {
  Interval out;
  if (n == 0) return out;
  boost::math::normal nd;
  double z = boost::math::quantile(boost::math::complement(nd, (1 - conf) / 2));
  double nn = static_cast<double>(n), p = static_cast<double>(hits) / nn;
  double den = 1 + z * z / nn;
  double c = (p + z * z / (2 * nn)) / den;
  double h = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / den;
  out.estimate = p;
  out.lo = std::max(0.0, c - h);
  out.hi = std::min(1.0, c + h);
  return out;
}

}  // namespace coarselab
