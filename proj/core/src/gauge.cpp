#include "coarselab/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace coarselab {

GaugeDerivation derive_gauge(const GaugeInputs& in, const SublinearFn& kappa) {
  if (!(in.q > 1)) throw std::domain_error("derive_gauge needs q > 1");
  if (!(in.C1 > 0 && in.C1 <= 0.5 + kTol)) throw std::domain_error("derive_gauge needs 0 < C1 <= 1/2");
  if (in.Q < 0 || in.C2 < 0 || in.D1 < 0 || in.D2 < 0) throw std::domain_error("negative constant");
  const double q = in.q, Q = in.Q, C2 = in.C2, D1 = in.D1, D2 = in.D2;

  GaugeDerivation g;
  g.in = in;
  g.kappa = kappa.tag();
  g.m0 = std::max({(q * (q * C2 + q + 1) + Q) / in.C1, 2 * C2 * (D1 + 1) / (q - 1), Q});
  g.m1 = q * (C2 + 1) * (D1 + 1);
  // |eta(t)| <= q t + Q <= q (q |eta(s')| + q Q) + Q along the exit interval
  g.C3 = q * q + q * Q + Q;

  const double lead = 2 * q * (C2 + 1) * D2 + C2 * C2 * D2 / (g.m0 * (q + 1));
  const double k2c3 = kappa(2 * g.C3);
  g.A = 0;
  for (double u : default_grid(kappa.grid_cap())) {
    double ku = kappa(u);
    double need = (lead * (2 * g.C3 * ku + k2c3) + Q) / ku;
    if (need > g.A) { g.A = need; g.A_at = u; }
  }

  g.est2 = estimation_constant(kappa, 2 * q * g.m0 * g.m1 + q * g.A + Q);
  g.m2 = g.est2.m;
  g.m3 = g.m0 * g.m1 * (1 + g.m2) + g.A * g.m2;
  g.est4 = estimation_constant(kappa, q * g.m3 + Q);
  g.m4 = g.est4.m;
  g.mZ = (q * g.m3 + Q + g.m0) * g.m4;
  return g;
}

MorseGauge derived_gauge(double C1, double C2, double D1, double D2, const SublinearFn& kappa, double q_floor) {
  if (!(q_floor > 1)) throw std::domain_error("q_floor must exceed 1");
  // derivations are pure; memoize since testers ask for the same (q, Q) often
  auto cache = std::make_shared<std::pair<std::mutex, std::map<std::pair<double, double>, double>>>();
  auto f = [=](double q, double Q) {
    q = std::max(q, q_floor);
    {
      std::lock_guard<std::mutex> lk(cache->first);
      auto it = cache->second.find({q, Q});
      if (it != cache->second.end()) return it->second;
    }
    double m = derive_gauge({q, Q, C1, C2, D1, D2}, kappa).mZ;
    std::lock_guard<std::mutex> lk(cache->first);
    cache->second.emplace(std::make_pair(q, Q), m);
    return m;
  };
  return MorseGauge(f, "appendix formula");
}

double theorem_radius(const GaugeDerivation& g, const SublinearFn& kappa, const SublinearFn& kappa_prime, double r) {
  const double q = g.in.q, Q = g.in.Q;
  auto ok = [&](double R) {
    double lhs = g.m0 * g.m1 * kappa(R) + g.m1 * kappa_prime(R) + g.A * kappa(R);
    return lhs <= (R - Q) / q - r;
  };
  // the slack is convex in R and negative below Q + q r, so the feasible set is a half-line
  double hi = std::max(1.0, Q + q * r);
  while (!ok(hi)) {
    hi *= 2;
    if (hi > 1e15) throw Inconclusive("theorem radius beyond 1e15");
  }
  double lo = std::max(0.0, Q + q * r);
  if (ok(lo)) return std::ceil(lo);
  while (hi - lo > 0.5) {
    double mid = std::floor((lo + hi) / 2);
    if (mid <= lo) break;
    if (ok(mid)) hi = mid; else lo = mid;
  }
  return std::ceil(hi);
}

double radius_contraction_rho(const MorseGauge& gauge, double r) {
  if (!(r > 0)) throw std::domain_error("rho needs r > 0");
  std::vector<std::pair<double, double>> seen;  // (q, m)
  auto slack = [&](double s) {
    double q = 12 * r / s;
    double m = gauge(q, 0);
    seen.emplace_back(q, m);
    return 18 * m - s;
  };
  auto check_monotone = [&] {
    auto v = seen;
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i].second < v[i - 1].second - kTol * std::max(1.0, v[i - 1].second))
        throw std::domain_error("gauge is not nondecreasing in q");
  };
  if (slack(4 * r) >= 0) {
    check_monotone();
    return 4 * r;
  }
  // m(q) >= q makes every s <= sqrt(216 r) feasible
  double lo = std::min(4 * r, std::sqrt(216 * r));
  double hi = 4 * r;
  if (slack(lo) < 0) throw std::domain_error("gauge violates m(q, Q) >= q");
  while (hi - lo > 1e-6 * r) {
    double mid = (lo + hi) / 2;
    if (slack(mid) >= 0) lo = mid; else hi = mid;
  }
  check_monotone();
  return lo;
}

}  // namespace coarselab
