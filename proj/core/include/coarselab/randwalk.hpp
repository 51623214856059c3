#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "coarselab/morse.hpp"
#include "coarselab/relhyp.hpp"
#include "coarselab/stats.hpp"

namespace coarselab {

struct StepMeasure {
  std::vector<Element> support;
  std::vector<double> prob;
  std::vector<std::string> labels;

  // "uniform" (all standard generators), "uniform:aAt" (listed letters), or
  // "word:p,word:p,..." with words in the group's letters.
  static StepMeasure parse(const FreeProductGroup& g, const std::string& spec);
  void validate() const;
  std::vector<double> cdf() const;
  std::int64_t max_norm(const FreeProductGroup& g) const;
  // semigroup products of length <= max_len cover the ball of `radius`
  bool reaches_ball(const FreeProductGroup& g, int radius = 3, int max_len = 12) const;
};

struct SamplePath {
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> steps;  // indices into the support
};

std::vector<SamplePath> sample_paths(const CayleySpace& sp, const StepMeasure& mu, std::int64_t n, std::size_t count,
                                     std::uint64_t seed);

// w_t for every t in `times` (ascending, each <= path length)
std::vector<Element> positions(const FreeProductGroup& g, const StepMeasure& mu, const SamplePath& p,
                               const std::vector<std::int64_t>& times);

// 1, 2, 4, ... up to n, plus n itself
std::vector<std::int64_t> dyadic_times(std::int64_t n);

// dist / coned_dist / sup_P d_P(o, w_n) per path at dyadic times
struct WalkTable {
  std::vector<std::int64_t> times;
  std::vector<std::vector<std::int64_t>> dist, coned, sup_periph;  // [path][time]
};
WalkTable walk_table(const CayleySpace& sp, const StepMeasure& mu, const std::vector<SamplePath>& paths);

struct DriftEstimate {
  Interval ell;
  std::vector<std::pair<std::int64_t, double>> profile;  // (n, mean d/n)
  bool subadditive = true;
  std::string note;
};
// CI by 20 batch means; subadditivity tolerates 3 standard errors
DriftEstimate drift(const WalkTable& t);

struct TailRow {
  std::int64_t n = 0;
  std::size_t hits = 0, total = 0;
  double p = 0;
};
struct TailTable {
  double ell = 0, fraction = 0;
  std::vector<TailRow> rows;
  LinearFit fit;
  Verdict verdict;
};
// bands with at least min_events hits enter the log-linear fit
TailTable progress_tail(const WalkTable& t, double ell, double fraction, std::size_t min_events = 5);

struct GrowthRow {
  std::int64_t n = 0;
  double q50 = 0, q95 = 0, q99 = 0, max = 0;
  double ratio = 0;  // q99 / log n
};
struct GrowthTable {
  std::vector<GrowthRow> rows;
  TrendTest trend;
  Verdict verdict;
};
// n in [2^7, 2^13] ∩ recorded times; pass iff no increasing trend at level alpha
GrowthTable peripheral_projection_growth(const FreeProductGroup& g, const WalkTable& t, double alpha = 0.05);

struct RayProxy {
  Element end;       // w_N
  PathSeg ray;       // lift of the coned geodesic to w_N
  std::int64_t coned_norm = 0;
  std::int64_t stability = 0;  // coned distance from w_{N/2} to the proxy
  bool ok = true;    // coned_norm >= 10
};
// Throws Inconclusive when d_hat(o, w_N) < 10.
RayProxy limit_ray_proxy(const RelHypGroup& G, const StepMeasure& mu, const SamplePath& p, std::int64_t N);

struct TrackingRow {
  std::size_t path = 0;
  std::int64_t n = 0;
  std::int64_t d = 0;
};
struct TrackingTable {
  std::vector<std::int64_t> times;
  std::vector<double> median_ratio_n, median_ratio_log2;
  std::vector<TrackingRow> rows;
  std::size_t inconclusive = 0;
  std::vector<std::int64_t> stability;  // per conclusive path
  Verdict verdict_n, verdict_log2;
};
// times n <= N/2 with n >= min_n
TrackingTable tracking_profile(const RelHypGroup& G, const StepMeasure& mu, const std::vector<SamplePath>& paths,
                               std::int64_t N, std::int64_t min_n = 16);

struct Histogram {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  std::size_t other = 0;
  double mass(const std::string& cell) const;
  Verdict symmetry;  // chi-square within symmetry orbits
};
// first `depth` syllables of w_N; peripheral syllables keyed by sign pattern
std::string direction_cell(const FreeProductGroup& g, const Element& w, int depth);
std::string cell_orbit(const std::string& cell);
Histogram hitting_histogram(const FreeProductGroup& g, const StepMeasure& mu, const std::vector<SamplePath>& paths,
                            std::int64_t N, int depth = 1, double alpha = 0.01);

struct ExcursionDist {
  std::int64_t N = 0;
  std::vector<double> E;  // per path
  double q95 = 0;
  std::size_t inconclusive = 0;  // proxies below the coned-norm threshold (still measured)
};
struct WalkExcursion {
  std::vector<ExcursionDist> by_N;
  Verdict verdict;
};
// pass iff each q95 is at most factor times the previous one
WalkExcursion excursion_of_walk_ray(const RelHypGroup& G, const StepMeasure& mu, const std::vector<SamplePath>& paths,
                                    const std::vector<std::int64_t>& Ns, const SublinearFn& kappa, std::int64_t D0,
                                    double factor = 1.25);

// Morse test of proxy rays with the empirical gauge m = q (E_gamma + 1) + Q:
// a (q,Q) probe leaves the ray only through peripheral shortcuts, which stay
// within E_gamma kappa of it. Probed at R = |proxy| / 2, r = min(R / 2, small radius of m).
struct ProxyMorseRow {
  std::size_t path = 0;
  std::int64_t length = 0;
  double E = 0, m = 0, r = 0, R = 0;
  Verdict verdict;
};
struct ProxyMorse {
  std::vector<ProxyMorseRow> rows;
  std::size_t skipped = 0;  // proxies below the coned-norm threshold
  Verdict verdict;
};
ProxyMorse proxy_morse(const RelHypGroup& G, const StepMeasure& mu, const std::vector<SamplePath>& paths,
                       std::int64_t N, const SublinearFn& kappa, std::int64_t D0, std::size_t rays, double q,
                       double Q, std::size_t probes, std::uint64_t seed);

}  // namespace coarselab
