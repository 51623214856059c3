#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coarselab/space.hpp"
#include "coarselab/sublinear.hpp"

namespace coarselab {

class PreconditionFailed : public std::invalid_argument {
 public:
  PreconditionFailed(const std::string& what, std::size_t index = 0)
      : std::invalid_argument(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SurgeryError : public std::runtime_error {
 public:
  SurgeryError(const std::string& what, QgCheck witness = {})
      : std::runtime_error(what), witness_(witness) {}
  const QgCheck& witness() const { return witness_; }

 private:
  QgCheck witness_;
};

struct Verdict {
  bool pass = true;
  double margin = 0;  // smallest slack on pass, worst excess on fail
  std::string note;
  std::vector<Vertex> witness_path;
  std::size_t witness_index = 0;  // offending position inside witness_path
  std::size_t checked = 0;
};

// (q, Q) -> m, normalized so that m >= max(q, Q).
class MorseGauge {
 public:
  using Fn = std::function<double(double, double)>;
  MorseGauge() : MorseGauge(1.0) {}
  explicit MorseGauge(double constant);
  MorseGauge(Fn f, std::string provenance);

  double operator()(double q, double Q) const;
  const std::string& provenance() const { return provenance_; }

 private:
  Fn f_;
  std::string provenance_;
};

// d(x, Z) <= m * kappa(|x|)
bool in_kappa_neighborhood(const GraphSpace& sp, const Vertex& x, const PathSeg& Z, double m, const SublinearFn& kappa);
bool in_kappa_neighborhood(const GraphSpace& sp, const Vertex& x, const VertexSet& Z, double m, const SublinearFn& kappa);

// Given beta in N_kappa(alpha, m) (checked first), checks alpha in N_kappa(beta, 2m)
// over the norms both prefixes reach.
Verdict symmetry_transfer(const GraphSpace& sp, const PathSeg& alpha, const PathSeg& beta, double m,
                          const SublinearFn& kappa);

struct TrackingProfile {
  std::vector<double> ratio;  // ratio[r-1] = d(alpha_r, beta_r) / r
  std::vector<double> band_max;  // dyadic bands [2^k, 2^{k+1})
  double tail_max = 0;  // over the last half of the horizon
  bool equivalent = false;
};
TrackingProfile fellow_traveling_profile(const GraphSpace& sp, const PathSeg& alpha, const PathSeg& beta,
                                         std::int64_t horizon, double threshold = 0.05);

// One random perturbation of `base` (spikes and local geodesic splices),
// certified (q, Q). Empty when the retry budget runs out.
std::optional<PathSeg> perturb_path(const GraphSpace& sp, const PathSeg& base, double q, double Q, Rng& rng,
                                    int retries = 6);

// Distinct certified (q, Q)-quasi-geodesics from the base point to target;
// the lex geodesic comes first. May hold fewer than `count` paths when few
// certified perturbations exist (trees with Q = 0 admit only the geodesic).
std::vector<PathSeg> probe_family(const GraphSpace& sp, const Vertex& target, double q, double Q, std::size_t count,
                                  std::uint64_t seed);

struct MorseTestParams {
  double r = 0;
  double R = 0;
  double q = 1;
  double Q = 0;
  std::size_t probes = 200;
  std::uint64_t seed = 0;
};

// Probes end near Z at norm R (perturbed within kappa'(R)). Those entering
// (d(beta_R, Z) <= kappa'(R)) must keep beta|_r inside N_kappa(Z, m(q, Q)).
Verdict test_kappa_morse(const GraphSpace& sp, const PathSeg& Z, const SublinearFn& kappa,
                         const SublinearFn& kappa_prime, const MorseGauge& gauge, const MorseTestParams& p);

// Random walk avoiding immediate backtracking; visited vertices go to trail.
Vertex wander(const GraphSpace& sp, Vertex v, std::int64_t steps, Rng& rng, std::vector<Vertex>* trail = nullptr);
// Rejection sampling into the norm band [lo, hi); Inconclusive after 512 tries.
Vertex sample_band(const GraphSpace& sp, std::int64_t lo, std::int64_t hi, Rng& rng);
// Same band, reached by a walk off a random point of Z.
Vertex sample_near(const GraphSpace& sp, const PathSeg& Z, std::int64_t lo, std::int64_t hi, Rng& rng);

// Projection onto a path Z: indices into Z.
using Projection = std::function<std::vector<std::size_t>(const Vertex&)>;
Projection nearest_projection(const PathSeg& Z);
double projection_diameter(const GraphSpace& sp, const PathSeg& Z, std::vector<std::size_t> idx);

struct SampleParams {
  std::int64_t min_norm = 8;
  std::int64_t max_norm = 512;
  std::size_t samples = 4000;
  std::uint64_t seed = 0;
};

struct BandStat {
  std::int64_t lo = 0;  // band [lo, 2 lo)
  double value = 0;
  std::size_t count = 0;
};

// pass iff at least 4 nonempty bands and max(upper half) <= 1.25 max(lower half)
bool bands_stable(const std::vector<BandStat>& bands, double factor = 1.25, std::size_t min_bands = 4);

struct ContractionFit {
  double C1 = 0.5;
  double C2 = 0;
  std::vector<BandStat> bands;
  std::size_t pairs = 0;
  Verdict verdict;
};

// Samples x by dyadic norm band (half globally, half off Z), y within C1 d(x, Z) of x; C2 = max diam(pi(x) u pi(y)) / kappa(|x|).
ContractionFit test_kappa_contracting(const GraphSpace& sp, const PathSeg& Z, const Projection& pi,
                                      const SublinearFn& kappa, double C1, const SampleParams& p);

struct ProjectionFit {
  double D1 = 0;
  double D2 = 0;
  double derived_worst = 0;  // max of diam({x} u pi(x)) - ((D1+1) d(x,Z) + D2 kappa(|x|))
  std::size_t samples = 0;
  Verdict verdict;
};

ProjectionFit fit_kappa_projection(const GraphSpace& sp, const PathSeg& Z, const Projection& pi,
                                   const SublinearFn& kappa, const SampleParams& p, double D2_cap = 20);

// gamma' = alpha|_{r/2}, then a geodesic to gamma(R), then gamma past R.
// Certified (9q, Q); throws SurgeryError otherwise.
PathSeg surgery(const GraphSpace& sp, const PathSeg& gamma, const PathSeg& alpha, double q, double Q,
                std::int64_t r, std::int64_t R);

struct ConeParams {
  double r = 0;
  std::vector<std::pair<double, double>> qQ = {{1, 0}, {1.5, 0}, {2, 0}, {2, 2}, {3, 4}};
  std::size_t probes = 20;
  std::uint64_t seed = 0;
};

Verdict cone_membership(const GraphSpace& sp, const Vertex& candidate, const PathSeg& beta, const MorseGauge& gauge,
                        const SublinearFn& kappa, const ConeParams& p);
Verdict cone_membership(const GraphSpace& sp, const PathSeg& candidate, const PathSeg& beta, const MorseGauge& gauge,
                        const SublinearFn& kappa, const ConeParams& p);

struct ConvergenceReport {
  std::vector<double> radii;
  std::vector<std::optional<std::size_t>> n0;
  Verdict verdict;
};

ConvergenceReport sequence_convergence(const GraphSpace& sp, const std::vector<Vertex>& xs, const PathSeg& gamma,
                                       double C, const SublinearFn& kappa, const std::vector<double>& r_schedule,
                                       const MorseGauge& gauge, std::size_t probes, std::uint64_t seed);

struct DiameterRow {
  std::int64_t radius = 0;
  std::int64_t center_norm = 0;
  double diameter = 0;
  std::string center;
  bool skipped = false;
};

struct DiameterProfile {
  std::vector<DiameterRow> rows;
  std::string envelope;  // slowest registered envelope with a stable ratio, "" if none
  double envelope_const = 0;
  Verdict verdict;
};

std::vector<std::string> envelope_tags();

DiameterProfile projection_diameter_profile(const GraphSpace& sp, const PathSeg& Z, const Projection& pi,
                                            const std::vector<std::pair<Vertex, std::int64_t>>& balls);

}  // namespace coarselab
