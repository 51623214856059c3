#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "coarselab/morse.hpp"
#include "coarselab/spaces.hpp"
#include "coarselab/sublinear.hpp"

namespace coarselab {

// Left coset rep * H of the peripheral atom; rep never ends in that atom.
struct Coset {
  int atom = 0;
  Element rep;
  friend bool operator==(const Coset& a, const Coset& b) { return a.atom == b.atom && a.rep == b.rep; }
};

struct ConedReport {
  std::int64_t distance = 0;
  std::vector<Element> path;   // vertices from x to y
  std::vector<char> shortcut;  // shortcut[i]: edge path[i] -> path[i+1] is a coset shortcut
};

struct DeepComponent {
  std::size_t begin = 0, end = 0;  // inclusive indices along the geodesic
  Coset coset;
};

struct DeepDecomposition {
  std::int64_t D = 0, R = 0;
  std::vector<DeepComponent> components;
};

struct RelHypConstants {
  std::int64_t D0 = 0;  // geodesics pass within D0 of coset projections
  std::int64_t L0 = 0;  // BGI / deep-component threshold
  std::int64_t L1 = 1;  // projection separation for thin quadrilaterals
  std::int64_t R0 = 0;  // thin quadrilaterals in the coned graph
  std::int64_t R1 = 1;  // 1 + 4 R0
  std::int64_t L = 0;   // max{L1, R0, 2 R2 + 2, 2 L0}, R2 = 2 R0 + D0 + R1
  std::int64_t K0 = 1;  // distance formula clip
  std::int64_t D = 1;   // deep components
  std::int64_t R = 2;
};

// Free products of free abelian groups, relatively hyperbolic relative to
// the Z^d (d >= 2) factors.
class RelHypGroup {
 public:
  explicit RelHypGroup(std::shared_ptr<const CayleySpace> sp);

  const CayleySpace& space() const { return *sp_; }
  std::shared_ptr<const CayleySpace> space_ptr() const { return sp_; }
  const FreeProductGroup& group() const { return sp_->group(); }

  Element normal_form(const std::string& word) const { return group().parse_word(word); }
  std::int64_t word_distance(const Element& x, const Element& y) const { return group().distance(x, y); }
  ConedReport coned_distance(const Element& x, const Element& y) const;
  std::int64_t coned(const Element& x, const Element& y) const;

  bool is_peripheral(int atom) const;
  Coset coset(int atom, const Element& g) const;
  bool in_coset(const Element& x, const Coset& P) const;
  // nearest points of P to x: always a single point here
  Element coset_projection(const Element& x, const Coset& P) const;
  std::int64_t d_P(const Element& x, const Element& y, const Coset& P) const;
  // cosets with d_P(x, y) > 0, in order along the geodesic from x to y
  std::vector<std::pair<Coset, std::int64_t>> peripheral_distances(const Element& x, const Element& y) const;
  std::int64_t sup_peripheral(const Element& x, const Element& y) const;
  // d_G(o, P) measured in the coned graph
  std::int64_t coned_norm(const Coset& P) const;

  // Lift: shortcut edges become factor geodesics (lexicographic, or a random
  // staircase when rng is given).
  PathSeg lift(const ConedReport& rep, Rng* rng = nullptr) const;

 private:
  std::shared_ptr<const CayleySpace> sp_;
};

// Measured additive constant of a path for q = 1: max over pairs of (j - i) - d.
std::int64_t additive_defect(const PathSeg& p);

struct FormulaRow {
  std::int64_t dG = 0;
  double S = 0;
};
struct DistanceFormulaFit {
  std::int64_t K = 0;
  double A = 0;
  double M = 1;
  std::vector<FormulaRow> rows;
};
// S = sum_P floor(d_P)_K + d_hat. With A < 0 (tied) the least M with
// d_G <= M S + M and S <= M d_G + M; otherwise least M with S/M - A <= d_G <= M S + A.
DistanceFormulaFit fit_distance_formula(const RelHypGroup& G, const std::vector<std::pair<Element, Element>>& pairs,
                                        std::int64_t K, double A);

// Peripheral syllables of a geodesic from x to y: (entry index, exit index, coset).
struct CosetVisit {
  std::size_t entry = 0, exit = 0;
  Coset coset;
};
std::vector<CosetVisit> coset_visits(const RelHypGroup& G, const Element& x, const Element& y);

// Needs R >= D: cosets touching the geodesic in one point then have no deep part.
DeepDecomposition deep_components(const RelHypGroup& G, const PathSeg& geodesic, std::int64_t D, std::int64_t R);

struct ExcursionRow {
  std::string coset;
  double excursion = 0;
  std::int64_t coned_norm = 0;
  double ratio = 0;
};
struct ExcursionProfile {
  std::vector<ExcursionRow> rows;
  double E = 0;
  std::vector<BandStat> bands;
  Verdict verdict;
};
ExcursionProfile excursion_profile(const RelHypGroup& G, const PathSeg& gamma, std::int64_t D0, const SublinearFn& kappa);

// Geodesic gamma from the base point, with coned-graph bookkeeping.
class RayGeometry {
 public:
  RayGeometry(const RelHypGroup& G, PathSeg gamma);

  const PathSeg& path() const { return gamma_; }
  std::size_t size() const { return gamma_.size(); }
  // coned distance between gamma(i) and gamma(j)
  std::int64_t coned_between(std::size_t i, std::size_t j) const;
  // nearest point of gamma to x in the coned metric, smallest index on ties
  std::size_t coned_projection(const Element& x) const;
  std::int64_t coned_distance_to(const Element& x) const;
  // coned distance from gamma(i) to a coset met by gamma
  std::int64_t coned_to_visit(std::size_t i, const CosetVisit& v) const;
  // indices of Pi_gamma(x); P counts when all of it lies within R1 of pi_gamma(x)
  std::vector<std::size_t> big_projection(const Element& x, const RelHypConstants& c) const;
  // c_{gamma,y}(x) as an index; direction toward pi_gamma(y)
  std::size_t transition_point(const Element& x, const Element& y, const RelHypConstants& c) const;
  const std::vector<CosetVisit>& visits() const { return visits_; }

 private:
  const RelHypGroup* G_;
  PathSeg gamma_;
  Element end_;
  std::vector<std::size_t> off_;     // start index of syllable k
  std::vector<std::int64_t> wpre_;   // coned weight of syllables before k
  std::vector<char> periph_;
  std::vector<CosetVisit> visits_;
  std::size_t syllable_of(std::size_t i) const;
};

Projection big_projection_oracle(const RelHypGroup& G, std::shared_ptr<const RayGeometry> geo, const RelHypConstants& c);

// L from the other constants
std::int64_t lemma_L(const RelHypConstants& c);

struct ConstantFit {
  RelHypConstants constants;
  std::size_t pairs = 0;
  std::size_t lemma_checked = 0;
  std::size_t lemma_violations = 0;  // d(x, c_{gamma,y}(x)) > d(x, y) + L among eligible pairs
  std::vector<std::string> notes;
};
// Smallest constants making the BGI, deep-component, thin-quadrilateral and
// c_{gamma,y} assertions hold on sampled pairs within `radius`.
ConstantFit fit_constants(const RelHypGroup& G, std::int64_t radius, std::size_t samples, std::uint64_t seed,
                          std::int64_t D = 1, std::int64_t R = 2);

struct ExcursionContraction {
  ContractionFit fit;
  double D2_hat = 0;  // max coned distance of pi_gamma over eligible pairs
  std::vector<BandStat> hat_bands;
  Verdict verdict;
};
ExcursionContraction test_excursion_contracting(const RelHypGroup& G, std::shared_ptr<const RayGeometry> geo,
                                                const RelHypConstants& c, const SublinearFn& kappa, double C1,
                                                const SampleParams& p);

}  // namespace coarselab
