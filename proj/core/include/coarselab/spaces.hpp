#pragma once

#include <memory>
#include <string>
#include <vector>

#include "coarselab/group.hpp"
#include "coarselab/space.hpp"

namespace coarselab {

// Cayley graph of a free product of free abelian groups. Vertex codes are
// FreeProductGroup::encode of the normal form.
class CayleySpace : public GraphSpace {
 public:
  explicit CayleySpace(FreeProductGroup g);
  // word metric of a different finite generating set (BFS distances)
  CayleySpace(FreeProductGroup g, std::vector<Element> gens, std::string label);

  std::string kind() const override;
  std::string spec() const override { return spec_; }
  Vertex base() const override { return Vertex{}; }
  std::vector<Vertex> neighbors(const Vertex& v) const override;
  std::int64_t distance(const Vertex& x, const Vertex& y) const override;
  std::int64_t norm(const Vertex& x) const override;
  std::string format(const Vertex& v) const override;
  Vertex parse(const std::string& s) const override;
  PathSeg geodesic(const Vertex& x, const Vertex& y) const override;
  PathSeg make_path(std::vector<Vertex> vs) const override;
  Vertex sample(Rng& rng, std::int64_t radius) const override;
  bool has_closed_form() const override { return custom_.empty(); }

  const FreeProductGroup& group() const { return g_; }
  bool standard_generators() const { return custom_.empty(); }
  Vertex vertex(const Element& x) const { return Vertex{g_.encode(x)}; }
  Element element(const Vertex& v) const { return g_.decode(v.code); }
  // path from start following generator indices
  PathSeg path_from_steps(const Element& start, std::vector<int> steps) const;
  PathSeg geodesic(const Element& x, const Element& y) const;

 private:
  FreeProductGroup g_;
  std::vector<Element> custom_;  // symmetric generating set when nonempty
  std::string spec_;
  std::shared_ptr<const SphereSampler> spheres_;
};

// Ray with loops: loop n (2 <= n <= N) is a path of length 2n^2 between ray
// points a_n and a_n + n, apex at its midpoint. a_2 = 4, a_{n+1} = a_n + n + 2.
class LoopyRaySpace : public GraphSpace {
 public:
  explicit LoopyRaySpace(int N);

  std::string kind() const override { return "loopy_ray"; }
  std::string spec() const override { return "loopy_ray(" + std::to_string(N_) + ")"; }
  Vertex base() const override { return ray(0); }
  std::vector<Vertex> neighbors(const Vertex& v) const override;
  std::int64_t distance(const Vertex& x, const Vertex& y) const override;
  std::string format(const Vertex& v) const override;
  Vertex parse(const std::string& s) const override;
  Vertex sample(Rng& rng, std::int64_t radius) const override;
  bool has_closed_form() const override { return true; }

  int max_loop() const { return N_; }
  std::int64_t attach(int n) const { return a_.at(static_cast<std::size_t>(n)); }
  static Vertex ray(std::int64_t k) { return Vertex{{0, k}}; }
  Vertex loop_vertex(int n, std::int64_t j) const;  // 0 < j < 2n^2
  Vertex apex(int n) const { return loop_vertex(n, static_cast<std::int64_t>(n) * n); }
  // ray prefix 0..len
  PathSeg ray_prefix(std::int64_t len) const;

 private:
  void validate(const Vertex& v) const;
  int N_;
  std::vector<std::int64_t> a_;
};

// Finite graph from an edge list ("u v" per line). A line "#directed" makes
// the lines directed, in which case every edge must appear both ways.
class ExplicitSpace : public GraphSpace {
 public:
  static std::shared_ptr<ExplicitSpace> from_file(const std::string& path);
  ExplicitSpace(std::vector<std::string> names, std::vector<std::vector<int>> adj, std::string label);

  std::string kind() const override { return "explicit"; }
  std::string spec() const override { return label_; }
  Vertex base() const override { return Vertex{{0}}; }
  std::vector<Vertex> neighbors(const Vertex& v) const override;
  std::int64_t distance(const Vertex& x, const Vertex& y) const override;
  std::string format(const Vertex& v) const override;
  Vertex parse(const std::string& s) const override;
  Vertex sample(Rng& rng, std::int64_t radius) const override;
  bool has_closed_form() const override { return true; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::vector<std::int32_t>> apsp_;
  std::string label_;
};

// free_group(k) | grid(d) | free_product(...) | loopy_ray(N) | explicit(path)
std::shared_ptr<const GraphSpace> build_space(const std::string& spec);

struct SelfCheck {
  bool ok = true;
  std::string problem;
  std::size_t vertices = 0;
};
// neighbor symmetry and canonical-form round trips on a truncated radius-10 ball
SelfCheck self_check(const GraphSpace& sp, std::size_t cap = 2000);

struct QiMeasurement {
  double k = 1;  // multiplicative
  double K = 0;  // additive
  std::size_t pairs = 0;
  std::string worst;  // element attaining k
};

// Identity map between the standard Cayley graph and the one for `gens`,
// measured on the radius-r ball (all pairs reduce to norms by invariance).
struct GeneratorChange {
  std::shared_ptr<const CayleySpace> target;
  QiMeasurement qi;
};
GeneratorChange change_generators(const CayleySpace& sp, const std::vector<std::string>& gens, std::int64_t r = 8);

}  // namespace coarselab
