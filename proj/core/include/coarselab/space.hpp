#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "coarselab/rng.hpp"

namespace coarselab {

struct Vertex {
  std::vector<std::int64_t> code;
  friend bool operator==(const Vertex&, const Vertex&) = default;
  friend auto operator<=>(const Vertex&, const Vertex&) = default;
};

struct VertexHash {
  std::size_t operator()(const Vertex& v) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (auto x : v.code) h = splitmix64(h ^ static_cast<std::uint64_t>(x));
    return static_cast<std::size_t>(h);
  }
};

template <class T>
using VertexMap = std::unordered_map<Vertex, T, VertexHash>;

// Storage behind a graph path. Implementations differ in how they answer
// distance queries between path points.
class PathStore {
 public:
  virtual ~PathStore() = default;
  virtual std::size_t size() const = 0;
  virtual Vertex vertex(std::size_t i) const = 0;
  virtual std::int64_t norm(std::size_t i) const = 0;
  virtual std::int64_t distance(std::size_t i, std::size_t j) const = 0;
  // d(x, path(i)) for every i
  virtual std::vector<std::int64_t> distances_to(const Vertex& x) const = 0;
  virtual std::int64_t distance_to(const Vertex& x) const;
  virtual std::shared_ptr<const PathStore> slice(std::size_t i, std::size_t j) const = 0;
  virtual std::shared_ptr<const PathStore> reversed() const = 0;
  virtual std::shared_ptr<const PathStore> append(const PathStore& tail) const = 0;
};

struct QgCertificate {
  double q = 1;
  double Q = 0;
};

// A graph path: consecutive vertices adjacent. Cheap to copy.
class PathSeg {
 public:
  PathSeg() = default;
  explicit PathSeg(std::shared_ptr<const PathStore> s) : store_(std::move(s)) {}

  std::size_t size() const { return store_ ? store_->size() : 0; }
  bool empty() const { return size() == 0; }
  std::size_t length() const { return size() == 0 ? 0 : size() - 1; }
  Vertex vertex(std::size_t i) const { return store_->vertex(i); }
  Vertex front() const { return vertex(0); }
  Vertex back() const { return vertex(size() - 1); }
  std::int64_t norm(std::size_t i) const { return store_->norm(i); }
  std::int64_t dist(std::size_t i, std::size_t j) const { return store_->distance(i, j); }
  std::vector<std::int64_t> distances_to(const Vertex& x) const { return store_->distances_to(x); }
  std::int64_t distance_to(const Vertex& x) const { return store_->distance_to(x); }

  // inclusive range [i, j]
  PathSeg slice(std::size_t i, std::size_t j) const;
  PathSeg prefix(std::size_t j) const { return slice(0, j); }
  PathSeg reversed() const;
  // other.front() must equal back(); the shared vertex appears once
  PathSeg then(const PathSeg& other) const;
  std::vector<Vertex> vertices() const;

  const std::optional<QgCertificate>& certificate() const { return cert_; }
  void set_certificate(QgCertificate c) { cert_ = c; }
  const PathStore& store() const { return *store_; }

 private:
  std::shared_ptr<const PathStore> store_;
  std::optional<QgCertificate> cert_;
};

class GraphSpace {
 public:
  virtual ~GraphSpace() = default;

  virtual std::string kind() const = 0;
  virtual std::string spec() const = 0;
  virtual Vertex base() const = 0;
  // canonical order; ties everywhere else are broken by this order
  virtual std::vector<Vertex> neighbors(const Vertex& v) const = 0;
  virtual std::int64_t distance(const Vertex& x, const Vertex& y) const;
  virtual std::int64_t norm(const Vertex& x) const { return distance(base(), x); }
  virtual std::string format(const Vertex& v) const = 0;
  virtual Vertex parse(const std::string& s) const = 0;

  // Greedy descent on the distance oracle, first neighbor in canonical order.
  virtual PathSeg geodesic(const Vertex& x, const Vertex& y) const;
  virtual PathSeg make_path(std::vector<Vertex> vs) const;
  // a vertex of norm at most radius
  virtual Vertex sample(Rng& rng, std::int64_t radius) const;
  virtual bool has_closed_form() const { return false; }

  std::vector<Vertex> ball(const Vertex& center, std::int64_t r, std::size_t cap = 10000) const;
  VertexMap<std::int64_t> bfs(const Vertex& center, std::int64_t r, std::size_t cap) const;
  std::int64_t bfs_distance(const Vertex& x, const Vertex& y, std::size_t budget = 1u << 22) const;
  bool adjacent(const Vertex& x, const Vertex& y) const;
};

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::shared_ptr<const PathStore> make_list_store(const GraphSpace& sp, std::vector<Vertex> vs);

struct QgCheck {
  bool ok = true;
  std::size_t i = 0, j = 0;  // violating pair
  std::int64_t d = 0;
  double bound = 0;
  bool lower = true;  // which inequality failed
  std::size_t evaluations = 0;
};

// Both quasi-geodesic inequalities over all index pairs. The lower bound is
// scanned with exact skipping: along a graph path the slack
// d(i,j) - (j-i)/q + Q drops by at most 1 + 1/q per step.
QgCheck is_quasi_geodesic(const PathSeg& path, double q, double Q);

// least index with norm exactly r; std::out_of_range if never attained
std::size_t first_time_at_norm(const PathSeg& path, std::int64_t r);

struct NearestSet {
  std::int64_t distance = 0;
  std::vector<std::size_t> indices;  // into the path or set
  std::vector<Vertex> points;
};

NearestSet nearest_point_projection(const PathSeg& Z, const Vertex& x);
NearestSet nearest_point_projection(const GraphSpace& sp, const std::vector<Vertex>& Z, const Vertex& x);

// Nearest points in a finite set, pruned by the norm window |‖x‖-‖z‖| <= d.
class VertexSet {
 public:
  VertexSet(const GraphSpace& sp, std::vector<Vertex> pts);
  NearestSet nearest(const Vertex& x) const;
  std::int64_t distance_to(const Vertex& x) const { return nearest(x).distance; }
  const std::vector<Vertex>& points() const { return pts_; }

 private:
  const GraphSpace* sp_;
  std::vector<Vertex> pts_;  // sorted by norm
  std::vector<std::int64_t> norms_;
  std::vector<std::size_t> orig_;
};

}  // namespace coarselab
