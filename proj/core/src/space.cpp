#include "coarselab/space.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace coarselab {

std::int64_t PathStore::distance_to(const Vertex& x) const {
  auto d = distances_to(x);
  return *std::min_element(d.begin(), d.end());
}

namespace {

class ListStore final : public PathStore {
 public:
  ListStore(const GraphSpace& sp, std::vector<Vertex> vs) : sp_(&sp), vs_(std::move(vs)) {
    norms_.reserve(vs_.size());
    for (auto& v : vs_) norms_.push_back(sp_->norm(v));
  }
  std::size_t size() const override { return vs_.size(); }
  Vertex vertex(std::size_t i) const override { return vs_.at(i); }
  std::int64_t norm(std::size_t i) const override { return norms_.at(i); }
  std::int64_t distance(std::size_t i, std::size_t j) const override { return sp_->distance(vs_[i], vs_[j]); }
  std::vector<std::int64_t> distances_to(const Vertex& x) const override {
    std::vector<std::int64_t> d(vs_.size());
    for (std::size_t i = 0; i < vs_.size(); ++i) d[i] = sp_->distance(x, vs_[i]);
    return d;
  }
  std::shared_ptr<const PathStore> slice(std::size_t i, std::size_t j) const override {
    return std::make_shared<ListStore>(*sp_, std::vector<Vertex>(vs_.begin() + static_cast<std::ptrdiff_t>(i),
                                                                 vs_.begin() + static_cast<std::ptrdiff_t>(j + 1)));
  }
  std::shared_ptr<const PathStore> reversed() const override {
    return std::make_shared<ListStore>(*sp_, std::vector<Vertex>(vs_.rbegin(), vs_.rend()));
  }
  std::shared_ptr<const PathStore> append(const PathStore& tail) const override {
    std::vector<Vertex> out = vs_;
    for (std::size_t i = 1; i < tail.size(); ++i) out.push_back(tail.vertex(i));
    return std::make_shared<ListStore>(*sp_, std::move(out));
  }

 private:
  const GraphSpace* sp_;
  std::vector<Vertex> vs_;
  std::vector<std::int64_t> norms_;
};

}  // namespace

std::shared_ptr<const PathStore> make_list_store(const GraphSpace& sp, std::vector<Vertex> vs) {
  return std::make_shared<ListStore>(sp, std::move(vs));
}

PathSeg PathSeg::slice(std::size_t i, std::size_t j) const {
  if (i > j || j >= size()) throw std::out_of_range("path slice out of range");
  return PathSeg(store_->slice(i, j));
}

PathSeg PathSeg::reversed() const { return PathSeg(store_->reversed()); }

PathSeg PathSeg::then(const PathSeg& other) const {
  if (empty()) return other;
  if (other.empty()) return *this;
  if (!(back() == other.front())) throw std::invalid_argument("paths do not meet");
  return PathSeg(store_->append(*other.store_));
}

std::vector<Vertex> PathSeg::vertices() const {
  std::vector<Vertex> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(vertex(i));
  return out;
}

std::int64_t GraphSpace::distance(const Vertex& x, const Vertex& y) const { return bfs_distance(x, y); }

VertexMap<std::int64_t> GraphSpace::bfs(const Vertex& center, std::int64_t r, std::size_t cap) const {
  VertexMap<std::int64_t> dist;
  std::deque<Vertex> queue;
  dist.emplace(center, 0);
  queue.push_back(center);
  while (!queue.empty()) {
    Vertex v = std::move(queue.front());
    queue.pop_front();
    std::int64_t dv = dist.at(v);
    if (dv == r) continue;
    for (auto& w : neighbors(v)) {
      if (dist.count(w)) continue;
      dist.emplace(w, dv + 1);
      if (dist.size() > cap) throw CapExceeded("ball enumeration exceeded " + std::to_string(cap) + " vertices");
      queue.push_back(std::move(w));
    }
  }
  return dist;
}

std::vector<Vertex> GraphSpace::ball(const Vertex& center, std::int64_t r, std::size_t cap) const {
  auto d = bfs(center, r, cap);
  std::vector<Vertex> out;
  out.reserve(d.size());
  for (auto& [v, _] : d) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t GraphSpace::bfs_distance(const Vertex& x, const Vertex& y, std::size_t budget) const {
  if (x == y) return 0;
  VertexMap<std::int64_t> dist;
  std::deque<Vertex> queue;
  dist.emplace(x, 0);
  queue.push_back(x);
  while (!queue.empty()) {
    Vertex v = std::move(queue.front());
    queue.pop_front();
    std::int64_t dv = dist.at(v);
    for (auto& w : neighbors(v)) {
      if (w == y) return dv + 1;
      if (dist.count(w)) continue;
      dist.emplace(w, dv + 1);
      if (dist.size() > budget) throw CapExceeded("BFS budget exceeded");
      queue.push_back(std::move(w));
    }
  }
  throw std::runtime_error("vertex unreachable");
}

bool GraphSpace::adjacent(const Vertex& x, const Vertex& y) const {
  auto nb = neighbors(x);
  return std::find(nb.begin(), nb.end(), y) != nb.end();
}

PathSeg GraphSpace::geodesic(const Vertex& x, const Vertex& y) const {
  std::vector<Vertex> out{x};
  Vertex cur = x;
  std::int64_t d = distance(x, y);
  while (d > 0) {
    bool moved = false;
    for (auto& w : neighbors(cur)) {
      if (distance(w, y) == d - 1) {
        cur = w;
        --d;
        moved = true;
        break;
      }
    }
    if (!moved) throw std::logic_error("distance oracle is not a graph metric");
    out.push_back(cur);
  }
  PathSeg p = make_path(std::move(out));
  p.set_certificate({1, 0});
  return p;
}

PathSeg GraphSpace::make_path(std::vector<Vertex> vs) const { return PathSeg(make_list_store(*this, std::move(vs))); }

Vertex GraphSpace::sample(Rng& rng, std::int64_t radius) const {
  auto pts = ball(base(), radius, 1u << 20);
  return pts[rng.below(pts.size())];
}

QgCheck is_quasi_geodesic(const PathSeg& path, double q, double Q) {
  if (q < 1 || Q < 0) throw std::domain_error("quasi-geodesic constants need q >= 1, Q >= 0");
  QgCheck out;
  std::size_t n = path.size();
  if (n <= 1) return out;
  const double eps = 1e-9;
  // Upper inequality: unit steps give d <= j-i <= q(j-i).
  if (q == 1 && Q == 0) {
    // a graph path is geodesic iff its endpoints are at distance = length
    std::int64_t d = path.dist(0, n - 1);
    ++out.evaluations;
    if (static_cast<std::size_t>(d) != n - 1) {
      // locate a minimal witness for the report
      for (std::size_t len = 2; len < n; ++len)
        for (std::size_t i = 0; i + len < n; ++i) {
          std::int64_t dd = path.dist(i, i + len);
          if (static_cast<std::size_t>(dd) != len) {
            out.ok = false;
            out.i = i; out.j = i + len; out.d = dd; out.bound = static_cast<double>(len);
            return out;
          }
        }
      out.ok = false;
      out.i = 0; out.j = n - 1; out.d = d; out.bound = static_cast<double>(n - 1);
    }
    return out;
  }
  const double drop = 1 + 1 / q;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t j = i + 1;
    while (j < n) {
      std::int64_t d = path.dist(i, j);
      ++out.evaluations;
      double bound = static_cast<double>(j - i) / q - Q;
      double slack = static_cast<double>(d) - bound;
      if (slack < -eps) {
        out.ok = false;
        out.i = i; out.j = j; out.d = d; out.bound = bound; out.lower = true;
        return out;
      }
      j += static_cast<std::size_t>(std::floor((slack + eps) / drop)) + 1;
    }
  }
  return out;
}

std::size_t first_time_at_norm(const PathSeg& path, std::int64_t r) {
  for (std::size_t i = 0; i < path.size(); ++i)
    if (path.norm(i) == r) return i;
  throw std::out_of_range("path never attains norm " + std::to_string(r));
}

NearestSet nearest_point_projection(const PathSeg& Z, const Vertex& x) {
  if (Z.empty()) throw std::invalid_argument("projection onto empty set");
  auto d = Z.distances_to(x);
  NearestSet out;
  out.distance = *std::min_element(d.begin(), d.end());
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] == out.distance) {
      Vertex v = Z.vertex(i);
      if (std::find(out.points.begin(), out.points.end(), v) == out.points.end()) out.points.push_back(v);
      out.indices.push_back(i);
    }
  return out;
}

NearestSet nearest_point_projection(const GraphSpace& sp, const std::vector<Vertex>& Z, const Vertex& x) {
  if (Z.empty()) throw std::invalid_argument("projection onto empty set");
  NearestSet out;
  out.distance = std::numeric_limits<std::int64_t>::max();
  for (std::size_t i = 0; i < Z.size(); ++i) {
    std::int64_t d = sp.distance(x, Z[i]);
    if (d < out.distance) {
      out.distance = d;
      out.indices.clear();
      out.points.clear();
    }
    if (d == out.distance) {
      out.indices.push_back(i);
      out.points.push_back(Z[i]);
    }
  }
  return out;
}

VertexSet::VertexSet(const GraphSpace& sp, std::vector<Vertex> pts) : sp_(&sp) {
  if (pts.empty()) throw std::invalid_argument("empty vertex set");
  std::vector<std::size_t> order(pts.size());
  std::vector<std::int64_t> nrm(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) { order[i] = i; nrm[i] = sp.norm(pts[i]); }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nrm[a] < nrm[b]; });
  for (auto i : order) {
    pts_.push_back(pts[i]);
    norms_.push_back(nrm[i]);
    orig_.push_back(i);
  }
}

NearestSet VertexSet::nearest(const Vertex& x) const {
  std::int64_t nx = sp_->norm(x);
  // start at the norm closest to ‖x‖ and widen while the window allows
  auto it = std::lower_bound(norms_.begin(), norms_.end(), nx);
  auto k = static_cast<std::size_t>(it - norms_.begin());
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::vector<std::size_t> hits;
  auto visit = [&](std::size_t idx) {
    std::int64_t d = sp_->distance(x, pts_[idx]);
    if (d < best) { best = d; hits.clear(); }
    if (d == best) hits.push_back(idx);
  };
  std::size_t lo = k, hi = k;  // [lo, hi) visited
  while (lo > 0 || hi < pts_.size()) {
    bool any = false;
    if (hi < pts_.size() && norms_[hi] - nx <= best) { visit(hi++); any = true; }
    if (lo > 0 && nx - norms_[lo - 1] <= best) { visit(--lo); any = true; }
    if (!any) break;
  }
  NearestSet out;
  out.distance = best;
  std::sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) { return orig_[a] < orig_[b]; });
  for (auto h : hits) {
    out.indices.push_back(orig_[h]);
    out.points.push_back(pts_[h]);
  }
  return out;
}

}  // namespace coarselab
