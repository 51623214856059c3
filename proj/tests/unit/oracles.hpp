#pragma once

// Test-side reference computations. They use only the graph structure
// (neighbors) and brute force, never the closed forms under test.

#include <deque>
#include <limits>

#include "coarselab/space.hpp"

namespace oracle {

using coarselab::Vertex;
using coarselab::VertexMap;

inline VertexMap<std::int64_t> bfs(const coarselab::GraphSpace& sp, const Vertex& c, std::int64_t r) {
  VertexMap<std::int64_t> dist{{c, 0}};
  std::deque<Vertex> q{c};
  while (!q.empty()) {
    Vertex v = q.front();
    q.pop_front();
    auto d = dist[v];
    if (d == r) continue;
    for (auto& w : sp.neighbors(v))
      if (dist.emplace(w, d + 1).second) q.push_back(w);
  }
  return dist;
}

// d(x, path(i)) minimized over i, smallest index on ties
inline std::size_t nearest_index(const coarselab::GraphSpace& sp, const coarselab::PathSeg& Z, const Vertex& x) {
  std::size_t best = 0;
  auto bd = std::numeric_limits<std::int64_t>::max();
  for (std::size_t i = 0; i < Z.size(); ++i) {
    auto d = sp.bfs_distance(x, Z.vertex(i));
    if (d < bd) { bd = d; best = i; }
  }
  return best;
}

}  // namespace oracle
