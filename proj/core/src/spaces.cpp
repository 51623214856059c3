#include "coarselab/spaces.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <set>
#include <unordered_set>

namespace coarselab {

namespace {

// Paths in a free product are stored as start element + generator steps. The
// visited elements are hash-consed into a tree of syllable prefixes, so the
// distance between two path points is read off their lowest common ancestor.
class TrieStore final : public PathStore {
 public:
  TrieStore(const FreeProductGroup& g, Element start, std::vector<int> steps)
      : g_(&g), start_(std::move(start)), steps_(std::move(steps)) {
    nodes_.push_back({0, 0, 0, {}});
    children_.emplace_back();
    std::int32_t cur = 0;
    for (const auto& s : start_) cur = child(cur, s);
    at_.reserve(steps_.size() + 1);
    at_.push_back(cur);
    for (int st : steps_) {
      const auto& gg = g.gen(static_cast<std::size_t>(st));
      const Node& n = nodes_[static_cast<std::size_t>(cur)];
      if (cur != 0 && n.s.atom == gg.atom) {
        Syllable s = n.s;
        s.c[static_cast<std::size_t>(gg.axis)] += gg.sign;
        std::int32_t parent = n.parent;
        if (l1(s.c) == 0) cur = parent;
        else cur = child(parent, s);
      } else {
        Syllable s;
        s.atom = gg.atom;
        s.c.assign(static_cast<std::size_t>(g.atoms()[static_cast<std::size_t>(gg.atom)].dim), 0);
        s.c[static_cast<std::size_t>(gg.axis)] = gg.sign;
        cur = child(cur, s);
      }
      at_.push_back(cur);
    }
    finalize();
  }

  std::size_t size() const override { return at_.size(); }
  Vertex vertex(std::size_t i) const override { return Vertex{g_->encode(element_of(at_.at(i)))}; }
  std::int64_t norm(std::size_t i) const override { return nodes_[static_cast<std::size_t>(at_.at(i))].norm; }
  std::int64_t distance(std::size_t i, std::size_t j) const override { return node_distance(at_[i], at_[j]); }

  std::vector<std::int64_t> distances_to(const Vertex& xv) const override {
    Element x = g_->decode(xv.code);
    auto chain = match(x);
    std::vector<std::int64_t> xpre(x.size() + 1, 0);
    for (std::size_t k = 0; k < x.size(); ++k) xpre[k + 1] = xpre[k] + l1(x[k].c);
    std::int32_t m = chain.back();
    std::vector<std::int64_t> out(at_.size());
    for (std::size_t i = 0; i < at_.size(); ++i) {
      std::int32_t u = at_[i];
      std::int32_t w = lca(m, u);
      out[i] = split_distance(x, xpre, w, u);
    }
    return out;
  }

  std::int64_t distance_to(const Vertex& xv) const override {
    Element x = g_->decode(xv.code);
    auto chain = match(x);
    std::vector<std::int64_t> xpre(x.size() + 1, 0);
    for (std::size_t k = 0; k < x.size(); ++k) xpre[k + 1] = xpre[k] + l1(x[k].c);
    const std::int64_t nx = xpre.back();
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (std::size_t dw = 0; dw < chain.size(); ++dw) {
      std::int32_t w = chain[dw];
      const Node& nw = nodes_[static_cast<std::size_t>(w)];
      if (on_path_[static_cast<std::size_t>(w)]) best = std::min(best, nx - xpre[dw]);
      std::int32_t skip = dw + 1 < chain.size() ? chain[dw + 1] : -1;
      for (std::int32_t c : children_[static_cast<std::size_t>(w)]) {
        if (c == skip) continue;
        std::int64_t ms = minsub_[static_cast<std::size_t>(c)];
        if (ms == kInf) continue;
        const Node& nc = nodes_[static_cast<std::size_t>(c)];
        std::int64_t d;
        if (dw < x.size() && x[dw].atom == nc.s.atom)
          d = (nx - xpre[dw + 1]) + ms + coord_dist(x[dw].c, nc.s.c);
        else
          d = (nx - xpre[dw]) + (nc.norm - nw.norm) + ms;
        best = std::min(best, d);
      }
    }
    return best;
  }

  std::shared_ptr<const PathStore> slice(std::size_t i, std::size_t j) const override {
    return std::make_shared<TrieStore>(*g_, element_of(at_[i]),
                                       std::vector<int>(steps_.begin() + static_cast<std::ptrdiff_t>(i),
                                                        steps_.begin() + static_cast<std::ptrdiff_t>(j)));
  }
  std::shared_ptr<const PathStore> reversed() const override {
    std::vector<int> st(steps_.rbegin(), steps_.rend());
    for (int& s : st) s = FreeProductGroup::inverse_gen(s);
    return std::make_shared<TrieStore>(*g_, element_of(at_.back()), std::move(st));
  }
  std::shared_ptr<const PathStore> append(const PathStore& tail) const override {
    auto* t = dynamic_cast<const TrieStore*>(&tail);
    if (!t) throw std::invalid_argument("cannot join paths from different spaces");
    std::vector<int> st = steps_;
    st.insert(st.end(), t->steps_.begin(), t->steps_.end());
    return std::make_shared<TrieStore>(*g_, start_, std::move(st));
  }

 private:
  static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

  struct Node {
    std::int32_t parent;
    std::int32_t depth;
    std::int64_t norm;
    Syllable s;
  };
  struct Key {
    std::int32_t parent;
    Syllable s;
    friend bool operator==(const Key& a, const Key& b) { return a.parent == b.parent && a.s == b.s; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = splitmix64(static_cast<std::uint64_t>(k.parent) * 31 + static_cast<std::uint64_t>(k.s.atom));
      for (auto v : k.s.c) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
      return static_cast<std::size_t>(h);
    }
  };

  static std::int64_t coord_dist(const Coords& a, const Coords& b) {
    std::int64_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    return d;
  }

  std::int32_t child(std::int32_t parent, const Syllable& s) {
    Key k{parent, s};
    auto it = index_.find(k);
    if (it != index_.end()) return it->second;
    auto id = static_cast<std::int32_t>(nodes_.size());
    const Node& p = nodes_[static_cast<std::size_t>(parent)];
    nodes_.push_back({parent, p.depth + 1, p.norm + l1(s.c), s});
    children_.emplace_back();
    children_[static_cast<std::size_t>(parent)].push_back(id);
    index_.emplace(std::move(k), id);
    return id;
  }

  std::int32_t find_child(std::int32_t parent, const Syllable& s) const {
    auto it = index_.find(Key{parent, s});
    return it == index_.end() ? -1 : it->second;
  }

  void finalize() {
    std::size_t n = nodes_.size();
    std::int32_t maxd = 0;
    for (auto& nd : nodes_) maxd = std::max(maxd, nd.depth);
    std::size_t levels = static_cast<std::size_t>(std::bit_width(static_cast<unsigned>(maxd))) + 1;
    up_.assign(levels, std::vector<std::int32_t>(n, 0));
    for (std::size_t v = 0; v < n; ++v) up_[0][v] = nodes_[v].parent;
    for (std::size_t k = 1; k < levels; ++k)
      for (std::size_t v = 0; v < n; ++v) up_[k][v] = up_[k - 1][static_cast<std::size_t>(up_[k - 1][v])];
    on_path_.assign(n, 0);
    for (auto v : at_) on_path_[static_cast<std::size_t>(v)] = 1;
    // children are always created after their parent
    minsub_.assign(n, kInf);
    for (std::size_t v = n; v-- > 0;) {
      std::int64_t best = on_path_[v] ? 0 : kInf;
      for (std::int32_t c : children_[v]) {
        std::int64_t mc = minsub_[static_cast<std::size_t>(c)];
        if (mc == kInf) continue;
        best = std::min(best, mc + nodes_[static_cast<std::size_t>(c)].norm - nodes_[v].norm);
      }
      minsub_[v] = best;
    }
  }

  std::int32_t ancestor(std::int32_t v, std::int32_t depth) const {
    std::int32_t lift = nodes_[static_cast<std::size_t>(v)].depth - depth;
    for (std::size_t k = 0; lift > 0; ++k, lift >>= 1)
      if (lift & 1) v = up_[k][static_cast<std::size_t>(v)];
    return v;
  }

  std::int32_t lca(std::int32_t a, std::int32_t b) const {
    std::int32_t da = nodes_[static_cast<std::size_t>(a)].depth, db = nodes_[static_cast<std::size_t>(b)].depth;
    if (da > db) a = ancestor(a, db);
    else if (db > da) b = ancestor(b, da);
    if (a == b) return a;
    for (std::size_t k = up_.size(); k-- > 0;) {
      std::int32_t pa = up_[k][static_cast<std::size_t>(a)], pb = up_[k][static_cast<std::size_t>(b)];
      if (pa != pb) { a = pa; b = pb; }
    }
    return nodes_[static_cast<std::size_t>(a)].parent;
  }

  std::int64_t node_distance(std::int32_t u, std::int32_t v) const {
    if (u == v) return 0;
    std::int32_t w = lca(u, v);
    const Node& nw = nodes_[static_cast<std::size_t>(w)];
    const Node& nu = nodes_[static_cast<std::size_t>(u)];
    const Node& nv = nodes_[static_cast<std::size_t>(v)];
    if (nu.depth > nw.depth && nv.depth > nw.depth) {
      const Node& cu = nodes_[static_cast<std::size_t>(ancestor(u, nw.depth + 1))];
      const Node& cv = nodes_[static_cast<std::size_t>(ancestor(v, nw.depth + 1))];
      if (cu.s.atom == cv.s.atom) return (nu.norm - cu.norm) + (nv.norm - cv.norm) + coord_dist(cu.s.c, cv.s.c);
    }
    return nu.norm + nv.norm - 2 * nw.norm;
  }

  // x's syllable prefixes present in the trie: chain[k] has depth k
  std::vector<std::int32_t> match(const Element& x) const {
    std::vector<std::int32_t> chain{0};
    for (const auto& s : x) {
      std::int32_t c = find_child(chain.back(), s);
      if (c < 0) break;
      chain.push_back(c);
    }
    return chain;
  }

  std::int64_t split_distance(const Element& x, const std::vector<std::int64_t>& xpre, std::int32_t w,
                              std::int32_t u) const {
    const Node& nw = nodes_[static_cast<std::size_t>(w)];
    const Node& nu = nodes_[static_cast<std::size_t>(u)];
    auto dw = static_cast<std::size_t>(nw.depth);
    std::int64_t nx = xpre.back();
    bool xc = dw < x.size();
    bool uc = nu.depth > nw.depth;
    if (xc && uc) {
      const Node& cu = nodes_[static_cast<std::size_t>(ancestor(u, nw.depth + 1))];
      if (cu.s.atom == x[dw].atom)
        return (nx - xpre[dw + 1]) + (nu.norm - cu.norm) + coord_dist(x[dw].c, cu.s.c);
    }
    return (nx - xpre[dw]) + (nu.norm - nw.norm);
  }

  Element element_of(std::int32_t v) const {
    Element e(static_cast<std::size_t>(nodes_[static_cast<std::size_t>(v)].depth));
    while (v != 0) {
      const Node& n = nodes_[static_cast<std::size_t>(v)];
      e[static_cast<std::size_t>(n.depth - 1)] = n.s;
      v = n.parent;
    }
    return e;
  }

  const FreeProductGroup* g_;
  Element start_;
  std::vector<int> steps_;
  std::vector<Node> nodes_;
  std::vector<std::vector<std::int32_t>> children_;
  std::unordered_map<Key, std::int32_t, KeyHash> index_;
  std::vector<std::int32_t> at_;
  std::vector<std::vector<std::int32_t>> up_;
  std::vector<std::int64_t> minsub_;
  std::vector<char> on_path_;
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

}  // namespace

// ---------------------------------------------------------------- Cayley

CayleySpace::CayleySpace(FreeProductGroup g)
    : g_(std::move(g)), spec_(g_.spec()), spheres_(std::make_shared<SphereSampler>(g_)) {}

CayleySpace::CayleySpace(FreeProductGroup g, std::vector<Element> gens, std::string label)
    : g_(std::move(g)), custom_(std::move(gens)), spec_(std::move(label)) {}

std::string CayleySpace::kind() const {
  const auto& s = g_.spec();
  return s.substr(0, s.find('('));
}

std::vector<Vertex> CayleySpace::neighbors(const Vertex& v) const {
  Element x = element(v);
  std::vector<Vertex> out;
  if (custom_.empty()) {
    out.reserve(g_.num_generators());
    for (std::size_t k = 0; k < g_.num_generators(); ++k) {
      Element y = x;
      g_.right_mul_gen(y, static_cast<int>(k));
      out.push_back(vertex(y));
    }
  } else {
    for (const auto& s : custom_) out.push_back(vertex(g_.multiply(x, s)));
  }
  return out;
}

std::int64_t CayleySpace::distance(const Vertex& x, const Vertex& y) const {
  if (custom_.empty()) return g_.distance(element(x), element(y));
  return bfs_distance(x, y);
}

std::int64_t CayleySpace::norm(const Vertex& x) const {
  if (custom_.empty()) return g_.norm(element(x));
  return bfs_distance(base(), x);
}

std::string CayleySpace::format(const Vertex& v) const { return g_.format(element(v)); }

Vertex CayleySpace::parse(const std::string& s) const { return vertex(g_.parse_word(s)); }

PathSeg CayleySpace::path_from_steps(const Element& start, std::vector<int> steps) const {
  for (int s : steps)
    if (s < 0 || static_cast<std::size_t>(s) >= g_.num_generators()) throw std::invalid_argument("bad generator index");
  return PathSeg(std::make_shared<TrieStore>(g_, start, std::move(steps)));
}

PathSeg CayleySpace::geodesic(const Element& x, const Element& y) const {
  PathSeg p = path_from_steps(x, g_.lex_word(g_.multiply(g_.inverse(x), y)));
  p.set_certificate({1, 0});
  return p;
}

PathSeg CayleySpace::geodesic(const Vertex& x, const Vertex& y) const {
  if (!custom_.empty()) return GraphSpace::geodesic(x, y);
  return geodesic(element(x), element(y));
}

PathSeg CayleySpace::make_path(std::vector<Vertex> vs) const {
  if (!custom_.empty() || vs.empty()) return GraphSpace::make_path(std::move(vs));
  Element cur = element(vs[0]);
  Element start = cur;
  std::vector<int> steps;
  for (std::size_t i = 1; i < vs.size(); ++i) {
    Element nxt = element(vs[i]);
    Element u = g_.multiply(g_.inverse(cur), nxt);
    if (u.size() != 1 || l1(u[0].c) != 1) throw std::invalid_argument("consecutive path vertices are not adjacent");
    std::size_t ax = 0;
    while (u[0].c[ax] == 0) ++ax;
    steps.push_back(g_.gen_index(u[0].atom, static_cast<int>(ax), u[0].c[ax] > 0 ? 1 : -1));
    cur = std::move(nxt);
  }
  return path_from_steps(start, std::move(steps));
}

// Norm uniform in [0, radius], then uniform on that sphere.
Vertex CayleySpace::sample(Rng& rng, std::int64_t radius) const {
  if (!custom_.empty()) return GraphSpace::sample(rng, radius);
  return vertex(spheres_->sample(rng.range(0, radius), rng));
}

// ---------------------------------------------------------------- loopy ray

LoopyRaySpace::LoopyRaySpace(int N) : N_(N) {
  if (N < 2) throw std::invalid_argument("loopy_ray needs N >= 2");
  a_.assign(static_cast<std::size_t>(N) + 1, 0);
  a_[2] = 4;
  for (int n = 2; n < N; ++n) a_[static_cast<std::size_t>(n) + 1] = a_[static_cast<std::size_t>(n)] + n + 2;
}

Vertex LoopyRaySpace::loop_vertex(int n, std::int64_t j) const {
  if (n < 2 || n > N_) throw std::out_of_range("no such loop");
  std::int64_t len = 2LL * n * n;
  if (j <= 0 || j >= len) throw std::out_of_range("loop vertex index out of range");
  return Vertex{{n, j}};
}

void LoopyRaySpace::validate(const Vertex& v) const {
  if (v.code.size() != 2) throw std::invalid_argument("bad loopy_ray vertex");
  if (v.code[0] == 0) {
    if (v.code[1] < 0) throw std::invalid_argument("bad loopy_ray vertex");
  } else {
    loop_vertex(static_cast<int>(v.code[0]), v.code[1]);
  }
}

std::vector<Vertex> LoopyRaySpace::neighbors(const Vertex& v) const {
  validate(v);
  std::vector<Vertex> out;
  if (v.code[0] == 0) {
    std::int64_t k = v.code[1];
    if (k > 0) out.push_back(ray(k - 1));
    out.push_back(ray(k + 1));
    for (int n = 2; n <= N_; ++n) {
      if (a_[static_cast<std::size_t>(n)] == k) out.push_back(loop_vertex(n, 1));
      if (a_[static_cast<std::size_t>(n)] + n == k) out.push_back(loop_vertex(n, 2LL * n * n - 1));
    }
  } else {
    int n = static_cast<int>(v.code[0]);
    std::int64_t j = v.code[1], len = 2LL * n * n;
    out.push_back(j - 1 == 0 ? ray(a_[static_cast<std::size_t>(n)]) : loop_vertex(n, j - 1));
    out.push_back(j + 1 == len ? ray(a_[static_cast<std::size_t>(n)] + n) : loop_vertex(n, j + 1));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t LoopyRaySpace::distance(const Vertex& x, const Vertex& y) const {
  struct Exit { std::int64_t pos, cost; };
  auto exits = [&](const Vertex& v, Exit* e) -> int {
    if (v.code[0] == 0) { e[0] = {v.code[1], 0}; return 1; }
    auto n = static_cast<std::size_t>(v.code[0]);
    std::int64_t j = v.code[1], len = 2LL * v.code[0] * v.code[0];
    e[0] = {a_[n], j};
    e[1] = {a_[n] + v.code[0], len - j};
    return 2;
  };
  Exit ex[2], ey[2];
  int nx = exits(x, ex), ny = exits(y, ey);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  if (x.code[0] != 0 && x.code[0] == y.code[0]) best = std::abs(x.code[1] - y.code[1]);
  for (int i = 0; i < nx; ++i)
    for (int k = 0; k < ny; ++k)
      best = std::min(best, ex[i].cost + std::abs(ex[i].pos - ey[k].pos) + ey[k].cost);
  return best;
}

std::string LoopyRaySpace::format(const Vertex& v) const {
  if (v.code[0] == 0) return "r" + std::to_string(v.code[1]);
  return "L" + std::to_string(v.code[0]) + ":" + std::to_string(v.code[1]);
}

Vertex LoopyRaySpace::parse(const std::string& s0) const {
  std::string s = trim(s0);
  Vertex v;
  try {
    if (!s.empty() && s[0] == 'r') {
      v = ray(std::stoll(s.substr(1)));
    } else if (!s.empty() && s[0] == 'L') {
      auto colon = s.find(':');
      if (colon == std::string::npos) throw std::invalid_argument(s);
      v = Vertex{{std::stoll(s.substr(1, colon - 1)), std::stoll(s.substr(colon + 1))}};
    } else {
      throw std::invalid_argument(s);
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("bad loopy_ray vertex '" + s0 + "'");
  }
  validate(v);
  return v;
}

Vertex LoopyRaySpace::sample(Rng& rng, std::int64_t radius) const {
  if (radius < 0) return base();
  // loop n contributes j <= radius - a_n from one end and j >= a_n + n + 2n^2 - radius from the other
  struct Part {
    int n;
    std::int64_t lo_end, hi_start, count;
  };
  std::vector<Part> parts;
  std::uint64_t total = static_cast<std::uint64_t>(radius) + 1;
  for (int n = 2; n <= N_; ++n) {
    std::int64_t len = 2LL * n * n;
    std::int64_t lo_end = std::min(len - 1, radius - attach(n));
    std::int64_t hi_start = std::max<std::int64_t>(1, attach(n) + n + len - radius);
    if (lo_end < 0) lo_end = 0;
    if (hi_start <= lo_end) hi_start = lo_end + 1;
    std::int64_t cnt = lo_end + std::max<std::int64_t>(0, len - hi_start);
    if (cnt > 0) {
      parts.push_back({n, lo_end, hi_start, cnt});
      total += static_cast<std::uint64_t>(cnt);
    }
  }
  std::uint64_t k = rng.below(total);
  if (k <= static_cast<std::uint64_t>(radius)) return ray(static_cast<std::int64_t>(k));
  auto rest = static_cast<std::int64_t>(k - static_cast<std::uint64_t>(radius) - 1);
  for (auto& p : parts) {
    if (rest < p.count) return loop_vertex(p.n, rest < p.lo_end ? rest + 1 : p.hi_start + (rest - p.lo_end));
    rest -= p.count;
  }
  throw std::logic_error("loopy sample out of range");
}

PathSeg LoopyRaySpace::ray_prefix(std::int64_t len) const {
  std::vector<Vertex> vs;
  vs.reserve(static_cast<std::size_t>(len) + 1);
  for (std::int64_t k = 0; k <= len; ++k) vs.push_back(ray(k));
  PathSeg p = make_path(std::move(vs));
  p.set_certificate({1, 0});
  return p;
}

// ---------------------------------------------------------------- explicit

std::shared_ptr<ExplicitSpace> ExplicitSpace::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open edge list " + path);
  std::vector<std::string> names;
  std::unordered_map<std::string, int> id;
  std::vector<std::pair<int, int>> edges;
  bool directed = false;
  std::string line;
  int lineno = 0;
  auto get = [&](const std::string& nm) {
    auto it = id.find(nm);
    if (it != id.end()) return it->second;
    int k = static_cast<int>(names.size());
    names.push_back(nm);
    id.emplace(nm, k);
    return k;
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t == "#directed") { directed = true; continue; }
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ss(t);
    std::string u, v, extra;
    if (!(ss >> u >> v) || (ss >> extra))
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected 'u v'");
    if (u == v) throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": self-loop");
    edges.emplace_back(get(u), get(v));
  }
  if (names.empty()) throw std::invalid_argument("edge list " + path + " is empty");
  std::vector<std::vector<int>> adj(names.size());
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : edges) {
    seen.insert({u, v});
    if (!directed) seen.insert({v, u});
  }
  for (auto [u, v] : seen) {
    if (!seen.count({v, u}))
      throw std::invalid_argument("edge list not symmetric: " + names[static_cast<std::size_t>(u)] + " -> " +
                                  names[static_cast<std::size_t>(v)] + " has no reverse");
    adj[static_cast<std::size_t>(u)].push_back(v);
  }
  return std::make_shared<ExplicitSpace>(std::move(names), std::move(adj), "explicit(" + path + ")");
}

ExplicitSpace::ExplicitSpace(std::vector<std::string> names, std::vector<std::vector<int>> adj, std::string label)
    : names_(std::move(names)), adj_(std::move(adj)), label_(std::move(label)) {
  for (auto& a : adj_) std::sort(a.begin(), a.end());
  std::size_t n = names_.size();
  std::vector<std::int32_t> d(n, -1);
  std::deque<int> q{0};
  d[0] = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int w : adj_[static_cast<std::size_t>(v)])
      if (d[static_cast<std::size_t>(w)] < 0) { d[static_cast<std::size_t>(w)] = d[static_cast<std::size_t>(v)] + 1; q.push_back(w); }
  }
  for (std::size_t v = 0; v < n; ++v)
    if (d[v] < 0) throw std::invalid_argument("edge list not connected: " + names_[v] + " unreachable");
  if (n <= 3000) {
    apsp_.assign(n, std::vector<std::int32_t>(n, -1));
    for (std::size_t s = 0; s < n; ++s) {
      auto& row = apsp_[s];
      row[s] = 0;
      std::deque<int> qq{static_cast<int>(s)};
      while (!qq.empty()) {
        int v = qq.front();
        qq.pop_front();
        for (int w : adj_[static_cast<std::size_t>(v)])
          if (row[static_cast<std::size_t>(w)] < 0) { row[static_cast<std::size_t>(w)] = row[static_cast<std::size_t>(v)] + 1; qq.push_back(w); }
      }
    }
  }
}

std::vector<Vertex> ExplicitSpace::neighbors(const Vertex& v) const {
  std::vector<Vertex> out;
  for (int w : adj_.at(static_cast<std::size_t>(v.code.at(0)))) out.push_back(Vertex{{w}});
  return out;
}

std::int64_t ExplicitSpace::distance(const Vertex& x, const Vertex& y) const {
  if (!apsp_.empty()) return apsp_.at(static_cast<std::size_t>(x.code.at(0))).at(static_cast<std::size_t>(y.code.at(0)));
  return bfs_distance(x, y);
}

std::string ExplicitSpace::format(const Vertex& v) const { return names_.at(static_cast<std::size_t>(v.code.at(0))); }

Vertex ExplicitSpace::parse(const std::string& s) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == trim(s)) return Vertex{{static_cast<std::int64_t>(i)}};
  throw std::invalid_argument("unknown vertex '" + s + "'");
}

Vertex ExplicitSpace::sample(Rng& rng, std::int64_t radius) const {
  std::vector<Vertex> pts;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    Vertex v{{static_cast<std::int64_t>(i)}};
    if (norm(v) <= radius) pts.push_back(v);
  }
  return pts[rng.below(pts.size())];
}

// ---------------------------------------------------------------- building

std::shared_ptr<const GraphSpace> build_space(const std::string& spec_in) {
  std::string spec = trim(spec_in);
  std::shared_ptr<const GraphSpace> sp;
  if (spec.rfind("loopy_ray(", 0) == 0 && spec.back() == ')') {
    std::string arg = trim(spec.substr(10, spec.size() - 11));
    char* end = nullptr;
    long n = std::strtol(arg.c_str(), &end, 10);
    if (arg.empty() || *end != '\0') throw std::invalid_argument("loopy_ray needs an integer N");
    if (n > 2000) throw std::invalid_argument("loopy_ray N above 2000");
    sp = std::make_shared<LoopyRaySpace>(static_cast<int>(n));
  } else if (spec.rfind("explicit(", 0) == 0 && spec.back() == ')') {
    sp = ExplicitSpace::from_file(trim(spec.substr(9, spec.size() - 10)));
  } else {
    sp = std::make_shared<CayleySpace>(FreeProductGroup::parse(spec));
  }
  auto chk = self_check(*sp);
  if (!chk.ok) throw std::invalid_argument("space " + spec + " failed self-check: " + chk.problem);
  return sp;
}

SelfCheck self_check(const GraphSpace& sp, std::size_t cap) {
  SelfCheck out;
  VertexMap<std::int64_t> depth;
  std::deque<Vertex> q{sp.base()};
  depth.emplace(sp.base(), 0);
  std::vector<Vertex> order;
  while (!q.empty() && order.size() < cap) {
    Vertex v = q.front();
    q.pop_front();
    order.push_back(v);
    std::int64_t dv = depth.at(v);
    if (dv == 10) continue;
    for (auto& w : sp.neighbors(v))
      if (!depth.count(w)) { depth.emplace(w, dv + 1); q.push_back(w); }
  }
  out.vertices = order.size();
  for (auto& v : order) {
    auto nb = sp.neighbors(v);
    if (!std::is_sorted(nb.begin(), nb.end()) && sp.kind() != "free_group" && sp.kind() != "grid" &&
        sp.kind() != "free_product") {
      out.ok = false;
      out.problem = "neighbor list of " + sp.format(v) + " not in canonical order";
      return out;
    }
    for (auto& w : nb) {
      if (!sp.adjacent(w, v)) {
        out.ok = false;
        out.problem = "neighbor relation not symmetric at " + sp.format(v) + " -- " + sp.format(w);
        return out;
      }
    }
    if (!(sp.parse(sp.format(v)) == v)) {
      out.ok = false;
      out.problem = "canonical form does not round-trip for " + sp.format(v);
      return out;
    }
    if (sp.norm(v) != depth.at(v)) {
      out.ok = false;
      out.problem = "norm of " + sp.format(v) + " disagrees with BFS";
      return out;
    }
  }
  return out;
}

GeneratorChange change_generators(const CayleySpace& sp, const std::vector<std::string>& gens, std::int64_t r) {
  if (!sp.standard_generators()) throw std::invalid_argument("change_generators starts from standard generators");
  const auto& G = sp.group();
  std::vector<Element> set;
  std::string label = sp.spec() + "{";
  for (std::size_t i = 0; i < gens.size(); ++i) {
    Element s = G.parse_word(gens[i]);
    if (s.empty()) continue;
    label += (i ? "," : "") + gens[i];
    for (const Element& t : {s, G.inverse(s)})
      if (std::find(set.begin(), set.end(), t) == set.end()) set.push_back(t);
  }
  label += "}";
  if (set.empty()) throw std::invalid_argument("empty generating set");
  auto target = std::make_shared<CayleySpace>(G, set, label);

  auto old_ball = sp.ball(sp.base(), r, 1u << 21);
  VertexMap<char> wanted;
  for (auto& v : old_ball) wanted.emplace(v, 0);
  // the old generators must be reachable, otherwise the set does not generate
  for (std::size_t g = 0; g < G.num_generators(); ++g) wanted.emplace(sp.vertex(G.from_gen(static_cast<int>(g))), 0);

  VertexMap<std::int64_t> dnew;
  std::deque<Vertex> q{target->base()};
  dnew.emplace(target->base(), 0);
  std::size_t found = 1;
  const std::size_t budget = 1u << 22;
  while (!q.empty() && found < wanted.size()) {
    Vertex v = q.front();
    q.pop_front();
    for (auto& w : target->neighbors(v)) {
      if (dnew.count(w)) continue;
      dnew.emplace(w, dnew.at(v) + 1);
      if (wanted.count(w)) ++found;
      if (dnew.size() > budget) break;
      q.push_back(std::move(w));
    }
    if (dnew.size() > budget) break;
  }
  for (std::size_t g = 0; g < G.num_generators(); ++g)
    if (!dnew.count(sp.vertex(G.from_gen(static_cast<int>(g)))))
      throw std::invalid_argument("generating set does not generate: " + G.gen_name(static_cast<int>(g)) +
                                  " not reached");

  GeneratorChange out;
  out.target = target;
  for (auto& v : old_ball) {
    if (v == sp.base()) continue;
    auto it = dnew.find(v);
    if (it == dnew.end()) throw CapExceeded("new word metric not resolved on the ball");
    double a = static_cast<double>(sp.norm(v)), b = static_cast<double>(it->second);
    double k = std::max(a / b, b / a);
    ++out.qi.pairs;
    if (k > out.qi.k) { out.qi.k = k; out.qi.worst = sp.format(v); }
  }
  return out;
}

}  // namespace coarselab
