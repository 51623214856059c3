#include "coarselab/group.hpp"

#include "coarselab/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace coarselab {

std::int64_t l1(const Coords& c) {
  std::int64_t s = 0;
  for (auto v : c) s += v < 0 ? -v : v;
  return s;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t"), b = s.find_last_not_of(" \t");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

// split "f(x, g(y)), h" at top-level commas
std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) { out.push_back(trim(cur)); cur.clear(); continue; }
    cur += ch;
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

bool is_zero(const Coords& c) {
  return std::all_of(c.begin(), c.end(), [](std::int64_t v) { return v == 0; });
}

}  // namespace

FreeProductGroup FreeProductGroup::parse(const std::string& spec_in) {
  FreeProductGroup G;
  G.spec_ = trim(spec_in);
  std::vector<std::pair<std::string, int>> factors;
  auto one = [&](const std::string& f) {
    auto open = f.find('('), close = f.rfind(')');
    if (open == std::string::npos || close != f.size() - 1)
      throw std::invalid_argument("bad group factor '" + f + "'");
    std::string name = trim(f.substr(0, open)), arg = trim(f.substr(open + 1, close - open - 1));
    if (name != "free_group" && name != "grid") throw std::invalid_argument("unknown group factor '" + name + "'");
    char* end = nullptr;
    long n = std::strtol(arg.c_str(), &end, 10);
    if (arg.empty() || *end != '\0' || n < 1) throw std::invalid_argument("factor rank must be >= 1 in '" + f + "'");
    if (n > 16) throw std::invalid_argument("factor rank above 16 in '" + f + "'");
    factors.emplace_back(name, static_cast<int>(n));
  };
  const std::string& s = G.spec_;
  if (s.rfind("free_product(", 0) == 0 && s.back() == ')') {
    auto parts = split_top(s.substr(13, s.size() - 14));
    if (parts.empty()) throw std::invalid_argument("free_product needs factors");
    for (auto& p : parts) one(p);
  } else {
    one(s);
  }
  G.num_factors_ = factors.size();

  const std::string pool = "abcdfghijklmnopqrs";
  const std::string rank_one = "tuvwxyz";
  std::size_t pi = 0, ri = 0;
  auto take = [&](bool single) {
    if (single) {
      if (ri >= rank_one.size()) throw std::invalid_argument("too many rank-one factors");
      return rank_one[ri++];
    }
    if (pi >= pool.size()) throw std::invalid_argument("too many generators");
    return pool[pi++];
  };
  for (std::size_t fi = 0; fi < factors.size(); ++fi) {
    auto [name, n] = factors[fi];
    bool single = (n == 1);
    if (name == "free_group") {
      for (int k = 0; k < n; ++k) {
        Atom a;
        a.dim = 1;
        a.factor = static_cast<int>(fi);
        a.letters = {take(single)};
        G.atoms_.push_back(a);
      }
    } else {
      Atom a;
      a.dim = n;
      a.peripheral = n >= 2;
      a.factor = static_cast<int>(fi);
      for (int k = 0; k < n; ++k) a.letters.push_back(take(single));
      G.atoms_.push_back(a);
    }
  }
  for (std::size_t ai = 0; ai < G.atoms_.size(); ++ai) {
    G.atom_gen_offset_.push_back(static_cast<int>(G.gens_.size()));
    for (int ax = 0; ax < G.atoms_[ai].dim; ++ax) {
      G.gens_.push_back({static_cast<int>(ai), ax, +1});
      G.gens_.push_back({static_cast<int>(ai), ax, -1});
    }
  }
  return G;
}

int FreeProductGroup::gen_index(int atom, int axis, int sign) const {
  return atom_gen_offset_[static_cast<std::size_t>(atom)] + 2 * axis + (sign < 0 ? 1 : 0);
}

std::string FreeProductGroup::gen_name(int g) const {
  const auto& gg = gens_[static_cast<std::size_t>(g)];
  char ch = atoms_[static_cast<std::size_t>(gg.atom)].letters[static_cast<std::size_t>(gg.axis)];
  return std::string(1, gg.sign > 0 ? ch : static_cast<char>(std::toupper(ch)));
}

bool FreeProductGroup::has_peripherals() const {
  return std::any_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.peripheral; });
}

void FreeProductGroup::right_mul_gen(Element& x, int g) const {
  const auto& gg = gens_[static_cast<std::size_t>(g)];
  if (!x.empty() && x.back().atom == gg.atom) {
    auto& c = x.back().c;
    c[static_cast<std::size_t>(gg.axis)] += gg.sign;
    if (c[static_cast<std::size_t>(gg.axis)] == 0 && is_zero(c)) x.pop_back();
    return;
  }
  Syllable s;
  s.atom = gg.atom;
  s.c.assign(static_cast<std::size_t>(atoms_[static_cast<std::size_t>(gg.atom)].dim), 0);
  s.c[static_cast<std::size_t>(gg.axis)] = gg.sign;
  x.push_back(std::move(s));
}

void FreeProductGroup::right_mul(Element& x, const Element& y) const {
  for (const auto& s : y) {
    if (!x.empty() && x.back().atom == s.atom) {
      auto& c = x.back().c;
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += s.c[i];
      if (is_zero(c)) x.pop_back();
    } else {
      x.push_back(s);
    }
  }
}

Element FreeProductGroup::multiply(const Element& x, const Element& y) const {
  Element z = x;
  right_mul(z, y);
  return z;
}

Element FreeProductGroup::inverse(const Element& x) const {
  Element z(x.rbegin(), x.rend());
  for (auto& s : z)
    for (auto& v : s.c) v = -v;
  return z;
}

Element FreeProductGroup::from_gen(int g) const {
  Element x;
  right_mul_gen(x, g);
  return x;
}

std::int64_t FreeProductGroup::norm(const Element& x) const {
  std::int64_t n = 0;
  for (const auto& s : x) n += l1(s.c);
  return n;
}

std::int64_t FreeProductGroup::coned_norm(const Element& x) const {
  std::int64_t n = 0;
  for (const auto& s : x) n += atoms_[static_cast<std::size_t>(s.atom)].peripheral ? 1 : l1(s.c);
  return n;
}

std::int64_t FreeProductGroup::distance(const Element& x, const Element& y) const {
  // strip the common syllable prefix, then at most one partial syllable
  std::size_t k = 0;
  while (k < x.size() && k < y.size() && x[k] == y[k]) ++k;
  std::int64_t d = 0;
  std::size_t i0 = k, j0 = k;
  if (k < x.size() && k < y.size() && x[k].atom == y[k].atom) {
    for (std::size_t a = 0; a < x[k].c.size(); ++a) d += std::abs(x[k].c[a] - y[k].c[a]);
    ++i0;
    ++j0;
  }
  for (std::size_t i = i0; i < x.size(); ++i) d += l1(x[i].c);
  for (std::size_t j = j0; j < y.size(); ++j) d += l1(y[j].c);
  return d;
}

std::vector<int> FreeProductGroup::lex_word(const Element& x) const {
  std::vector<int> w;
  for (const auto& s : x)
    for (std::size_t ax = 0; ax < s.c.size(); ++ax) {
      std::int64_t v = s.c[ax];
      int g = gen_index(s.atom, static_cast<int>(ax), v > 0 ? 1 : -1);
      for (std::int64_t k = 0; k < (v < 0 ? -v : v); ++k) w.push_back(g);
    }
  return w;
}

Element FreeProductGroup::parse_word(const std::string& w) const {
  Element x;
  std::size_t i = 0;
  auto letter_gen = [&](char ch) -> int {
    char lo = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    for (std::size_t a = 0; a < atoms_.size(); ++a)
      for (std::size_t ax = 0; ax < atoms_[a].letters.size(); ++ax)
        if (atoms_[a].letters[ax] == lo)
          return gen_index(static_cast<int>(a), static_cast<int>(ax), std::isupper(static_cast<unsigned char>(ch)) ? -1 : 1);
    return -1;
  };
  while (i < w.size()) {
    unsigned char ch = static_cast<unsigned char>(w[i]);
    if (std::isspace(ch) || ch == '*' || ch == '.') { ++i; continue; }
    if ((ch == 'e' || ch == '1') && letter_gen(static_cast<char>(ch)) < 0) { ++i; continue; }
    int g = std::isalpha(ch) ? letter_gen(static_cast<char>(ch)) : -1;
    if (g < 0) throw std::invalid_argument(std::string("unknown generator symbol '") + static_cast<char>(ch) + "'");
    ++i;
    long long power = 1;
    if (i < w.size() && w[i] == '^') {
      ++i;
      std::size_t j = i;
      if (j < w.size() && (w[j] == '-' || w[j] == '+')) ++j;
      while (j < w.size() && std::isdigit(static_cast<unsigned char>(w[j]))) ++j;
      std::string num = w.substr(i, j - i);
      if (num.empty() || num == "-" || num == "+") throw std::invalid_argument("bad exponent in word '" + w + "'");
      power = std::stoll(num);
      i = j;
    } else if (w.compare(i, 5, "⁻¹") == 0) {  // ⁻¹
      power = -1;
      i += 5;
    }
    if (power < 0) { g = inverse_gen(g); power = -power; }
    for (long long k = 0; k < power; ++k) right_mul_gen(x, g);
  }
  return x;
}

std::string FreeProductGroup::format(const Element& x) const {
  if (x.empty()) return "e";
  std::string out;
  for (const auto& s : x) {
    const auto& a = atoms_[static_cast<std::size_t>(s.atom)];
    for (std::size_t ax = 0; ax < s.c.size(); ++ax) {
      if (s.c[ax] == 0) continue;
      if (!out.empty()) out += ' ';
      out += a.letters[ax];
      if (s.c[ax] != 1) out += "^" + std::to_string(s.c[ax]);
    }
  }
  return out;
}

std::vector<std::int64_t> FreeProductGroup::encode(const Element& x) const {
  std::vector<std::int64_t> code;
  for (const auto& s : x) {
    code.push_back(s.atom);
    code.insert(code.end(), s.c.begin(), s.c.end());
  }
  return code;
}

Element FreeProductGroup::decode(const std::vector<std::int64_t>& code) const {
  Element x;
  std::size_t i = 0;
  while (i < code.size()) {
    Syllable s;
    s.atom = static_cast<int>(code[i++]);
    if (s.atom < 0 || static_cast<std::size_t>(s.atom) >= atoms_.size()) throw std::invalid_argument("bad vertex code");
    auto d = static_cast<std::size_t>(atoms_[static_cast<std::size_t>(s.atom)].dim);
    if (i + d > code.size()) throw std::invalid_argument("truncated vertex code");
    s.c.assign(code.begin() + static_cast<std::ptrdiff_t>(i), code.begin() + static_cast<std::ptrdiff_t>(i + d));
    i += d;
    x.push_back(std::move(s));
  }
  return x;
}

double lattice_sphere_size(int d, std::int64_t k) {
  if (k == 0) return 1;
  double total = 0, binom_d = 1, binom_k = 1;  // C(d, j), C(k-1, j-1)
  for (int j = 1; j <= d && j <= k; ++j) {
    binom_d = binom_d * (d - j + 1) / j;
    if (j > 1) binom_k = binom_k * static_cast<double>(k - j + 1) / (j - 1);
    total += std::ldexp(binom_d * binom_k, j);
  }
  return total;
}

SphereSampler::SphereSampler(const FreeProductGroup& g) {
  for (auto& a : g.atoms()) dims_.push_back(a.dim);
}

double SphereSampler::atom_sphere(int atom, std::int64_t k) const {
  return lattice_sphere_size(dims_[static_cast<std::size_t>(atom)], k);
}

std::shared_ptr<const SphereSampler::Table> SphereSampler::table(std::int64_t n) const {
  std::lock_guard<std::mutex> lk(mu_);
  if (table_ && static_cast<std::int64_t>(table_->r.size()) > n) return table_;
  const int A = static_cast<int>(dims_.size());
  const std::int64_t size = std::max<std::int64_t>(n + 1, table_ ? 2 * static_cast<std::int64_t>(table_->r.size()) : 64);
  auto t = std::make_shared<Table>();
  t->r.assign(static_cast<std::size_t>(size), 1);
  t->V.assign(static_cast<std::size_t>(size), std::vector<double>(static_cast<std::size_t>(A) + 1, 1));
  std::vector<double> U(static_cast<std::size_t>(A) + 1);
  for (std::int64_t m = 1; m < size; ++m) {
    std::fill(U.begin(), U.end(), 0);
    double Q = 1;  // |S(m-k)| / |S(m-1)|
    for (std::int64_t k = 1; k <= m; ++k) {
      if (k > 1) Q *= t->r[static_cast<std::size_t>(m - k + 1)];
      if (Q < 1e-40) break;
      const auto& row = t->V[static_cast<std::size_t>(m - k)];
      for (int b = 0; b < A; ++b) {
        double w = Q * atom_sphere(b, k) * row[static_cast<std::size_t>(b)];
        for (int a = 0; a <= A; ++a)
          if (a != b) U[static_cast<std::size_t>(a)] += w;
      }
    }
    const double all = U[static_cast<std::size_t>(A)];
    t->r[static_cast<std::size_t>(m)] = 1 / all;
    for (int a = 0; a <= A; ++a) t->V[static_cast<std::size_t>(m)][static_cast<std::size_t>(a)] = U[static_cast<std::size_t>(a)] / all;
  }
  table_ = t;
  return table_;
}

double SphereSampler::log_sphere_size(std::int64_t n) const {
  auto t = table(n);
  double s = 0;
  for (std::int64_t m = 1; m <= n; ++m) s -= std::log(t->r[static_cast<std::size_t>(m)]);
  return s;
}

Element SphereSampler::sample(std::int64_t n, Rng& rng) const {
  if (n < 0) throw std::invalid_argument("negative norm");
  auto t = table(n);
  const int A = static_cast<int>(dims_.size());
  Element x;
  int prev = A;
  std::int64_t m = n;
  while (m > 0) {
    // (atom b, syllable norm k) with weight |S_b(k)| * #forms(m-k) not starting in b
    double target = rng.uniform() * t->V[static_cast<std::size_t>(m)][static_cast<std::size_t>(prev)] /
                    t->r[static_cast<std::size_t>(m)];
    double acc = 0, Q = 1;
    int pick_b = -1;
    std::int64_t pick_k = 0;
    for (std::int64_t k = 1; k <= m && pick_b < 0; ++k) {
      if (k > 1) Q *= t->r[static_cast<std::size_t>(m - k + 1)];
      for (int b = 0; b < A; ++b) {
        if (b == prev) continue;
        double w = Q * atom_sphere(b, k) * t->V[static_cast<std::size_t>(m - k)][static_cast<std::size_t>(b)];
        if (w <= 0) continue;
        acc += w;
        pick_b = b;
        pick_k = k;
        if (acc >= target) break;
      }
      if (acc >= target) break;
      pick_b = -1;
    }
    if (pick_b < 0) {
      // rounding left the target just above the total: take the last positive weight
      for (std::int64_t k = m; k >= 1 && pick_b < 0; --k)
        for (int b = A - 1; b >= 0; --b)
          if (b != prev && atom_sphere(b, k) * t->V[static_cast<std::size_t>(m - k)][static_cast<std::size_t>(b)] > 0) {
            pick_b = b;
            pick_k = k;
            break;
          }
    }
    // uniform point of Z^d on the l1 sphere of radius pick_k, coordinate by coordinate
    const int d = dims_[static_cast<std::size_t>(pick_b)];
    Syllable syl{pick_b, {}};
    std::int64_t rem = pick_k;
    for (int i = 0; i < d; ++i) {
      const int rest = d - i - 1;
      if (rest == 0) {
        syl.c.push_back(rem == 0 ? 0 : (rng.below(2) ? rem : -rem));
        break;
      }
      double total = lattice_sphere_size(rest + 1, rem), u = rng.uniform() * total, c = 0;
      std::int64_t v = 0;
      for (; v < rem; ++v) {
        c += (v == 0 ? 1 : 2) * lattice_sphere_size(rest, rem - v);
        if (u < c) break;
      }
      syl.c.push_back(v == 0 ? 0 : (rng.below(2) ? v : -v));
      rem -= v;
    }
    x.push_back(std::move(syl));
    prev = pick_b;
    m -= pick_k;
  }
  return x;
}

}  // namespace coarselab
