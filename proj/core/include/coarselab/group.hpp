#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace coarselab {

class Rng;

using Coords = boost::container::small_vector<std::int64_t, 2>;

// One normal-form syllable: a nontrivial element of free abelian atom `atom`.
struct Syllable {
  int atom = 0;
  Coords c;
  friend bool operator==(const Syllable& a, const Syllable& b) { return a.atom == b.atom && a.c == b.c; }
};

// Alternating normal form; adjacent syllables never share an atom.
using Element = std::vector<Syllable>;

// Every supported group is a free product of free abelian groups: grid(d) is
// one atom Z^d, free_group(k) is k atoms Z.
struct Atom {
  int dim = 1;
  bool peripheral = false;  // Z^d with d >= 2
  int factor = 0;           // index of the factor in the spec
  std::vector<char> letters;
};

struct Generator {
  int atom = 0;
  int axis = 0;
  int sign = 1;
};

std::int64_t l1(const Coords& c);

class FreeProductGroup {
 public:
  // free_group(k) | grid(d) | free_product(f1, f2, ...)
  static FreeProductGroup parse(const std::string& spec);

  const std::string& spec() const { return spec_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t num_factors() const { return num_factors_; }
  std::size_t num_generators() const { return gens_.size(); }
  const Generator& gen(std::size_t g) const { return gens_[g]; }
  static int inverse_gen(int g) { return g ^ 1; }
  int gen_index(int atom, int axis, int sign) const;
  std::string gen_name(int g) const;
  bool has_peripherals() const;

  void right_mul_gen(Element& x, int g) const;
  void right_mul(Element& x, const Element& y) const;
  Element multiply(const Element& x, const Element& y) const;
  Element inverse(const Element& x) const;
  Element from_gen(int g) const;

  std::int64_t norm(const Element& x) const;
  std::int64_t coned_norm(const Element& x) const;
  std::int64_t distance(const Element& x, const Element& y) const;

  // generator sequence of the lexicographically least geodesic from e to x
  std::vector<int> lex_word(const Element& x) const;

  // Letters, uppercase for inverses, optional ^n / ^-1 / ⁻¹ exponents;
  // "e" or "1" for the identity.
  Element parse_word(const std::string& w) const;
  std::string format(const Element& x) const;

  std::vector<std::int64_t> encode(const Element& x) const;
  Element decode(const std::vector<std::int64_t>& code) const;

 private:
  std::string spec_;
  std::vector<Atom> atoms_;
  std::vector<Generator> gens_;
  std::vector<int> atom_gen_offset_;
  std::size_t num_factors_ = 0;
};

// Uniform sampling on spheres of the standard word metric. Normal forms are
// counted by norm and first atom; rows are stored relative to the previous
// sphere size so nothing overflows.
class SphereSampler {
 public:
  explicit SphereSampler(const FreeProductGroup& g);
  Element sample(std::int64_t n, Rng& rng) const;
  double log_sphere_size(std::int64_t n) const;

 private:
  struct Table {
    std::vector<double> r;               // r[n] = |S(n-1)| / |S(n)|
    std::vector<std::vector<double>> V;  // V[n][a] = (forms not starting in atom a) / |S(n)|; a = #atoms: all
  };
  std::shared_ptr<const Table> table(std::int64_t n) const;
  double atom_sphere(int atom, std::int64_t k) const;

  std::vector<int> dims_;
  mutable std::mutex mu_;
  mutable std::shared_ptr<const Table> table_;
};

// points of Z^d with l1 norm k
double lattice_sphere_size(int d, std::int64_t k);

}  // namespace coarselab
