#include "coarselab/morse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include "coarselab/parallel.hpp"

namespace coarselab {

// Random walk avoiding immediate backtracking when possible.
Vertex wander(const GraphSpace& sp, Vertex v, std::int64_t steps, Rng& rng, std::vector<Vertex>* trail) {
  Vertex prev;
  bool has_prev = false;
  for (std::int64_t k = 0; k < steps; ++k) {
    auto nb = sp.neighbors(v);
    if (has_prev && nb.size() > 1) nb.erase(std::remove(nb.begin(), nb.end(), prev), nb.end());
    prev = v;
    has_prev = true;
    v = nb[rng.below(nb.size())];
    if (trail) trail->push_back(v);
  }
  return v;
}

Vertex sample_band(const GraphSpace& sp, std::int64_t lo, std::int64_t hi, Rng& rng) {
  for (int t = 0; t < 512; ++t) {
    Vertex v = sp.sample(rng, hi - 1);
    std::int64_t n = sp.norm(v);
    if (n >= lo && n < hi) return v;
  }
  throw Inconclusive("no vertex found in norm band [" + std::to_string(lo) + ", " + std::to_string(hi) + ")");
}

// Near Z: a walk off a random point of Z, rejected into the band. Falls back
// to global sampling when Z does not reach the band.
Vertex sample_near(const GraphSpace& sp, const PathSeg& Z, std::int64_t lo, std::int64_t hi, Rng& rng) {
  auto top = static_cast<std::int64_t>(Z.size()) - 1;
  for (int t = 0; t < 128; ++t) {
    auto i = static_cast<std::size_t>(rng.range(0, std::min(top, hi)));
    Vertex v = wander(sp, Z.vertex(i), rng.range(1, hi), rng);
    std::int64_t n = sp.norm(v);
    if (n >= lo && n < hi) return v;
  }
  return sample_band(sp, lo, hi, rng);
}

namespace {

std::uint64_t sequence_hash(const PathSeg& p) {
  std::uint64_t h = p.size();
  VertexHash vh;
  for (std::size_t i = 0; i < p.size(); ++i) h = splitmix64(h ^ vh(p.vertex(i)));
  return h;
}

std::size_t first_at_least(const PathSeg& p, double r) {
  auto target = static_cast<std::int64_t>(std::ceil(r - kTol));
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.norm(i) >= target) return i;
  throw std::out_of_range("path never reaches norm " + std::to_string(target));
}

std::int64_t max_norm(const PathSeg& p) {
  std::int64_t m = 0;
  for (std::size_t i = 0; i < p.size(); ++i) m = std::max(m, p.norm(i));
  return m;
}

int dyadic(std::int64_t n) { return n <= 0 ? 0 : static_cast<int>(std::floor(std::log2(static_cast<double>(n)))); }

}  // namespace

MorseGauge::MorseGauge(double constant)
    : f_([constant](double, double) { return constant; }), provenance_("constant") {}

MorseGauge::MorseGauge(Fn f, std::string provenance) : f_(std::move(f)), provenance_(std::move(provenance)) {}

double MorseGauge::operator()(double q, double Q) const { return std::max({f_(q, Q), q, Q}); }

bool in_kappa_neighborhood(const GraphSpace& sp, const Vertex& x, const PathSeg& Z, double m,
                           const SublinearFn& kappa) {
  if (Z.empty()) throw std::invalid_argument("empty set Z");
  return static_cast<double>(Z.distance_to(x)) <= m * kappa(static_cast<double>(sp.norm(x))) + kTol;
}

bool in_kappa_neighborhood(const GraphSpace& sp, const Vertex& x, const VertexSet& Z, double m,
                           const SublinearFn& kappa) {
  return static_cast<double>(Z.distance_to(x)) <= m * kappa(static_cast<double>(sp.norm(x))) + kTol;
}

Verdict symmetry_transfer(const GraphSpace& sp, const PathSeg& alpha, const PathSeg& beta, double m,
                          const SublinearFn& kappa) {
  (void)sp;
  if (alpha.empty() || beta.empty()) throw std::invalid_argument("empty path");
  std::int64_t top = std::min(max_norm(alpha), max_norm(beta));
  for (std::size_t j = 0; j < beta.size(); ++j) {
    if (beta.norm(j) > top) continue;
    double bound = m * kappa(static_cast<double>(beta.norm(j)));
    if (static_cast<double>(alpha.distance_to(beta.vertex(j))) > bound + kTol)
      throw PreconditionFailed("beta leaves N_kappa(alpha, m) at index " + std::to_string(j), j);
  }
  Verdict v;
  v.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha.norm(i) > top) continue;
    ++v.checked;
    double bound = 2 * m * kappa(static_cast<double>(alpha.norm(i)));
    double slack = bound - static_cast<double>(beta.distance_to(alpha.vertex(i)));
    if (slack < -kTol && v.pass) {
      v.pass = false;
      v.witness_path = alpha.vertices();
      v.witness_index = i;
      v.margin = slack;
    }
    if (v.pass) v.margin = std::min(v.margin, slack);
  }
  if (v.checked == 0) v.margin = 0;
  return v;
}

TrackingProfile fellow_traveling_profile(const GraphSpace& sp, const PathSeg& alpha, const PathSeg& beta,
                                         std::int64_t horizon, double threshold) {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  auto firsts = [&](const PathSeg& p) {
    std::vector<std::int64_t> at(static_cast<std::size_t>(horizon) + 1, -1);
    for (std::size_t i = 0; i < p.size(); ++i) {
      std::int64_t n = p.norm(i);
      if (n <= horizon && at[static_cast<std::size_t>(n)] < 0) at[static_cast<std::size_t>(n)] = static_cast<std::int64_t>(i);
    }
    if (at.back() < 0) throw std::out_of_range("path does not reach norm " + std::to_string(horizon));
    return at;
  };
  auto fa = firsts(alpha), fb = firsts(beta);
  TrackingProfile out;
  out.ratio.resize(static_cast<std::size_t>(horizon));
  for (std::int64_t r = 1; r <= horizon; ++r) {
    auto ia = static_cast<std::size_t>(fa[static_cast<std::size_t>(r)]);
    auto ib = static_cast<std::size_t>(fb[static_cast<std::size_t>(r)]);
    double d = static_cast<double>(sp.distance(alpha.vertex(ia), beta.vertex(ib)));
    out.ratio[static_cast<std::size_t>(r - 1)] = d / static_cast<double>(r);
  }
  for (std::int64_t lo = 1; lo <= horizon; lo *= 2) {
    double mx = 0;
    for (std::int64_t r = lo; r < 2 * lo && r <= horizon; ++r) mx = std::max(mx, out.ratio[static_cast<std::size_t>(r - 1)]);
    out.band_max.push_back(mx);
  }
  for (std::int64_t r = horizon / 2 + 1; r <= horizon; ++r)
    out.tail_max = std::max(out.tail_max, out.ratio[static_cast<std::size_t>(r - 1)]);
  bool decreasing = false;
  std::size_t nb = out.band_max.size();
  if (nb >= 3) {
    double a = out.band_max[nb - 3], b = out.band_max[nb - 2], c = out.band_max[nb - 1];
    decreasing = (a > b && b > c) || (a == 0 && b == 0 && c == 0);
  }
  out.equivalent = out.tail_max <= threshold && decreasing;
  return out;
}

std::optional<PathSeg> perturb_path(const GraphSpace& sp, const PathSeg& base, double q, double Q, Rng& rng,
                                    int retries) {
  const auto vs = base.vertices();
  double scale = 1;
  for (int attempt = 0; attempt <= retries; ++attempt, scale /= 2) {
    std::vector<Vertex> cur = vs;
    auto ops = 1 + rng.below(3);
    for (std::uint64_t op = 0; op < ops; ++op) {
      const std::size_t m = cur.size();
      auto spike_max = static_cast<std::int64_t>(std::floor(q * Q / 2 * scale));
      if (spike_max >= 1 && rng.coin(0.5)) {
        std::size_t i = rng.below(m);
        std::int64_t h = rng.range(1, spike_max);
        std::vector<Vertex> out{cur[i]};
        wander(sp, cur[i], h, rng, &out);
        std::vector<Vertex> ins(out.begin() + 1, out.end());
        for (std::size_t k = out.size() - 1; k-- > 0;) ins.push_back(out[k]);
        cur.insert(cur.begin() + static_cast<std::ptrdiff_t>(i) + 1, ins.begin(), ins.end());
        continue;
      }
      if (m < 3) continue;
      // local splice through a displaced waypoint
      double lg = std::log2(static_cast<double>(m - 1));
      auto span = static_cast<std::size_t>(std::floor(std::exp2(rng.uniform() * lg)));
      span = std::clamp<std::size_t>(span, 2, m - 1);
      std::size_t i = rng.below(m - span);
      std::size_t j = i + span;
      double room = (q - 1) / (q + 1) * static_cast<double>(span) / 2 + q * Q / 2;
      auto dmax = static_cast<std::int64_t>(std::floor(room * scale));
      if (dmax < 1) continue;
      Vertex w = wander(sp, cur[i + span / 2], rng.range(1, dmax), rng);
      auto a = sp.geodesic(cur[i], w).vertices();
      auto b = sp.geodesic(w, cur[j]).vertices();
      std::vector<Vertex> seg(a.begin(), a.end());
      seg.insert(seg.end(), b.begin() + 1, b.end());
      std::vector<Vertex> next(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(i));
      next.insert(next.end(), seg.begin(), seg.end());
      next.insert(next.end(), cur.begin() + static_cast<std::ptrdiff_t>(j) + 1, cur.end());
      cur = std::move(next);
    }
    PathSeg p = sp.make_path(std::move(cur));
    if (is_quasi_geodesic(p, q, Q).ok) {
      p.set_certificate({q, Q});
      return p;
    }
  }
  return std::nullopt;
}

std::vector<PathSeg> probe_family(const GraphSpace& sp, const Vertex& target, double q, double Q, std::size_t count,
                                  std::uint64_t seed) {
  if (q < 1 || Q < 0) throw std::domain_error("probe constants need q >= 1, Q >= 0");
  std::vector<PathSeg> out;
  if (count == 0) return out;
  PathSeg geo = sp.geodesic(sp.base(), target);
  if (!is_quasi_geodesic(geo, q, Q).ok) throw GenerationError("geodesic failed certification");
  out.push_back(geo);
  if (q == 1 && Q == 0) return out;
  std::vector<std::optional<PathSeg>> made(count);
  parallel_for(count - 1, [&](std::size_t k) {
    Rng rng(derive_seed(seed, k + 1));
    made[k + 1] = perturb_path(sp, geo, q, Q, rng);
  });
  std::unordered_set<std::uint64_t> seen{sequence_hash(geo)};
  for (std::size_t k = 1; k < count; ++k)
    if (made[k] && seen.insert(sequence_hash(*made[k])).second) out.push_back(*made[k]);
  return out;
}

Verdict test_kappa_morse(const GraphSpace& sp, const PathSeg& Z, const SublinearFn& kappa,
                         const SublinearFn& kappa_prime, const MorseGauge& gauge, const MorseTestParams& p) {
  const double m = gauge(p.q, p.Q);
  if (!(p.r > 0) || p.R < p.r) throw std::invalid_argument("need 0 < r <= R");
  if (!small_compared(m, p.r, kappa))
    throw PreconditionFailed("gauge value " + std::to_string(m) + " is not small compared to r = " + std::to_string(p.r));
  const auto R = static_cast<std::int64_t>(std::ceil(p.R));
  const std::size_t iz = first_time_at_norm(Z, R);
  const double kp = kappa_prime(static_cast<double>(R));
  const auto kp_steps = static_cast<std::int64_t>(std::floor(kp + kTol));

  struct Out {
    bool entered = false;
    double slack = std::numeric_limits<double>::infinity();
    std::optional<std::size_t> exit;
    PathSeg path;
  };
  std::vector<Out> res(p.probes);
  parallel_for(p.probes, [&](std::size_t k) {
    Rng rng(derive_seed(p.seed, k));
    Vertex target = wander(sp, Z.vertex(iz), rng.range(0, kp_steps), rng);
    PathSeg beta = sp.geodesic(sp.base(), target);
    if (k > 0 && !(p.q == 1 && p.Q == 0))
      if (auto alt = perturb_path(sp, beta, p.q, p.Q, rng)) beta = *alt;
    Out& o = res[k];
    std::size_t tR;
    try {
      tR = first_time_at_norm(beta, R);
    } catch (const std::out_of_range&) {
      return;
    }
    if (static_cast<double>(Z.distance_to(beta.vertex(tR))) > kp + kTol) return;
    o.entered = true;
    std::size_t tr = first_at_least(beta, p.r);
    for (std::size_t i = 0; i <= tr; ++i) {
      double s = m * kappa(static_cast<double>(beta.norm(i))) - static_cast<double>(Z.distance_to(beta.vertex(i)));
      if (s < o.slack) o.slack = s;
      if (s < -kTol) {
        o.exit = i;
        o.path = beta;
        return;
      }
    }
  });

  Verdict v;
  v.margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < res.size(); ++k) {
    if (!res[k].entered) continue;
    ++v.checked;
    if (res[k].exit && v.pass) {
      v.pass = false;
      v.witness_path = res[k].path.vertices();
      v.witness_index = *res[k].exit;
      v.margin = res[k].slack;
      v.note = "probe " + std::to_string(k) + " exits N_kappa(Z, " + std::to_string(m) + ")";
    }
    if (v.pass) v.margin = std::min(v.margin, res[k].slack);
  }
  if (v.checked == 0) throw Inconclusive("no probe satisfied the entry condition");
  if (v.pass) v.note = std::to_string(v.checked) + " probes entered, gauge " + std::to_string(m);
  return v;
}

Projection nearest_projection(const PathSeg& Z) {
  return [Z](const Vertex& x) { return nearest_point_projection(Z, x).indices; };
}

double projection_diameter(const GraphSpace& sp, const PathSeg& Z, std::vector<std::size_t> idx) {
  (void)sp;
  if (idx.empty()) return 0;
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  const auto& c = Z.certificate();
  if (c && c->q == 1 && c->Q == 0) return static_cast<double>(idx.back() - idx.front());
  std::int64_t d = 0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) d = std::max(d, Z.dist(idx[a], idx[b]));
  return static_cast<double>(d);
}

bool bands_stable(const std::vector<BandStat>& bands, double factor, std::size_t min_bands) {
  std::vector<double> vals;
  for (auto& b : bands)
    if (b.count > 0) vals.push_back(b.value);
  if (vals.size() < min_bands) return false;
  std::size_t half = vals.size() / 2;
  double lower = *std::max_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(half));
  double upper = *std::max_element(vals.begin() + static_cast<std::ptrdiff_t>(half), vals.end());
  return upper <= factor * lower + kTol;
}

namespace {

std::vector<std::int64_t> band_starts(const SampleParams& p) {
  std::vector<std::int64_t> out;
  for (std::int64_t lo = std::int64_t{1} << dyadic(std::max<std::int64_t>(1, p.min_norm)); 2 * lo - 1 <= p.max_norm; lo *= 2)
    if (lo >= p.min_norm) out.push_back(lo);
  if (out.empty()) throw std::invalid_argument("no full dyadic band between min_norm and max_norm");
  return out;
}

}  // namespace

ContractionFit test_kappa_contracting(const GraphSpace& sp, const PathSeg& Z, const Projection& pi,
                                      const SublinearFn& kappa, double C1, const SampleParams& p) {
  if (!(C1 > 0 && C1 <= 1)) throw std::domain_error("C1 must lie in (0, 1]");
  auto starts = band_starts(p);
  const std::size_t nb = starts.size();
  struct Out {
    bool eligible = false;
    double ratio = 0;
    Vertex x, y;
  };
  std::vector<Out> res(p.samples);
  parallel_for(p.samples, [&](std::size_t i) {
    Rng rng(derive_seed(p.seed, i));
    std::size_t b = i % nb;
    Vertex x = (i / nb) % 4 < 2 ? sample_band(sp, starts[b], 2 * starts[b], rng)
                                : sample_near(sp, Z, starts[b], 2 * starts[b], rng);
    std::int64_t dx = Z.distance_to(x);
    auto smax = static_cast<std::int64_t>(std::floor(C1 * static_cast<double>(dx) + kTol));
    if (smax < 1) return;
    std::int64_t s = rng.range(1, smax);
    Vertex y;
    if ((i / nb) % 2 == 0) {
      y = wander(sp, x, s, rng);
    } else {
      Vertex w = sample_band(sp, starts[b], 2 * starts[b], rng);
      PathSeg g = sp.geodesic(x, w);
      y = g.vertex(std::min<std::size_t>(static_cast<std::size_t>(s), g.length()));
    }
    auto idx = pi(x);
    auto iy = pi(y);
    idx.insert(idx.end(), iy.begin(), iy.end());
    Out& o = res[i];
    o.eligible = true;
    o.ratio = projection_diameter(sp, Z, std::move(idx)) / kappa(static_cast<double>(sp.norm(x)));
    o.x = std::move(x);
    o.y = std::move(y);
  });

  ContractionFit fit;
  fit.C1 = C1;
  for (auto lo : starts) fit.bands.push_back({lo, 0, 0});
  std::size_t best = p.samples;
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (!res[i].eligible) continue;
    ++fit.pairs;
    auto& band = fit.bands[i % nb];
    ++band.count;
    band.value = std::max(band.value, res[i].ratio);
    if (best == p.samples || res[i].ratio > res[best].ratio) best = i;
  }
  if (fit.pairs < 30) throw Inconclusive("only " + std::to_string(fit.pairs) + " eligible pairs");
  fit.C2 = res[best].ratio;
  fit.verdict.pass = bands_stable(fit.bands);
  fit.verdict.margin = fit.C2;
  fit.verdict.checked = fit.pairs;
  fit.verdict.witness_path = {res[best].x, res[best].y};
  fit.verdict.note = fit.verdict.pass ? "C2 stable across norm bands" : "C2 grows across norm bands";
  return fit;
}

ProjectionFit fit_kappa_projection(const GraphSpace& sp, const PathSeg& Z, const Projection& pi,
                                   const SublinearFn& kappa, const SampleParams& p, double D2_cap) {
  auto starts = band_starts(p);
  const std::size_t nb = starts.size();
  struct Row {
    double dxz, diam, kx;
  };
  struct Out {
    std::vector<Row> rows;
    double dxZ = 0, diam_x = 0, kx = 1;
    Vertex x;
  };
  std::vector<Out> res(p.samples);
  parallel_for(p.samples, [&](std::size_t i) {
    Rng rng(derive_seed(p.seed, i));
    std::size_t b = i % nb;
    Vertex x = (i / nb) % 2 == 0 ? sample_band(sp, starts[b], 2 * starts[b], rng)
                                 : sample_near(sp, Z, starts[b], 2 * starts[b], rng);
    auto px = pi(x);
    if (px.empty()) throw std::logic_error("projection returned an empty set");
    Out& o = res[i];
    o.kx = kappa(static_cast<double>(sp.norm(x)));
    std::size_t lo = *std::min_element(px.begin(), px.end()), hi = *std::max_element(px.begin(), px.end());
    std::size_t zs[3] = {static_cast<std::size_t>(rng.below(Z.size())), lo, hi};
    std::int64_t off = rng.range(-static_cast<std::int64_t>(Z.size() / 4), static_cast<std::int64_t>(Z.size() / 4));
    zs[2] = static_cast<std::size_t>(std::clamp<std::int64_t>(static_cast<std::int64_t>(hi) + off, 0,
                                                              static_cast<std::int64_t>(Z.size()) - 1));
    for (auto iz : zs) {
      auto idx = px;
      idx.push_back(iz);
      o.rows.push_back({static_cast<double>(sp.distance(x, Z.vertex(iz))), projection_diameter(sp, Z, idx), o.kx});
    }
    std::int64_t far = 0;
    for (auto k : px) far = std::max(far, sp.distance(x, Z.vertex(k)));
    o.dxZ = static_cast<double>(Z.distance_to(x));
    o.diam_x = std::max(static_cast<double>(far), projection_diameter(sp, Z, px));
    o.x = std::move(x);
  });

  static const double kD1Grid[] = {1, 1.25, 1.5, 2, 2.5, 3, 4};
  ProjectionFit fit;
  fit.samples = p.samples;
  double best_sum = std::numeric_limits<double>::infinity();
  std::size_t witness = 0;
  for (double D1 : kD1Grid) {
    double D2 = 0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < res.size(); ++i)
      for (auto& row : res[i].rows) {
        double need = (row.diam - D1 * row.dxz) / row.kx;
        if (need > D2) { D2 = need; arg = i; }
      }
    if (D1 + D2 < best_sum - kTol) {
      best_sum = D1 + D2;
      fit.D1 = D1;
      fit.D2 = D2;
      witness = arg;
    }
  }
  fit.derived_worst = -std::numeric_limits<double>::infinity();
  for (auto& o : res)
    fit.derived_worst = std::max(fit.derived_worst, o.diam_x - ((fit.D1 + 1) * o.dxZ + fit.D2 * o.kx));
  fit.verdict.checked = p.samples;
  fit.verdict.margin = D2_cap - fit.D2;
  if (fit.D2 > D2_cap) {
    fit.verdict.pass = false;
    fit.verdict.witness_path = {res[witness].x};
    fit.verdict.note = "D2 exceeds cap " + std::to_string(D2_cap);
  } else if (fit.derived_worst > kTol) {
    fit.verdict.pass = false;
    fit.verdict.note = "diam({x} u pi(x)) bound violated";
  } else {
    fit.verdict.note = "fit within caps";
  }
  return fit;
}

PathSeg surgery(const GraphSpace& sp, const PathSeg& gamma, const PathSeg& alpha, double q, double Q,
                std::int64_t r, std::int64_t R) {
  if (r < 1 || R < r) throw std::invalid_argument("surgery needs 1 <= r <= R");
  const std::size_t igr = first_time_at_norm(gamma, r);
  if (static_cast<double>(alpha.distance_to(gamma.vertex(igr))) > static_cast<double>(r) / 2)
    throw PreconditionFailed("d(gamma_r, alpha) > r/2");
  const std::size_t ia = first_time_at_norm(alpha, r / 2);
  const std::size_t igR = first_time_at_norm(gamma, R);
  PathSeg head = alpha.prefix(ia);
  Vertex y = alpha.vertex(ia);
  PathSeg middle;
  auto on = nearest_point_projection(gamma.prefix(igR), y);
  if (on.distance == 0) middle = gamma.slice(on.indices.front(), igR);
  else middle = sp.geodesic(y, gamma.vertex(igR));
  PathSeg tail = gamma.slice(igR, gamma.size() - 1);
  PathSeg out = head.then(middle).then(tail);
  const std::size_t tail_from = head.length() + middle.length();
  for (std::size_t i = 0; i < tail_from; ++i)
    if (out.norm(i) > R) throw SurgeryError("spliced segment leaves B(o, R) at index " + std::to_string(i));
  auto chk = is_quasi_geodesic(out, 9 * q, Q);
  if (!chk.ok) throw SurgeryError("splice is not (9q, Q)-quasi-geodesic; raise R", chk);
  out.set_certificate({9 * q, Q});
  return out;
}

namespace {

Verdict cone_check(const std::vector<std::pair<PathSeg, double>>& probes, const PathSeg& beta,
                   const SublinearFn& kappa, double r) {
  Verdict v;
  v.margin = std::numeric_limits<double>::infinity();
  for (auto& [alpha, m] : probes) {
    std::size_t tr = first_at_least(alpha, r);
    ++v.checked;
    for (std::size_t i = 0; i <= tr; ++i) {
      double s = m * kappa(static_cast<double>(alpha.norm(i))) - static_cast<double>(beta.distance_to(alpha.vertex(i)));
      if (s < -kTol) {
        v.pass = false;
        v.margin = s;
        v.witness_path = alpha.vertices();
        v.witness_index = i;
        v.note = "probe leaves N_kappa(beta, " + std::to_string(m) + ")";
        return v;
      }
      v.margin = std::min(v.margin, s);
    }
  }
  if (v.checked == 0) {
    v.margin = 0;
    v.note = "vacuous: no admissible (q, Q)";
  }
  return v;
}

std::vector<std::pair<PathSeg, double>> cone_probes(const GraphSpace& sp, const Vertex& target,
                                                    const MorseGauge& gauge, const SublinearFn& kappa,
                                                    const ConeParams& p) {
  std::vector<std::pair<PathSeg, double>> out;
  for (std::size_t k = 0; k < p.qQ.size(); ++k) {
    auto [q, Q] = p.qQ[k];
    double m = gauge(q, Q);
    if (!small_compared(m, p.r, kappa)) continue;
    for (auto& a : probe_family(sp, target, q, Q, p.probes, derive_seed(p.seed, k))) out.emplace_back(a, m);
  }
  return out;
}

}  // namespace

Verdict cone_membership(const GraphSpace& sp, const Vertex& candidate, const PathSeg& beta, const MorseGauge& gauge,
                        const SublinearFn& kappa, const ConeParams& p) {
  if (static_cast<double>(sp.norm(candidate)) < p.r - kTol) {
    Verdict v;
    v.pass = false;
    v.note = "norm below r";
    v.witness_path = {candidate};
    return v;
  }
  return cone_check(cone_probes(sp, candidate, gauge, kappa, p), beta, kappa, p.r);
}

Verdict cone_membership(const GraphSpace& sp, const PathSeg& candidate, const PathSeg& beta, const MorseGauge& gauge,
                        const SublinearFn& kappa, const ConeParams& p) {
  auto probes = cone_probes(sp, candidate.back(), gauge, kappa, p);
  const auto& c = candidate.certificate();
  double q = c ? c->q : 1, Q = c ? c->Q : 0;
  double m = gauge(q, Q);
  if (small_compared(m, p.r, kappa)) probes.insert(probes.begin(), {candidate, m});
  return cone_check(probes, beta, kappa, p.r);
}

ConvergenceReport sequence_convergence(const GraphSpace& sp, const std::vector<Vertex>& xs, const PathSeg& gamma,
                                       double C, const SublinearFn& kappa, const std::vector<double>& r_schedule,
                                       const MorseGauge& gauge, std::size_t probes, std::uint64_t seed) {
  for (std::size_t n = 0; n < xs.size(); ++n) {
    double bound = C * kappa(static_cast<double>(sp.norm(xs[n])));
    if (static_cast<double>(gamma.distance_to(xs[n])) > bound + kTol)
      throw PreconditionFailed("d(x_n, gamma) > C kappa(|x_n|) at n = " + std::to_string(n), n);
  }
  ConvergenceReport rep;
  rep.radii = r_schedule;
  std::vector<std::vector<char>> member(r_schedule.size(), std::vector<char>(xs.size(), 0));
  parallel_for(r_schedule.size() * xs.size(), [&](std::size_t k) {
    std::size_t ri = k / xs.size(), n = k % xs.size();
    ConeParams cp;
    cp.r = r_schedule[ri];
    cp.probes = probes;
    cp.seed = derive_seed(seed, k);
    member[ri][n] = cone_membership(sp, xs[n], gamma, gauge, kappa, cp).pass ? 1 : 0;
  });
  for (std::size_t ri = 0; ri < r_schedule.size(); ++ri) {
    std::optional<std::size_t> n0;
    for (std::size_t n = xs.size(); n-- > 0;) {
      if (!member[ri][n]) break;
      n0 = n;
    }
    rep.n0.push_back(n0);
    ++rep.verdict.checked;
    if (!n0 && rep.verdict.pass) {
      rep.verdict.pass = false;
      rep.verdict.note = "no tail inside U(gamma, " + std::to_string(r_schedule[ri]) + ")";
    }
  }
  return rep;
}

std::vector<std::string> envelope_tags() { return {"1", "log", "log^2", "t^0.25", "t^0.333333", "sqrt"}; }

DiameterProfile projection_diameter_profile(const GraphSpace& sp, const PathSeg& Z, const Projection& pi,
                                            const std::vector<std::pair<Vertex, std::int64_t>>& balls) {
  DiameterProfile prof;
  prof.rows.resize(balls.size());
  parallel_for(balls.size(), [&](std::size_t k) {
    auto& [c, rad] = balls[k];
    DiameterRow& row = prof.rows[k];
    row.radius = rad;
    row.center_norm = sp.norm(c);
    row.center = sp.format(c);
    if (Z.distance_to(c) <= rad) {
      row.skipped = true;
      return;
    }
    std::vector<std::size_t> idx;
    for (auto& v : sp.ball(c, rad, 1u << 20)) {
      auto pv = pi(v);
      idx.insert(idx.end(), pv.begin(), pv.end());
    }
    row.diameter = projection_diameter(sp, Z, std::move(idx));
  });
  for (auto& tag : envelope_tags()) {
    SublinearFn f = kappa_from_tag(tag);
    std::vector<BandStat> bands;
    double mx = 0;
    for (auto& row : prof.rows) {
      if (row.skipped) continue;
      double ratio = row.diameter / f(static_cast<double>(row.center_norm));
      std::int64_t lo = std::int64_t{1} << dyadic(row.center_norm);
      auto it = std::find_if(bands.begin(), bands.end(), [&](const BandStat& b) { return b.lo == lo; });
      if (it == bands.end()) {
        bands.push_back({lo, 0, 0});
        it = bands.end() - 1;
      }
      it->value = std::max(it->value, ratio);
      ++it->count;
      mx = std::max(mx, ratio);
    }
    std::sort(bands.begin(), bands.end(), [](const BandStat& a, const BandStat& b) { return a.lo < b.lo; });
    if (bands_stable(bands, 1.25, 3)) {
      prof.envelope = tag;
      prof.envelope_const = mx;
      break;
    }
  }
  prof.verdict.pass = !prof.envelope.empty();
  prof.verdict.checked = prof.rows.size();
  prof.verdict.note = prof.verdict.pass ? "envelope " + prof.envelope : "no sublinear envelope";
  return prof;
}

}  // namespace coarselab
