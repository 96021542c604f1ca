#pragma once

// Nested covers M_{d,k} of the critical omega-limit set by towers of
// intervals whose endpoints are points of the critical orbit.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fibtower/bigreal.hpp"
#include "fibtower/errors.hpp"
#include "fibtower/kneading.hpp"
#include "fibtower/tent.hpp"

namespace fibtower {

// Tower indices present at level k: 1, then max(d-k+1, 2)..d.
inline std::vector<int> tower_indices(int d, int k) {
  if (k < 0) throw std::domain_error("cover level must be >= 0");
  std::vector<int> out{1};
  if (k == 0) return out;
  for (int i = std::max(d - k + 1, 2); i <= d; ++i) out.push_back(i);
  return out;
}

inline bool tower_exists(int d, int i, int k) {
  if (k < 0 || i < 1 || i > d) return false;
  if (i == 1) return true;
  return k >= 1 && i >= std::max(d - k + 1, 2);
}

inline std::int64_t tower_height(int d, int i, int k) {
  if (!tower_exists(d, i, k))
    throw std::out_of_range("no tower " + std::to_string(i) + " at level " + std::to_string(k));
  const Combinatorics& c = combinatorics(d);
  return i == 1 ? c.S(c.Q(k + 1)) : c.S(c.Q(k + i - d));
}

// Orbit indices of the endpoints of I_k (unordered).
inline std::pair<std::int64_t, std::int64_t> interval_I_indices(int d, int k) {
  if (k < 0) throw std::domain_error("I_k needs k >= 0");
  if (k == 0) return {2, 1};
  const Combinatorics& c = combinatorics(d);
  int j = (k - 1) % d + 1;
  return {c.S(k), c.S(k - j + d + 1)};
}

// Orbit indices of the endpoints of J_{i,k} (unordered).
inline std::pair<std::int64_t, std::int64_t> base_J_indices(int d, int i, int k) {
  if (!tower_exists(d, i, k))
    throw std::out_of_range("no base J_{" + std::to_string(i) + "," + std::to_string(k) + "}");
  if (i == 1) return interval_I_indices(d, k);
  const Combinatorics& c = combinatorics(d);
  std::int64_t m = k - 1 + i;
  return {c.S(m) + c.S(c.Q(m)), c.S(c.Q(m))};
}

// An interval [c_lo, c_hi] between two orbit points, lo/hi being orbit indices
// with c_lo < c_hi certified.
struct Floor {
  std::int64_t lo = 0, hi = 0;
  bool has_endpoint(std::int64_t m) const { return m == lo || m == hi; }
};

inline Floor ordered_floor(const CriticalOrbit& orb, std::int64_t p, std::int64_t q) {
  const RInterval& x = orb[p];
  const RInterval& y = orb[q];
  if (x.certainly_less(y)) return {p, q};
  if (y.certainly_less(x)) return {q, p};
  throw PrecisionExhausted("cannot order c_" + std::to_string(p) + " and c_" + std::to_string(q));
}

inline RInterval floor_interval(const CriticalOrbit& orb, const Floor& f) {
  return RInterval(orb[f.lo].lo(), orb[f.hi].hi());
}

enum class Where { inside, endpoint, outside, unknown };

// Position of the orbit point c_m relative to the closed floor f.
inline Where locate(const CriticalOrbit& orb, std::int64_t m, const Floor& f) {
  if (f.has_endpoint(m)) return Where::endpoint;
  const RInterval& x = orb[m];
  const RInterval& a = orb[f.lo];
  const RInterval& b = orb[f.hi];
  if (a.hi() < x.lo() && x.hi() < b.lo()) return Where::inside;
  if (x.hi() < a.lo() || b.hi() < x.lo()) return Where::outside;
  return Where::unknown;
}

// Whether the closed floor g is contained in f; nullopt when undecided.
inline std::optional<bool> floor_contains(const CriticalOrbit& orb, const Floor& f, const Floor& g) {
  Where wl = locate(orb, g.lo, f), wh = locate(orb, g.hi, f);
  if (wl == Where::outside || wh == Where::outside) return false;
  if (wl == Where::unknown || wh == Where::unknown) return std::nullopt;
  return true;
}

// Disjointness of two floors; nullopt when undecided.
inline std::optional<bool> floors_disjoint(const CriticalOrbit& orb, const Floor& f, const Floor& g) {
  if (f.has_endpoint(g.lo) || f.has_endpoint(g.hi)) return false;
  if (orb[f.hi].hi() < orb[g.lo].lo() || orb[g.hi].hi() < orb[f.lo].lo()) return true;
  if (orb[f.lo].hi() < orb[g.hi].lo() && orb[g.lo].hi() < orb[f.hi].lo()) return false;
  return std::nullopt;
}

// 0 in the floor: certified through the signs of the endpoints.
inline bool floor_contains_turning_point(const CriticalOrbit& orb, const Floor& f) {
  return orb.symbol(f.lo) != orb.symbol(f.hi) || orb.symbol(f.lo) == Symbol::crit ||
         orb.symbol(f.hi) == Symbol::crit;
}

struct Tower {
  int index = 1;
  int level = 0;
  std::int64_t height = 0;
  std::vector<Floor> floors;  // floors[n] = f^n(J_{i,k})
  const Floor& base() const { return floors.front(); }
  const Floor& top() const { return floors.back(); }
};

class Cover {
 public:
  Cover(int d, int k, std::vector<Tower> towers, std::shared_ptr<const CriticalOrbit> orbit)
      : d_(d), k_(k), towers_(std::move(towers)), orbit_(std::move(orbit)) {}

  int d() const { return d_; }
  int k() const { return k_; }
  const std::vector<Tower>& towers() const { return towers_; }
  const Tower& tower(int i) const {
    for (const auto& t : towers_)
      if (t.index == i) return t;
    throw std::out_of_range("cover level " + std::to_string(k_) + " has no tower " + std::to_string(i));
  }
  bool has_tower(int i) const { return tower_exists(d_, i, k_); }
  const CriticalOrbit& orbit() const { return *orbit_; }
  std::shared_ptr<const CriticalOrbit> orbit_ptr() const { return orbit_; }
  std::int64_t floor_count() const {
    std::int64_t n = 0;
    for (const auto& t : towers_) n += static_cast<std::int64_t>(t.floors.size());
    return n;
  }
  RInterval interval(const Floor& f) const { return floor_interval(*orbit_, f); }

 private:
  int d_, k_;
  std::vector<Tower> towers_;
  std::shared_ptr<const CriticalOrbit> orbit_;
};

inline RInterval interval_I(const CriticalOrbit& orb, int d, int k) {
  auto [p, q] = interval_I_indices(d, k);
  Floor f = ordered_floor(orb, p, q);
  if (!floor_contains_turning_point(orb, f))
    throw MonotonicityFault("I_" + std::to_string(k) + " does not contain the turning point");
  return floor_interval(orb, f);
}

inline RInterval base_interval_J(const CriticalOrbit& orb, int d, int i, int k) {
  auto [p, q] = base_J_indices(d, i, k);
  return floor_interval(orb, ordered_floor(orb, p, q));
}

// Orbit length needed by build_cover at level k: the top-floor images reach
// index S(k+d) + S(k) at most.
inline std::int64_t cover_orbit_need(int d, int k) {
  std::int64_t need = 2;
  for (int i : tower_indices(d, k)) {
    auto [p, q] = base_J_indices(d, i, k);
    need = std::max(need, std::max(p, q) + tower_height(d, i, k));
  }
  return need;
}

inline Cover build_cover(const Realization& r, int k) {
  const int d = r.d();
  const CriticalOrbit& orb = *r.orbit;
  if (orb.length() < cover_orbit_need(d, k))
    throw PrecisionExhausted("orbit too short for cover level " + std::to_string(k));
  const Combinatorics& c = combinatorics(d);
  std::vector<Tower> towers;
  for (int i : tower_indices(d, k)) {
    Tower t;
    t.index = i;
    t.level = k;
    t.height = tower_height(d, i, k);
    auto [p, q] = base_J_indices(d, i, k);
    t.floors.reserve(static_cast<std::size_t>(t.height));
    t.floors.push_back(ordered_floor(orb, p, q));
    std::int64_t fp = p, fq = q;
    if (i == 1 && t.height > 1) {
      // f(I_k) = [c_{S(k)+1}, c_1]: the far endpoint must be c_{S(k)}.
      Floor img = ordered_floor(orb, c.S(k) + 1, p == c.S(k) ? q + 1 : p + 1);
      if (img.lo != c.S(k) + 1)
        throw MonotonicityFault("image of I_" + std::to_string(k) + " not bounded by c_{S(k)+1}");
      fp = c.S(k);
      fq = 0;
    }
    for (std::int64_t n = 1; n < t.height; ++n) {
      const Floor& prev = t.floors.back();
      if (!(i == 1 && n == 1) && floor_contains_turning_point(orb, prev))
        throw MonotonicityFault("floor " + std::to_string(n - 1) + " of tower " + std::to_string(i) +
                                " at level " + std::to_string(k) + " contains the turning point");
      t.floors.push_back(ordered_floor(orb, fp + n, fq + n));
    }
    towers.push_back(std::move(t));
  }
  return Cover(d, k, std::move(towers), r.orbit);
}

// Image of a top floor; when the floor holds 0 the image is [min f(ends), c_1].
inline bool top_image_contains_turning_point(const CriticalOrbit& orb, const Floor& top) {
  if (floor_contains_turning_point(orb, top))
    return orb.symbol(top.lo + 1) == Symbol::zero || orb.symbol(top.hi + 1) == Symbol::zero;
  return floor_contains_turning_point(orb, Floor{top.lo + 1, top.hi + 1});
}

enum class Status { pass, fail, not_applicable };

inline const char* status_name(Status s) {
  return s == Status::pass ? "pass" : s == Status::fail ? "fail" : "not_applicable";
}

struct CertificateResult {
  std::string name;
  int k = 0;
  Status status = Status::pass;
  std::string where;  // failing coordinates, empty on success
  std::int64_t checked = 0;
};

struct CoverReport {
  int d = 2;
  int k_max = 0;
  std::int64_t n_test = 0;
  std::vector<CertificateResult> results;
  bool passed() const {
    return std::none_of(results.begin(), results.end(),
                        [](const CertificateResult& r) { return r.status == Status::fail; });
  }
};

namespace detail {

inline std::string coord(int k, int i, std::int64_t n) {
  return "k=" + std::to_string(k) + ",i=" + std::to_string(i) + ",floor=" + std::to_string(n);
}

// Floor of level k expected to contain floor n of tower i at level k+1.
inline std::optional<std::pair<int, std::int64_t>> predicted_parent(int d, int i, int k,
                                                                    std::int64_t n) {
  if (i == 1) {
    std::int64_t h1 = tower_height(d, 1, k);
    if (n < h1) return std::make_pair(1, n);
    if (tower_exists(d, 2, k)) return std::make_pair(2, n - h1);
    return std::nullopt;
  }
  if (i == d) return std::make_pair(1, n);
  if (tower_exists(d, i + 1, k)) return std::make_pair(i + 1, n);
  return std::nullopt;
}

}  // namespace detail

inline CertificateResult check_nesting(const Cover& lower, const Cover& upper) {
  const CriticalOrbit& orb = lower.orbit();
  CertificateResult r{"nesting", lower.k(), Status::pass, "", 0};
  for (const Tower& t : upper.towers())
    for (std::int64_t n = 0; n < static_cast<std::int64_t>(t.floors.size()); ++n) {
      const Floor& g = t.floors[static_cast<std::size_t>(n)];
      ++r.checked;
      bool found = false, undecided = false;
      if (auto par = detail::predicted_parent(lower.d(), t.index, lower.k(), n)) {
        const Tower& pt = lower.tower(par->first);
        if (par->second < static_cast<std::int64_t>(pt.floors.size())) {
          auto v = floor_contains(orb, pt.floors[static_cast<std::size_t>(par->second)], g);
          found = v.value_or(false);
          undecided = !v.has_value();
        }
      }
      for (std::size_t ti = 0; !found && ti < lower.towers().size(); ++ti)
        for (const Floor& f : lower.towers()[ti].floors) {
          auto v = floor_contains(orb, f, g);
          if (!v) undecided = true;
          if (v.value_or(false)) {
            found = true;
            break;
          }
        }
      if (!found) {
        if (undecided)
          throw PrecisionExhausted("nesting undecided at " + detail::coord(upper.k(), t.index, n));
        r.status = Status::fail;
        r.where = detail::coord(upper.k(), t.index, n);
        return r;
      }
    }
  return r;
}

inline CertificateResult check_floor_count(const Cover& cv) {
  CertificateResult r{"floor_count", cv.k(), Status::pass, "", 0};
  r.checked = cv.floor_count();
  if (cv.k() < cv.d() - 1) {
    r.status = Status::not_applicable;
    return r;
  }
  if (cv.floor_count() != cutting_time(cv.d(), cv.k())) {
    r.status = Status::fail;
    r.where = "k=" + std::to_string(cv.k()) + ",count=" + std::to_string(cv.floor_count());
  }
  return r;
}

// 0 lies in J_{1,k} and in no other floor, and in the image of every top floor.
inline CertificateResult check_turning_point(const Cover& cv) {
  const CriticalOrbit& orb = cv.orbit();
  CertificateResult r{"turning_point", cv.k(), Status::pass, "", 0};
  for (const Tower& t : cv.towers()) {
    for (std::int64_t n = 0; n < static_cast<std::int64_t>(t.floors.size()); ++n) {
      ++r.checked;
      bool has = floor_contains_turning_point(orb, t.floors[static_cast<std::size_t>(n)]);
      bool want = t.index == 1 && n == 0;
      if (has != want) {
        r.status = Status::fail;
        r.where = detail::coord(cv.k(), t.index, n);
        return r;
      }
    }
    if (!top_image_contains_turning_point(orb, t.top())) {
      r.status = Status::fail;
      r.where = detail::coord(cv.k(), t.index, t.height - 1) + ",image";
      return r;
    }
  }
  return r;
}

// Floors of each tower pairwise disjoint: sorted by position, consecutive
// floors must be separated by a certified gap.
inline CertificateResult check_disjoint_floors(const Cover& cv) {
  const CriticalOrbit& orb = cv.orbit();
  CertificateResult r{"disjoint_floors", cv.k(), Status::pass, "", 0};
  if (cv.k() < 2 * cv.d() - 1) {
    r.status = Status::not_applicable;
    return r;
  }
  for (const Tower& t : cv.towers()) {
    std::vector<std::size_t> order(t.floors.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> key;
    for (const Floor& f : t.floors) key.push_back(orb[f.lo].mid_double());
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return key[x] != key[y] ? key[x] < key[y] : orb[t.floors[x].lo].lo() < orb[t.floors[y].lo].lo();
    });
    for (std::size_t m = 0; m + 1 < order.size(); ++m) {
      ++r.checked;
      auto v = floors_disjoint(orb, t.floors[order[m]], t.floors[order[m + 1]]);
      std::string at = detail::coord(cv.k(), t.index, static_cast<std::int64_t>(order[m])) + "/" +
                       std::to_string(order[m + 1]);
      if (!v) throw PrecisionExhausted("disjointness undecided at " + at);
      if (!*v) {
        r.status = Status::fail;
        r.where = at;
        return r;
      }
    }
  }
  return r;
}

inline CertificateResult check_orbit_membership(const Cover& cv, std::int64_t n_test) {
  const CriticalOrbit& orb = cv.orbit();
  CertificateResult r{"orbit_membership", cv.k(), Status::pass, "", 0};
  for (std::int64_t n = 1; n <= n_test; ++n) {
    ++r.checked;
    bool in = false, unknown = false;
    for (const Tower& t : cv.towers()) {
      for (const Floor& f : t.floors) {
        Where w = locate(orb, n, f);
        if (w == Where::inside || w == Where::endpoint) {
          in = true;
          break;
        }
        if (w == Where::unknown) unknown = true;
      }
      if (in) break;
    }
    if (!in) {
      if (unknown) throw PrecisionExhausted("membership of c_" + std::to_string(n) + " undecided");
      r.status = Status::fail;
      r.where = "k=" + std::to_string(cv.k()) + ",n=" + std::to_string(n);
      return r;
    }
  }
  return r;
}

// Orbit length needed by verify_cover_certificates(k_max).
inline std::int64_t certificate_orbit_need(int d, int k_max) {
  std::int64_t need = cover_orbit_need(d, k_max + 1);
  return std::max(need, cutting_time(d, k_max + 1));
}

// Runtime certificates for the covers at every level 0..k_max.
// n_test <= 0 selects S(k_max+1) - 1.
inline CoverReport verify_cover_certificates(const Realization& r, int k_max, std::int64_t n_test = 0) {
  const int d = r.d();
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  CoverReport rep;
  rep.d = d;
  rep.k_max = k_max;
  rep.n_test = n_test > 0 ? n_test : cutting_time(d, k_max + 1) - 1;
  Cover cur = build_cover(r, 0);
  for (int k = 0; k <= k_max; ++k) {
    Cover next = build_cover(r, k + 1);
    rep.results.push_back(check_nesting(cur, next));
    rep.results.push_back(check_floor_count(cur));
    rep.results.push_back(check_turning_point(cur));
    rep.results.push_back(check_disjoint_floors(cur));
    rep.results.push_back(check_orbit_membership(cur, rep.n_test));
    cur = std::move(next);
  }
  return rep;
}

struct SplitCertificate {
  int k = 0;
  Status containment = Status::fail;
  Status disjointness = Status::not_applicable;
};

// I_{k+d}^{S(k)} = [c_{S(k)}, c_{S(k)+S(k+d)}] lies in I_k, and for k >= d-1
// misses I_{k+1}.
inline SplitCertificate verify_split(const Realization& r, int k) {
  const int d = r.d();
  const CriticalOrbit& orb = *r.orbit;
  const Combinatorics& c = combinatorics(d);
  SplitCertificate cert;
  cert.k = k;
  Floor piece = ordered_floor(orb, c.S(k), c.S(k) + c.S(k + d));
  auto [p, q] = interval_I_indices(d, k);
  Floor ik = ordered_floor(orb, p, q);
  auto in = floor_contains(orb, ik, piece);
  if (!in) throw PrecisionExhausted("split containment undecided at k=" + std::to_string(k));
  cert.containment = *in ? Status::pass : Status::fail;
  if (k >= d - 1) {
    auto [p1, q1] = interval_I_indices(d, k + 1);
    Floor next = ordered_floor(orb, p1, q1);
    auto v = floors_disjoint(orb, piece, next);
    if (!v) throw PrecisionExhausted("split disjointness undecided at k=" + std::to_string(k));
    cert.disjointness = *v ? Status::pass : Status::fail;
  }
  return cert;
}

}  // namespace fibtower
