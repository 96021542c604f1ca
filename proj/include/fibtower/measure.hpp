#pragma once

// The unique invariant measure of the adic system pushed to the covers:
// cylinders of level k into v_k(l) weigh beta^{-(k+l-1)}, where beta is the
// root of x^d - x^{d-1} - 1 in (1, 2).

#include <cstdint>
#include <string>
#include <vector>

#include "fibtower/adic.hpp"
#include "fibtower/bigreal.hpp"
#include "fibtower/covers.hpp"
#include "fibtower/kneading.hpp"
#include "fibtower/tent.hpp"

namespace fibtower {

namespace detail {

// Sign of x^d - x^{d-1} - 1 over the interval x; 0 when undecided.
inline int perron_poly_sign(int d, const RInterval& x) {
  RInterval one = from_int(1, x.precision());
  RInterval v = x.pow(static_cast<unsigned long>(d - 1)) * (x - one) - one;
  if (v.positive()) return 1;
  if (v.negative()) return -1;
  return 0;
}

}  // namespace detail

// Enclosure of beta_d of width about 2^{-prec}; the polynomial increases on
// [1, 2], so bisection on certified signs is enough.
inline RInterval perron_root(int d, mpfr_prec_t prec = 256) {
  if (d < 2) throw std::domain_error("d must be >= 2");
  const mpfr_prec_t p = prec + 16;
  BigReal lo(1, p), hi(2, p), mid(p);
  for (mpfr_prec_t it = 0; it < prec + 2; ++it) {
    mpfr_add(mid.get(), lo.get(), hi.get(), MPFR_RNDN);
    mpfr_div_2ui(mid.get(), mid.get(), 1, MPFR_RNDN);
    int s = detail::perron_poly_sign(d, RInterval::point(mid));
    if (s > 0)
      hi = mid;
    else if (s < 0)
      lo = mid;
    else
      break;
  }
  return RInterval(lo, hi);
}

// beta^n = sum_j coef[j] beta^j with nonnegative integers, from beta^d = beta^{d-1} + 1.
inline std::vector<std::int64_t> reduce_power(int d, std::int64_t n) {
  if (n < 0) throw std::domain_error("reduce_power needs n >= 0");
  std::vector<std::int64_t> c(static_cast<std::size_t>(d), 0);
  c[0] = 1;
  for (std::int64_t step = 0; step < n; ++step) {
    std::int64_t top = c[static_cast<std::size_t>(d - 1)];
    for (int j = d - 1; j >= 1; --j) c[j] = c[j - 1];
    c[0] = top;
    c[static_cast<std::size_t>(d - 1)] = checked_add(c[static_cast<std::size_t>(d - 1)], top);
  }
  return c;
}

class MeasureTable {
 public:
  explicit MeasureTable(int d, mpfr_prec_t prec = 256) : d_(d), beta_(perron_root(d, prec)) {}

  int d() const { return d_; }
  const RInterval& beta() const { return beta_; }

  // beta^{-n}
  RInterval beta_inverse_power(std::int64_t n) const {
    RInterval one = from_int(1, beta_.precision());
    return one / beta_.pow(static_cast<unsigned long>(n));
  }

  // Measure of a level-k cylinder ending at v_k(l), k >= d-1.
  RInterval cylinder_measure(int k, int l) const {
    if (k < d_ - 1) throw std::domain_error("cylinder measures are given for k >= d-1");
    if (!tower_exists(d_, l, k)) throw std::out_of_range("no vertex v_k(l)");
    return beta_inverse_power(k + l - 1);
  }

  RInterval tower_measure(int k, int i) const {
    if (k < d_ - 1) throw std::domain_error("tower measures are given for k >= d-1");
    RInterval h = from_int(tower_height(d_, i, k), beta_.precision());
    return h * beta_inverse_power(i == 1 ? k : k + i - 1);
  }

  // Every floor of tower i at level k >= 2d-1.
  RInterval floor_measure(int k, int i) const {
    if (k < 2 * d_ - 1) throw std::domain_error("floor measures are given for k >= 2d-1");
    if (!tower_exists(d_, i, k)) throw std::out_of_range("no tower i at level k");
    return beta_inverse_power(i == 1 ? k : k + i - 1);
  }

  RInterval total_measure(int k) const {
    RInterval s(beta_.precision());
    for (int i : tower_indices(d_, k)) s = s + tower_measure(k, i);
    return s;
  }

 private:
  int d_;
  RInterval beta_;
};

// Multiplying the normalisation by beta^{k+d-1} turns it into an identity of
// integer combinations of 1, beta, ..., beta^{d-1}; true when the coefficient
// vectors agree.
inline bool normalisation_exact(int d, int k) {
  std::vector<std::int64_t> lhs(static_cast<std::size_t>(d), 0);
  for (int i : tower_indices(d, k)) {
    // h_1 beta^{-k} -> h_1 beta^{d-1};  h_i beta^{-(k+i-1)} -> h_i beta^{d-i}
    int deg = i == 1 ? d - 1 : d - i;
    lhs[static_cast<std::size_t>(deg)] = checked_add(lhs[static_cast<std::size_t>(deg)], tower_height(d, i, k));
  }
  return lhs == reduce_power(d, k + d - 1);
}

struct BirkhoffTally {
  int tower = 1;
  std::int64_t n_iter = 0;
  std::int64_t hits = 0;       // certified inside some floor of the tower
  std::int64_t ambiguous = 0;  // enclosure straddles a floor boundary
  RInterval expected;
  double empirical() const { return static_cast<double>(hits) / static_cast<double>(n_iter); }
  double empirical_hi() const {
    return static_cast<double>(hits + ambiguous) / static_cast<double>(n_iter);
  }
  // Worst relative deviation over the frequency interval.
  double relative_error() const {
    double e = expected.mid_double();
    return std::max(std::abs(empirical() - e), std::abs(empirical_hi() - e)) / e;
  }
};

// Visits of c_1..c_{n_iter} to each tower of the cover. Orbit points come from
// the streaming pullback, floor endpoints from the cover's forward orbit.
inline std::vector<BirkhoffTally> birkhoff_frequencies(const Realization& r, const Cover& cover,
                                                       std::int64_t n_iter, const MeasureTable& mt,
                                                       std::int64_t lookahead = 0) {
  if (n_iter < 1) throw std::invalid_argument("n_iter must be >= 1");
  const CriticalOrbit& orb = cover.orbit();
  std::vector<BirkhoffTally> out;
  for (const Tower& t : cover.towers()) {
    BirkhoffTally b;
    b.tower = t.index;
    b.n_iter = n_iter;
    b.expected = mt.tower_measure(cover.k(), t.index);
    out.push_back(std::move(b));
  }
  if (lookahead <= 0) lookahead = pullback_lookahead(r.system);
  for_each_pullback(r.system, n_iter, lookahead, [&](std::int64_t n, const RInterval& x) {
    for (std::size_t ti = 0; ti < cover.towers().size(); ++ti) {
      bool in = false, unsure = false;
      for (const Floor& f : cover.towers()[ti].floors) {
        if (f.has_endpoint(n)) {
          in = true;
          break;
        }
        const RInterval& a = orb[f.lo];
        const RInterval& b = orb[f.hi];
        if (a.hi() < x.lo() && x.hi() < b.lo()) {
          in = true;
          break;
        }
        if (!(x.hi() < a.lo() || b.hi() < x.lo())) unsure = true;
      }
      if (in)
        ++out[ti].hits;
      else if (unsure)
        ++out[ti].ambiguous;
    }
  });
  return out;
}

inline BirkhoffTally birkhoff_frequency(const Realization& r, const Cover& cover, int tower,
                                        std::int64_t n_iter, const MeasureTable& mt) {
  for (auto& t : birkhoff_frequencies(r, cover, n_iter, mt))
    if (t.tower == tower) return t;
  throw std::out_of_range("no tower " + std::to_string(tower) + " in the cover");
}

}  // namespace fibtower
