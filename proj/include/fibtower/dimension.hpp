#pragma once

// Lengths |D_k| = |c_{S(k)}|, the maximal floor length delta_k of M_{d,k},
// the product P_k = a^{S(k+d)} prod_{j=1}^{d-1} |D_{k+j}|, the Hausdorff sums
// S(k) delta_k^alpha and the return exponents -log|D_k| / S(k).
//
// While S(k) fits in the certified orbit the lengths are read off it. Past
// that, log|D_k| is carried by the tent identity
//     a^{S(m+1-d)} |D_m| = |D_{m+1}| + |D_{m+1-d}|    (m >= d)
// in the form
//     log|D_m| = log|D_{m+1-d}| - S(m+1-d) log a + eps_m,
//     eps_m = log(1 + |D_{m+1}| / |D_{m+1-d}|) = -log(1 - 1/(nu_m a^{S(m+1-d)})),
// with nu_m = |D_m| / |D_{m+1}| > 1, so 0 < eps_m <= -log(1 - a^{-S(m+1-d)}).
// A first pass uses that bound, later passes feed the enclosures back into
// the first form. Everything stays at a fixed precision whatever k is;
// evaluating a^{S(k+d)} |D_{k+1}| straight from the orbit would need about
// S(k+2d) log2(a) + 128 bits instead.
//
// Floors beyond the orbit range are measured through their affine lengths:
// tower 1 floor n >= 1 is T^n(D_k), of length a^n |D_k|; tower i >= 2 floor n
// is T^{S(Q(m))+n}(D_m) with m = k-1+i; the base I_k is |D_k| + |D_{m'}| for
// its other cutting-time endpoint c_{S(m')}. Inside the orbit range those
// formulas are checked against the measured floors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fibtower/bigreal.hpp"
#include "fibtower/covers.hpp"
#include "fibtower/errors.hpp"
#include "fibtower/kneading.hpp"
#include "fibtower/tent.hpp"

namespace fibtower {

namespace detail {

// -log(1 - x) for 0 <= x < 1, increasing in x.
inline RInterval neg_log1m(const RInterval& x) {
  RInterval r(x.precision());
  BigReal t(x.precision()), u(x.precision());
  mpfr_neg(t.get(), x.lo().get(), MPFR_RNDN);  // exact
  mpfr_log1p(u.get(), t.get(), MPFR_RNDU);
  mpfr_neg(r.lo().get(), u.get(), MPFR_RNDD);
  mpfr_neg(t.get(), x.hi().get(), MPFR_RNDN);
  mpfr_log1p(u.get(), t.get(), MPFR_RNDD);
  mpfr_neg(r.hi().get(), u.get(), MPFR_RNDU);
  return r;
}

inline RInterval log1p(const RInterval& x) {
  RInterval r(x.precision());
  mpfr_log1p(r.lo().get(), x.lo().get(), MPFR_RNDD);
  mpfr_log1p(r.hi().get(), x.hi().get(), MPFR_RNDU);
  return r;
}

inline RInterval expm1(const RInterval& x) {
  RInterval r(x.precision());
  mpfr_expm1(r.lo().get(), x.lo().get(), MPFR_RNDD);
  mpfr_expm1(r.hi().get(), x.hi().get(), MPFR_RNDU);
  return r;
}

inline RInterval intersect(const RInterval& x, const RInterval& y) {
  const BigReal& lo = x.lo() > y.lo() ? x.lo() : y.lo();
  const BigReal& hi = x.hi() < y.hi() ? x.hi() : y.hi();
  if (lo > hi) throw std::logic_error("enclosures of the same quantity are disjoint");
  return RInterval(lo, hi);
}

inline bool overlap(const RInterval& x, const RInterval& y) { return !x.disjoint(y); }

inline RInterval int_interval(std::int64_t v, mpfr_prec_t p) { return from_int(v, p); }

}  // namespace detail

// |D_k| = |c_{S(k)} - c| from the orbit.
inline RInterval d_length(const CriticalOrbit& orb, int d, int k) {
  if (k < 0) throw std::domain_error("D_k needs k >= 0");
  const RInterval& x = orb[cutting_time(d, k)];
  if (x.contains_zero())
    throw PrecisionExhausted("c_S(" + std::to_string(k) + ") not separated from the turning point");
  return x.abs();
}

struct DeltaDirect {
  RInterval value;
  int tower = 0;
  std::int64_t floor = -1;
  bool unique = false;  // the maximising floor beats every other one
};

// Largest floor length over all towers of the cover.
inline DeltaDirect delta_direct(const Cover& cv) {
  const CriticalOrbit& orb = cv.orbit();
  std::vector<std::pair<RInterval, std::pair<int, std::int64_t>>> lens;
  for (const Tower& t : cv.towers())
    for (std::size_t n = 0; n < t.floors.size(); ++n)
      lens.push_back({orb[t.floors[n].hi] - orb[t.floors[n].lo], {t.index, static_cast<std::int64_t>(n)}});
  std::size_t best = 0;
  for (std::size_t j = 1; j < lens.size(); ++j)
    if (lens[j].first.lo() > lens[best].first.lo()) best = j;
  DeltaDirect out;
  BigReal hi = lens[best].first.hi();
  out.unique = true;
  for (std::size_t j = 0; j < lens.size(); ++j) {
    if (j == best) continue;
    if (lens[j].first.hi() > hi) hi = lens[j].first.hi();
    if (!(lens[j].first.hi() < lens[best].first.lo())) out.unique = false;
  }
  out.value = RInterval(lens[best].first.lo(), hi);
  out.tower = lens[best].second.first;
  out.floor = lens[best].second.second;
  return out;
}

// a^{S(k+1-d)-1} |D_k|
inline RInterval delta_formula(const RInterval& a, int d, int k, const RInterval& Dk) {
  std::int64_t e = cutting_time(d, k + 1 - d) - 1;
  return a.pow(static_cast<unsigned long>(std::max<std::int64_t>(e, 0))) * Dk;
}

// P_k straight from the orbit; needs c up to S(k+d-1) and enough bits to
// absorb the factor a^{S(k+d)}.
inline RInterval diameter_product(const TentSystem& sys, const CriticalOrbit& orb, int k) {
  const int d = sys.d;
  RInterval p = sys.a.pow(static_cast<unsigned long>(cutting_time(d, k + d)));
  for (int j = 1; j <= d - 1; ++j) p = p * d_length(orb, d, k + j);
  if (!p.positive()) throw PrecisionExhausted("P_" + std::to_string(k) + " not separated from 0");
  return p;
}

// S(k) delta^alpha
inline RInterval hausdorff_sum(std::int64_t S, const RInterval& delta, const RInterval& alpha) {
  RInterval s = detail::int_interval(S, delta.precision());
  return s * (delta.log() * alpha).exp();
}

// Decimal alpha like "0.1" as a rigorous enclosure.
inline RInterval parse_alpha(const std::string& text, mpfr_prec_t prec) {
  RInterval a(text, text, prec);
  if (a.lo().sign() < 0) throw std::invalid_argument("alpha must be >= 0, got " + text);
  return a;
}

enum class LengthSource { orbit, identity };

inline const char* source_name(LengthSource s) { return s == LengthSource::orbit ? "orbit" : "identity"; }

struct DimensionOptions {
  int kmax = 30;
  int k_direct = 0;                 // covers measured on the orbit up to here; 0 = from the budget
  std::int64_t orbit_budget = 2500;  // orbit length allowed for the automatic choice
  std::vector<std::string> alphas{"0.2", "0.1", "0.05"};
  mpfr_prec_t log_bits = 1024;
};

struct DimensionEntry {
  int k = 0;
  std::int64_t S = 0;
  LengthSource d_source = LengthSource::orbit;
  LengthSource delta_source = LengthSource::orbit;
  RInterval log_D, D_len;
  RInterval delta_direct, delta_formula;
  int delta_tower = 0;
  std::int64_t delta_floor = -1;
  bool delta_unique = false;
  bool delta_equal = false;  // maximiser is tower 1's top floor and the enclosures agree
  RInterval P;
  std::optional<RInterval> P_diff;  // P_{k+1} - P_k
  std::vector<RInterval> hsum;
  RInterval exponent;
  double envelope = 0;  // log(a) S(k+1) / S(k), reported only
};

struct DimensionSeries {
  int d = 2;
  RInterval a;
  mpfr_prec_t orbit_bits = 0;
  std::int64_t orbit_len = 0;
  int k_orbit = 0;   // |D_k| measured for k <= k_orbit
  int k_direct = 0;  // covers measured for k <= k_direct
  std::vector<std::string> alphas;
  std::vector<DimensionEntry> entries;  // k = 1..kmax

  bool lengths_decreasing = true;
  bool identity_holds = true;       // checked where every term is measured
  bool nu_above_one = true;
  bool correction_bound = true;     // 1 - C_{k+1} <= a^{-S(k+1-d)}
  bool floor_lengths_match = true;  // affine floor lengths vs measured floors
  bool formula_decreasing = true;
  bool P_positive = true;
  bool exponents_positive = true;
  bool within_envelope = true;

  std::optional<int> k_delta_equal;         // delta_equal holds from here to kmax
  std::vector<std::optional<int>> k0_hsum;  // strictly decreasing from here, per alpha
  std::optional<int> k0_cauchy;             // |P_{k+1} - P_k| < 2^-20 from here
  std::optional<int> k0_diff_decreasing;    // |P_{k+1} - P_k| strictly decreasing from here

  int kmax() const { return static_cast<int>(entries.size()); }
  const DimensionEntry& at(int k) const {
    if (k < 1 || k > kmax()) throw std::out_of_range("k outside the series");
    return entries[static_cast<std::size_t>(k - 1)];
  }
};

// Largest k whose cover fits in an orbit of the given length.
inline int max_cover_level(int d, std::int64_t orbit_len) {
  int k = 0;
  while (cover_orbit_need(d, k + 1) <= orbit_len) ++k;
  return k;
}

namespace detail {

// Smallest k0 in [lo, hi] with pred(k) for every k in [k0, hi].
template <class Pred>
std::optional<int> tail_start(int lo, int hi, Pred pred) {
  if (hi < lo) return std::nullopt;
  int k0 = hi + 1;
  for (int k = hi; k >= lo && pred(k); --k) k0 = k;
  if (k0 > hi) return std::nullopt;
  return k0;
}

}  // namespace detail

inline DimensionSeries dimension_series(const Realization& r, const DimensionOptions& opt) {
  const int d = r.d();
  const Combinatorics& cb = combinatorics(d);
  const CriticalOrbit& orb = *r.orbit;
  if (opt.kmax < 1) throw std::invalid_argument("kmax must be >= 1");
  const mpfr_prec_t lp = std::max<mpfr_prec_t>(opt.log_bits, 128);
  const int kmax = opt.kmax;
  const int K = kmax + d + 1;  // lengths needed up to here
  (void)cb.S(K + d);           // overflow check up front

  DimensionSeries out;
  out.d = d;
  out.a = r.system.a;
  out.orbit_bits = r.system.precision();
  out.orbit_len = orb.length();
  out.alphas = opt.alphas;
  out.k_orbit = std::min<int>(static_cast<int>(cb.level_of(orb.length())), K);
  out.k_direct = std::min(opt.k_direct > 0 ? opt.k_direct : max_cover_level(d, orb.length()), kmax);
  if (out.k_orbit < d) throw DepthInsufficient("orbit too short: need |D_k| up to k = d at least");
  if (opt.k_direct > 0 && cover_orbit_need(d, out.k_direct) > orb.length())
    throw DepthInsufficient("orbit too short for covers up to k_direct");

  const RInterval A = r.system.a;
  const RInterval a = A.with_precision(lp);
  const RInterval log_a = a.log();
  auto S_int = [&](std::int64_t k) { return detail::int_interval(cb.S(k), lp); };

  // log|D_k|, k = 0..K
  std::vector<RInterval> ell(static_cast<std::size_t>(K + 1), RInterval(lp));
  std::vector<RInterval> D_orb;  // orbit precision, k = 0..k_orbit
  for (int k = 0; k <= out.k_orbit; ++k) {
    D_orb.push_back(d_length(orb, d, k));
    ell[static_cast<std::size_t>(k)] = D_orb.back().with_precision(lp).log();
  }
  auto L = [&](int k) -> RInterval& { return ell[static_cast<std::size_t>(k)]; };
  for (int m = out.k_orbit + 1; m <= K; ++m) {
    RInterval sl = S_int(m + 1 - d) * log_a;
    RInterval bound = detail::neg_log1m((-sl).exp());
    RInterval eps(BigReal(0L, lp), bound.hi());
    L(m) = L(m + 1 - d) - sl + eps;
  }
  for (int pass = 0; pass < 3; ++pass)
    for (int m = out.k_orbit + 1; m < K; ++m) {
      RInterval eps = detail::log1p((L(m + 1) - L(m + 1 - d)).exp());
      RInterval sl = S_int(m + 1 - d) * log_a;
      L(m) = detail::intersect(L(m), L(m + 1 - d) - sl + eps);
    }
  // eps_m for m in [d, K-1], from whichever enclosures are at hand
  auto eps_at = [&](int m) { return detail::log1p((L(m + 1) - L(m + 1 - d)).exp()); };

  // checks on measured lengths
  for (int k = 0; k < out.k_orbit; ++k)
    if (!D_orb[static_cast<std::size_t>(k + 1)].certainly_less(D_orb[static_cast<std::size_t>(k)]))
      out.nu_above_one = false;
  for (int m = d; m + 1 <= out.k_orbit; ++m) {
    std::int64_t s = cb.S(m + 1 - d);
    RInterval lhs = A.pow(static_cast<unsigned long>(s)) * D_orb[static_cast<std::size_t>(m)];
    RInterval rhs = D_orb[static_cast<std::size_t>(m + 1)] + D_orb[static_cast<std::size_t>(m + 1 - d)];
    if (!detail::overlap(lhs, rhs)) out.identity_holds = false;
    // 1 - C_{m+1} = 1 / (nu_m a^s) = |D_{m+1}| / (a^s |D_m|)
    RInterval one_minus_c = D_orb[static_cast<std::size_t>(m + 1)] / lhs;
    RInterval bound = detail::int_interval(1, A.precision()) / A.pow(static_cast<unsigned long>(s));
    if (!(one_minus_c.hi() <= bound.lo())) out.correction_bound = false;
  }

  // floors of tower i at level k in log space: (log length, floor index)
  auto formula_floors = [&](int k) {
    std::vector<std::pair<RInterval, std::pair<int, std::int64_t>>> c;
    for (int i : tower_indices(d, k)) {
      std::int64_t h = tower_height(d, i, k);
      if (i == 1) {
        auto [p, q] = interval_I_indices(d, k);
        std::int64_t other = p == cb.S(k) ? q : p;
        int m2 = k;
        while (cb.S(m2) != other) ++m2;
        c.push_back({L(k) + detail::log1p((L(m2) - L(k)).exp()), {1, 0}});
        if (h > 1) c.push_back({detail::int_interval(h - 1, lp) * log_a + L(k), {1, h - 1}});
      } else {
        int m = k - 1 + i;
        std::int64_t e = cb.S(cb.Q(m)) + h - 1;
        c.push_back({detail::int_interval(e, lp) * log_a + L(m), {i, h - 1}});
      }
    }
    return c;
  };

  for (int k = 1; k <= kmax; ++k) {
    DimensionEntry e;
    e.k = k;
    e.S = cb.S(k);
    e.d_source = k <= out.k_orbit ? LengthSource::orbit : LengthSource::identity;
    e.log_D = L(k);
    e.D_len = L(k).exp();
    std::int64_t sf = cb.S(k + 1 - d);
    RInterval log_formula = detail::int_interval(std::max<std::int64_t>(sf - 1, 0), lp) * log_a + L(k);
    e.delta_formula = log_formula.exp();
    RInterval log_delta(lp);
    if (k <= out.k_direct) {
      Cover cv = build_cover(r, k);
      DeltaDirect dd = delta_direct(cv);
      e.delta_source = LengthSource::orbit;
      e.delta_direct = dd.value.with_precision(lp);
      log_delta = e.delta_direct.log();
      e.delta_tower = dd.tower;
      e.delta_floor = dd.floor;
      e.delta_unique = dd.unique;
      // measured floors against their affine lengths
      if (k >= d) {
        const Combinatorics& c = cb;
        for (const Tower& t : cv.towers())
          for (std::size_t n = 0; n < t.floors.size(); ++n) {
            if (t.index == 1 && n == 0) continue;
            RInterval len = orb[t.floors[n].hi] - orb[t.floors[n].lo];
            RInterval pred(lp);
            if (t.index == 1) {
              pred = A.pow(n) * D_orb[static_cast<std::size_t>(k)];
            } else {
              int m = k - 1 + t.index;
              if (m > out.k_orbit) continue;
              pred = A.pow(static_cast<unsigned long>(c.S(c.Q(m))) + n) * D_orb[static_cast<std::size_t>(m)];
            }
            if (!detail::overlap(len, pred)) out.floor_lengths_match = false;
          }
      }
    } else {
      auto cands = formula_floors(k);
      std::size_t best = 0;
      for (std::size_t j = 1; j < cands.size(); ++j)
        if (cands[j].first.lo() > cands[best].first.lo()) best = j;
      BigReal hi = cands[best].first.hi();
      e.delta_unique = true;
      for (std::size_t j = 0; j < cands.size(); ++j) {
        if (j == best) continue;
        if (cands[j].first.hi() > hi) hi = cands[j].first.hi();
        if (!(cands[j].first.hi() < cands[best].first.lo())) e.delta_unique = false;
      }
      e.delta_source = LengthSource::identity;
      log_delta = RInterval(cands[best].first.lo(), hi);
      e.delta_direct = log_delta.exp();
      e.delta_tower = cands[best].second.first;
      e.delta_floor = cands[best].second.second;
    }
    e.delta_equal = e.delta_unique && e.delta_tower == 1 && sf >= 1 &&
                    e.delta_floor == tower_height(d, 1, k) - 1 && tower_height(d, 1, k) == sf &&
                    detail::overlap(e.delta_direct, e.delta_formula);

    RInterval logP = S_int(k + d) * log_a;
    for (int j = 1; j <= d - 1; ++j) logP = logP + L(k + j);
    e.P = logP.exp();
    if (k + d + 1 <= K) e.P_diff = e.P * detail::expm1(eps_at(k + d));

    for (const std::string& al : opt.alphas)
      e.hsum.push_back(S_int(k) * (log_delta * parse_alpha(al, lp)).exp());

    e.exponent = -L(k) / S_int(k);
    e.envelope = log_a.mid_double() * static_cast<double>(cb.S(k + 1)) / static_cast<double>(cb.S(k));
    out.entries.push_back(std::move(e));
  }

  // sequence checks
  for (int k = 1; k < kmax; ++k) {
    const DimensionEntry& x = out.at(k);
    const DimensionEntry& y = out.at(k + 1);
    if (!y.log_D.certainly_less(x.log_D)) out.lengths_decreasing = false;
    if (k >= d && !y.delta_formula.certainly_less(x.delta_formula)) out.formula_decreasing = false;
  }
  for (const DimensionEntry& x : out.entries) {
    if (!x.P.positive()) out.P_positive = false;
    if (!x.exponent.positive()) out.exponents_positive = false;
    if (x.exponent.hi().to_double() > x.envelope) out.within_envelope = false;
  }
  out.k_delta_equal = detail::tail_start(1, kmax, [&](int k) { return out.at(k).delta_equal; });
  for (std::size_t ai = 0; ai < opt.alphas.size(); ++ai)
    out.k0_hsum.push_back(detail::tail_start(1, kmax - 1, [&](int k) {
      return out.at(k + 1).hsum[ai].certainly_less(out.at(k).hsum[ai]);
    }));
  RInterval tol = detail::int_interval(1, lp).scaled(-20);
  out.k0_cauchy = detail::tail_start(1, kmax, [&](int k) {
    const auto& p = out.at(k).P_diff;
    return p && p->abs().certainly_less(tol);
  });
  out.k0_diff_decreasing = detail::tail_start(1, kmax - 1, [&](int k) {
    const auto& p = out.at(k).P_diff;
    const auto& q = out.at(k + 1).P_diff;
    return p && q && q->abs().certainly_less(p->abs());
  });
  return out;
}

// Realizes the slope with an orbit long enough for covers up to k_direct.
inline DimensionSeries dimension_series(int d, const DimensionOptions& opt, std::optional<std::int64_t> bits = {}) {
  int kd = opt.k_direct > 0 ? opt.k_direct : max_cover_level(d, opt.orbit_budget);
  kd = std::max(std::min(kd, opt.kmax), std::min(d, opt.kmax));
  std::int64_t need = std::max(cover_orbit_need(d, kd), cutting_time(d, d) + 1);
  Realization r = realize(d, need, bits);
  DimensionOptions o = opt;
  o.k_direct = kd;
  return dimension_series(r, o);
}

struct RecurrenceEntry {
  int k = 0;
  std::int64_t S = 0;
  RInterval exponent;
  double tail_sup = 0;  // max of the midpoints over k..kmax
};

// -log|c_{S(k)} - c| / S(k): an estimate of the exponential recurrence rate,
// not a certificate of the limit.
inline std::vector<RecurrenceEntry> recurrence_exponent(const DimensionSeries& s) {
  std::vector<RecurrenceEntry> out;
  for (const DimensionEntry& e : s.entries) out.push_back({e.k, e.S, e.exponent, 0});
  double run = -1e300;
  for (auto it = out.rbegin(); it != out.rend(); ++it) {
    run = std::max(run, it->exponent.mid_double());
    it->tail_sup = run;
  }
  return out;
}

}  // namespace fibtower
