#pragma once

// Tent maps T_a(x) = a(1 - |x|) - 1 on [-1, 1], turning point c = 0.
// The slope a_d whose kneading sequence is the Fibonacci-like one is located
// by bisection in the unimodal order, polished by Newton on a pullback
// shooting function, and certified by interval orbits at both bracket ends.

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fibtower/bigreal.hpp"
#include "fibtower/errors.hpp"
#include "fibtower/kneading.hpp"

namespace fibtower {

inline constexpr int kDefaultGuardBits = 64;

// FIBTOWER_GUARD_BITS overrides the guard when set to an integer >= 8.
inline int default_guard_bits() {
  if (const char* env = std::getenv("FIBTOWER_GUARD_BITS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 8 && v <= 1 << 20) return static_cast<int>(v);
  }
  return kDefaultGuardBits;
}

inline std::int64_t required_precision(int d, std::int64_t n, int guard = default_guard_bits()) {
  if (d < 2) throw std::domain_error("d must be >= 2");
  if (n < 0) throw std::invalid_argument("prefix length must be >= 0");
  return n + guard;
}

// Working precision that certifies every sign and every endpoint comparison
// among c_0..c_N. The closest approaches of the orbit to 0 up to time N are
// the close returns |c_{S(k)}|, roughly a^{-S(k+1)}; S(k*+d) with S(k*) <= N
// bounds their exponent with room to spare.
inline std::int64_t plan_orbit_bits(int d, std::int64_t N, int guard = default_guard_bits()) {
  const Combinatorics& c = combinatorics(d);
  std::int64_t k = c.level_of(std::max<std::int64_t>(N, 1));
  return N + c.S(k + d) + 2 * guard;
}

// Orbit length that carries every floor of the covers up to level K together
// with the images of their top floors.
inline std::int64_t plan_cover_orbit_len(int d, int K) {
  const Combinatorics& c = combinatorics(d);
  return c.S(K + d) + c.S(K) + 2;
}

enum class Symbol : int { zero = 0, crit = 1, one = 2 };

inline char symbol_char(Symbol s) { return s == Symbol::zero ? '0' : s == Symbol::one ? '1' : 'C'; }

struct TentSystem {
  int d = 2;
  RInterval a;                   // certified enclosure of the slope
  std::int64_t certified_prefix = 0;
  int guard = kDefaultGuardBits;
  mpfr_prec_t precision() const { return a.precision(); }
};

namespace detail {

// Interval step X <- A(1 - |X|) - 1 with A > 0, in place.
struct StepScratch {
  explicit StepScratch(mpfr_prec_t p) : u_lo(p), u_hi(p), t(p) {}
  BigReal u_lo, u_hi, t;
};

inline void tent_step(const BigReal& a_lo, const BigReal& a_hi, BigReal& x_lo, BigReal& x_hi,
                      StepScratch& s) {
  // |X| -> [m_lo, m_hi], then U = 1 - |X|.
  if (x_lo.sign() >= 0) {
    mpfr_ui_sub(s.u_lo.get(), 1, x_hi.get(), MPFR_RNDD);
    mpfr_ui_sub(s.u_hi.get(), 1, x_lo.get(), MPFR_RNDU);
  } else if (x_hi.sign() <= 0) {
    mpfr_add_ui(s.u_lo.get(), x_lo.get(), 1, MPFR_RNDD);
    mpfr_add_ui(s.u_hi.get(), x_hi.get(), 1, MPFR_RNDU);
  } else {
    if (mpfr_cmpabs(x_lo.get(), x_hi.get()) > 0)
      mpfr_add_ui(s.u_lo.get(), x_lo.get(), 1, MPFR_RNDD);
    else
      mpfr_ui_sub(s.u_lo.get(), 1, x_hi.get(), MPFR_RNDD);
    mpfr_set_ui(s.u_hi.get(), 1, MPFR_RNDU);
  }
  mpfr_mul(x_lo.get(), s.u_lo.get(), (s.u_lo.sign() >= 0 ? a_lo : a_hi).get(), MPFR_RNDD);
  mpfr_mul(x_hi.get(), s.u_hi.get(), (s.u_hi.sign() >= 0 ? a_hi : a_lo).get(), MPFR_RNDU);
  mpfr_sub_ui(x_lo.get(), x_lo.get(), 1, MPFR_RNDD);
  mpfr_sub_ui(x_hi.get(), x_hi.get(), 1, MPFR_RNDU);
}

// nullopt when the enclosure touches 0 without being the point 0.
inline std::optional<Symbol> certified_symbol(const BigReal& lo, const BigReal& hi) {
  if (lo.sign() > 0) return Symbol::one;
  if (hi.sign() < 0) return Symbol::zero;
  if (lo.sign() == 0 && hi.sign() == 0) return Symbol::crit;
  return std::nullopt;
}

}  // namespace detail

// Enclosure of { a(1 - |x|) - 1 : a in A, x in X }, A > 0.
inline RInterval tent_apply(const RInterval& a, const RInterval& x) {
  if (!a.positive()) throw std::domain_error("tent_apply: slope enclosure must be positive");
  mpfr_prec_t p = std::max(a.precision(), x.precision());
  RInterval r = x.with_precision(p);
  detail::StepScratch s(p);
  detail::tent_step(a.lo(), a.hi(), r.lo(), r.hi(), s);
  return r;
}

// Position of the slope m relative to a_d in the order of kneading sequences:
// -1 below, +1 above, 0 when the orbit at this precision cannot tell within
// the available symbols.
inline int compare_slope(const BigReal& m, const std::vector<bool>& target, mpfr_prec_t prec) {
  BigReal a(prec);
  mpfr_set(a.get(), m.get(), MPFR_RNDN);
  if (!(a == m)) return 0;
  BigReal lo(prec), hi(prec);
  detail::StepScratch s(prec);
  bool odd = false;
  for (std::size_t n = 1; n <= target.size(); ++n) {
    detail::tent_step(a, a, lo, hi, s);
    auto sym = detail::certified_symbol(lo, hi);
    if (!sym) return 0;
    Symbol want = target[n - 1] ? Symbol::one : Symbol::zero;
    if (*sym != want) {
      bool less = static_cast<int>(*sym) < static_cast<int>(want);
      if (odd) less = !less;
      return less ? -1 : 1;
    }
    if (*sym == Symbol::one) odd = !odd;
  }
  return 0;
}

class CriticalOrbit {
 public:
  CriticalOrbit() = default;
  CriticalOrbit(std::vector<RInterval> c, std::vector<Symbol> sym)
      : c_(std::move(c)), sym_(std::move(sym)) {}

  std::int64_t length() const { return static_cast<std::int64_t>(c_.size()) - 1; }
  const RInterval& operator[](std::int64_t n) const {
    if (n < 0 || n > length())
      throw PrecisionExhausted("orbit point c_" + std::to_string(n) + " beyond computed length " +
                               std::to_string(length()));
    return c_[static_cast<std::size_t>(n)];
  }
  Symbol symbol(std::int64_t n) const { return sym_.at(static_cast<std::size_t>(n)); }
  const std::vector<RInterval>& points() const { return c_; }

 private:
  std::vector<RInterval> c_;     // c_0 .. c_N
  std::vector<Symbol> sym_;      // sym_[0] = crit
};

// Forward interval orbit c_0 = 0, c_1, ..., c_n over the whole slope enclosure.
inline CriticalOrbit critical_orbit(const TentSystem& sys, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("orbit length must be >= 0");
  mpfr_prec_t p = sys.precision();
  std::vector<RInterval> c;
  std::vector<Symbol> sym;
  c.reserve(static_cast<std::size_t>(n + 1));
  sym.reserve(static_cast<std::size_t>(n + 1));
  c.emplace_back(p);
  sym.push_back(Symbol::crit);
  BigReal lo(p), hi(p);
  detail::StepScratch s(p);
  for (std::int64_t i = 1; i <= n; ++i) {
    detail::tent_step(sys.a.lo(), sys.a.hi(), lo, hi, s);
    auto symbol = detail::certified_symbol(lo, hi);
    if (!symbol || *symbol == Symbol::crit)
      throw PrecisionExhausted("sign of c_" + std::to_string(i) + " not certified at " +
                               std::to_string(p) + " bits");
    c.emplace_back(lo, hi);
    sym.push_back(*symbol);
  }
  return CriticalOrbit(std::move(c), std::move(sym));
}

// Newton polish of the slope via the pullback x_n = s_n (a - 1 - x_{n+1}) / a
// along the target itinerary, x_L = 0. Root of G(a) = (a - 1) - x_1.
namespace detail {

inline void pullback_shoot(const BigReal& a, const std::vector<bool>& eps, std::size_t L, BigReal& g,
                           BigReal& dg) {
  mpfr_prec_t p = a.precision();
  BigReal x(p), xd(p), inv(p), t(p);
  mpfr_ui_div(inv.get(), 1, a.get(), MPFR_RNDN);
  for (std::size_t n = L - 1; n >= 1; --n) {
    bool right = eps[n - 1];
    // t = a - 1 - x
    mpfr_sub_ui(t.get(), a.get(), 1, MPFR_RNDN);
    mpfr_sub(t.get(), t.get(), x.get(), MPFR_RNDN);
    mpfr_mul(x.get(), t.get(), inv.get(), MPFR_RNDN);
    if (!right) mpfr_neg(x.get(), x.get(), MPFR_RNDN);
    // xd = (s (1 - xd) - x) / a
    mpfr_ui_sub(t.get(), 1, xd.get(), MPFR_RNDN);
    if (!right) mpfr_neg(t.get(), t.get(), MPFR_RNDN);
    mpfr_sub(t.get(), t.get(), x.get(), MPFR_RNDN);
    mpfr_mul(xd.get(), t.get(), inv.get(), MPFR_RNDN);
  }
  mpfr_set_prec(g.get(), p);
  mpfr_set_prec(dg.get(), p);
  mpfr_sub_ui(g.get(), a.get(), 1, MPFR_RNDN);
  mpfr_sub(g.get(), g.get(), x.get(), MPFR_RNDN);
  mpfr_ui_sub(dg.get(), 1, xd.get(), MPFR_RNDN);
}

inline std::size_t pullback_length(mpfr_prec_t p, double log2_a) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(p) / log2_a)) + 64;
}

}  // namespace detail

struct SolveOptions {
  int guard = default_guard_bits();
  int coarse_bits = 40;  // bisection depth before Newton takes over
};

inline TentSystem solve_parameter(int d, std::int64_t prefix_len, std::int64_t precision_bits,
                                  const SolveOptions& opt = {}) {
  if (d < 2) throw std::domain_error("d must be >= 2");
  if (prefix_len < 1) throw std::invalid_argument("prefix length must be >= 1");
  if (precision_bits < 32) throw std::invalid_argument("precision must be >= 32 bits");
  const mpfr_prec_t work = static_cast<mpfr_prec_t>(precision_bits + 32);
  // Slopes in the final bracket are accurate to 2^-(bits - guard).
  const long target_exp = -std::max<long>(static_cast<long>(precision_bits) - opt.guard, 1);
  const double log2_a = 0.5;  // conservative lower bound for log2 a over [1.4, 2]
  std::size_t klen = std::max<std::size_t>(
      static_cast<std::size_t>(prefix_len),
      static_cast<std::size_t>(static_cast<double>(work) / log2_a) + 256);
  const std::vector<bool> K = kneading_sequence(d, klen);

  BigReal lo(1, work), hi(2, work);
  if (compare_slope(lo, K, 128) != -1 || compare_slope(hi, K, 128) != 1)
    throw BracketFailure("slopes 1 and 2 do not bracket the target kneading sequence");

  auto width_exp = [&]() {
    BigReal w(work);
    mpfr_sub(w.get(), hi.get(), lo.get(), MPFR_RNDU);
    return w.sign() == 0 ? std::numeric_limits<long>::min() : mpfr_get_exp(w.get());
  };
  // Bisection step with up to three perturbations of the midpoint when the
  // comparison is inconclusive.
  auto bisect_once = [&](mpfr_prec_t prec) {
    BigReal m(work);
    mpfr_add(m.get(), lo.get(), hi.get(), MPFR_RNDN);
    mpfr_div_2ui(m.get(), m.get(), 1, MPFR_RNDN);
    const long we = width_exp();
    for (int attempt = 0; attempt < 4; ++attempt) {
      BigReal t = m;
      if (attempt > 0) {
        BigReal shift(work);
        mpfr_set_si_2exp(shift.get(), (attempt % 2 ? 1 : -1) * ((attempt + 1) / 2), we - 8,
                         MPFR_RNDN);
        mpfr_add(t.get(), m.get(), shift.get(), MPFR_RNDN);
      }
      int cmp = compare_slope(t, K, prec);
      if (cmp < 0) {
        lo = t;
        return;
      }
      if (cmp > 0) {
        hi = t;
        return;
      }
    }
    throw PrecisionExhausted("bisection cannot order slope against the target kneading sequence");
  };
  // mpfr_get_exp(w) = e means 2^(e-1) <= w < 2^e.
  while (width_exp() > std::max<long>(target_exp, -opt.coarse_bits)) bisect_once(128);

  if (width_exp() > target_exp) {
    // Newton with precision doubling from the coarse midpoint.
    BigReal a(work);
    mpfr_add(a.get(), lo.get(), hi.get(), MPFR_RNDN);
    mpfr_div_2ui(a.get(), a.get(), 1, MPFR_RNDN);
    const double l2a = std::log2(a.to_double());
    mpfr_prec_t p = 64;
    int extra = 0;
    BigReal g(work), dg(work), step(work);
    for (;;) {
      p = std::min<mpfr_prec_t>(2 * p, work);
      BigReal ap(p);
      mpfr_set(ap.get(), a.get(), MPFR_RNDN);
      std::size_t L = std::min(detail::pullback_length(p, l2a), K.size());
      detail::pullback_shoot(ap, K, L, g, dg);
      mpfr_set_prec(step.get(), p);
      mpfr_div(step.get(), g.get(), dg.get(), MPFR_RNDN);
      mpfr_set_prec(a.get(), work);
      mpfr_sub(a.get(), ap.get(), step.get(), MPFR_RNDN);
      if (p == work) {
        bool small = step.sign() == 0 || mpfr_get_exp(step.get()) < -(work - 24);
        if (small || ++extra > 6) break;
      }
    }
    BigReal h(work);
    mpfr_set_si_2exp(h.get(), 1, target_exp - 2, MPFR_RNDN);
    BigReal nlo(work), nhi(work);
    mpfr_sub(nlo.get(), a.get(), h.get(), MPFR_RNDD);
    mpfr_add(nhi.get(), a.get(), h.get(), MPFR_RNDU);
    int clo = compare_slope(nlo, K, work);
    int chi = compare_slope(nhi, K, work);
    if (clo == 0 || chi == 0) {
      clo = clo ? clo : compare_slope(nlo, K, 2 * work);
      chi = chi ? chi : compare_slope(nhi, K, 2 * work);
    }
    if (clo == -1 && chi == 1) {
      lo = nlo;
      hi = nhi;
    } else {
      // Newton bracket not certified; finish by plain bisection.
      while (width_exp() > target_exp) bisect_once(work);
    }
  }

  TentSystem sys;
  sys.d = d;
  sys.guard = opt.guard;
  // Certify the requested prefix over the whole bracket, narrowing further if
  // the bracket is still too wide for the first few symbols.
  for (;;) {
    sys.a = RInterval(lo, hi);
    try {
      CriticalOrbit orb = critical_orbit(sys, prefix_len);
      for (std::int64_t n = 1; n <= prefix_len; ++n)
        if ((orb.symbol(n) == Symbol::one) != K[static_cast<std::size_t>(n - 1)])
          throw PrecisionExhausted("certified symbol disagrees with the target at " +
                                   std::to_string(n));
      sys.certified_prefix = prefix_len;
      return sys;
    } catch (const PrecisionExhausted&) {
      if (width_exp() <= -(static_cast<long>(work) - 8)) throw;
      bisect_once(work);
    }
  }
}

// Slope and forward orbit certified together, with one precision doubling on
// failure when the precision was planned automatically.
struct Realization {
  TentSystem system;
  std::shared_ptr<const CriticalOrbit> orbit;
  int d() const { return system.d; }
};

inline Realization realize(int d, std::int64_t orbit_len, std::optional<std::int64_t> bits = {},
                           const SolveOptions& opt = {}) {
  std::int64_t b = bits ? *bits : plan_orbit_bits(d, orbit_len, opt.guard);
  for (int attempt = 0;; ++attempt) {
    try {
      Realization r;
      r.system = solve_parameter(d, orbit_len, b, opt);
      r.orbit = std::make_shared<const CriticalOrbit>(critical_orbit(r.system, orbit_len));
      return r;
    } catch (const PrecisionExhausted&) {
      if (bits || attempt > 0) throw;
      b *= 2;
    }
  }
}

// Hofbauer tower H_1 = [c, c_1]; H_n = T(H_{n-1}) if c is outside H_{n-1},
// otherwise [c_n, c_1]. Levels carry the orbit indices of their endpoints.
struct HofbauerLevel {
  std::int64_t n = 0;
  std::int64_t i = 0, j = 0;
  bool contains_turning_point = false;
};

inline std::vector<HofbauerLevel> hofbauer_levels(const CriticalOrbit& orbit, std::int64_t N) {
  if (N < 1) throw std::invalid_argument("Hofbauer tower starts at level 1");
  std::vector<HofbauerLevel> out;
  std::int64_t i = 0, j = 1;
  for (std::int64_t n = 1; n <= N; ++n) {
    if (n > 1) {
      if (out.back().contains_turning_point) {
        i = n;
        j = 1;
      } else {
        ++i;
        ++j;
      }
    }
    (void)orbit[std::max(i, j)];  // range check
    Symbol si = orbit.symbol(i), sj = orbit.symbol(j);
    bool has_c = si == Symbol::crit || sj == Symbol::crit || si != sj;
    out.push_back({n, i, j, has_c});
  }
  return out;
}

inline RInterval hofbauer_interval(const CriticalOrbit& orbit, std::int64_t n) {
  HofbauerLevel h = hofbauer_levels(orbit, n).back();
  return hull(orbit[h.i], orbit[h.j]);
}

inline std::vector<std::int64_t> hofbauer_cutting_times(const CriticalOrbit& orbit, std::int64_t N) {
  std::vector<std::int64_t> out;
  for (const auto& h : hofbauer_levels(orbit, N))
    if (h.contains_turning_point) out.push_back(h.n);
  return out;
}

// Streaming enclosures of c_1..c_n via backward branches along the known
// kneading sequence; each pullback contracts by 1/a, so widths stay uniform
// in n. Visits n in decreasing order.
inline void for_each_pullback(const TentSystem& sys, std::int64_t n_max, std::int64_t lookahead,
                              const std::function<void(std::int64_t, const RInterval&)>& visit) {
  const mpfr_prec_t p = sys.precision();
  const std::int64_t L = n_max + lookahead;
  const std::vector<bool> eps = kneading_sequence(sys.d, static_cast<std::size_t>(L));
  BigReal inv_lo(p), inv_hi(p), am1_lo(p), am1_hi(p), t_lo(p), t_hi(p), x_lo(-1, p), x_hi(1, p);
  mpfr_ui_div(inv_lo.get(), 1, sys.a.hi().get(), MPFR_RNDD);
  mpfr_ui_div(inv_hi.get(), 1, sys.a.lo().get(), MPFR_RNDU);
  mpfr_sub_ui(am1_lo.get(), sys.a.lo().get(), 1, MPFR_RNDD);
  mpfr_sub_ui(am1_hi.get(), sys.a.hi().get(), 1, MPFR_RNDU);
  RInterval cur(p);
  for (std::int64_t n = L - 1; n >= 1; --n) {
    // N = (A - 1) - X, nonnegative since |X| <= 1 and a > 1 ... up to rounding.
    mpfr_sub(t_lo.get(), am1_lo.get(), x_hi.get(), MPFR_RNDD);
    mpfr_sub(t_hi.get(), am1_hi.get(), x_lo.get(), MPFR_RNDU);
    // Y = N / A
    mpfr_mul(x_lo.get(), t_lo.get(), (t_lo.sign() >= 0 ? inv_lo : inv_hi).get(), MPFR_RNDD);
    mpfr_mul(x_hi.get(), t_hi.get(), (t_hi.sign() >= 0 ? inv_hi : inv_lo).get(), MPFR_RNDU);
    if (!eps[static_cast<std::size_t>(n - 1)]) {
      mpfr_swap(x_lo.get(), x_hi.get());
      mpfr_neg(x_lo.get(), x_lo.get(), MPFR_RNDD);
      mpfr_neg(x_hi.get(), x_hi.get(), MPFR_RNDU);
    }
    // The branch is known, so intersect with its half of [-1, 1].
    if (eps[static_cast<std::size_t>(n - 1)]) {
      if (x_lo.sign() < 0) mpfr_set_zero(x_lo.get(), 1);
    } else if (x_hi.sign() > 0) {
      mpfr_set_zero(x_hi.get(), 1);
    }
    if (n <= n_max) {
      mpfr_set(cur.lo().get(), x_lo.get(), MPFR_RNDD);
      mpfr_set(cur.hi().get(), x_hi.get(), MPFR_RNDU);
      visit(n, cur);
    }
  }
}

inline std::int64_t pullback_lookahead(const TentSystem& sys) {
  double l2a = std::log2(sys.a.lo().to_double());
  return static_cast<std::int64_t>(std::ceil(static_cast<double>(sys.precision()) / l2a)) + 64;
}

}  // namespace fibtower
