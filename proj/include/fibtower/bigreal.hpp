#pragma once

// MPFR backed reals and outward rounded intervals.

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <utility>

namespace fibtower {

namespace detail {

// Orbit quantities such as |c_{S(k)}| underflow the default exponent range
// long before they stop being interesting.
inline bool widen_exponent_range() {
  mpfr_set_emin(mpfr_get_emin_min());
  mpfr_set_emax(mpfr_get_emax_max());
  return true;
}
inline const bool exponent_range_ready = widen_exponent_range();

inline std::string format_mpfr(mpfr_srcptr x, int digits, char rnd) {
  if (mpfr_nan_p(x)) return "nan";
  if (mpfr_inf_p(x)) return mpfr_sgn(x) > 0 ? "inf" : "-inf";
  char fmt[16];
  std::snprintf(fmt, sizeof fmt, "%%.*R%ce", rnd);
  char* buf = nullptr;
  if (mpfr_asprintf(&buf, fmt, std::max(digits - 1, 0), x) < 0)
    throw std::runtime_error("mpfr_asprintf failed");
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

}  // namespace detail

class BigReal {
 public:
  explicit BigReal(mpfr_prec_t prec = 64) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  BigReal(long value, mpfr_prec_t prec) {
    mpfr_init2(v_, prec);
    mpfr_set_si(v_, value, MPFR_RNDN);
  }
  BigReal(const std::string& text, mpfr_prec_t prec, mpfr_rnd_t rnd = MPFR_RNDN) {
    mpfr_init2(v_, prec);
    if (text.empty() || mpfr_set_str(v_, text.c_str(), 10, rnd) != 0) {
      mpfr_clear(v_);
      throw std::invalid_argument("not a number: " + text);
    }
  }
  BigReal(const BigReal& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  BigReal(BigReal&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
  }
  BigReal& operator=(const BigReal& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  BigReal& operator=(BigReal&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~BigReal() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
  int sign() const { return mpfr_sgn(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  std::string str(int digits = 40, char rnd = 'N') const {
    return detail::format_mpfr(v_, digits, rnd);
  }

  friend bool operator<(const BigReal& x, const BigReal& y) { return mpfr_less_p(x.v_, y.v_); }
  friend bool operator>(const BigReal& x, const BigReal& y) { return mpfr_greater_p(x.v_, y.v_); }
  friend bool operator<=(const BigReal& x, const BigReal& y) { return mpfr_lessequal_p(x.v_, y.v_); }
  friend bool operator>=(const BigReal& x, const BigReal& y) { return mpfr_greaterequal_p(x.v_, y.v_); }
  friend bool operator==(const BigReal& x, const BigReal& y) { return mpfr_equal_p(x.v_, y.v_); }

 private:
  mpfr_t v_;
};

// Closed interval [lo, hi]; every operation rounds lo down and hi up.
class RInterval {
 public:
  explicit RInterval(mpfr_prec_t prec = 64) : lo_(prec), hi_(prec) {}
  RInterval(long value, mpfr_prec_t prec) : lo_(value, prec), hi_(value, prec) {}
  RInterval(long lo, long hi, mpfr_prec_t prec) : lo_(lo, prec), hi_(hi, prec) {
    if (lo > hi) throw std::invalid_argument("RInterval: lo > hi");
  }
  RInterval(const std::string& lo, const std::string& hi, mpfr_prec_t prec)
      : lo_(lo, prec, MPFR_RNDD), hi_(hi, prec, MPFR_RNDU) {
    if (lo_ > hi_) throw std::invalid_argument("RInterval: lo > hi");
  }
  RInterval(BigReal lo, BigReal hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_ > hi_) throw std::invalid_argument("RInterval: lo > hi");
  }
  static RInterval point(const BigReal& x) { return RInterval(x, x); }

  const BigReal& lo() const { return lo_; }
  const BigReal& hi() const { return hi_; }
  BigReal& lo() { return lo_; }
  BigReal& hi() { return hi_; }
  mpfr_prec_t precision() const { return std::max(lo_.precision(), hi_.precision()); }

  bool contains(const BigReal& x) const { return lo_ <= x && x <= hi_; }
  bool contains(const RInterval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
  // o lies in the interior.
  bool strictly_contains(const RInterval& o) const { return lo_ < o.lo_ && o.hi_ < hi_; }
  bool contains_zero() const { return lo_.sign() <= 0 && hi_.sign() >= 0; }
  bool positive() const { return lo_.sign() > 0; }
  bool negative() const { return hi_.sign() < 0; }
  bool certainly_less(const RInterval& o) const { return hi_ < o.lo_; }
  bool disjoint(const RInterval& o) const { return hi_ < o.lo_ || o.hi_ < lo_; }
  bool is_point() const { return lo_ == hi_; }

  BigReal width() const {
    BigReal w(precision());
    mpfr_sub(w.get(), hi_.get(), lo_.get(), MPFR_RNDU);
    return w;
  }
  // Upper bound for log2 of the width; -inf encoded as a very negative number.
  double log2_width() const {
    BigReal w = width();
    if (w.sign() == 0) return -1e300;
    long e = 0;
    double m = mpfr_get_d_2exp(&e, w.get(), MPFR_RNDU);
    return std::log2(m) + static_cast<double>(e);
  }
  BigReal midpoint() const {
    BigReal m(precision());
    mpfr_add(m.get(), lo_.get(), hi_.get(), MPFR_RNDN);
    mpfr_div_2ui(m.get(), m.get(), 1, MPFR_RNDN);
    return m;
  }
  double mid_double() const { return midpoint().to_double(); }
  double radius_double() const {
    BigReal w = width();
    return mpfr_get_d(w.get(), MPFR_RNDU) / 2;
  }

  std::string lo_str(int digits = 40) const { return lo_.str(digits, 'D'); }
  std::string hi_str(int digits = 40) const { return hi_.str(digits, 'U'); }

  friend RInterval hull(const RInterval& x, const RInterval& y) {
    return RInterval(x.lo_ < y.lo_ ? x.lo_ : y.lo_, x.hi_ > y.hi_ ? x.hi_ : y.hi_);
  }

  friend RInterval operator+(const RInterval& x, const RInterval& y) {
    RInterval r(std::max(x.precision(), y.precision()));
    mpfr_add(r.lo_.get(), x.lo_.get(), y.lo_.get(), MPFR_RNDD);
    mpfr_add(r.hi_.get(), x.hi_.get(), y.hi_.get(), MPFR_RNDU);
    return r;
  }
  friend RInterval operator-(const RInterval& x, const RInterval& y) {
    RInterval r(std::max(x.precision(), y.precision()));
    mpfr_sub(r.lo_.get(), x.lo_.get(), y.hi_.get(), MPFR_RNDD);
    mpfr_sub(r.hi_.get(), x.hi_.get(), y.lo_.get(), MPFR_RNDU);
    return r;
  }
  friend RInterval operator-(const RInterval& x) {
    RInterval r(x.precision());
    mpfr_neg(r.lo_.get(), x.hi_.get(), MPFR_RNDD);
    mpfr_neg(r.hi_.get(), x.lo_.get(), MPFR_RNDU);
    return r;
  }
  friend RInterval operator*(const RInterval& x, const RInterval& y) {
    mpfr_prec_t p = std::max(x.precision(), y.precision());
    RInterval r(p);
    BigReal t(p);
    const BigReal* xs[2] = {&x.lo_, &x.hi_};
    const BigReal* ys[2] = {&y.lo_, &y.hi_};
    bool first = true;
    for (auto* a : xs)
      for (auto* b : ys) {
        mpfr_mul(t.get(), a->get(), b->get(), MPFR_RNDD);
        if (first || t < r.lo_) mpfr_set(r.lo_.get(), t.get(), MPFR_RNDD);
        mpfr_mul(t.get(), a->get(), b->get(), MPFR_RNDU);
        if (first || t > r.hi_) mpfr_set(r.hi_.get(), t.get(), MPFR_RNDU);
        first = false;
      }
    return r;
  }
  friend RInterval operator/(const RInterval& x, const RInterval& y) {
    if (y.contains_zero()) throw std::domain_error("RInterval: division by interval containing 0");
    mpfr_prec_t p = std::max(x.precision(), y.precision());
    RInterval inv(p);
    mpfr_ui_div(inv.lo_.get(), 1, y.hi_.get(), MPFR_RNDD);
    mpfr_ui_div(inv.hi_.get(), 1, y.lo_.get(), MPFR_RNDU);
    return x * inv;
  }

  RInterval abs() const {
    if (lo_.sign() >= 0) return *this;
    if (hi_.sign() <= 0) return -*this;
    RInterval r(precision());
    mpfr_set_zero(r.lo_.get(), 1);
    mpfr_neg(r.hi_.get(), lo_.get(), MPFR_RNDU);
    if (hi_ > r.hi_) mpfr_set(r.hi_.get(), hi_.get(), MPFR_RNDU);
    return r;
  }

  // Requires a positive interval.
  RInterval log() const {
    if (lo_.sign() <= 0) throw std::domain_error("RInterval::log of non-positive interval");
    RInterval r(precision());
    mpfr_log(r.lo_.get(), lo_.get(), MPFR_RNDD);
    mpfr_log(r.hi_.get(), hi_.get(), MPFR_RNDU);
    return r;
  }
  RInterval exp() const {
    RInterval r(precision());
    mpfr_exp(r.lo_.get(), lo_.get(), MPFR_RNDD);
    mpfr_exp(r.hi_.get(), hi_.get(), MPFR_RNDU);
    return r;
  }
  // x^n for x >= 0.
  RInterval pow(unsigned long n) const {
    if (lo_.sign() < 0) throw std::domain_error("RInterval::pow of interval with negative part");
    RInterval r(precision());
    mpfr_pow_ui(r.lo_.get(), lo_.get(), n, MPFR_RNDD);
    mpfr_pow_ui(r.hi_.get(), hi_.get(), n, MPFR_RNDU);
    return r;
  }
  // x^y for x > 0, y a point.
  RInterval pow(const RInterval& y) const { return (log() * y).exp(); }
  RInterval scaled(long k) const {
    RInterval r(*this);
    mpfr_mul_2si(r.lo_.get(), lo_.get(), k, MPFR_RNDD);
    mpfr_mul_2si(r.hi_.get(), hi_.get(), k, MPFR_RNDU);
    return r;
  }
  RInterval with_precision(mpfr_prec_t p) const {
    RInterval r(p);
    mpfr_set(r.lo_.get(), lo_.get(), MPFR_RNDD);
    mpfr_set(r.hi_.get(), hi_.get(), MPFR_RNDU);
    return r;
  }

 private:
  BigReal lo_, hi_;
};

inline RInterval from_int(std::int64_t v, mpfr_prec_t prec) {
  RInterval r(prec);
  mpfr_set_sj(r.lo().get(), v, MPFR_RNDD);
  mpfr_set_sj(r.hi().get(), v, MPFR_RNDU);
  return r;
}

}  // namespace fibtower
