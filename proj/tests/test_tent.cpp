#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "cache.hpp"
#include "fibtower/kneading.hpp"
#include "fibtower/tent.hpp"
#include "oracle.hpp"

using namespace fibtower;

namespace {

std::string symbols(const CriticalOrbit& orb, std::int64_t from, std::int64_t to) {
  std::string s;
  for (std::int64_t n = from; n <= to; ++n) s.push_back(symbol_char(orb.symbol(n)));
  return s;
}

RInterval pt(long v) { return RInterval(v, 128); }

}  // namespace

TEST(TentApply, Examples) {
  RInterval y = tent_apply(pt(2), pt(0));
  EXPECT_TRUE(y.is_point());
  EXPECT_EQ(y.mid_double(), 1.0);
  EXPECT_EQ(tent_apply(pt(2), pt(1)).mid_double(), -1.0);
  EXPECT_EQ(tent_apply(pt(2), pt(-1)).mid_double(), -1.0);
}

TEST(TentApply, StraddlingZeroReachesTheTop) {
  RInterval x(-1, 1, 64);
  RInterval y = tent_apply(pt(2), x);
  EXPECT_EQ(y.lo().to_double(), -1.0);
  EXPECT_EQ(y.hi().to_double(), 1.0);
}

TEST(TentApply, SlopeMustBePositive) { EXPECT_THROW(tent_apply(RInterval(-1, 1, 64), pt(0)), std::domain_error); }

TEST(TentApply, WidthBoundAtTheSlope) {
  TentSystem sys = solve_parameter(2, 21, 128);
  RInterval c1 = tent_apply(sys.a, pt(0));
  EXPECT_TRUE(c1.contains(sys.a - pt(1)));
  BigReal w = c1.width(), wa = sys.a.width();
  EXPECT_LE(w.to_double(), 2 * wa.to_double());
}

TEST(RequiredPrecision, Examples) {
  EXPECT_EQ(required_precision(2, 100, 64), 164);
  EXPECT_EQ(required_precision(2, 1, 64), 65);
  EXPECT_EQ(required_precision(5, 1000, 64), 1064);
  EXPECT_THROW(required_precision(1, 10), std::domain_error);
  EXPECT_THROW(required_precision(2, -1), std::invalid_argument);
}

TEST(SolveParameter, D2PrefixMatchesK2) {
  TentSystem sys = solve_parameter(2, 21, 128);
  CriticalOrbit orb = critical_orbit(sys, 21);
  EXPECT_EQ(symbols(orb, 1, 21), "100111011001010011100");
  EXPECT_EQ(sys.certified_prefix, 21);
  EXPECT_GT(sys.a.lo().to_double(), 1.0);
  EXPECT_LE(sys.a.hi().to_double(), 2.0);
}

TEST(SolveParameter, D3PrefixMatchesK3) {
  TentSystem sys = solve_parameter(3, 21, 128);
  EXPECT_EQ(symbols(critical_orbit(sys, 21), 1, 21), "100011101100110001010");
}

TEST(SolveParameter, ShortPrefixAtLowPrecision) {
  TentSystem sys = solve_parameter(2, 2, 64);
  EXPECT_GT(sys.a.lo().to_double(), 1.0);
  EXPECT_LE(sys.a.hi().to_double(), 2.0);
  EXPECT_EQ(symbols(critical_orbit(sys, 2), 1, 2), "10");
}

TEST(SolveParameter, AgreesWithBisectionOracle) {
  for (int d = 2; d <= 5; ++d) {
    TentSystem sys = solve_parameter(d, 64, 256);
    double want = oracle::slope(d);
    EXPECT_NEAR(sys.a.mid_double(), want, 1e-14) << "d=" << d;
  }
}

TEST(SolveParameter, EnclosureWidthFollowsPrecision) {
  TentSystem sys = solve_parameter(2, 21, 200, SolveOptions{64, 40});
  EXPECT_LE(sys.a.log2_width(), -(200 - 64) + 1);
}

TEST(SolveParameter, SlopesIncreaseWithD) {
  double prev = 1;
  for (int d = 2; d <= 6; ++d) {
    TentSystem sys = solve_parameter(d, 40, 128);
    EXPECT_GT(sys.a.lo().to_double(), prev);
    EXPECT_LT(sys.a.hi().to_double(), 2.0);
    prev = sys.a.hi().to_double();
  }
}

TEST(SolveParameter, BadArguments) {
  EXPECT_THROW(solve_parameter(1, 10, 128), std::domain_error);
  EXPECT_THROW(solve_parameter(2, 0, 128), std::invalid_argument);
  EXPECT_THROW(solve_parameter(2, 10, 16), std::invalid_argument);
}

TEST(CriticalOrbit, SignPatterns) {
  const Realization& r2 = testcache::realization(2, 200);
  EXPECT_EQ(symbols(*r2.orbit, 1, 2), "10");
  EXPECT_TRUE((*r2.orbit)[2].negative());
  EXPECT_TRUE((*r2.orbit)[1].positive());
  EXPECT_EQ(symbols(*r2.orbit, 1, 7), "1001110");
  const Realization& r3 = testcache::realization(3, 200);
  EXPECT_EQ(symbols(*r3.orbit, 1, 4), "1000");
}

TEST(CriticalOrbit, ItineraryIsTheKneadingSequence) {
  for (int d = 2; d <= 4; ++d) {
    const Realization& r = testcache::realization(d, 400);
    EXPECT_EQ(symbols(*r.orbit, 1, 400), to_string(kneading_sequence(d, 400))) << "d=" << d;
  }
}

TEST(CriticalOrbit, EnclosuresFollowTheMap) {
  const Realization& r = testcache::realization(2, 400);
  const CriticalOrbit& orb = *r.orbit;
  for (std::int64_t n = 0; n < orb.length(); ++n)
    EXPECT_TRUE(tent_apply(r.system.a, orb[n]).contains(orb[n + 1])) << "n=" << n;
}

TEST(CriticalOrbit, CloseReturnsShrink) {
  for (int d = 2; d <= 4; ++d) {
    const Realization& r = testcache::realization(d, 400);
    const Combinatorics& c = combinatorics(d);
    for (int k = 0; c.S(k + 1) <= 400; ++k) {
      RInterval x = (*r.orbit)[c.S(k)].abs(), y = (*r.orbit)[c.S(k + 1)].abs();
      EXPECT_TRUE(y.certainly_less(x)) << "d=" << d << " k=" << k;
    }
  }
}

TEST(CriticalOrbit, BeyondLengthIsPrecisionExhausted) {
  const Realization& r = testcache::realization(2, 200);
  EXPECT_THROW((*r.orbit)[201], PrecisionExhausted);
}

TEST(CriticalOrbit, TooLittlePrecisionIsReported) {
  TentSystem sys = solve_parameter(2, 21, 64);
  EXPECT_THROW(critical_orbit(sys, 2000), PrecisionExhausted);
}

TEST(CriticalOrbit, RefinementKeepsSymbols) {
  Realization lo = realize(2, 300, 1024);
  Realization hi = realize(2, 300, 2048);
  EXPECT_EQ(symbols(*lo.orbit, 1, 300), symbols(*hi.orbit, 1, 300));
  EXPECT_EQ(hofbauer_cutting_times(*lo.orbit, 300), hofbauer_cutting_times(*hi.orbit, 300));
  EXPECT_TRUE(lo.system.a.contains(hi.system.a) || hi.system.a.contains(lo.system.a) ||
              !lo.system.a.disjoint(hi.system.a));
}

TEST(Hofbauer, FirstLevel) {
  const Realization& r = testcache::realization(2, 200);
  RInterval h1 = hofbauer_interval(*r.orbit, 1);
  EXPECT_TRUE(h1.lo() == BigReal(0L, 64));
  EXPECT_TRUE(h1.contains((*r.orbit)[1]));
}

TEST(Hofbauer, FibonacciCuttingTimes) {
  const Realization& r = testcache::realization(2, 200);
  EXPECT_EQ(hofbauer_cutting_times(*r.orbit, 144), (std::vector<std::int64_t>{1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144}));
}

TEST(Hofbauer, D3TurningPointAtFourNotFive) {
  const Realization& r = testcache::realization(3, 200);
  auto lv = hofbauer_levels(*r.orbit, 5);
  EXPECT_TRUE(lv[3].contains_turning_point);
  EXPECT_FALSE(lv[4].contains_turning_point);
  EXPECT_TRUE(hofbauer_interval(*r.orbit, 4).contains_zero());
  EXPECT_FALSE(hofbauer_interval(*r.orbit, 5).contains_zero());
}

TEST(Hofbauer, CuttingTimesAgreeWithCombinatorics) {
  for (int d = 2; d <= 5; ++d) {
    const Realization& r = testcache::realization(d, 400);
    std::vector<std::int64_t> want;
    for (int k = 0; cutting_time(d, k) <= 400; ++k) want.push_back(cutting_time(d, k));
    EXPECT_EQ(hofbauer_cutting_times(*r.orbit, 400), want) << "d=" << d;
  }
}

TEST(Hofbauer, LevelZeroRejected) {
  const Realization& r = testcache::realization(2, 200);
  EXPECT_THROW(hofbauer_levels(*r.orbit, 0), std::invalid_argument);
}

TEST(Pullback, EnclosuresMeetTheForwardOrbit) {
  const Realization& r = testcache::realization(2, 400);
  std::int64_t seen = 0;
  for_each_pullback(r.system, 400, pullback_lookahead(r.system), [&](std::int64_t n, const RInterval& x) {
    ++seen;
    EXPECT_FALSE(x.disjoint((*r.orbit)[n])) << "n=" << n;
    EXPECT_LT(x.log2_width(), -100) << "n=" << n;
  });
  EXPECT_EQ(seen, 400);
}

TEST(GuardBits, EnvironmentOverride) {
  setenv("FIBTOWER_GUARD_BITS", "80", 1);
  EXPECT_EQ(default_guard_bits(), 80);
  setenv("FIBTOWER_GUARD_BITS", "junk", 1);
  EXPECT_EQ(default_guard_bits(), kDefaultGuardBits);
  setenv("FIBTOWER_GUARD_BITS", "4", 1);
  EXPECT_EQ(default_guard_bits(), kDefaultGuardBits);
  unsetenv("FIBTOWER_GUARD_BITS");
  EXPECT_EQ(default_guard_bits(), kDefaultGuardBits);
}
