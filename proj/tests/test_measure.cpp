#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "cache.hpp"
#include "fibtower/measure.hpp"
#include "oracle.hpp"

using namespace fibtower;

namespace {

const double phi = (1 + std::sqrt(5.0)) / 2;

RInterval one(mpfr_prec_t p = 256) { return from_int(1, p); }

bool near(const RInterval& x, double v, double tol) { return std::abs(x.mid_double() - v) <= tol; }

}  // namespace

TEST(PerronRoot, GoldenRatio) {
  RInterval b = perron_root(2);
  EXPECT_TRUE(near(b, phi, 1e-15));
  // (1 + sqrt 5) / 2 enclosed
  RInterval five = from_int(5, 300);
  RInterval s(300);
  mpfr_sqrt(s.lo().get(), five.lo().get(), MPFR_RNDD);
  mpfr_sqrt(s.hi().get(), five.hi().get(), MPFR_RNDU);
  RInterval g = (s + one(300)).scaled(-1);
  EXPECT_FALSE(b.disjoint(g));
}

TEST(PerronRoot, D3) { EXPECT_TRUE(near(perron_root(3), 1.4655712319, 1e-10)); }

TEST(PerronRoot, MatchesBisectionOracle) {
  for (int d = 2; d <= 8; ++d) EXPECT_NEAR(perron_root(d).mid_double(), static_cast<double>(oracle::perron(d)), 1e-15);
}

TEST(PerronRoot, NarrowAndSignCertified) {
  for (int d = 2; d <= 6; ++d) {
    RInterval b = perron_root(d, 200);
    EXPECT_LE(b.log2_width(), -190);
    EXPECT_GT(b.lo().to_double(), 1.0);
    EXPECT_LT(b.hi().to_double(), 2.0);
    EXPECT_EQ(detail::perron_poly_sign(d, RInterval::point(b.lo())), -1);
    EXPECT_EQ(detail::perron_poly_sign(d, RInterval::point(b.hi())), 1);
  }
}

TEST(PerronRoot, BracketAtOneAndTwo) {
  for (int d = 2; d <= 10; ++d) {
    EXPECT_EQ(detail::perron_poly_sign(d, from_int(1, 64)), -1);
    EXPECT_EQ(detail::perron_poly_sign(d, from_int(2, 64)), 1);
  }
  EXPECT_THROW(perron_root(1), std::domain_error);
}

TEST(PerronRoot, EigenvectorOfTheStationaryMatrix) {
  for (int d = 2; d <= 6; ++d) {
    MeasureTable mt(d);
    std::vector<RInterval> w;
    for (int j = 0; j < d; ++j) w.push_back(mt.beta_inverse_power(j));
    IntMatrix f = stationary_power(d, 1);
    for (int r = 0; r < d; ++r) {
      RInterval s(256);
      for (int c = 0; c < d; ++c) s = s + from_int(f[r][c], 256) * w[c];
      EXPECT_FALSE(s.disjoint(mt.beta() * w[r])) << d << " " << r;
    }
  }
}

TEST(ReducePower, Identities) {
  EXPECT_EQ(reduce_power(2, 0), (std::vector<std::int64_t>{1, 0}));
  EXPECT_EQ(reduce_power(2, 2), (std::vector<std::int64_t>{1, 1}));
  EXPECT_EQ(reduce_power(2, 5), (std::vector<std::int64_t>{3, 5}));
  EXPECT_EQ(reduce_power(3, 3), (std::vector<std::int64_t>{1, 0, 1}));
  EXPECT_THROW(reduce_power(2, -1), std::domain_error);
}

TEST(ReducePower, EvaluatesToThePower) {
  for (int d = 2; d <= 5; ++d) {
    MeasureTable mt(d);
    for (int n = 0; n <= 30; ++n) {
      auto c = reduce_power(d, n);
      RInterval s(256);
      for (int j = 0; j < d; ++j) s = s + from_int(c[j], 256) * mt.beta().pow(j);
      EXPECT_FALSE(s.disjoint(mt.beta().pow(n)));
    }
  }
}

TEST(Measures, CylindersD2K3) {
  MeasureTable mt(2);
  EXPECT_TRUE(near(mt.cylinder_measure(3, 1), 0.2360679, 1e-7));
  EXPECT_TRUE(near(mt.cylinder_measure(3, 2), 0.1458980, 1e-7));
  EXPECT_TRUE(near(mt.cylinder_measure(3, 1), std::pow(phi, -3), 1e-15));
}

TEST(Measures, TowersD2K3) {
  MeasureTable mt(2);
  RInterval t1 = mt.tower_measure(3, 1), t2 = mt.tower_measure(3, 2);
  EXPECT_TRUE(near(t1, 3 * std::pow(phi, -3), 1e-15));
  EXPECT_TRUE(near(t2, 2 * std::pow(phi, -4), 1e-15));
  EXPECT_TRUE((t1 + t2).contains(BigReal(1L, 256)));
}

TEST(Measures, TowersD3K6) {
  MeasureTable mt(3);
  EXPECT_EQ(tower_height(3, 1, 6), 6);
  EXPECT_EQ(tower_height(3, 2, 6), 3);
  EXPECT_EQ(tower_height(3, 3, 6), 4);
  RInterval b = mt.beta();
  RInterval s = from_int(6, 256) / b.pow(6) + from_int(3, 256) / b.pow(7) + from_int(4, 256) / b.pow(8);
  EXPECT_TRUE(s.contains(BigReal(1L, 256)));
  EXPECT_TRUE(mt.total_measure(6).contains(BigReal(1L, 256)));
}

TEST(Measures, LowestLevelIsOneOverPowers) {
  for (int d = 2; d <= 6; ++d) {
    MeasureTable mt(d);
    RInterval s(256);
    for (int l = 1; l <= d; ++l) {
      EXPECT_EQ(tower_height(d, l, d - 1), 1);
      RInterval c = mt.cylinder_measure(d - 1, l);
      EXPECT_FALSE(c.disjoint(mt.beta_inverse_power(d - 1 + l - 1)));
      s = s + c;
    }
    EXPECT_TRUE(s.contains(BigReal(1L, 256)));
  }
}

TEST(Measures, Floors) {
  MeasureTable m2(2), m3(3);
  EXPECT_TRUE(near(m2.floor_measure(3, 1), std::pow(phi, -3), 1e-15));
  EXPECT_FALSE(m3.floor_measure(5, 3).disjoint(m3.beta_inverse_power(7)));
  for (int d = 2; d <= 5; ++d) {
    MeasureTable mt(d);
    for (int k = 2 * d - 1; k <= 2 * d + 10; ++k)
      for (int i : tower_indices(d, k)) {
        RInterval prod = from_int(tower_height(d, i, k), 256) * mt.floor_measure(k, i);
        EXPECT_FALSE(prod.disjoint(mt.tower_measure(k, i)));
      }
  }
}

TEST(Measures, RangeErrors) {
  MeasureTable mt(3);
  EXPECT_THROW(mt.cylinder_measure(1, 1), std::domain_error);
  EXPECT_THROW(mt.cylinder_measure(4, 4), std::out_of_range);
  EXPECT_THROW(mt.tower_measure(1, 1), std::domain_error);
  EXPECT_THROW(mt.floor_measure(4, 1), std::domain_error);
  EXPECT_THROW(mt.floor_measure(6, 7), std::out_of_range);
}

TEST(Normalisation, EnclosuresAndExactIdentity) {
  for (int d = 2; d <= 5; ++d) {
    MeasureTable mt(d);
    for (int k = d - 1; k <= 2 * d + 10; ++k) {
      RInterval t = mt.total_measure(k);
      EXPECT_TRUE(t.contains(BigReal(1L, 256))) << d << " " << k;
      EXPECT_LE(t.log2_width(), -40);
      EXPECT_TRUE(normalisation_exact(d, k)) << d << " " << k;
    }
  }
}

TEST(Normalisation, PathCountsTimesCylinders) {
  for (int d = 2; d <= 5; ++d) {
    MeasureTable mt(d);
    for (int k = d - 1; k <= 30; ++k) {
      auto n = path_counts(d, k);
      auto v = tower_indices(d, k);
      RInterval s(256);
      for (std::size_t j = 0; j < v.size(); ++j) s = s + from_int(n[j], 256) * mt.cylinder_measure(k, v[j]);
      EXPECT_TRUE(s.contains(BigReal(1L, 256))) << d << " " << k;
    }
  }
}

TEST(Normalisation, Stationarity) {
  for (int d = 2; d <= 5; ++d) {
    MeasureTable mt(d);
    for (int k = d - 1; k <= 25; ++k)
      for (int l = 1; l <= d; ++l)
        EXPECT_FALSE((mt.cylinder_measure(k + 1, l) * mt.beta()).disjoint(mt.cylinder_measure(k, l)));
  }
}

TEST(Normalisation, PushforwardOfCylinders) {
  for (int d = 2; d <= 4; ++d) {
    MeasureTable mt(d);
    const int k = 2 * d + 2;
    for (const auto& p : enumerate_paths(d, k))
      EXPECT_FALSE(mt.cylinder_measure(k, p.terminal()).disjoint(mt.floor_measure(k, p.terminal())));
  }
}

TEST(Birkhoff, D2LevelFour) {
  Realization r = realize(2, cover_orbit_need(2, 4), 16384);
  Cover cv = build_cover(r, 4);
  MeasureTable mt(2);
  auto tallies = birkhoff_frequencies(r, cv, 20000, mt);
  ASSERT_EQ(tallies.size(), 2u);
  EXPECT_TRUE(near(tallies[0].expected, 5 * std::pow(phi, -4), 1e-12));
  for (const auto& t : tallies) {
    EXPECT_LT(t.relative_error(), 0.05) << "tower " << t.tower;
    EXPECT_LT(static_cast<double>(t.ambiguous), 0.001 * 20000);
  }
  double total = tallies[0].empirical() + tallies[1].empirical();
  EXPECT_GE(total, 0.99);
}

TEST(Birkhoff, D2CentralLevelTowerTwo) {
  Realization r = realize(2, cover_orbit_need(2, 3), 16384);
  Cover cv = build_cover(r, 3);
  MeasureTable mt(2);
  BirkhoffTally t = birkhoff_frequency(r, cv, 2, 20000, mt);
  EXPECT_TRUE(near(t.expected, 2 * std::pow(phi, -4), 1e-12));
  EXPECT_LT(t.relative_error(), 0.05);
  EXPECT_THROW(birkhoff_frequency(r, build_cover(r, 0), 1, 10, mt), std::domain_error);
  EXPECT_THROW(birkhoff_frequencies(r, cv, 0, mt), std::invalid_argument);
}
