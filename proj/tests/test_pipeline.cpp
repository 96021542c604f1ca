#include <gtest/gtest.h>

#include <set>
#include <string>

#include "fibtower/pipeline.hpp"

using namespace fibtower;

namespace {

const VerifyOutcome& d2() {
  static VerifyOutcome v = [] {
    RunConfig c;
    c.d = 2;
    c.kmax = 10;
    return verify_all(c);
  }();
  return v;
}

}  // namespace

TEST(VerifyAll, D2LevelTenPasses) {
  const VerifyOutcome& v = d2();
  EXPECT_EQ(v.exit_code, 0) << v.report.dump(2);
  EXPECT_TRUE(v.failed_stage.empty());
  EXPECT_EQ(v.report["schema"], "fibtower-verify/1");
  EXPECT_EQ(v.report["d"], 2);
  EXPECT_EQ(v.report["kmax"], 10);
  EXPECT_TRUE(v.report["passed"].get<bool>());
  EXPECT_FALSE(v.report.contains("error"));
}

TEST(VerifyAll, ReportCoversEveryStage) {
  std::set<std::string> stages, names;
  for (const auto& c : d2().report["checks"]) {
    stages.insert(c["stage"].get<std::string>());
    names.insert(c["name"].get<std::string>());
    EXPECT_NE(c["status"], "fail") << c.dump();
  }
  EXPECT_EQ(stages, (std::set<std::string>{"cover", "split", "adic", "measure", "dimension"}));
  for (const char* n : {"nesting", "disjoint_floors", "semiconjugacy", "maximal_path_eta", "normalisation", "tent_identity"})
    EXPECT_TRUE(names.count(n)) << n;
}

TEST(VerifyAll, ConstantsAreOrderedEnclosures) {
  const auto& c = d2().report["constants"];
  for (const char* key : {"a_d", "beta_d"}) {
    double lo = std::stod(c[key]["lo"].get<std::string>()), hi = std::stod(c[key]["hi"].get<std::string>());
    EXPECT_LE(lo, hi);
  }
  EXPECT_NEAR(std::stod(c["beta_d"]["lo"].get<std::string>()), 1.6180339887498949, 1e-14);
  EXPECT_NEAR(std::stod(c["a_d"]["lo"].get<std::string>()), 1.7292, 1e-3);
}

TEST(VerifyAll, Deterministic) {
  RunConfig c;
  c.d = 2;
  c.kmax = 10;
  EXPECT_EQ(verify_all(c).report.dump(), d2().report.dump());
}

TEST(VerifyAll, D4ShortRunHasNoDisjointness) {
  RunConfig c;
  c.d = 4;
  c.kmax = 6;
  VerifyOutcome v = verify_all(c);
  EXPECT_EQ(v.exit_code, 0) << v.report.dump(2);
  int seen = 0;
  for (const auto& ch : v.report["checks"])
    if (ch["name"] == "disjoint_floors") {
      EXPECT_EQ(ch["status"], "not_applicable");
      ++seen;
    }
  EXPECT_EQ(seen, 7);
}

TEST(VerifyAll, TooFewBitsStopsAtSolve) {
  RunConfig c;
  c.d = 2;
  c.kmax = 12;
  c.bits = 200;
  VerifyOutcome v = verify_all(c);
  EXPECT_EQ(v.exit_code, 2);
  EXPECT_EQ(v.failed_stage, "solve");
  EXPECT_EQ(v.report["error"]["kind"], "precision_exhausted");
  EXPECT_FALSE(v.report["passed"].get<bool>());
}

TEST(VerifyAll, BadArguments) {
  RunConfig c;
  c.d = 1;
  EXPECT_THROW(verify_all(c), std::invalid_argument);
  c.d = 2;
  c.kmax = -1;
  EXPECT_THROW(verify_all(c), std::invalid_argument);
}
