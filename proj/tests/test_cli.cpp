#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracle.hpp"

namespace {

struct Result {
  int code = -1;
  std::string out, err;
  std::vector<std::string> lines() const {
    std::vector<std::string> v;
    std::istringstream in(out);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
  }
};

std::filesystem::path scratch() {
  auto p = std::filesystem::temp_directory_path() / ("fibtower_cli_" + std::to_string(::getpid()));
  std::filesystem::create_directories(p);
  return p;
}

Result run(const std::string& args, const std::string& env = "") {
  auto errf = scratch() / "stderr.txt";
  std::string cmd = env + (env.empty() ? "" : " ") + std::string(FIBTOWER_CLI) + " " + args + " 2>" + errf.string();
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  std::ifstream e(errf);
  r.err.assign(std::istreambuf_iterator<char>(e), {});
  return r;
}

std::vector<std::string> split(const std::string& s, char c = ',') {
  std::vector<std::string> v;
  std::string cur;
  for (char x : s) {
    if (x == c) {
      v.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(x);
    }
  }
  v.push_back(cur);
  return v;
}

}  // namespace

TEST(Cli, CuttingTimesCsv) {
  Result r = run("cutting-times --d 3 --kmax 12");
  ASSERT_EQ(r.code, 0) << r.err;
  auto l = r.lines();
  ASSERT_EQ(l.size(), 14u);
  EXPECT_EQ(l[0], "k,S");
  auto want = oracle::cutting_times(3, 12);
  for (int k = 0; k <= 12; ++k) EXPECT_EQ(l[k + 1], std::to_string(k) + "," + std::to_string(want[k]));
}

TEST(Cli, KneadingString) {
  Result r = run("kneading --d 2 --n 21");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "100111011001010011100\n");
  EXPECT_EQ(run("kneading --d 4 --n 200").out, oracle::kneading(4, 200) + "\n");
}

TEST(Cli, SolveJson) {
  Result r = run("solve --d 2 --prefix 21 --bits 128");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["d"], 2);
  EXPECT_EQ(j["prefix_len"], 21);
  double lo = std::stod(j["a_lo"].get<std::string>()), hi = std::stod(j["a_hi"].get<std::string>());
  EXPECT_LE(lo, hi);
  EXPECT_NEAR(lo, oracle::slope(2), 1e-14);
}

TEST(Cli, OrbitCsv) {
  Result r = run("orbit --d 2 --n 30");
  ASSERT_EQ(r.code, 0) << r.err;
  auto l = r.lines();
  ASSERT_EQ(l.size(), 32u);
  EXPECT_EQ(l[0], "n,c_lo,c_hi,symbol");
  std::string k = oracle::kneading(2, 30);
  EXPECT_EQ(split(l[1])[3], "C");
  for (int n = 1; n <= 30; ++n) {
    auto f = split(l[n + 1]);
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(f[0], std::to_string(n));
    EXPECT_LE(std::stod(f[1]), std::stod(f[2]));
    EXPECT_EQ(f[3], std::string(1, k[n - 1])) << n;
  }
}

TEST(Cli, CoverJson) {
  Result r = run("cover --d 2 --k 5");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["floor_count"], 13);
  ASSERT_EQ(j["towers"].size(), 2u);
  EXPECT_EQ(j["towers"][0]["height"], 8);
  EXPECT_EQ(j["towers"][1]["height"], 5);
  EXPECT_EQ(j["towers"][0]["floors"].size(), 8u);
}

TEST(Cli, VerifyCoverJson) {
  Result r = run("verify-cover --d 3 --kmax 8");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["kmax"], 8);
  for (const auto& c : j["results"]) EXPECT_NE(c["status"], "fail") << c.dump();
  EXPECT_EQ(j["results"].size(), 9u * 5u);
}

TEST(Cli, DiagramDot) {
  Result r = run("diagram --d 2 --depth 3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("digraph bratteli {", 0), 0u);
  EXPECT_NE(r.out.find("v2_2 -> v3_1 [label=\"2\"]"), std::string::npos);
  EXPECT_NE(r.out.find("v2_1 -> v3_2"), std::string::npos);
  EXPECT_EQ(r.out.substr(r.out.size() - 2), "}\n");
  EXPECT_EQ(run("diagram --d 2 --depth 3 --format json").code, 64);
}

TEST(Cli, VershikCsv) {
  Result r = run("vershik --d 2 --depth 8 --steps 40");
  ASSERT_EQ(r.code, 0) << r.err;
  auto l = r.lines();
  ASSERT_EQ(l.size(), 42u);
  EXPECT_EQ(l[0], "n,eta,terminal_vertex,floor_lo,floor_hi");
  for (int n = 0; n <= 40; ++n) {
    auto f = split(l[n + 1]);
    EXPECT_EQ(f[0], std::to_string(n));
    EXPECT_EQ(f[1], std::to_string(n % 34));  // 34 = S(8) paths, then back to the minimal one
    EXPECT_LE(std::stod(f[3]), std::stod(f[4]));
  }
}

TEST(Cli, MeasureJson) {
  Result r = run("measure --d 2 --k 3");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(std::stod(j["beta"]["lo"].get<std::string>()), 1.6180339887498949, 1e-15);
  ASSERT_EQ(j["towers"].size(), 2u);
  EXPECT_EQ(j["towers"][0]["height"], 3);
  EXPECT_NEAR(std::stod(j["towers"][0]["cylinder"]["lo"].get<std::string>()), 0.2360679774997897, 1e-15);
}

TEST(Cli, BirkhoffCsv) {
  Result r = run("birkhoff --d 2 --k 3 --iters 2000");
  ASSERT_EQ(r.code, 0) << r.err;
  auto l = r.lines();
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0], "i,empirical,expected,relative_error,ambiguous_count");
  for (int i = 1; i <= 2; ++i) {
    auto f = split(l[i]);
    ASSERT_EQ(f.size(), 5u);
    EXPECT_EQ(f[0], std::to_string(i));
    EXPECT_LT(std::stod(f[3]), 0.05);
  }
  EXPECT_NE(r.err.find("may overlap"), std::string::npos);
}

TEST(Cli, DimensionCsvAndJson) {
  Result r = run("dimension --d 2 --kmax 12 --alpha 0.1,0.2");
  ASSERT_EQ(r.code, 0) << r.err;
  auto l = r.lines();
  ASSERT_EQ(l.size(), 13u);
  EXPECT_EQ(l[0], "k,D_len,delta_direct,delta_formula,P_k,hsum_0.1,hsum_0.2");
  EXPECT_EQ(l[5].rfind("5,\"[", 0), 0u);
  Result j = run("dimension --d 2 --kmax 12 --format json");
  ASSERT_EQ(j.code, 0) << j.err;
  auto js = nlohmann::json::parse(j.out);
  EXPECT_EQ(js["entries"].size(), 12u);
  EXPECT_EQ(js["k_delta_equal"], 2);
  EXPECT_EQ(js["alphas"].size(), 3u);
  EXPECT_EQ(run("dimension --d 2 --kmax 5 --alpha -1").code, 64);
}

TEST(Cli, RecurrenceCsv) {
  Result r = run("recurrence --d 2 --kmax 10");
  ASSERT_EQ(r.code, 0) << r.err;
  auto l = r.lines();
  ASSERT_EQ(l.size(), 11u);
  EXPECT_EQ(l[0], "k,S,exponent");
  auto f = split(l[10]);
  EXPECT_EQ(f[1], "144");
  EXPECT_GT(std::stod(f[2]), 0);
  EXPECT_NE(r.err.find("estimate"), std::string::npos);
}

TEST(Cli, VerifyAll) {
  Result r = run("verify-all --d 2 --kmax 8");
  EXPECT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema"], "fibtower-verify/1");
  EXPECT_TRUE(j["passed"].get<bool>());
  Result bad = run("verify-all --d 2 --kmax 12 --bits 200");
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(nlohmann::json::parse(bad.out)["error"]["stage"], "solve");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("cutting-times --d 1 --kmax 3").code, 64);
  EXPECT_EQ(run("").code, 64);
  EXPECT_EQ(run("nonsense").code, 64);
  EXPECT_EQ(run("kneading --d 2 --n 0").code, 64);
  EXPECT_EQ(run("cover --d 2 --k -1").code, 64);
}

TEST(Cli, OutputFile) {
  auto f = scratch() / "ct.csv";
  Result r = run("cutting-times --d 2 --kmax 3 --output " + f.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(f);
  std::string s((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(s, "k,S\n0,1\n1,2\n2,3\n3,5\n");
}

TEST(Cli, ConfigFileAndOverride) {
  auto f = scratch() / "run.ini";
  std::ofstream(f) << "d=3\nkmax=4\n";
  Result r = run("--config " + f.string() + " cutting-times");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.lines().back(), "4,6");
  Result o = run("--config " + f.string() + " cutting-times --kmax 6");
  EXPECT_EQ(o.lines().back(), "6,13");
}

TEST(Cli, GuardBitsFromEnvironment) {
  const std::string cmd = "solve --d 2 --prefix 21 --bits 200";
  Result env = run(cmd, "FIBTOWER_GUARD_BITS=100");
  ASSERT_EQ(env.code, 0) << env.err;
  EXPECT_EQ(env.out, run(cmd + " --guard 100").out);
  EXPECT_NE(env.out, run(cmd).out);
  // unusable values fall back to the default, an explicit flag does not
  EXPECT_EQ(run(cmd, "FIBTOWER_GUARD_BITS=4").out, run(cmd).out);
  EXPECT_EQ(run(cmd + " --guard 4").code, 64);
}

TEST(Cli, Deterministic) {
  EXPECT_EQ(run("orbit --d 3 --n 50").out, run("orbit --d 3 --n 50").out);
  EXPECT_EQ(run("verify-all --d 3 --kmax 6").out, run("verify-all --d 3 --kmax 6").out);
}
