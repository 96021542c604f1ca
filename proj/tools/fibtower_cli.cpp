// fibtower: command line front end. Machine-readable output goes to stdout
// (or --output), summaries to stderr.
//
// Exit codes: 0 ok, 1 failed certificate, 2 precision or orbit exhausted,
// 64 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fibtower/adic.hpp"
#include "fibtower/covers.hpp"
#include "fibtower/dimension.hpp"
#include "fibtower/kneading.hpp"
#include "fibtower/measure.hpp"
#include "fibtower/pipeline.hpp"
#include "fibtower/tent.hpp"

using namespace fibtower;
using nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 64;

struct Args {
  int d = 2;
  int k = 4;
  int kmax = 10;
  int depth = 8;
  std::int64_t n = 21;
  std::int64_t prefix = 64;
  std::string bits = "auto";
  std::int64_t iters = 100000;
  std::int64_t steps = 100;
  std::vector<std::string> alpha{"0.2", "0.1", "0.05"};
  std::string format;
  std::string output;
  int guard = default_guard_bits();
  int digits = 40;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::int64_t> parse_bits(const std::string& s) {
  if (s == "auto") return std::nullopt;
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos == s.size() && v >= 32) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("--bits must be 'auto' or an integer >= 32, got '" + s + "'");
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// CSV cell holding an enclosure; quoted because of the comma.
std::string cell(const RInterval& x, int digits) {
  return "\"[" + x.lo_str(digits) + "," + x.hi_str(digits) + "]\"";
}

ordered_json jinterval(const RInterval& x, int digits) { return interval_json(x, digits); }

SolveOptions solve_options(const Args& a) {
  SolveOptions o;
  o.guard = a.guard;
  return o;
}

int cmd_cutting_times(const Args& a, std::ostream& out) {
  const Combinatorics& c = combinatorics(a.d);
  if (a.kmax < 0) throw UsageError("--kmax must be >= 0");
  out << "k,S\n";
  for (int k = 0; k <= a.kmax; ++k) out << k << "," << c.S(k) << "\n";
  return 0;
}

int cmd_kneading(const Args& a, std::ostream& out) {
  if (a.n < 1) throw UsageError("--n must be >= 1");
  out << to_string(kneading_sequence(a.d, static_cast<std::size_t>(a.n))) << "\n";
  return 0;
}

int cmd_solve(const Args& a, std::ostream& out) {
  auto b = parse_bits(a.bits);
  std::int64_t bits = b ? *b : required_precision(a.d, a.prefix, a.guard);
  TentSystem s = solve_parameter(a.d, a.prefix, bits, solve_options(a));
  ordered_json j;
  j["d"] = a.d;
  j["a_lo"] = s.a.lo_str(a.digits);
  j["a_hi"] = s.a.hi_str(a.digits);
  j["prefix_len"] = s.certified_prefix;
  j["bits"] = bits;
  out << j.dump(2) << "\n";
  std::cerr << "solve: d=" << a.d << " width 2^" << fmt("%.1f", s.a.log2_width()) << "\n";
  return 0;
}

int cmd_orbit(const Args& a, std::ostream& out) {
  if (a.n < 0) throw UsageError("--n must be >= 0");
  Realization r = realize(a.d, std::max<std::int64_t>(a.n, 1), parse_bits(a.bits), solve_options(a));
  const CriticalOrbit& orb = *r.orbit;
  out << "n,c_lo,c_hi,symbol\n";
  for (std::int64_t i = 0; i <= a.n; ++i)
    out << i << "," << orb[i].lo_str(a.digits) << "," << orb[i].hi_str(a.digits) << ","
        << symbol_char(orb.symbol(i)) << "\n";
  std::cerr << "orbit: d=" << a.d << " n=" << a.n << " bits=" << r.system.precision() << "\n";
  return 0;
}

int cmd_cover(const Args& a, std::ostream& out) {
  if (a.k < 0) throw UsageError("--k must be >= 0");
  Realization r = realize(a.d, cover_orbit_need(a.d, a.k), parse_bits(a.bits), solve_options(a));
  Cover cv = build_cover(r, a.k);
  const CriticalOrbit& orb = cv.orbit();
  ordered_json j;
  j["d"] = a.d;
  j["k"] = a.k;
  j["floor_count"] = cv.floor_count();
  ordered_json towers = ordered_json::array();
  for (const Tower& t : cv.towers()) {
    ordered_json tj;
    tj["i"] = t.index;
    tj["height"] = t.height;
    ordered_json fl = ordered_json::array();
    for (std::size_t n = 0; n < t.floors.size(); ++n) {
      const Floor& f = t.floors[n];
      fl.push_back({{"n", n},
                    {"lo_index", f.lo},
                    {"hi_index", f.hi},
                    {"lo", orb[f.lo].lo_str(a.digits)},
                    {"hi", orb[f.hi].hi_str(a.digits)}});
    }
    tj["floors"] = std::move(fl);
    towers.push_back(std::move(tj));
  }
  j["towers"] = std::move(towers);
  out << j.dump(2) << "\n";
  std::cerr << "cover: d=" << a.d << " k=" << a.k << " floors=" << cv.floor_count() << "\n";
  return 0;
}

int cmd_verify_cover(const Args& a, std::ostream& out) {
  if (a.kmax < 0) throw UsageError("--kmax must be >= 0");
  Realization r = realize(a.d, certificate_orbit_need(a.d, a.kmax), parse_bits(a.bits), solve_options(a));
  CoverReport rep = verify_cover_certificates(r, a.kmax);
  ordered_json j;
  j["d"] = a.d;
  j["kmax"] = a.kmax;
  j["n_test"] = rep.n_test;
  ordered_json res = ordered_json::array();
  for (const auto& c : rep.results)
    res.push_back({{"name", c.name}, {"k", c.k}, {"status", status_name(c.status)}, {"where", c.where},
                   {"checked", c.checked}});
  j["results"] = std::move(res);
  j["passed"] = rep.passed();
  out << j.dump(2) << "\n";
  std::cerr << "verify-cover: " << (rep.passed() ? "pass" : "FAIL") << "\n";
  return rep.passed() ? 0 : 1;
}

int cmd_diagram(const Args& a, std::ostream& out) {
  if (!a.format.empty() && a.format != "dot") throw UsageError("diagram supports --format dot only");
  out << build_diagram(a.d, a.depth).to_dot();
  return 0;
}

int cmd_vershik(const Args& a, std::ostream& out) {
  if (a.steps < 0) throw UsageError("--steps must be >= 0");
  Realization r = realize(a.d, semiconjugacy_orbit_need(a.d, a.depth, a.steps), parse_bits(a.bits),
                          solve_options(a));
  Cover cv = build_cover(r, a.depth);
  const CriticalOrbit& orb = *r.orbit;
  out << "n,eta,terminal_vertex,floor_lo,floor_hi\n";
  AdicPath x = minimal_adic_path();
  for (std::int64_t n = 0; n <= a.steps; ++n) {
    if (n > 0) x = vershik_successor(a.d, x);
    FinitePath p = truncate(a.d, x, a.depth);
    Floor f = project_cylinder(cv, p);
    out << n << "," << eta(a.d, p) << "," << p.terminal() << "," << orb[f.lo].lo_str(a.digits) << ","
        << orb[f.hi].hi_str(a.digits) << "\n";
  }
  return 0;
}

int cmd_measure(const Args& a, std::ostream& out) {
  MeasureTable mt(a.d);
  if (a.k < a.d - 1) throw UsageError("measures are given for k >= d-1");
  ordered_json j;
  j["d"] = a.d;
  j["k"] = a.k;
  j["beta"] = jinterval(mt.beta(), a.digits);
  ordered_json towers = ordered_json::array();
  for (int i : tower_indices(a.d, a.k)) {
    ordered_json t;
    t["i"] = i;
    t["height"] = tower_height(a.d, i, a.k);
    t["cylinder"] = jinterval(mt.cylinder_measure(a.k, i), a.digits);
    t["tower"] = jinterval(mt.tower_measure(a.k, i), a.digits);
    t["floor"] = a.k >= 2 * a.d - 1 ? jinterval(mt.floor_measure(a.k, i), a.digits) : ordered_json(nullptr);
    towers.push_back(std::move(t));
  }
  j["towers"] = std::move(towers);
  j["total"] = jinterval(mt.total_measure(a.k), a.digits);
  j["normalisation_exact"] = normalisation_exact(a.d, a.k);
  out << j.dump(2) << "\n";
  return 0;
}

int cmd_birkhoff(const Args& a, std::ostream& out) {
  if (a.iters < 1) throw UsageError("--iters must be >= 1");
  auto b = parse_bits(a.bits);
  std::int64_t need = cover_orbit_need(a.d, a.k);
  // Orbit points come arbitrarily close to floor endpoints; 2^14 bits keeps
  // the undecided share of 10^5 iterates below 0.1% at small k.
  std::int64_t bits = b ? *b : std::max<std::int64_t>(plan_orbit_bits(a.d, need, a.guard), 16384);
  Realization r = realize(a.d, need, bits, solve_options(a));
  MeasureTable mt(a.d);
  Cover cv = build_cover(r, a.k);
  auto tallies = birkhoff_frequencies(r, cv, a.iters, mt);
  out << "i,empirical,expected,relative_error,ambiguous_count\n";
  double sum = 0;
  for (const auto& t : tallies) {
    out << t.tower << "," << fmt("%.8f", t.empirical()) << "," << fmt("%.10f", t.expected.mid_double()) << ","
        << fmt("%.6g", t.relative_error()) << "," << t.ambiguous << "\n";
    sum += t.empirical();
  }
  std::cerr << "birkhoff: d=" << a.d << " k=" << a.k << " iters=" << a.iters << " bits=" << bits
            << " frequency sum " << fmt("%.6f", sum) << " (top floors of different towers may overlap)\n";
  return 0;
}

std::string opt_str(const std::optional<int>& x) { return x ? std::to_string(*x) : "none"; }

int cmd_dimension(const Args& a, std::ostream& out) {
  if (a.kmax < 1) throw UsageError("--kmax must be >= 1");
  for (const auto& s : a.alpha) parse_alpha(s, 64);
  DimensionOptions o;
  o.kmax = a.kmax;
  o.alphas = a.alpha;
  DimensionSeries s = dimension_series(a.d, o, parse_bits(a.bits));
  if (a.format == "json") {
    ordered_json j;
    j["d"] = a.d;
    j["kmax"] = a.kmax;
    j["k_orbit"] = s.k_orbit;
    j["k_direct"] = s.k_direct;
    j["alphas"] = a.alpha;
    ordered_json rows = ordered_json::array();
    for (const auto& e : s.entries) {
      ordered_json r;
      r["k"] = e.k;
      r["S"] = e.S;
      r["D_source"] = source_name(e.d_source);
      r["delta_source"] = source_name(e.delta_source);
      r["D_len"] = jinterval(e.D_len, a.digits);
      r["delta_direct"] = jinterval(e.delta_direct, a.digits);
      r["delta_formula"] = jinterval(e.delta_formula, a.digits);
      r["delta_equal"] = e.delta_equal;
      r["P_k"] = jinterval(e.P, a.digits);
      r["P_diff"] = e.P_diff ? jinterval(*e.P_diff, a.digits) : ordered_json(nullptr);
      ordered_json hs = ordered_json::array();
      for (const auto& h : e.hsum) hs.push_back(jinterval(h, a.digits));
      r["hsum"] = std::move(hs);
      rows.push_back(std::move(r));
    }
    j["entries"] = std::move(rows);
    j["k_delta_equal"] = s.k_delta_equal ? ordered_json(*s.k_delta_equal) : ordered_json(nullptr);
    ordered_json k0 = ordered_json::array();
    for (const auto& x : s.k0_hsum) k0.push_back(x ? ordered_json(*x) : ordered_json(nullptr));
    j["k0_hsum"] = std::move(k0);
    j["k0_cauchy"] = s.k0_cauchy ? ordered_json(*s.k0_cauchy) : ordered_json(nullptr);
    out << j.dump(2) << "\n";
  } else {
    out << "k,D_len,delta_direct,delta_formula,P_k";
    for (const auto& al : a.alpha) out << ",hsum_" << al;
    out << "\n";
    for (const auto& e : s.entries) {
      out << e.k << "," << cell(e.D_len, a.digits) << "," << cell(e.delta_direct, a.digits) << ","
          << cell(e.delta_formula, a.digits) << "," << cell(e.P, a.digits);
      for (const auto& h : e.hsum) out << "," << cell(h, a.digits);
      out << "\n";
    }
  }
  std::cerr << "dimension: d=" << a.d << " lengths from the orbit for k<=" << s.k_orbit
            << ", covers measured for k<=" << s.k_direct << ", identity beyond\n";
  std::cerr << "  delta formula = direct maximum from k=" << opt_str(s.k_delta_equal)
            << "; |P_{k+1}-P_k| < 2^-20 from k=" << opt_str(s.k0_cauchy) << "\n";
  for (std::size_t i = 0; i < a.alpha.size(); ++i)
    std::cerr << "  alpha=" << a.alpha[i] << ": sum strictly decreasing from k=" << opt_str(s.k0_hsum[i]) << "\n";
  return 0;
}

int cmd_recurrence(const Args& a, std::ostream& out) {
  if (a.kmax < 1) throw UsageError("--kmax must be >= 1");
  DimensionOptions o;
  o.kmax = a.kmax;
  o.alphas.clear();
  DimensionSeries s = dimension_series(a.d, o, parse_bits(a.bits));
  auto rec = recurrence_exponent(s);
  out << "k,S,exponent\n";
  double worst = 0;
  for (const auto& r : rec) {
    out << r.k << "," << r.S << "," << fmt("%.15g", r.exponent.mid_double()) << "\n";
    worst = std::max(worst, r.exponent.radius_double());
  }
  std::cerr << "recurrence (estimate): largest error bar " << fmt("%.3g", worst) << ", tail sup "
            << fmt("%.12g", rec.back().tail_sup) << ", envelope log(a)S(k+1)/S(k) at kmax "
            << fmt("%.12g", s.entries.back().envelope) << "\n";
  return 0;
}

int cmd_verify_all(const Args& a, std::ostream& out) {
  RunConfig c;
  c.d = a.d;
  c.kmax = a.kmax;
  c.bits = parse_bits(a.bits);
  c.guard = a.guard;
  c.digits = a.digits;
  VerifyOutcome v = verify_all(c);
  out << v.report.dump(2) << "\n";
  if (v.exit_code == 0)
    std::cerr << "verify-all: pass\n";
  else
    std::cerr << "verify-all: " << (v.exit_code == 2 ? "precision exhausted" : "FAIL") << " in stage "
              << v.failed_stage << "\n";
  return v.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fibonacci-like unimodal maps: covers, adic model, measure and dimension numerics"};
  app.set_config("--config", "", "key=value file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();
  Args a;
  app.add_option("--d", a.d, "combinatorics parameter d >= 2")->check(CLI::Range(2, 64));
  app.add_option("--k", a.k, "cover level");
  app.add_option("--kmax", a.kmax, "largest level");
  app.add_option("--depth", a.depth, "diagram depth")->check(CLI::NonNegativeNumber);
  app.add_option("--n", a.n, "number of symbols / orbit points");
  app.add_option("--prefix", a.prefix, "kneading prefix to certify");
  app.add_option("--bits", a.bits, "working precision or 'auto'");
  app.add_option("--iters", a.iters, "Birkhoff iterates");
  app.add_option("--steps", a.steps, "Vershik steps");
  app.add_option("--alpha", a.alpha, "Hausdorff exponents")->delimiter(',');
  app.add_option("--format", a.format, "json, csv or dot")->check(CLI::IsMember({"json", "csv", "dot"}));
  app.add_option("--output", a.output, "write output here instead of stdout");
  app.add_option("--guard", a.guard, "guard bits")->envname("FIBTOWER_GUARD_BITS")->check(CLI::Range(8, 1 << 20));
  app.add_option("--digits", a.digits, "decimal digits per endpoint")->check(CLI::Range(6, 100000));

  using Cmd = int (*)(const Args&, std::ostream&);
  std::vector<std::pair<CLI::App*, Cmd>> cmds = {
      {app.add_subcommand("cutting-times", "CSV k,S"), cmd_cutting_times},
      {app.add_subcommand("kneading", "kneading symbols e_1..e_n"), cmd_kneading},
      {app.add_subcommand("solve", "certified slope enclosure (JSON)"), cmd_solve},
      {app.add_subcommand("orbit", "critical orbit enclosures (CSV)"), cmd_orbit},
      {app.add_subcommand("cover", "towers of M_{d,k} (JSON)"), cmd_cover},
      {app.add_subcommand("verify-cover", "cover certificates up to kmax (JSON)"), cmd_verify_cover},
      {app.add_subcommand("diagram", "Bratteli diagram (DOT)"), cmd_diagram},
      {app.add_subcommand("vershik", "Vershik orbit of the minimal path (CSV)"), cmd_vershik},
      {app.add_subcommand("measure", "tower and floor measures (JSON)"), cmd_measure},
      {app.add_subcommand("birkhoff", "visit frequencies of the critical orbit (CSV)"), cmd_birkhoff},
      {app.add_subcommand("dimension", "dimension numerics (CSV or JSON)"), cmd_dimension},
      {app.add_subcommand("recurrence", "return exponents (CSV)"), cmd_recurrence},
      {app.add_subcommand("verify-all", "full certificate pipeline (JSON)"), cmd_verify_all},
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  Cmd run = nullptr;
  for (auto& [sub, fn] : cmds)
    if (sub->parsed()) run = fn;

  std::unique_ptr<std::ofstream> file;
  if (!a.output.empty()) {
    file = std::make_unique<std::ofstream>(a.output);
    if (!*file) {
      std::cerr << "cannot open " << a.output << "\n";
      return kExitUsage;
    }
  }
  std::ostream& out = file ? *file : std::cout;
  try {
    return run(a, out);
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PrecisionExhausted& e) {
    std::cerr << "precision exhausted: " << e.what() << "\n";
    return 2;
  } catch (const DepthInsufficient& e) {
    std::cerr << "depth insufficient: " << e.what() << "\n";
    return 2;
  } catch (const std::overflow_error& e) {
    std::cerr << "out of range: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
