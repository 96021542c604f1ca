#pragma once

// verify-all: one realization, every certificate, one JSON report.
// Exit status 0 when everything passes, 1 on a failed check, 2 when a stage
// runs out of precision or orbit.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "fibtower/adic.hpp"
#include "fibtower/covers.hpp"
#include "fibtower/dimension.hpp"
#include "fibtower/errors.hpp"
#include "fibtower/kneading.hpp"
#include "fibtower/measure.hpp"
#include "fibtower/tent.hpp"

namespace fibtower {

inline constexpr const char* kReportSchema = "fibtower-verify/1";

struct RunConfig {
  int d = 2;
  int kmax = 10;
  std::optional<std::int64_t> bits;  // empty = planned
  int guard = default_guard_bits();
  std::int64_t semiconjugacy_steps = 0;  // 0 = min(2000, S(kmax+1) - 1)
  int digits = 40;
};

struct VerifyOutcome {
  nlohmann::ordered_json report;
  int exit_code = 0;
  std::string failed_stage;
};

inline nlohmann::ordered_json interval_json(const RInterval& x, int digits) {
  return {{"lo", x.lo_str(digits)}, {"hi", x.hi_str(digits)}};
}

inline VerifyOutcome verify_all(const RunConfig& cfg) {
  if (cfg.d < 2) throw std::invalid_argument("d must be >= 2");
  if (cfg.kmax < 0) throw std::invalid_argument("kmax must be >= 0");
  using nlohmann::ordered_json;
  VerifyOutcome out;
  ordered_json& rep = out.report;
  rep["schema"] = kReportSchema;
  rep["d"] = cfg.d;
  rep["kmax"] = cfg.kmax;
  rep["guard_bits"] = cfg.guard;
  ordered_json checks = ordered_json::array();
  bool ok = true;
  std::string stage = "solve";
  auto add = [&](const std::string& stg, const std::string& name, std::optional<int> k, Status st,
                 const std::string& where, std::int64_t checked) {
    ordered_json c;
    c["stage"] = stg;
    c["name"] = name;
    c["k"] = k ? ordered_json(*k) : ordered_json(nullptr);
    c["status"] = status_name(st);
    c["where"] = where;
    c["checked"] = checked;
    checks.push_back(std::move(c));
    if (st == Status::fail) {
      if (ok) out.failed_stage = stg;
      ok = false;
    }
  };
  auto pf = [](bool b) { return b ? Status::pass : Status::fail; };

  try {
    const int d = cfg.d, K = cfg.kmax;
    const Combinatorics& cb = combinatorics(d);
    std::int64_t n_semi = cfg.semiconjugacy_steps > 0
                              ? cfg.semiconjugacy_steps
                              : std::min<std::int64_t>(2000, cb.S(K + 1) - 1);
    const int dim_kmax = std::max(K, d);
    std::int64_t need = std::max({certificate_orbit_need(d, K), semiconjugacy_orbit_need(d, K, n_semi),
                                  cover_orbit_need(d, dim_kmax), cb.S(d) + 1});
    SolveOptions so;
    so.guard = cfg.guard;
    Realization r = realize(d, need, cfg.bits, so);
    rep["orbit_length"] = need;
    rep["precision_bits"] = static_cast<std::int64_t>(r.system.precision());
    MeasureTable mt(d);
    // the slope and the Perron root side by side; no relation between them is asserted
    rep["constants"] = {{"a_d", interval_json(r.system.a, cfg.digits)},
                        {"beta_d", interval_json(mt.beta(), cfg.digits)}};

    stage = "cover";
    CoverReport cr = verify_cover_certificates(r, K);
    for (const auto& c : cr.results) add(stage, c.name, c.k, c.status, c.where, c.checked);

    stage = "split";
    for (int k = 0; k <= K; ++k) {
      SplitCertificate s = verify_split(r, k);
      add(stage, "split_containment", k, s.containment, s.containment == Status::fail ? "k=" + std::to_string(k) : "", 1);
      add(stage, "split_disjointness", k, s.disjointness,
          s.disjointness == Status::fail ? "k=" + std::to_string(k) : "", s.disjointness == Status::not_applicable ? 0 : 1);
    }

    stage = "adic";
    SemiconjugacyReport sr = verify_semiconjugacy(r, K, n_semi);
    add(stage, "semiconjugacy", K, pf(sr.passed()), sr.first_failure >= 0 ? "n=" + std::to_string(sr.first_failure) : "",
        sr.checked);
    std::string where;
    std::int64_t eta_checked = check_maximal_path_eta(d, K, &where);
    add(stage, "maximal_path_eta", K, pf(eta_checked >= 0), where, std::max<std::int64_t>(eta_checked, 0));

    stage = "measure";
    for (int k = d - 1; k <= std::max(K, d - 1); ++k) {
      RInterval total = mt.total_measure(k);
      bool encl = total.contains(BigReal(1L, total.precision())) && total.log2_width() <= -40;
      add(stage, "normalisation", k, pf(encl && normalisation_exact(d, k)), encl ? "" : "k=" + std::to_string(k), 1);
    }

    stage = "dimension";
    DimensionOptions dop;
    dop.kmax = dim_kmax;
    dop.k_direct = std::min(max_cover_level(d, r.orbit->length()), dim_kmax);
    DimensionSeries ds = dimension_series(r, dop);
    add(stage, "lengths_decreasing", std::nullopt, pf(ds.lengths_decreasing), "", ds.kmax());
    add(stage, "tent_identity", std::nullopt, pf(ds.identity_holds), "", ds.k_orbit);
    add(stage, "ratio_above_one", std::nullopt, pf(ds.nu_above_one), "", ds.k_orbit);
    add(stage, "correction_bound", std::nullopt, pf(ds.correction_bound), "", ds.k_orbit);
    add(stage, "floor_lengths", std::nullopt, pf(ds.floor_lengths_match), "", ds.k_direct);
    add(stage, "formula_delta_decreasing", std::nullopt, pf(ds.formula_decreasing), "", ds.kmax());
    add(stage, "product_positive", std::nullopt, pf(ds.P_positive), "", ds.kmax());
    add(stage, "delta_formula_threshold", ds.k_delta_equal, pf(ds.k_delta_equal.has_value()), "", ds.kmax());
    rep["dimension"] = {{"k_orbit", ds.k_orbit},
                        {"k_direct", ds.k_direct},
                        {"k_delta_equal", ds.k_delta_equal ? ordered_json(*ds.k_delta_equal) : ordered_json(nullptr)},
                        {"k0_cauchy", ds.k0_cauchy ? ordered_json(*ds.k0_cauchy) : ordered_json(nullptr)}};
  } catch (const PrecisionExhausted& e) {
    out.exit_code = 2;
    out.failed_stage = stage;
    rep["error"] = {{"stage", stage}, {"kind", "precision_exhausted"}, {"message", e.what()}};
  } catch (const DepthInsufficient& e) {
    out.exit_code = 2;
    out.failed_stage = stage;
    rep["error"] = {{"stage", stage}, {"kind", "depth_insufficient"}, {"message", e.what()}};
  } catch (const MonotonicityFault& e) {
    ok = false;
    out.failed_stage = stage;
    rep["error"] = {{"stage", stage}, {"kind", "monotonicity_fault"}, {"message", e.what()}};
  } catch (const BracketFailure& e) {
    ok = false;
    out.failed_stage = stage;
    rep["error"] = {{"stage", stage}, {"kind", "bracket_failure"}, {"message", e.what()}};
  }
  rep["checks"] = std::move(checks);
  if (out.exit_code == 0 && !ok) out.exit_code = 1;
  rep["passed"] = out.exit_code == 0;
  return out;
}

}  // namespace fibtower
