// Acceptance gates for the regulated-walk laboratory.
//
// Eight end-to-end checks, each printing exactly one line:
//   criterion N: PASS - <detail>     or     criterion N: FAIL - <detail>
// The process exits nonzero if any criterion fails.  All randomness is
// seeded, so a passing run is reproducible bit-for-bit.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <ruinlab/claims.hpp>
#include <ruinlab/corpus.hpp>
#include <ruinlab/estimators.hpp>
#include <ruinlab/models.hpp>
#include <ruinlab/report_io.hpp>

namespace {

using namespace ruinlab;

constexpr std::uint64_t kSeed = 2026;

int g_failures = 0;

std::string strf(const char* fmt, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return std::string(buf);
}

void report(int idx, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s - %s\n", idx, ok ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  [[nodiscard]] double sec() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

[[nodiscard]] bool within(double value, double target, double se,
                          double k = 3.0) {
  return std::abs(value - target) <= k * se;
}

// The four test models mirror the shipped example configurations.

ModelConfig walk_config() {
  ModelConfig cfg;
  cfg.mode = ModelMode::plus_minus_walk;
  cfg.d = 1;
  cfg.q = 0.25;
  return cfg;
}

ModelConfig cl_d1_config() {
  ModelConfig cfg;
  cfg.mode = ModelMode::cl_network;
  cfg.d = 1;
  cfg.premium_rates = {1.25};
  cfg.lambdas = {1.0};
  ClaimDist e;
  e.kind = ClaimKind::exponential;
  e.mean_param = 1.0;
  cfg.claims = {e};
  return cfg;
}

ModelConfig cl_d2_config(double premium) {
  ModelConfig cfg;
  cfg.mode = ModelMode::cl_network;
  cfg.d = 2;
  cfg.premium_rates = {premium, premium};
  cfg.lambdas = {1.0, 1.0};
  ClaimDist e;
  e.kind = ClaimKind::exponential;
  e.mean_param = 1.0;
  cfg.claims = {e, e};
  return cfg;
}

ModelConfig renewal_d3_config() {
  ModelConfig cfg;
  cfg.mode = ModelMode::renewal_network;
  cfg.d = 3;
  cfg.premium_rates = {0.6, 0.4, 0.3};
  cfg.interarrival.kind = ArrivalKind::gamma;
  cfg.interarrival.shape = 2.0;
  cfg.interarrival.rate = 2.0;
  cfg.routing = {0.5, 0.3, 0.2};
  ClaimDist e;
  e.kind = ClaimKind::exponential;
  e.mean_param = 0.8;
  ClaimDist p3;
  p3.kind = ClaimKind::pareto;
  p3.alpha = 3.0;
  p3.xm = 0.5;
  ClaimDist ln;
  ln.kind = ClaimKind::lognormal;
  ln.mu = -0.5;
  ln.sigma = 0.5;
  cfg.claims = {e, p3, ln};
  return cfg;
}

[[nodiscard]] Mat symmetric2() {
  Mat P = Mat::Zero(2, 2);
  P(0, 1) = 0.5;
  P(1, 0) = 0.5;
  return P;
}

[[nodiscard]] Mat routing_d3() {
  Mat P = Mat::Zero(3, 3);
  P(0, 1) = 0.2;
  P(0, 2) = 0.1;
  P(1, 0) = 0.15;
  P(1, 2) = 0.1;
  P(2, 0) = 0.1;
  P(2, 1) = 0.2;
  return P;
}

// Independent check of the exponential-claim single-line ruin value: a bare
// random walk S_k = sum_i (J_i - c A_i) with J, A ~ Exp(1), stopped when it
// exceeds the initial capital (ruin) or falls far enough below it that the
// remaining ruin probability is negligible (< 5e-6 here).
[[nodiscard]] Estimate free_walk_first_passage(double c, double a,
                                               std::int64_t n_paths,
                                               std::uint64_t seed) {
  std::int64_t hits = 0;
  const double escape = a - 60.0;
  for (std::int64_t i = 0; i < n_paths; ++i) {
    RngStream stream = derive_stream(seed, StreamPurpose::free_walk,
                                     static_cast<std::uint64_t>(i));
    double s = 0.0;
    for (int step = 0; step < 1000000; ++step) {
      s += stream.exponential(1.0) - c * stream.exponential(1.0);
      if (s > a) {
        ++hits;
        break;
      }
      if (s < escape) break;
    }
  }
  return proportion_estimate(hits, n_paths, "free_walk_first_passage");
}

// ---------------------------------------------------------------------------

void criterion_1() {
  try {
    Timer t;
    const CorpusResult r = run_lcp_oracle_corpus(10000, kSeed, 6);
    const double dt = t.sec();
    const bool ok = r.failures == 0 && dt < 60.0;
    report(1, ok,
           strf("fixed-point complementarity solver vs exhaustive active-set "
                "search on %lld random instances, d in 1..6: %lld "
                "disagreements beyond 1e-8 (%.1f s, limit 60)",
                static_cast<long long>(r.instances),
                static_cast<long long>(r.failures), dt));
  } catch (const Error& e) {
    report(1, false, strf("unexpected error: %s", e.what()));
  }
}

bool g_duality_clean = false;

void criterion_2() {
  try {
    Timer t;
    const CorpusResult r = run_duality_corpus(100000, kSeed, 5, 40);
    const double dt = t.sec();
    g_duality_clean = r.failures == 0;
    const bool ok = g_duality_clean && dt < 600.0;
    report(2, ok,
           strf("pathwise reversal check on %lld random instances (d <= 5, "
                "n <= 40): %lld failures across the three event "
                "biconditionals, the zero-start corollary, the auxiliary "
                "complementarity identity, and the terminal value identity; "
                "%lld one-directional gaps observed where only the reverse "
                "implication fails (expected for d >= 2) (%.1f s, limit 600)",
                static_cast<long long>(r.instances),
                static_cast<long long>(r.failures),
                static_cast<long long>(r.converse_gaps), dt));
  } catch (const Error& e) {
    report(2, false, strf("unexpected error: %s", e.what()));
  }
}

void criterion_3() {
  try {
    Timer t;
    const CorpusResult r = run_comparison_corpus(10000, kSeed, 5, 40);
    const double dt = t.sec();
    const bool ok = r.failures == 0 && g_duality_clean;
    report(3, ok,
           strf("monotone-comparison check on %lld ordered instance pairs: "
                "%lld violations beyond 1e-8 of the state order, the event-"
                "time order, or the pushing-gap bound; the a-priori value "
                "bracket also held on every criterion-2 path (%.1f s)",
                static_cast<long long>(r.instances),
                static_cast<long long>(r.failures), dt));
  } catch (const Error& e) {
    report(3, false, strf("unexpected error: %s", e.what()));
  }
}

void criterion_4() {
  try {
    Timer t;
    const ReflectionMatrix rm1 = build_reflection(Mat::Zero(1, 1));
    const BuiltModel walk = build_model(walk_config(), rm1);
    const ReflectionMatrix rm2 = build_reflection(symmetric2());
    const BuiltModel cl2 = build_model(cl_d2_config(1.5), rm2);

    const std::int64_t n_side = 1000000;
    const PerHorizonTable tw = per_horizon_identity(
        walk.model, rm1, Vec::Zero(1), 10, n_side, kSeed);
    const PerHorizonTable tc = per_horizon_identity(
        cl2.model, rm2, Vec::Ones(2), 10, n_side, kSeed);
    const double dt = t.sec();

    double max_z = 0.0, max_zs_walk = 0.0, max_zs_cl2 = 0.0;
    for (const auto& row : tw.rows) {
      max_z = std::max(max_z, std::abs(row.z));
      max_zs_walk = std::max(max_zs_walk, std::abs(row.z_storage));
    }
    for (const auto& row : tc.rows) {
      max_z = std::max(max_z, std::abs(row.z));
      max_zs_cl2 = std::max(max_zs_cl2, std::abs(row.z_storage));
    }
    const bool ok = max_z < 4.0 && max_zs_walk < 4.0 && dt < 900.0;
    report(4, ok,
           strf("per-horizon distributional identity at %lld paths/side, "
                "horizons 1..10, on the 1-d walk and the symmetric 2-d "
                "model: max |z| = %.2f vs the exact reconstructed event "
                "(gate < 4); bare storage event max |z| = %.2f for d=1 "
                "(gate < 4) and %.1f for d=2 (measured premise gap, "
                "reported not gated) (%.0f s, limit 900)",
                static_cast<long long>(n_side), max_z, max_zs_walk,
                max_zs_cl2, dt));
  } catch (const Error& e) {
    report(4, false, strf("unexpected error: %s", e.what()));
  }
}

void criterion_5() {
  try {
    Timer t;
    const ReflectionMatrix rm1 = build_reflection(Mat::Zero(1, 1));
    const BuiltModel walk = build_model(walk_config(), rm1);
    const BuiltModel cl1 = build_model(cl_d1_config(), rm1);
    const std::int64_t n = 100000;

    // (i) +/-1 walk, q = 0.25: ruin-with-pushing probability = 1/3.
    const RuinDirect wd =
        estimate_ruin_direct(walk.model, rm1, Vec::Zero(1), 2000, n, kSeed);
    const bool ok_i =
        within(wd.ssruin.value, 1.0 / 3.0, wd.ssruin.std_error);

    // (ii) storage-side estimate for the same walk at zero capital = 1/4.
    const StorageSide wss =
        estimate_storage_side(walk.model, rm1, Vec::Zero(1), n, kSeed);
    const bool ok_ii = within(wss.est.value, 0.25, wss.est.std_error) &&
                       wss.censored_fraction == 0.0;

    // (iii) exponential-claim single line (rate 1 arrivals, mean-1 claims,
    // premium 1.25): closed form 0.8 at zero capital and 0.8*exp(-1) at
    // capital 5, the latter re-verified by an independent free-walk
    // first-passage simulation.
    const RuinDirect c0 =
        estimate_ruin_direct(cl1.model, rm1, Vec::Zero(1), 2000, n, kSeed);
    const double target0 = cl_ruin_prob(1.0, 1.0, 1.25, 0.0);
    Vec a5(1);
    a5[0] = 5.0;
    const RuinDirect c5 =
        estimate_ruin_direct(cl1.model, rm1, a5, 2000, n, kSeed + 1);
    const double target5 = cl_ruin_prob(1.0, 1.0, 1.25, 5.0);
    const Estimate fw = free_walk_first_passage(1.25, 5.0, n, kSeed);
    const bool ok_iii =
        within(c0.ssruin.value, target0, c0.ssruin.std_error) &&
        within(c5.ssruin.value, target5, c5.ssruin.std_error) &&
        within(fw.value, target5, fw.std_error);

    // (iv) one-step increment fraction for the same line = 1/2.25.
    const PFraction pf = estimate_p(cl1.model, rm1, n, kSeed);
    const double ptarget = cl_p(1.0, 1.0, 1.25);
    const bool ok_iv = within(pf.est.value, ptarget, pf.est.std_error);

    const bool ok = ok_i && ok_ii && ok_iii && ok_iv;
    report(5, ok,
           strf("closed-form 1-d anchors at %lld paths each: walk pushing "
                "ruin %.4f vs 1/3 (%s), walk storage side %.4f vs 0.25 with "
                "zero censoring (%s), exponential-claim line %.4f vs %.4f "
                "and %.4f vs %.6f with independent free-walk cross-check "
                "%.4f (%s), increment fraction %.4f vs %.4f (%s); all "
                "within 3 s.e. (%.0f s)",
                static_cast<long long>(n), wd.ssruin.value,
                ok_i ? "ok" : "FAIL", wss.est.value, ok_ii ? "ok" : "FAIL",
                c0.ssruin.value, target0, c5.ssruin.value, target5, fw.value,
                ok_iii ? "ok" : "FAIL", pf.est.value, ptarget,
                ok_iv ? "ok" : "FAIL", t.sec()));
  } catch (const Error& e) {
    report(5, false, strf("unexpected error: %s", e.what()));
  }
}

struct ModelBundle {
  std::string label;
  BuiltModel built;
  ReflectionMatrix rm;
  Vec a;
  std::int64_t horizon = 64;
  std::int64_t storage_paths = 20000;
  bool interior_gate = false;  // crossing probability must sit inside (0,1)
};

void criterion_6() {
  try {
    Timer t;
    std::vector<ModelBundle> bundles;
    {
      ModelBundle b;
      b.label = "plus_minus_walk";
      b.rm = build_reflection(Mat::Zero(1, 1));
      b.built = build_model(walk_config(), b.rm);
      b.a = Vec::Zero(1);
      b.horizon = 256;
      bundles.push_back(std::move(b));
    }
    {
      ModelBundle b;
      b.label = "cl_d1";
      b.rm = build_reflection(Mat::Zero(1, 1));
      b.built = build_model(cl_d1_config(), b.rm);
      b.a = Vec::Zero(1);
      b.horizon = 256;
      b.interior_gate = true;
      bundles.push_back(std::move(b));
    }
    {
      ModelBundle b;
      b.label = "cl_d2_symmetric";
      b.rm = build_reflection(symmetric2());
      b.built = build_model(cl_d2_config(1.5), b.rm);
      b.a = Vec::Ones(2);
      b.interior_gate = true;
      bundles.push_back(std::move(b));
    }
    {
      ModelBundle b;
      b.label = "renewal_d3";
      b.rm = build_reflection(routing_d3());
      b.built = build_model(renewal_d3_config(), b.rm);
      b.a = Vec::Ones(3);
      b.storage_paths = 500000;  // crossing prob ~1.4e-4 needs the volume
      b.interior_gate = true;
      bundles.push_back(std::move(b));
    }

    const std::int64_t n = 20000;
    bool produced_ok = true, interior_ok = true, mass_ok = true,
         sigma_ok = true;
    std::string notes;
    for (const ModelBundle& b : bundles) {
      const Model& m = b.built.model;
      const RuinDirect dir =
          estimate_ruin_direct(m, b.rm, b.a, b.horizon, n, kSeed);
      const StorageSide ss =
          estimate_storage_side(m, b.rm, b.a, b.storage_paths, kSeed);
      const PFraction pf = estimate_p(m, b.rm, n, kSeed);
      const LadderPk lp = sample_ladder_pk(m, b.rm, b.a, n, kSeed);
      const SigmaBdTable st = sigma_bd_distribution(m, b.rm, n, kSeed, 8);

      ClaimInputs in;
      in.model_label = b.label;
      in.a = b.a;
      in.direct = dir;
      in.storage = ss;
      in.p_frac = pf;
      in.ladder = lp;
      in.sigma_table = st;
      const ClaimsReport rep =
          build_claims_report(in, m, b.built.report, b.rm);

      if (rep.claims.empty() || rep.hypotheses.entries.size() != 9) {
        produced_ok = false;
        notes += strf(" [%s: report incomplete]", b.label.c_str());
      }
      if (b.interior_gate) {
        const double lo = ss.est.value - 3.0 * ss.est.std_error;
        const double hi = ss.est.value + 3.0 * ss.est.std_error;
        if (!(lo > 0.0 && hi < 1.0)) {
          interior_ok = false;
          notes += strf(" [%s: crossing prob %.3g +/- %.2g not interior]",
                        b.label.c_str(), ss.est.value, ss.est.std_error);
        }
      }
      {
        const double p_se = lp.p_hat.std_error;
        const double combined =
            std::sqrt(lp.mass_at_zero_se * lp.mass_at_zero_se + p_se * p_se);
        if (std::abs(lp.mass_at_zero - (1.0 - lp.p_hat.value)) >
            3.0 * combined) {
          mass_ok = false;
          notes += strf(" [%s: zero-mass %.4f vs 1-p %.4f]", b.label.c_str(),
                        lp.mass_at_zero, 1.0 - lp.p_hat.value);
        }
      }
      if (st.rows.empty() || st.rows.front().k != 1 ||
          std::abs(st.rows.front().z) >= 3.0) {
        sigma_ok = false;
        notes += strf(" [%s: first-passage row 1 z %.2f]", b.label.c_str(),
                      st.rows.empty() ? 0.0 : st.rows.front().z);
      }
    }

    // Rejection-sampled one-step deficits for the exponential-claim line
    // must be Exp(1): two-sample Kolmogorov-Smirnov against fresh draws.
    const ReflectionMatrix rm1 = build_reflection(Mat::Zero(1, 1));
    const BuiltModel cl1 = build_model(cl_d1_config(), rm1);
    const std::vector<Vec> defs =
        sample_conditional_deficits(cl1.model, rm1, 10000, kSeed);
    std::vector<double> xs;
    xs.reserve(defs.size());
    for (const Vec& v : defs) xs.push_back(v[0]);
    std::vector<double> refs;
    refs.reserve(10000);
    RngStream ref_stream = derive_stream(kSeed, StreamPurpose::free_walk,
                                         0xACCE11ull);
    for (int i = 0; i < 10000; ++i) refs.push_back(ref_stream.exponential(1.0));
    const KsResult ks = ks_two_sample(xs, refs);
    const bool ks_ok = ks.scaled < 1.63;
    if (!ks_ok) notes += strf(" [deficit KS %.3f >= 1.63]", ks.scaled);

    const bool ok =
        produced_ok && interior_ok && mass_ok && sigma_ok && ks_ok;
    report(6, ok,
           strf("cross-checked claims reports for all four test models: "
                "reports complete with 9 graded hypotheses (%s); boundary-"
                "crossing probability interior to (0,1) by 3 s.e. for the "
                "three continuous models (%s); compound-geometric zero mass "
                "equals 1 - p within 3 s.e. (%s); first-passage survival at "
                "k=1 matches p within 3 s.e. (%s); rejection-sampled "
                "deficits match Exp(1), scaled KS %.3f < 1.63 (%s)%s "
                "(%.0f s)",
                produced_ok ? "ok" : "FAIL", interior_ok ? "ok" : "FAIL",
                mass_ok ? "ok" : "FAIL", sigma_ok ? "ok" : "FAIL", ks.scaled,
                ks_ok ? "ok" : "FAIL", notes.c_str(), t.sec()));
  } catch (const Error& e) {
    report(6, false, strf("unexpected error: %s", e.what()));
  }
}

void criterion_7() {
  try {
    const ReflectionMatrix rm2 = build_reflection(symmetric2());
    const ReflectionMatrix rm1 = build_reflection(Mat::Zero(1, 1));

    const BuiltModel profit = build_model(cl_d2_config(1.5), rm2);
    const BuiltModel deficit = build_model(cl_d2_config(0.9), rm2);
    const BuiltModel walk = build_model(walk_config(), rm1);

    const double tol = 1e-12;
    bool ok = true;
    for (int i = 0; i < 2; ++i) {
      ok = ok && std::abs(profit.report.net_profit_margins[i] - 0.25) < tol;
      ok = ok && std::abs(deficit.report.net_profit_margins[i] + 0.05) < tol;
    }
    ok = ok && std::abs(walk.report.net_profit_margins[0] - 0.5) < tol;
    ok = ok && profit.report.net_profit_ok && !deficit.report.net_profit_ok &&
         walk.report.net_profit_ok;
    report(7, ok,
           strf("documented example margins exact to 1e-12: symmetric 2-d "
                "line at premium 1.5 -> %+.2f per coordinate, at premium "
                "0.9 -> %+.2f (flagged as drift violation), walk q=0.25 -> "
                "%+.2f",
                profit.report.net_profit_margins[0],
                deficit.report.net_profit_margins[0],
                walk.report.net_profit_margins[0]));
  } catch (const Error& e) {
    report(7, false, strf("unexpected error: %s", e.what()));
  }
}

[[nodiscard]] std::string estimator_bundle_dump(const Model& model,
                                                const HypothesisReport& hyp,
                                                const ReflectionMatrix& rm,
                                                const Vec& a, int workers) {
  const std::int64_t n = 10000;
  const RuinDirect dir =
      estimate_ruin_direct(model, rm, a, 64, n, kSeed, workers);
  const StorageSide ss = estimate_storage_side(model, rm, a, n, kSeed, workers);
  const PFraction pf = estimate_p(model, rm, n, kSeed, workers);
  const LadderPk lp = sample_ladder_pk(model, rm, a, n, kSeed, workers);
  const LadderHarvest h =
      harvest_ladder_law(model, rm, n, 200, kSeed, workers);
  const SigmaBdTable st =
      sigma_bd_distribution(model, rm, n, kSeed, 8, workers);
  const PerHorizonTable ph =
      per_horizon_identity(model, rm, a, 6, n, kSeed, workers);
  const SweepTable sw = run_capital_sweep(model, rm, {0.0, 2.0, 4.0}, 64, n,
                                          kSeed, workers);

  ClaimInputs in;
  in.model_label = "cl_d2_symmetric";
  in.a = a;
  in.direct = dir;
  in.storage = ss;
  in.p_frac = pf;
  in.ladder = lp;
  in.harvest = h;
  in.sigma_table = st;
  in.per_horizon = ph;
  in.sweep = sw;
  const ClaimsReport rep = build_claims_report(in, model, hyp, rm);

  Json doc;
  doc["estimates"]["direct"] = ruin_direct_json(dir);
  doc["estimates"]["storage"] = storage_side_json(ss);
  doc["estimates"]["increment_fraction"] = estimate_json(pf.est);
  doc["estimates"]["compound_geometric"] = ladder_json(lp);
  doc["estimates"]["sigma_table"] = sigma_table_json(st);
  doc["estimates"]["per_horizon"] = per_horizon_json(ph);
  doc["estimates"]["sweep"] = sweep_json(sw);
  Json heights = Json::array();
  for (const Vec& v : h.heights) heights.push_back(vec_json(v));
  doc["estimates"]["ladder_sample"] = {
      {"n_paths", h.n_paths},
      {"censored_fraction", h.censored_fraction},
      {"heights", heights}};
  doc["claims"] = claims_report_json(rep);
  return dump_report(doc);
}

void criterion_8() {
  try {
    Timer t;
    const ReflectionMatrix rm2 = build_reflection(symmetric2());
    const BuiltModel cl2 = build_model(cl_d2_config(1.5), rm2);
    const Vec a = Vec::Ones(2);

    const std::string one =
        estimator_bundle_dump(cl2.model, cl2.report, rm2, a, 1);
    const std::string three =
        estimator_bundle_dump(cl2.model, cl2.report, rm2, a, 3);
    const std::string one_again =
        estimator_bundle_dump(cl2.model, cl2.report, rm2, a, 1);

    const bool ok = !one.empty() && one == three && one == one_again;
    report(8, ok,
           strf("full estimator bundle (direct, storage, increment "
                "fraction, compound geometric, ladder sample, first-passage "
                "table, per-horizon table, capital sweep, claims report) "
                "rendered to %zu bytes: workers=1 vs workers=3 %s, repeat "
                "run %s (%.0f s)",
                one.size(), one == three ? "byte-identical" : "DIFFER",
                one == one_again ? "byte-identical" : "DIFFER", t.sec()));
  } catch (const Error& e) {
    report(8, false, strf("unexpected error: %s", e.what()));
  }
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", g_failures);
  return 1;
}
