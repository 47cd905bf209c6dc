#pragma once

// Monte Carlo estimators for ruin and dual-storage quantities, plus the
// closed-form one-dimensional oracles used to anchor them.
//
// Every estimator derives one counter-based stream per path from
// (seed, purpose, path index) and reduces results either through integer
// counts or through per-path slots merged in index order, so reports are
// byte-identical for any worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ruinlab/common.hpp"
#include "ruinlab/lcp.hpp"
#include "ruinlab/models.hpp"
#include "ruinlab/parallel.hpp"
#include "ruinlab/reflection.hpp"
#include "ruinlab/rng.hpp"

namespace ruinlab {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  std::string method;
};

[[nodiscard]] inline Estimate proportion_estimate(std::int64_t count,
                                                  std::int64_t n,
                                                  std::string method) {
  Estimate e;
  e.n_samples = n;
  e.method = std::move(method);
  e.value = n > 0 ? static_cast<double>(count) / static_cast<double>(n) : 0.0;
  e.std_error =
      n > 0 ? std::sqrt(std::max(0.0, e.value * (1.0 - e.value) /
                                           static_cast<double>(n)))
            : 0.0;
  return e;
}

// z-score of the discrepancy between two estimates; 0 when both agree with
// zero spread, +inf when they differ with zero spread.
[[nodiscard]] inline double discrepancy_z(const Estimate& x,
                                          const Estimate& y) {
  const double denom =
      std::sqrt(x.std_error * x.std_error + y.std_error * y.std_error);
  const double diff = x.value - y.value;
  if (denom == 0.0) {
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return diff / denom;
}

namespace detail {

// Streaming one-step primal update (no path storage).
class PrimalWalker {
 public:
  explicit PrimalWalker(const ReflectionMatrix& rm) : rm_(&rm) {}

  void reset(const Vec& a) { z_ = a; }

  void step(const Vec& u) {
    eta_ = z_ + u;
    lcp_fixed_point(eta_, *rm_, dy_, znew_, scratch_);
    z_.swap(znew_);
  }

  [[nodiscard]] const Vec& z() const { return z_; }
  [[nodiscard]] const Vec& dy() const { return dy_; }

 private:
  const ReflectionMatrix* rm_;
  Vec z_, dy_, znew_, eta_;
  LcpScratch scratch_;
};

// Streaming one-step storage update in the R^{-1} view.
class StorageWalker {
 public:
  explicit StorageWalker(const ReflectionMatrix& rm) : rm_(&rm) {
    w_ = Vec::Zero(rm.d);
  }

  void reset() { w_.setZero(); }

  void step(const Vec& uhat) {
    eta_ = w_ + uhat;
    routed_.noalias() = -(rm_->R * eta_);
    lcp_fixed_point(routed_, *rm_, wnew_, dv_, scratch_);
    w_.swap(wnew_);
  }

  [[nodiscard]] const Vec& w() const { return w_; }
  [[nodiscard]] const Vec& dv() const { return dv_; }

 private:
  const ReflectionMatrix* rm_;
  Vec w_, dv_, wnew_, eta_, routed_;
  LcpScratch scratch_;
};

[[nodiscard]] inline bool all_above(const Vec& x, const Vec& b, double tol) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > b[i] + tol)) return false;
  }
  return true;
}

[[nodiscard]] inline bool all_above_zero(const Vec& x, double tol) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > tol)) return false;
  }
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Direct (primal) ruin estimates.

struct RuinDirect {
  Estimate ruin;    // first step with z = 0
  Estimate sruin;   // first step with z = 0 and some pushing
  Estimate ssruin;  // first step with pushing on every coordinate
  std::int64_t horizon = 0;
};

[[nodiscard]] inline RuinDirect estimate_ruin_direct(
    const Model& model, const ReflectionMatrix& rm, const Vec& a,
    std::int64_t horizon, std::int64_t n_paths, std::uint64_t seed,
    int workers = 1, double strict_tol = kStrictTolDefault) {
  std::vector<std::int64_t> ruin_c(std::max(workers, 1), 0);
  std::vector<std::int64_t> sruin_c(std::max(workers, 1), 0);
  std::vector<std::int64_t> ssruin_c(std::max(workers, 1), 0);
  std::atomic<int> next_slot{0};

  parallel_for(n_paths, workers, [&](std::int64_t begin, std::int64_t end) {
    const int slot = next_slot.fetch_add(1);
    detail::PrimalWalker walker(rm);
    std::int64_t r = 0, s = 0, ss = 0;
    for (std::int64_t i = begin; i < end; ++i) {
      RngStream stream = derive_stream(seed, StreamPurpose::direct_ruin,
                                       static_cast<std::uint64_t>(i));
      walker.reset(a);
      bool saw_r = false, saw_s = false, saw_ss = false;
      for (std::int64_t k = 1; k <= horizon; ++k) {
        walker.step(model.sample_increment(stream));
        const bool z_zero = is_zero(walker.z(), strict_tol);
        bool dy_some = false;
        bool dy_all = true;
        for (Eigen::Index c = 0; c < rm.d; ++c) {
          if (walker.dy()[c] > strict_tol) {
            dy_some = true;
          } else {
            dy_all = false;
          }
        }
        if (!saw_r && z_zero) {
          saw_r = true;
          ++r;
        }
        if (!saw_s && z_zero && dy_some) {
          saw_s = true;
          ++s;
        }
        if (!saw_ss && dy_all) {
          saw_ss = true;
          ++ss;
        }
        if (saw_ss) break;  // nested events: all three already recorded
      }
    }
    ruin_c[slot] += r;
    sruin_c[slot] += s;
    ssruin_c[slot] += ss;
  });

  const auto total = [](const std::vector<std::int64_t>& v) {
    std::int64_t t = 0;
    for (std::int64_t x : v) t += x;
    return t;
  };
  RuinDirect out;
  out.horizon = horizon;
  out.ruin = proportion_estimate(total(ruin_c), n_paths, "direct_regulated_walk");
  out.sruin =
      proportion_estimate(total(sruin_c), n_paths, "direct_regulated_walk");
  out.ssruin =
      proportion_estimate(total(ssruin_c), n_paths, "direct_regulated_walk");
  return out;
}

// ---------------------------------------------------------------------------
// Dual storage side: P(the level crosses above R^{-1}a strictly before the
// boundary), with forward (unreversed) inputs uhat = -R^{-1} U.

struct StorageSide {
  Estimate est;
  double censored_fraction = 0.0;
  std::int64_t step_cap = 0;
};

[[nodiscard]] inline StorageSide estimate_storage_side(
    const Model& model, const ReflectionMatrix& rm, const Vec& a,
    std::int64_t n_paths, std::uint64_t seed, int workers = 1,
    std::int64_t step_cap = 100'000, double strict_tol = kStrictTolDefault) {
  const Vec b = rm.Rinv * a;
  std::vector<std::int64_t> success_c(std::max(workers, 1), 0);
  std::vector<std::int64_t> censored_c(std::max(workers, 1), 0);
  std::atomic<int> next_slot{0};

  parallel_for(n_paths, workers, [&](std::int64_t begin, std::int64_t end) {
    const int slot = next_slot.fetch_add(1);
    detail::StorageWalker walker(rm);
    Vec uhat(rm.d);
    std::int64_t succ = 0, cens = 0;
    for (std::int64_t i = begin; i < end; ++i) {
      RngStream stream = derive_stream(seed, StreamPurpose::storage_side,
                                       static_cast<std::uint64_t>(i));
      walker.reset();
      bool resolved = false;
      for (std::int64_t k = 1; k <= step_cap; ++k) {
        uhat.noalias() = -(rm.Rinv * model.sample_increment(stream));
        walker.step(uhat);
        if (detail::all_above(walker.w(), b, strict_tol)) {
          ++succ;
          resolved = true;
          break;
        }
        if (walker.w().minCoeff() <= strict_tol) {
          resolved = true;  // boundary reached first
          break;
        }
      }
      if (!resolved) ++cens;
    }
    success_c[slot] += succ;
    censored_c[slot] += cens;
  });

  std::int64_t succ = 0, cens = 0;
  for (std::int64_t x : success_c) succ += x;
  for (std::int64_t x : censored_c) cens += x;
  StorageSide out;
  out.est = proportion_estimate(succ, n_paths, "dual_storage_first_crossing");
  out.censored_fraction =
      n_paths > 0 ? static_cast<double>(cens) / static_cast<double>(n_paths)
                  : 0.0;
  out.step_cap = step_cap;
  return out;
}

// ---------------------------------------------------------------------------
// Fraction of increments whose full transformed deficit -R^{-1}U is strictly
// positive in every coordinate; also reports first/second-half counts so a
// recurrence check costs nothing extra.

struct PFraction {
  Estimate est;
  std::int64_t first_half_count = 0;
  std::int64_t second_half_count = 0;
};

[[nodiscard]] inline PFraction estimate_p(
    const Model& model, const ReflectionMatrix& rm, std::int64_t n_samples,
    std::uint64_t seed, int workers = 1,
    StreamPurpose purpose = StreamPurpose::p_fraction,
    double strict_tol = kStrictTolDefault) {
  std::vector<std::int64_t> first_c(std::max(workers, 1), 0);
  std::vector<std::int64_t> second_c(std::max(workers, 1), 0);
  std::atomic<int> next_slot{0};
  const std::int64_t half = n_samples / 2;

  parallel_for(n_samples, workers, [&](std::int64_t begin, std::int64_t end) {
    const int slot = next_slot.fetch_add(1);
    Vec x(rm.d);
    std::int64_t f = 0, s = 0;
    for (std::int64_t i = begin; i < end; ++i) {
      RngStream stream =
          derive_stream(seed, purpose, static_cast<std::uint64_t>(i));
      x.noalias() = -(rm.Rinv * model.sample_increment(stream));
      if (detail::all_above_zero(x, strict_tol)) {
        if (i < half) {
          ++f;
        } else {
          ++s;
        }
      }
    }
    first_c[slot] += f;
    second_c[slot] += s;
  });

  PFraction out;
  for (std::int64_t x : first_c) out.first_half_count += x;
  for (std::int64_t x : second_c) out.second_half_count += x;
  out.est = proportion_estimate(out.first_half_count + out.second_half_count,
                                n_samples, "increment_fraction");
  return out;
}

// ---------------------------------------------------------------------------
// Compound-geometric construction: K ~ Geometric(p_hat) on {0,1,...} many
// ladder summands, each drawn by rejection from -R^{-1}U conditioned on being
// strictly positive in every coordinate; M is their sum.

struct LadderPk {
  Estimate prob;           // P(M >> R^{-1} a)
  double mass_at_zero = 0.0;
  double mass_at_zero_se = 0.0;
  Estimate p_hat;          // from an independent substream family
  std::int64_t n_paths = 0;
};

inline constexpr std::int64_t kRejectionAttemptCap = 10'000'000;

[[nodiscard]] inline Vec draw_conditional_deficit(const Model& model,
                                                  const ReflectionMatrix& rm,
                                                  RngStream& stream,
                                                  double strict_tol) {
  Vec x(rm.d);
  for (std::int64_t attempt = 0; attempt < kRejectionAttemptCap; ++attempt) {
    x.noalias() = -(rm.Rinv * model.sample_increment(stream));
    if (detail::all_above_zero(x, strict_tol)) return x;
  }
  fail(ErrorCode::rejection_stall,
       "acceptance rate below 1e-7 while sampling conditioned deficits");
}

[[nodiscard]] inline LadderPk sample_ladder_pk(
    const Model& model, const ReflectionMatrix& rm, const Vec& a,
    std::int64_t n_paths, std::uint64_t seed, int workers = 1,
    double strict_tol = kStrictTolDefault) {
  const PFraction pf =
      estimate_p(model, rm, n_paths, seed, workers,
                 StreamPurpose::ladder_compound_p, strict_tol);
  const double p = pf.est.value;
  if (p >= 1.0 - 1e-12) {
    fail(ErrorCode::invalid_config,
         "compound-geometric construction requires p < 1");
  }
  const Vec b = rm.Rinv * a;
  std::vector<std::int64_t> exceed_c(std::max(workers, 1), 0);
  std::vector<std::int64_t> zero_c(std::max(workers, 1), 0);
  std::atomic<int> next_slot{0};
  const double log_p = p > 0.0 ? std::log(p) : 0.0;

  parallel_for(n_paths, workers, [&](std::int64_t begin, std::int64_t end) {
    const int slot = next_slot.fetch_add(1);
    Vec m(rm.d);
    std::int64_t exceed = 0, zero = 0;
    for (std::int64_t i = begin; i < end; ++i) {
      RngStream stream = derive_stream(seed, StreamPurpose::ladder_compound,
                                       static_cast<std::uint64_t>(i));
      std::int64_t k = 0;
      if (p > 0.0) {
        // P(K >= k) = p^k  <=>  K = floor(log(U) / log(p)).
        k = static_cast<std::int64_t>(std::log(stream.uniform()) / log_p);
      }
      if (k == 0) ++zero;
      m.setZero();
      for (std::int64_t j = 0; j < k; ++j) {
        m += draw_conditional_deficit(model, rm, stream, strict_tol);
      }
      if (detail::all_above(m, b, strict_tol)) ++exceed;
    }
    exceed_c[slot] += exceed;
    zero_c[slot] += zero;
  });

  std::int64_t exceed = 0, zero = 0;
  for (std::int64_t x : exceed_c) exceed += x;
  for (std::int64_t x : zero_c) zero += x;
  LadderPk out;
  out.prob = proportion_estimate(exceed, n_paths, "compound_geometric");
  const Estimate mass = proportion_estimate(zero, n_paths, "compound_geometric");
  out.mass_at_zero = mass.value;
  out.mass_at_zero_se = mass.std_error;
  out.p_hat = pf.est;
  out.n_paths = n_paths;
  return out;
}

// Independent draws of -R^{-1}U conditioned on full positivity, for
// distributional comparisons against harvested ladder heights.
[[nodiscard]] inline std::vector<Vec> sample_conditional_deficits(
    const Model& model, const ReflectionMatrix& rm, std::int64_t n_samples,
    std::uint64_t seed, int workers = 1,
    double strict_tol = kStrictTolDefault) {
  std::vector<Vec> out(static_cast<std::size_t>(n_samples));
  parallel_for(n_samples, workers, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      RngStream stream = derive_stream(seed, StreamPurpose::conditional_deficit,
                                       static_cast<std::uint64_t>(i));
      out[static_cast<std::size_t>(i)] =
          draw_conditional_deficit(model, rm, stream, strict_tol);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Empirical first ladder epoch and height of the zero-start regulated walk:
// tau_1 = first step whose pushing is strictly positive in every coordinate,
// L_1 = cumulative pushing at tau_1.  Paths without such a step within the
// horizon are censored.

struct LadderHarvest {
  std::vector<Vec> heights;   // one entry per uncensored path, in path order
  std::vector<int> tau1;      // matching epochs
  double censored_fraction = 0.0;
  std::int64_t horizon = 0;
  std::int64_t n_paths = 0;
};

[[nodiscard]] inline LadderHarvest harvest_ladder_law(
    const Model& model, const ReflectionMatrix& rm, std::int64_t n_paths,
    std::int64_t horizon, std::uint64_t seed, int workers = 1,
    double strict_tol = kStrictTolDefault) {
  std::vector<Vec> slot_height(static_cast<std::size_t>(n_paths));
  std::vector<int> slot_tau(static_cast<std::size_t>(n_paths), 0);

  parallel_for(n_paths, workers, [&](std::int64_t begin, std::int64_t end) {
    detail::PrimalWalker walker(rm);
    const Vec zero = Vec::Zero(rm.d);
    Vec ycum(rm.d);
    for (std::int64_t i = begin; i < end; ++i) {
      RngStream stream = derive_stream(seed, StreamPurpose::ladder_harvest,
                                       static_cast<std::uint64_t>(i));
      walker.reset(zero);
      ycum.setZero();
      for (std::int64_t k = 1; k <= horizon; ++k) {
        walker.step(model.sample_increment(stream));
        ycum += walker.dy();
        if (detail::all_above_zero(walker.dy(), strict_tol)) {
          slot_height[static_cast<std::size_t>(i)] = ycum;
          slot_tau[static_cast<std::size_t>(i)] = static_cast<int>(k);
          break;
        }
      }
    }
  });

  LadderHarvest out;
  out.horizon = horizon;
  out.n_paths = n_paths;
  std::int64_t censored = 0;
  for (std::int64_t i = 0; i < n_paths; ++i) {
    if (slot_tau[static_cast<std::size_t>(i)] > 0) {
      out.heights.push_back(slot_height[static_cast<std::size_t>(i)]);
      out.tau1.push_back(slot_tau[static_cast<std::size_t>(i)]);
    } else {
      ++censored;
    }
  }
  out.censored_fraction =
      n_paths > 0 ? static_cast<double>(censored) / static_cast<double>(n_paths)
                  : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Empirical survival table of the first boundary-contact step of the forward
// storage walk, against the geometric reference p_hat^k.

struct SigmaBdRow {
  int k = 0;
  double survival = 0.0;
  double survival_se = 0.0;
  double geometric_ref = 0.0;
  double geometric_se = 0.0;
  double z = 0.0;
};

struct SigmaBdTable {
  std::vector<SigmaBdRow> rows;
  Estimate p_hat;
  std::int64_t n_paths = 0;
};

[[nodiscard]] inline SigmaBdTable sigma_bd_distribution(
    const Model& model, const ReflectionMatrix& rm, std::int64_t n_paths,
    std::uint64_t seed, int kmax, int workers = 1,
    double strict_tol = kStrictTolDefault) {
  const PFraction pf = estimate_p(model, rm, n_paths, seed, workers,
                                  StreamPurpose::first_passage_p, strict_tol);
  std::vector<std::vector<std::int64_t>> survive(
      std::max(workers, 1), std::vector<std::int64_t>(kmax + 1, 0));
  std::atomic<int> next_slot{0};

  parallel_for(n_paths, workers, [&](std::int64_t begin, std::int64_t end) {
    const int slot = next_slot.fetch_add(1);
    detail::StorageWalker walker(rm);
    Vec uhat(rm.d);
    auto& mine = survive[slot];
    for (std::int64_t i = begin; i < end; ++i) {
      RngStream stream = derive_stream(seed, StreamPurpose::first_passage_table,
                                       static_cast<std::uint64_t>(i));
      walker.reset();
      for (int k = 1; k <= kmax; ++k) {
        uhat.noalias() = -(rm.Rinv * model.sample_increment(stream));
        walker.step(uhat);
        if (walker.w().minCoeff() <= strict_tol) break;
        ++mine[k];  // sigma_bd > k
      }
    }
  });

  SigmaBdTable out;
  out.p_hat = pf.est;
  out.n_paths = n_paths;
  for (int k = 1; k <= kmax; ++k) {
    std::int64_t c = 0;
    for (const auto& mine : survive) c += mine[k];
    SigmaBdRow row;
    row.k = k;
    const Estimate surv = proportion_estimate(c, n_paths, "storage_survival");
    row.survival = surv.value;
    row.survival_se = surv.std_error;
    row.geometric_ref = std::pow(pf.est.value, k);
    // Delta method: d/dp p^k = k p^{k-1}.
    row.geometric_se = k * std::pow(pf.est.value, std::max(0, k - 1)) *
                       pf.est.std_error;
    const double denom = std::sqrt(row.survival_se * row.survival_se +
                                   row.geometric_se * row.geometric_se);
    const double diff = row.survival - row.geometric_ref;
    row.z = denom == 0.0
                ? (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                : diff / denom;
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-horizon identity.  For each n, P(dy_n >> 0 for the start-a walk) is
// evaluated against the forward storage walk in two readings:
//
//   storage (bare) event:  W_n >> R^{-1}a with no boundary contact through n.
//     For d >= 2 this is only an upper bound in law — the storage walk cannot
//     see the cumulative pushing of the matching primal path, and the excess
//     is a real, measurable gap (not sampling noise).  For d = 1 the bare
//     event is already exact.
//
//   exact event: bare event AND the cumulative threshold correction.  The
//     stored increments of the storage walk are un-reversed into the primal
//     path they correspond to under pathwise time reversal, and the exact
//     characterization dy_n >> 0  <=>  S_n - b >> y_{n-1} (free dual sum
//     against reconstructed cumulative pushing) supplies the missing
//     condition.  This restores equality in law at every fixed n, for every
//     d; it is the hard guarantee the rest of the report is judged against.
//
// Both sides use independent stream families; the reconstruction consumes no
// randomness.  The conditional variant of the bare event (given no boundary
// contact) is reported alongside, since the two readings of the limiting
// claim differ.

struct PerHorizonRow {
  int n = 0;
  std::int64_t lhs_count = 0;
  std::int64_t rhs_count = 0;      // exact event (bare + correction)
  std::int64_t storage_count = 0;  // bare storage event
  std::int64_t surviving_count = 0;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;       // exact right side; z below gates lhs against this
  double rhs_se = 0.0;
  double z = 0.0;
  double storage = 0.0;   // bare event: upper bound for d >= 2, exact for d = 1
  double storage_se = 0.0;
  double z_storage = 0.0;
  double rhs_conditional = 0.0;  // bare event given interior survival
};

struct PerHorizonTable {
  std::vector<PerHorizonRow> rows;
  std::int64_t n_paths_per_side = 0;
};

[[nodiscard]] inline PerHorizonTable per_horizon_identity(
    const Model& model, const ReflectionMatrix& rm, const Vec& a,
    int max_horizon, std::int64_t n_paths, std::uint64_t seed, int workers = 1,
    double strict_tol = kStrictTolDefault) {
  const Vec b = rm.Rinv * a;
  const int slots = std::max(workers, 1);
  std::vector<std::vector<std::int64_t>> lhs_c(
      slots, std::vector<std::int64_t>(max_horizon + 1, 0));
  std::vector<std::vector<std::int64_t>> rhs_c(
      slots, std::vector<std::int64_t>(max_horizon + 1, 0));
  std::vector<std::vector<std::int64_t>> bare_c(
      slots, std::vector<std::int64_t>(max_horizon + 1, 0));
  std::vector<std::vector<std::int64_t>> surv_c(
      slots, std::vector<std::int64_t>(max_horizon + 1, 0));
  std::atomic<int> lhs_slot{0};
  std::atomic<int> rhs_slot{0};

  parallel_for(n_paths, workers, [&](std::int64_t begin, std::int64_t end) {
    const int slot = lhs_slot.fetch_add(1);
    detail::PrimalWalker walker(rm);
    auto& mine = lhs_c[slot];
    for (std::int64_t i = begin; i < end; ++i) {
      RngStream stream = derive_stream(seed, StreamPurpose::per_horizon_primal,
                                       static_cast<std::uint64_t>(i));
      walker.reset(a);
      for (int k = 1; k <= max_horizon; ++k) {
        walker.step(model.sample_increment(stream));
        if (detail::all_above_zero(walker.dy(), strict_tol)) ++mine[k];
      }
    }
  });

  parallel_for(n_paths, workers, [&](std::int64_t begin, std::int64_t end) {
    const int slot = rhs_slot.fetch_add(1);
    detail::StorageWalker walker(rm);
    detail::PrimalWalker rec(rm);
    std::vector<Vec> xs(static_cast<std::size_t>(max_horizon), Vec(rm.d));
    Vec uhat(rm.d), shat(rm.d), target(rm.d), yrec(rm.d);
    auto& mine_rhs = rhs_c[slot];
    auto& mine_bare = bare_c[slot];
    auto& mine_surv = surv_c[slot];
    for (std::int64_t i = begin; i < end; ++i) {
      RngStream stream = derive_stream(seed, StreamPurpose::per_horizon_dual,
                                       static_cast<std::uint64_t>(i));
      walker.reset();
      shat.setZero();
      for (int k = 1; k <= max_horizon; ++k) {
        xs[k - 1] = model.sample_increment(stream);
        uhat.noalias() = -(rm.Rinv * xs[k - 1]);
        shat += uhat;
        walker.step(uhat);
        if (walker.w().minCoeff() <= strict_tol) break;  // boundary contact
        ++mine_surv[k];
        if (!detail::all_above(walker.w(), b, strict_tol)) continue;
        ++mine_bare[k];
        // Exact event: un-reverse the stored increments into the primal path
        // this storage prefix mirrors, and test the cumulative threshold
        // S_k - b >> y_{k-1}.  No randomness is consumed here.
        rec.reset(a);
        yrec.setZero();
        for (int j = k; j >= 2; --j) {
          rec.step(xs[j - 1]);
          yrec += rec.dy();
        }
        target = shat - b;
        if (detail::all_above(target, yrec, strict_tol)) ++mine_rhs[k];
      }
    }
  });

  PerHorizonTable out;
  out.n_paths_per_side = n_paths;
  for (int n = 1; n <= max_horizon; ++n) {
    PerHorizonRow row;
    row.n = n;
    for (int s = 0; s < slots; ++s) {
      row.lhs_count += lhs_c[s][n];
      row.rhs_count += rhs_c[s][n];
      row.storage_count += bare_c[s][n];
      row.surviving_count += surv_c[s][n];
    }
    const Estimate lhs =
        proportion_estimate(row.lhs_count, n_paths, "per_horizon_primal");
    const Estimate rhs =
        proportion_estimate(row.rhs_count, n_paths, "per_horizon_dual");
    const Estimate bare =
        proportion_estimate(row.storage_count, n_paths, "per_horizon_dual");
    row.lhs = lhs.value;
    row.lhs_se = lhs.std_error;
    row.rhs = rhs.value;
    row.rhs_se = rhs.std_error;
    row.z = discrepancy_z(lhs, rhs);
    row.storage = bare.value;
    row.storage_se = bare.std_error;
    row.z_storage = discrepancy_z(lhs, bare);
    row.rhs_conditional =
        row.surviving_count > 0
            ? static_cast<double>(row.storage_count) /
                  static_cast<double>(row.surviving_count)
            : 0.0;
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Capital sweep with common random numbers: the same seed and purpose are
// reused for every capital level, so pathwise comparison makes each ruin
// column exactly nonincreasing in the level.

struct SweepRow {
  double scale = 0.0;
  std::int64_t ruin_count = 0;
  std::int64_t sruin_count = 0;
  std::int64_t ssruin_count = 0;
  double ruin = 0.0;
  double sruin = 0.0;
  double ssruin = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::int64_t n_paths = 0;
  std::int64_t horizon = 0;
};

[[nodiscard]] inline SweepTable run_capital_sweep(
    const Model& model, const ReflectionMatrix& rm,
    const std::vector<double>& scales, std::int64_t horizon,
    std::int64_t n_paths, std::uint64_t seed, int workers = 1,
    double strict_tol = kStrictTolDefault) {
  SweepTable out;
  out.n_paths = n_paths;
  out.horizon = horizon;
  for (double t : scales) {
    const Vec a = t * Vec::Ones(rm.d);
    const RuinDirect rd = estimate_ruin_direct(model, rm, a, horizon, n_paths,
                                               seed, workers, strict_tol);
    SweepRow row;
    row.scale = t;
    row.ruin_count = std::llround(rd.ruin.value * static_cast<double>(n_paths));
    row.sruin_count =
        std::llround(rd.sruin.value * static_cast<double>(n_paths));
    row.ssruin_count =
        std::llround(rd.ssruin.value * static_cast<double>(n_paths));
    row.ruin = rd.ruin.value;
    row.sruin = rd.sruin.value;
    row.ssruin = rd.ssruin.value;
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// One-dimensional stationarity diagnostic: quantiles of W_n at a few horizons
// against the within-cycle value W(sigma_0 - 1).

struct StationaryDiag {
  std::vector<double> probs;                  // quantile levels
  std::vector<std::int64_t> horizons;
  std::vector<std::vector<double>> w_quantiles;  // one row per horizon
  std::vector<double> cycle_quantiles;           // W(sigma_0 - 1)
  std::int64_t n_paths = 0;
};

[[nodiscard]] inline double quantile_sorted(const std::vector<double>& sorted,
                                            double prob) {
  if (sorted.empty()) return 0.0;
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

[[nodiscard]] inline StationaryDiag stationary_diagnostic(
    const Model& model, const ReflectionMatrix& rm,
    const std::vector<std::int64_t>& horizons, std::int64_t n_paths,
    std::uint64_t seed, int workers = 1,
    double strict_tol = kStrictTolDefault) {
  if (rm.d != 1) {
    fail(ErrorCode::invalid_config,
         "stationarity diagnostic is defined for d = 1");
  }
  StationaryDiag out;
  out.probs = {0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.99};
  out.horizons = horizons;
  out.n_paths = n_paths;
  const std::int64_t max_horizon =
      *std::max_element(horizons.begin(), horizons.end());

  std::vector<std::vector<double>> w_samples(
      horizons.size(), std::vector<double>(n_paths, 0.0));
  std::vector<double> cycle_samples(n_paths, 0.0);

  parallel_for(n_paths, workers, [&](std::int64_t begin, std::int64_t end) {
    detail::StorageWalker walker(rm);
    Vec uhat(1);
    for (std::int64_t i = begin; i < end; ++i) {
      RngStream stream = derive_stream(seed, StreamPurpose::stationary_qq,
                                       static_cast<std::uint64_t>(i));
      walker.reset();
      for (std::int64_t k = 1; k <= max_horizon; ++k) {
        uhat.noalias() = -(rm.Rinv * model.sample_increment(stream));
        walker.step(uhat);
        for (std::size_t h = 0; h < horizons.size(); ++h) {
          if (horizons[h] == k) w_samples[h][i] = walker.w()[0];
        }
      }
      // Run a fresh cycle: value just before the first return to the origin.
      walker.reset();
      double prev = 0.0;
      for (std::int64_t k = 1; k <= max_horizon; ++k) {
        uhat.noalias() = -(rm.Rinv * model.sample_increment(stream));
        walker.step(uhat);
        if (walker.w()[0] <= strict_tol) break;
        prev = walker.w()[0];
      }
      cycle_samples[i] = prev;
    }
  });

  for (auto& samples : w_samples) {
    std::sort(samples.begin(), samples.end());
    std::vector<double> qs;
    qs.reserve(out.probs.size());
    for (double p : out.probs) qs.push_back(quantile_sorted(samples, p));
    out.w_quantiles.push_back(std::move(qs));
  }
  std::sort(cycle_samples.begin(), cycle_samples.end());
  for (double p : out.probs) {
    out.cycle_quantiles.push_back(quantile_sorted(cycle_samples, p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov distance and its scaled statistic.

struct KsResult {
  double statistic = 0.0;
  double scaled = 0.0;  // statistic * sqrt(n1 n2 / (n1 + n2))
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
};

[[nodiscard]] inline KsResult ks_two_sample(std::vector<double> x,
                                            std::vector<double> y) {
  KsResult out;
  out.n1 = static_cast<std::int64_t>(x.size());
  out.n2 = static_cast<std::int64_t>(y.size());
  if (x.empty() || y.empty()) return out;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    const double fx = static_cast<double>(i) / static_cast<double>(x.size());
    const double fy = static_cast<double>(j) / static_cast<double>(y.size());
    d = std::max(d, std::abs(fx - fy));
  }
  out.statistic = d;
  const double n1 = static_cast<double>(out.n1);
  const double n2 = static_cast<double>(out.n2);
  out.scaled = d * std::sqrt(n1 * n2 / (n1 + n2));
  return out;
}

// Least-squares slope of log survival versus log value over the top 1% of
// samples; a qualitative tail-index read, never a gate.
[[nodiscard]] inline double tail_index_top1(std::vector<double> samples) {
  if (samples.size() < 200) return std::numeric_limits<double>::quiet_NaN();
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const std::size_t start = n - n / 100;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (std::size_t i = start; i < n; ++i) {
    if (samples[i] <= 0.0) continue;
    const double lx = std::log(samples[i]);
    const double surv = static_cast<double>(n - i) / static_cast<double>(n);
    const double ly = std::log(surv);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 10) return std::numeric_limits<double>::quiet_NaN();
  const double dm = static_cast<double>(m);
  const double denom = dm * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return -(dm * sxy - sx * sy) / denom;  // positive tail index
}

// ---------------------------------------------------------------------------
// Closed-form one-dimensional oracles.

// Ultimate full-pushing (ruin) probability of the +-1 regulated walk started
// at 0 with P(-1) = q < 1/2: the renewal equation pi = q + (1-q)(q/(1-q))pi
// gives pi = q/(1-q).
[[nodiscard]] inline double gamblers_ruin(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    fail(ErrorCode::invalid_config, "q must lie in (0,1)");
  }
  return q < 0.5 ? q / (1.0 - q) : 1.0;
}

// Classical continuous-time ruin probability with exponential(1/mu) claims,
// Poisson(lambda) arrivals, premium rate c > lambda*mu, initial capital a.
[[nodiscard]] inline double cl_ruin_prob(double lambda, double mu, double c,
                                         double a) {
  if (lambda <= 0.0 || mu <= 0.0 || c <= 0.0 || a < 0.0) {
    fail(ErrorCode::invalid_config, "parameters must be positive (a >= 0)");
  }
  if (lambda * mu >= c) {
    fail(ErrorCode::invalid_config,
         "net profit requires c > lambda * mu");
  }
  return (lambda * mu / c) * std::exp(-(c - lambda * mu) * a / (c * mu));
}

// P(claim exceeds accrued premium) for the same model:
// P(X > cA) = lambda*mu / (lambda*mu + c).
[[nodiscard]] inline double cl_p(double lambda, double mu, double c) {
  if (lambda <= 0.0 || mu <= 0.0 || c <= 0.0) {
    fail(ErrorCode::invalid_config, "parameters must be positive");
  }
  return lambda * mu / (lambda * mu + c);
}

}  // namespace ruinlab
