#pragma once

// Discrete Skorokhod reflection in the nonnegative orthant.  Given a start
// a >= 0 and increments u_1..u_n, the regulated path solves, step by step,
//   (dy_k, z_k) = LCP(z_{k-1} + u_k, R),
// yielding z_k = z_{k-1} + u_k + R dy_k >= 0 with componentwise minimal
// cumulative pushing y_k = sum_{l<=k} dy_l.
//
// Three nested severity notions of hitting the boundary are detected:
//   ruin      z_k = 0                      (state pinned at the origin)
//   s-ruin    z_k = 0 and dy_k > 0         (origin hit with active pushing)
//   ss-ruin   dy_k >> 0                    (every coordinate pushed)
// At any detected event the pushing must satisfy the affine identity
// y_k = -R^{-1} a + sum_{l<=k} (-R^{-1} u_l), which is verified on the spot.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ruinlab/common.hpp"
#include "ruinlab/lcp.hpp"
#include "ruinlab/reflection.hpp"

namespace ruinlab {

struct SpPath {
  Vec a;
  std::vector<Vec> u;   // increments, u[k-1] is step k
  std::vector<Vec> z;   // states, z[0] = a .. z[n]
  std::vector<Vec> y;   // cumulative pushing, y[0] = 0 .. y[n]
  std::vector<Vec> dy;  // per-step pushing, dy[k-1] is step k
  std::vector<Vec> h;   // running free-walk shortfall, h[k-1] is step k

  [[nodiscard]] int n() const { return static_cast<int>(u.size()); }
};

[[nodiscard]] inline SpPath solve_sp(const Vec& a, const std::vector<Vec>& u,
                                     const ReflectionMatrix& rm) {
  if (a.size() != rm.d) {
    fail(ErrorCode::invalid_config, "start vector dimension mismatch");
  }
  if (!all_finite(a)) {
    fail(ErrorCode::non_finite_input, "start vector has non-finite entries");
  }
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < 0.0) {
      fail(ErrorCode::invalid_config, "start vector must lie in the orthant");
    }
  }

  SpPath path;
  path.a = a;
  path.u = u;
  const int n = static_cast<int>(u.size());
  path.z.reserve(n + 1);
  path.y.reserve(n + 1);
  path.dy.reserve(n);
  path.h.reserve(n);
  path.z.push_back(a);
  path.y.push_back(Vec::Zero(rm.d));

  detail::LcpScratch scratch;
  Vec eta(rm.d), xi(rm.d), zeta(rm.d);
  Vec free_walk = a;      // a + sum of increments so far
  Vec shortfall = Vec::Zero(rm.d);
  for (int k = 1; k <= n; ++k) {
    if (u[k - 1].size() != rm.d) {
      fail(ErrorCode::invalid_config,
           "increment dimension mismatch at step " + std::to_string(k));
    }
    if (!all_finite(u[k - 1])) {
      fail(ErrorCode::non_finite_input,
           "increment has non-finite entries at step " + std::to_string(k));
    }
    eta = path.z.back() + u[k - 1];
    try {
      detail::lcp_fixed_point(eta, rm, xi, zeta, scratch);
    } catch (const Error& e) {
      fail(e.code(), std::string(e.what()) + " (at step " + std::to_string(k) +
                         ")");
    }
    path.dy.push_back(xi);
    path.z.push_back(zeta);
    path.y.push_back(path.y.back() + xi);

    free_walk += u[k - 1];
    for (Eigen::Index i = 0; i < rm.d; ++i) {
      shortfall[i] = std::max(shortfall[i], std::max(0.0, -free_walk[i]));
    }
    path.h.push_back(shortfall);
  }
  return path;
}

struct RuinRecord {
  std::optional<int> t_ruin;
  std::optional<int> t_sruin;
  std::optional<int> t_ssruin;
};

// First hitting steps of the three boundary events, with the pushing identity
// verified at each detected event.
[[nodiscard]] inline RuinRecord detect_ruin(const SpPath& path,
                                            const ReflectionMatrix& rm,
                                            double strict_tol) {
  RuinRecord rec;
  Vec cum = path.a;
  for (int k = 1; k <= path.n(); ++k) {
    cum += path.u[k - 1];
    const Vec& zk = path.z[k];
    const Vec& dyk = path.dy[k - 1];
    const bool z_zero = is_zero(zk, strict_tol);
    bool dy_some = false;
    bool dy_all = true;
    for (Eigen::Index i = 0; i < dyk.size(); ++i) {
      if (dyk[i] > strict_tol) {
        dy_some = true;
      } else {
        dy_all = false;
      }
    }
    bool event = false;
    if (!rec.t_ruin && z_zero) {
      rec.t_ruin = k;
      event = true;
    }
    if (!rec.t_sruin && z_zero && dy_some) {
      rec.t_sruin = k;
      event = true;
    }
    if (!rec.t_ssruin && dy_all) {
      rec.t_ssruin = k;
      event = true;
    }
    if (event) {
      const double resid =
          (path.y[k] + rm.Rinv * cum).lpNorm<Eigen::Infinity>();
      if (resid > kCrossCheckTol) {
        std::ostringstream oss;
        oss << "pushing identity violated at step " << k << " (residual "
            << resid << ")";
        fail(ErrorCode::consistency_violation, oss.str());
      }
    }
    if (rec.t_ruin && rec.t_sruin && rec.t_ssruin) break;
  }
  return rec;
}

// Pathwise comparison for ordered starts a <= b driven by the same
// increments: pushing is antitone in the start, and each boundary event for
// the larger start implies the same event for the smaller start at the same
// step, so first hitting times are ordered.
struct ComparisonResult {
  bool ok = true;
  int step = 0;
  std::string what;
  double violation = 0.0;
};

[[nodiscard]] inline ComparisonResult comparison_check(
    const Vec& a, const Vec& b, const std::vector<Vec>& u,
    const ReflectionMatrix& rm, double strict_tol = kStrictTolDefault) {
  if (!is_geq(b, a, 0.0)) {
    fail(ErrorCode::invalid_config,
         "comparison requires a <= b componentwise");
  }
  const SpPath pa = solve_sp(a, u, rm);
  const SpPath pb = solve_sp(b, u, rm);
  const Vec gap_cap = rm.Rinv * (b - a);  // upper bound on y^a - y^b
  ComparisonResult res;
  for (int k = 1; k <= pa.n(); ++k) {
    for (Eigen::Index i = 0; i < rm.d; ++i) {
      const double ydiff = pa.y[k][i] - pb.y[k][i];
      if (ydiff < -kCrossCheckTol) {
        res.ok = false;
        res.step = k;
        res.what = "cumulative pushing not antitone in the start";
        res.violation = -ydiff;
        return res;
      }
      if (ydiff > gap_cap[i] + kCrossCheckTol) {
        res.ok = false;
        res.step = k;
        res.what = "pushing gap exceeds the transformed start gap";
        res.violation = ydiff - gap_cap[i];
        return res;
      }
      const double dydiff = pa.dy[k - 1][i] - pb.dy[k - 1][i];
      if (dydiff < -kCrossCheckTol) {
        res.ok = false;
        res.step = k;
        res.what = "per-step pushing not antitone in the start";
        res.violation = -dydiff;
        return res;
      }
      const double zdiff = pa.z[k][i] - pb.z[k][i];
      if (zdiff > kCrossCheckTol) {
        res.ok = false;
        res.step = k;
        res.what = "state not monotone in the start";
        res.violation = zdiff;
        return res;
      }
    }
  }
  const RuinRecord ra = detect_ruin(pa, rm, strict_tol);
  const RuinRecord rb = detect_ruin(pb, rm, strict_tol);
  const auto ordered = [](const std::optional<int>& ta,
                          const std::optional<int>& tb) {
    return !tb || (ta && *ta <= *tb);
  };
  if (!ordered(ra.t_ruin, rb.t_ruin)) {
    res.ok = false;
    res.what = "ruin time for the larger start precedes the smaller start";
    res.step = rb.t_ruin.value();
    return res;
  }
  if (!ordered(ra.t_sruin, rb.t_sruin)) {
    res.ok = false;
    res.what = "s-ruin time for the larger start precedes the smaller start";
    res.step = rb.t_sruin.value();
    return res;
  }
  if (!ordered(ra.t_ssruin, rb.t_ssruin)) {
    res.ok = false;
    res.what = "ss-ruin time for the larger start precedes the smaller start";
    res.step = rb.t_ssruin.value();
    return res;
  }
  return res;
}

}  // namespace ruinlab
