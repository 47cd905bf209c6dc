#pragma once

// Linear complementarity solvers for the reflection matrix R = I - P^T and
// its inverse.  solve_lcp(eta, rm, view) returns (xi, zeta) with
//   zeta = eta + M xi,  xi >= 0,  zeta >= 0,  <xi, zeta> = 0,
// where M is R or R^{-1} according to the view.  Uniqueness holds for both
// views under the validity conditions enforced by build_reflection.
//
// The R-view is solved by the monotone fixed point xi <- max(0, P^T xi - eta),
// which contracts because rho(P) < 1.  The R^{-1}-view is deliberately routed
// through the exchange identities
//   Phi(theta, R^{-1}) = Psi(-R theta, R),   Psi(theta, R^{-1}) = Phi(-R theta, R),
// (Phi = xi-part, Psi = zeta-part), so that every complementarity problem in
// the codebase funnels through the single contraction solver.
//
// solve_lcp_enum is an independent oracle: it enumerates candidate active
// sets, solves each linear subsystem directly, and keeps the feasible one.

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "ruinlab/common.hpp"
#include "ruinlab/reflection.hpp"

namespace ruinlab {

enum class MatrixView { reflection, inverse };

struct LcpSolution {
  Vec xi;
  Vec zeta;
  std::vector<int> active_set;  // 0-based indices with xi[i] > kActiveTol
  std::int64_t iterations = 0;
  double residual = 0.0;  // max_i |min(xi_i, zeta_i)|
};

namespace detail {

// Reusable buffers for the fixed point, so per-step solves in long walks do
// not allocate.
struct LcpScratch {
  Vec xi;
  Vec next;
};

// Core contraction solve of LCP(eta, R).  Writes xi and zeta; returns the
// iteration count.  zeta is clamped so exact complementarity zeros survive
// downstream equality predicates.
inline std::int64_t lcp_fixed_point(const Vec& eta, const ReflectionMatrix& rm,
                                    Vec& xi, Vec& zeta, LcpScratch& scratch) {
  const Eigen::Index d = eta.size();
  scratch.xi.setZero(d);
  scratch.next.resize(d);
  std::int64_t iters = 0;
  while (iters < kLcpIterCap) {
    scratch.next.noalias() = rm.Pt * scratch.xi;
    scratch.next -= eta;
    scratch.next = scratch.next.cwiseMax(0.0);
    ++iters;
    const double change =
        (scratch.next - scratch.xi).lpNorm<Eigen::Infinity>();
    scratch.xi.swap(scratch.next);
    if (change < kIterTol) {
      xi = scratch.xi;
      zeta.noalias() = rm.R * xi;
      zeta += eta;
      clamp_zero(xi);
      clamp_zero(zeta);
      return iters;
    }
  }
  std::ostringstream oss;
  oss << "complementarity fixed point did not converge within " << kLcpIterCap
      << " iterations; last iterate sup-norm "
      << scratch.xi.lpNorm<Eigen::Infinity>();
  fail(ErrorCode::iteration_cap_exceeded, oss.str());
}

[[nodiscard]] inline double complementarity_residual(const Vec& xi,
                                                     const Vec& zeta) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    r = std::max(r, std::abs(std::min(xi[i], zeta[i])));
  }
  return r;
}

[[nodiscard]] inline std::vector<int> active_set_of(const Vec& xi) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    if (xi[i] > kActiveTol) s.push_back(static_cast<int>(i));
  }
  return s;
}

}  // namespace detail

[[nodiscard]] inline LcpSolution solve_lcp(const Vec& eta,
                                           const ReflectionMatrix& rm,
                                           MatrixView view) {
  if (eta.size() != rm.d) {
    fail(ErrorCode::invalid_config, "LCP input dimension mismatch");
  }
  if (!all_finite(eta)) {
    fail(ErrorCode::non_finite_input, "LCP input has non-finite entries");
  }
  detail::LcpScratch scratch;
  LcpSolution sol;
  if (view == MatrixView::reflection) {
    sol.iterations = detail::lcp_fixed_point(eta, rm, sol.xi, sol.zeta, scratch);
  } else {
    Vec routed = -(rm.R * eta);
    Vec phi(rm.d), psi(rm.d);
    sol.iterations = detail::lcp_fixed_point(routed, rm, phi, psi, scratch);
    sol.xi = psi;   // Phi(eta, R^{-1}) = Psi(-R eta, R)
    sol.zeta = phi; // Psi(eta, R^{-1}) = Phi(-R eta, R)
  }
  sol.active_set = detail::active_set_of(sol.xi);
  sol.residual = detail::complementarity_residual(sol.xi, sol.zeta);
  return sol;
}

// Active-set enumeration oracle (d <= 14).  For each candidate set S, solve
// M_SS xi_S = -eta_S with xi = 0 off S, and accept when xi_S and the induced
// zeta are nonnegative up to kZeroClamp.  Exactly one solution value must
// survive; degenerate candidate sets that reproduce the same value are merged.
[[nodiscard]] inline LcpSolution solve_lcp_enum(const Vec& eta,
                                                const ReflectionMatrix& rm,
                                                MatrixView view) {
  const int d = rm.d;
  if (d > 14) {
    fail(ErrorCode::invalid_config,
         "active-set enumeration is limited to d <= 14");
  }
  if (eta.size() != d) {
    fail(ErrorCode::invalid_config, "LCP input dimension mismatch");
  }
  if (!all_finite(eta)) {
    fail(ErrorCode::non_finite_input, "LCP input has non-finite entries");
  }
  const Mat& M = (view == MatrixView::reflection) ? rm.R : rm.Rinv;

  std::vector<Vec> accepted_xi;
  std::vector<Vec> accepted_zeta;
  std::int64_t tried = 0;
  const std::uint32_t limit = 1u << d;
  std::vector<int> members;
  members.reserve(d);
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    ++tried;
    members.clear();
    for (int i = 0; i < d; ++i) {
      if (mask & (1u << i)) members.push_back(i);
    }
    Vec xi = Vec::Zero(d);
    if (!members.empty()) {
      const int m = static_cast<int>(members.size());
      Mat sub(m, m);
      Vec rhs(m);
      for (int r = 0; r < m; ++r) {
        rhs[r] = -eta[members[r]];
        for (int c = 0; c < m; ++c) {
          sub(r, c) = M(members[r], members[c]);
        }
      }
      const Vec xi_s = sub.partialPivLu().solve(rhs);
      if (!xi_s.allFinite()) continue;
      for (int r = 0; r < m; ++r) xi[members[r]] = xi_s[r];
    }
    bool feasible = true;
    for (int i = 0; i < d && feasible; ++i) {
      if (xi[i] < -kZeroClamp) feasible = false;
    }
    if (!feasible) continue;
    Vec zeta = eta + M * xi;
    for (int i = 0; i < d && feasible; ++i) {
      if (zeta[i] < -kZeroClamp) feasible = false;
    }
    if (!feasible) continue;
    xi = xi.cwiseMax(0.0);
    zeta = zeta.cwiseMax(0.0);
    clamp_zero(xi);
    clamp_zero(zeta);
    bool duplicate = false;
    for (const Vec& prev : accepted_xi) {
      if ((prev - xi).lpNorm<Eigen::Infinity>() <= kCrossCheckTol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      accepted_xi.push_back(xi);
      accepted_zeta.push_back(zeta);
    }
  }

  if (accepted_xi.empty()) {
    fail(ErrorCode::no_feasible_active_set,
         "no candidate active set yields a feasible solution");
  }
  if (accepted_xi.size() > 1) {
    std::ostringstream oss;
    oss << accepted_xi.size() << " distinct feasible solutions found";
    fail(ErrorCode::multiple_solutions, oss.str());
  }

  LcpSolution sol;
  sol.xi = accepted_xi.front();
  sol.zeta = accepted_zeta.front();
  sol.active_set = detail::active_set_of(sol.xi);
  sol.iterations = tried;
  sol.residual = detail::complementarity_residual(sol.xi, sol.zeta);
  return sol;
}

// Verifies the exchange identities that connect the two views:
//   Phi(eta, R)  = Psi(-R^{-1} eta, R^{-1})
//   Psi(eta, R)  = Phi(-R^{-1} eta, R^{-1})
// The R^{-1}-side is solved by enumeration when possible so the check does
// not merely exercise the routing used by solve_lcp.
struct DualTransformCheck {
  bool ok = false;
  double residual_xi = 0.0;
  double residual_zeta = 0.0;
};

[[nodiscard]] inline DualTransformCheck dual_transform_check(
    const Vec& eta, const ReflectionMatrix& rm) {
  const LcpSolution direct = solve_lcp(eta, rm, MatrixView::reflection);
  const Vec theta = -(rm.Rinv * eta);
  const LcpSolution dual = (rm.d <= 14)
                               ? solve_lcp_enum(theta, rm, MatrixView::inverse)
                               : solve_lcp(theta, rm, MatrixView::inverse);
  DualTransformCheck out;
  out.residual_xi = (direct.xi - dual.zeta).lpNorm<Eigen::Infinity>();
  out.residual_zeta = (direct.zeta - dual.xi).lpNorm<Eigen::Infinity>();
  out.ok = out.residual_xi <= kCrossCheckTol &&
           out.residual_zeta <= kCrossCheckTol;
  return out;
}

}  // namespace ruinlab
