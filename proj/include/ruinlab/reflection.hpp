#pragma once

// Validated reflection matrices R = I - P^T for routing matrices P with zero
// diagonal, nonnegative off-diagonal entries, and spectral radius below one.
// Under these conditions R^{-1} = sum_k (P^T)^k is entrywise nonnegative with
// diagonal entries >= 1.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "ruinlab/common.hpp"

namespace ruinlab {

// Spectral radius of an entrywise-nonnegative matrix via power iteration on
// P + eps*I (eps breaks nilpotent/reducible stalls).  The estimate is the
// geometric mean of two consecutive sup-norm growth ratios, which also
// converges for patterns whose iterates alternate between two rays (e.g.
// [[0,p],[q,0]], where the two-step growth factor is exactly p*q).
[[nodiscard]] inline double spectral_radius(const Mat& P,
                                            int max_iters = kPowerIterCap) {
  const Eigen::Index d = P.rows();
  if (d == 1) return std::abs(P(0, 0));
  if (d == 2) {
    // A zero-diagonal 2x2 matrix is exactly 2-periodic, so the eps-shifted
    // iteration below resolves its radius only to order eps*(p+q)/sqrt(pq),
    // which breaches the 1e-9 accuracy contract once the off-diagonal pair is
    // skewed.  The quadratic closed form (largest root; real because the
    // off-diagonal product is nonnegative) is exact for every 2x2 case.
    const double tr = P(0, 0) + P(1, 1);
    const double gap = P(0, 0) - P(1, 1);
    const double disc = std::sqrt(gap * gap + 4.0 * P(0, 1) * P(1, 0));
    return std::max(std::abs(tr + disc), std::abs(tr - disc)) / 2.0;
  }

  // The iteration runs on P + (eps + 1/2)I.  A nonnegative matrix shifts its
  // Perron root exactly under diagonal shifts, so the radius is recovered by
  // subtracting the shift afterwards.  The 1/2 matters: routing graphs with a
  // dominant 2-cycle (a near-zero incoming column suffices) carry a -rho(P)
  // eigenvalue whose unshifted gap is only the coupling strength, stalling the
  // iteration; shifted, the gap is at least (c - rho)/(c + rho), uniform over
  // admissible matrices.  The eps term keeps strictly-zero sparsity patterns
  // from producing a dead iterate, per the stated regularisation.
  const double eps = 1e-12;
  const double shift = 0.5;
  Mat A = P + (eps + shift) * Mat::Identity(d, d);
  Vec v = Vec::Ones(d);
  Vec w(d);

  // Readout: geometric mean of the last four shifted growth ratios (a window
  // even-period transients divide), accepted after two consecutive agreements
  // at 1e-10 — an order inside the 1e-9 accuracy contract.
  double ring[4] = {0.0, 0.0, 0.0, 0.0};
  double est_prev = -1.0;
  int stable = 0;
  for (int k = 1; k <= max_iters; ++k) {
    w.noalias() = A * v;
    const double ratio = w.lpNorm<Eigen::Infinity>();
    if (ratio == 0.0) return 0.0;
    v = w / ratio;
    ring[k & 3] = ratio;
    if (k >= 4) {
      const double est = std::pow(ring[0] * ring[1] * ring[2] * ring[3], 0.25);
      if (est_prev >= 0.0 &&
          std::abs(est - est_prev) <= 1e-10 * std::max(1.0, est)) {
        if (++stable >= 2) return est - shift - eps;
      } else {
        stable = 0;
      }
      est_prev = est;
    }
  }
  std::ostringstream oss;
  oss << "power iteration did not settle after " << max_iters
      << " iterations; last estimate "
      << (est_prev >= 0.0 ? est_prev - shift - eps : est_prev);
  fail(ErrorCode::iteration_cap_exceeded, oss.str());
}

struct ReflectionMatrix {
  int d = 0;
  Mat P;     // routing matrix, zero diagonal, nonnegative off-diagonal
  Mat Pt;    // P transposed, cached for the complementarity fixed point
  Mat R;     // I - P^T
  Mat Rinv;  // R^{-1}, entrywise nonnegative, diagonal >= 1
  double rho = 0.0;  // spectral radius of P
  // 1-based index of the first column of Rinv with every entry strictly
  // positive, when one exists.
  std::optional<int> h2_column;
  // True when every row sum of P is <= 1.  Not required for validity; the
  // CLI surfaces a warning when false.
  bool substochastic = true;
};

[[nodiscard]] inline ReflectionMatrix build_reflection(const Mat& P) {
  if (P.rows() != P.cols()) {
    fail(ErrorCode::invalid_config, "routing matrix must be square");
  }
  const int d = static_cast<int>(P.rows());
  if (d < 1 || d > kMaxDim) {
    fail(ErrorCode::invalid_config,
         "dimension must be between 1 and " + std::to_string(kMaxDim));
  }
  if (!all_finite(P)) {
    fail(ErrorCode::non_finite_input, "routing matrix has non-finite entries");
  }
  for (int i = 0; i < d; ++i) {
    if (P(i, i) != 0.0) {
      fail(ErrorCode::diagonal_nonzero,
           "P(" + std::to_string(i + 1) + "," + std::to_string(i + 1) +
               ") must be zero");
    }
    for (int j = 0; j < d; ++j) {
      if (P(i, j) < 0.0) {
        fail(ErrorCode::off_diagonal_negative,
             "P(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                 ") is negative");
      }
    }
  }

  ReflectionMatrix rm;
  rm.d = d;
  rm.P = P;
  rm.Pt = P.transpose();
  rm.rho = spectral_radius(P);
  if (rm.rho >= 1.0 - 1e-8) {
    std::ostringstream oss;
    oss << "spectral radius " << rm.rho << " must be < 1";
    fail(ErrorCode::spectral_radius_not_less_than_one, oss.str());
  }

  rm.R = Mat::Identity(d, d) - rm.Pt;
  rm.Rinv = rm.R.partialPivLu().solve(Mat::Identity(d, d));

  // Snap roundoff-scale negatives in the inverse to zero; the limit of the
  // geometric series is entrywise nonnegative.
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (rm.Rinv(i, j) < 0.0 && rm.Rinv(i, j) >= -1e-12) rm.Rinv(i, j) = 0.0;
    }
  }

  // Cross-check the direct solve against the truncated geometric series
  // sum_k (P^T)^k, stopping once the tail bound is far below the agreement
  // tolerance.
  {
    Mat term = Mat::Identity(d, d);
    Mat series = Mat::Identity(d, d);
    const double denom = std::max(1.0 - rm.rho, 1e-8);
    double tail = 1.0;
    const int series_cap = 200'000;
    int k = 0;
    while (k < series_cap) {
      term = rm.Pt * term;
      series += term;
      ++k;
      tail = term.cwiseAbs().maxCoeff() / denom;
      if (tail < 1e-11) break;
    }
    const double disagreement = (series - rm.Rinv).cwiseAbs().maxCoeff();
    if (disagreement > kCrossCheckTol + tail) {
      std::ostringstream oss;
      oss << "direct inverse and geometric series disagree by " << disagreement
          << " after " << k << " terms";
      fail(ErrorCode::inverse_inconsistent, oss.str());
    }
  }

  for (int i = 0; i < d; ++i) {
    if (rm.Rinv(i, i) < 1.0 - 1e-9) {
      fail(ErrorCode::inverse_inconsistent,
           "inverse diagonal entry below one at index " + std::to_string(i + 1));
    }
  }

  for (int j = 0; j < d && !rm.h2_column; ++j) {
    bool all_positive = true;
    for (int i = 0; i < d; ++i) {
      if (rm.Rinv(i, j) <= 1e-12) {
        all_positive = false;
        break;
      }
    }
    if (all_positive) rm.h2_column = j + 1;
  }

  for (int i = 0; i < d; ++i) {
    if (P.row(i).sum() > 1.0 + 1e-12) {
      rm.substochastic = false;
      break;
    }
  }

  return rm;
}

}  // namespace ruinlab
