#pragma once

// Shared value types, tolerances, error codes, and the componentwise order
// predicates used across the library.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ruinlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Dimension cap for reflection matrices and state vectors.
inline constexpr int kMaxDim = 64;

// Default tolerance for boundary membership and strict-positivity decisions.
inline constexpr double kStrictTolDefault = 1e-9;

// Successive-change tolerance for fixed-point iterations.
inline constexpr double kIterTol = 1e-12;

// Magnitudes at or below this are snapped to exact zero in solver outputs, so
// that downstream equality predicates (z == 0, v == 0) are exact.
inline constexpr double kZeroClamp = 1e-11;

// Active-set membership threshold on solver outputs.
inline constexpr double kActiveTol = 1e-12;

// Tolerance for cross-checks between independently computed quantities.
inline constexpr double kCrossCheckTol = 1e-8;

// Iteration cap for the complementarity fixed point.
inline constexpr std::int64_t kLcpIterCap = 1'000'000;

// Iteration cap for the spectral-radius power iteration.
inline constexpr int kPowerIterCap = 10'000;

enum class ErrorCode {
  off_diagonal_negative,
  diagonal_nonzero,
  spectral_radius_not_less_than_one,
  inverse_inconsistent,
  iteration_cap_exceeded,
  non_finite_input,
  no_feasible_active_set,
  multiple_solutions,
  consistency_violation,
  lemma_violation,
  invalid_config,
  net_profit_violated,
  rejection_stall,
};

[[nodiscard]] inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::off_diagonal_negative: return "OffDiagonalNegative";
    case ErrorCode::diagonal_nonzero: return "DiagonalNonzero";
    case ErrorCode::spectral_radius_not_less_than_one:
      return "SpectralRadiusNotLessThanOne";
    case ErrorCode::inverse_inconsistent: return "InverseInconsistent";
    case ErrorCode::iteration_cap_exceeded: return "IterationCapExceeded";
    case ErrorCode::non_finite_input: return "NonFiniteInput";
    case ErrorCode::no_feasible_active_set: return "NoFeasibleActiveSet";
    case ErrorCode::multiple_solutions: return "MultipleSolutions";
    case ErrorCode::consistency_violation: return "ConsistencyViolation";
    case ErrorCode::lemma_violation: return "LemmaViolation";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::net_profit_violated: return "NetProfitViolated";
    case ErrorCode::rejection_stall: return "RejectionStall";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

[[nodiscard]] inline bool all_finite(const Vec& v) { return v.allFinite(); }
[[nodiscard]] inline bool all_finite(const Mat& m) { return m.allFinite(); }

// Componentwise order relations on R^d, strongest first: gg (every coordinate
// strictly larger beyond tol), gt (geq plus at least one strict coordinate),
// geq (no coordinate below by more than tol), none.
enum class Order { none, geq, gt, gg };

[[nodiscard]] inline Order order(const Vec& x, const Vec& y, double tol) {
  if (x.size() != y.size()) {
    fail(ErrorCode::invalid_config, "order comparison dimension mismatch");
  }
  bool geq = true;
  bool some_strict = false;
  bool all_strict = true;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    if (diff < -tol) geq = false;
    if (diff > tol) {
      some_strict = true;
    } else {
      all_strict = false;
    }
  }
  if (geq && all_strict) return Order::gg;
  if (geq && some_strict) return Order::gt;
  if (geq) return Order::geq;
  return Order::none;
}

// Predicate helpers matching the three order notions against a reference.
[[nodiscard]] inline bool is_gg(const Vec& x, const Vec& y, double tol) {
  return order(x, y, tol) == Order::gg;
}
[[nodiscard]] inline bool is_gt(const Vec& x, const Vec& y, double tol) {
  const Order o = order(x, y, tol);
  return o == Order::gt || o == Order::gg;
}
[[nodiscard]] inline bool is_geq(const Vec& x, const Vec& y, double tol) {
  return order(x, y, tol) != Order::none;
}

[[nodiscard]] inline bool is_zero(const Vec& x, double tol) {
  return x.lpNorm<Eigen::Infinity>() <= tol;
}

// Snap magnitudes at or below kZeroClamp to exact zero, in place.
inline void clamp_zero(Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) <= kZeroClamp) v[i] = 0.0;
  }
}

}  // namespace ruinlab
