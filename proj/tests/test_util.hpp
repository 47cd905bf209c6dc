// Shared helpers for the unit tests: compact vector/matrix builders, the
// reference two-company interaction matrix used by the worked examples, and
// an error-code extractor for negative tests.
#pragma once

#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

#include <ruinlab/common.hpp>
#include <ruinlab/reflection.hpp>

namespace ruinlab::testutil {

inline Vec vec(std::initializer_list<double> entries) {
  Vec v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (double e : entries) v[i++] = e;
  return v;
}

inline Mat mat2(double p12, double p21) {
  Mat P = Mat::Zero(2, 2);
  P(0, 1) = p12;
  P(1, 0) = p21;
  return P;
}

// Symmetric two-company coupling: R = [[1,-1/2],[-1/2,1]] and
// R^{-1} = [[4/3,2/3],[2/3,4/3]].
inline ReflectionMatrix symmetric2() {
  return build_reflection(mat2(0.5, 0.5));
}

// Scalar model: R = R^{-1} = 1.
inline ReflectionMatrix scalar1() { return build_reflection(Mat::Zero(1, 1)); }

inline std::vector<Vec> steps(std::initializer_list<Vec> list) {
  return std::vector<Vec>(list);
}

// Runs f, which must raise a structured Error, and returns its code.  A
// missing error surfaces as an ordinary test failure via the thrown
// runtime_error.
template <typename F>
inline ErrorCode error_code_of(F&& f) {
  try {
    std::forward<F>(f)();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected the call to raise a structured error");
}

inline double max_abs_diff(const Vec& x, const Vec& y) {
  return (x - y).cwiseAbs().maxCoeff();
}

}  // namespace ruinlab::testutil
