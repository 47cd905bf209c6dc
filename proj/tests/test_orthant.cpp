// Componentwise order relations, spectral-radius estimation, and validated
// reflection-matrix construction.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <ruinlab/common.hpp>
#include <ruinlab/reflection.hpp>
#include <ruinlab/rng.hpp>

#include "test_util.hpp"

using namespace ruinlab;
using testutil::error_code_of;
using testutil::mat2;
using testutil::vec;

TEST_CASE("order classifies strict, mixed, and incomparable pairs") {
  REQUIRE(order(vec({1, 2}), vec({0, 1}), 0.0) == Order::gg);
  REQUIRE(order(vec({1, 1}), vec({1, 0}), 0.0) == Order::gt);
  REQUIRE(order(vec({1, 0}), vec({0, 1}), 0.0) == Order::none);
  REQUIRE(order(vec({2, 2}), vec({2, 2}), 0.0) == Order::geq);
}

TEST_CASE("order respects the tolerance band") {
  // A coordinate within tol of equality is neither strictly above nor below.
  REQUIRE(order(vec({1.0 + 1e-12, 1.0}), vec({1, 1}), 1e-9) == Order::geq);
  REQUIRE(order(vec({1.0 - 1e-12, 1.0}), vec({1, 1}), 1e-9) == Order::geq);
  REQUIRE(order(vec({1.0 + 1e-6, 1.0}), vec({1, 1}), 1e-9) == Order::gt);
  REQUIRE(order(vec({1.0 - 1e-6, 1.0}), vec({1, 1}), 1e-9) == Order::none);
}

TEST_CASE("order rejects dimension mismatch") {
  REQUIRE(error_code_of([] {
            (void)order(vec({1, 2}), vec({1, 2, 3}), 0.0);
          }) == ErrorCode::invalid_config);
}

TEST_CASE("order strength chain on random vectors") {
  RngStream stream(314, 1);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 1 + static_cast<int>(stream.next_u64() % 6);
    Vec x(d), y(d);
    for (int i = 0; i < d; ++i) {
      x[i] = -1.0 + 2.0 * stream.uniform();
      y[i] = -1.0 + 2.0 * stream.uniform();
    }
    // Reflexivity at zero tolerance.
    REQUIRE(order(x, x, 0.0) == Order::geq);
    const Order o = order(x, y, 0.0);
    if (o == Order::gg) {
      REQUIRE(is_gt(x, y, 0.0));
    }
    if (o == Order::gt || o == Order::gg) {
      REQUIRE(order(x, y, 0.0) != Order::none);
    }
    // Antisymmetry: mutual geq at zero tolerance forces equality.
    if (o == Order::geq && order(y, x, 0.0) == Order::geq) {
      REQUIRE(testutil::max_abs_diff(x, y) == 0.0);
    }
  }
}

TEST_CASE("spectral radius closed forms") {
  REQUIRE(std::abs(spectral_radius(mat2(0.5, 0.5)) - 0.5) < 1e-9);
  REQUIRE(spectral_radius(Mat::Zero(3, 3)) == 0.0);
  // Roots of lambda^2 = 0.06.
  REQUIRE(std::abs(spectral_radius(mat2(0.2, 0.3)) - std::sqrt(0.06)) < 1e-6);
}

TEST_CASE("spectral radius matches sqrt(pq) on random two-company matrices") {
  RngStream stream(314, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = 0.95 * stream.uniform();
    const double q = 0.95 * stream.uniform();
    REQUIRE(std::abs(spectral_radius(mat2(p, q)) - std::sqrt(p * q)) < 1e-8);
  }
}

TEST_CASE("spectral radius handles skewed and embedded-cycle matrices") {
  // Strongly asymmetric coupling: tiny product, exact closed form.
  REQUIRE(std::abs(spectral_radius(mat2(0.89, 1e-4)) - std::sqrt(0.89e-4)) <
          1e-8);
  // A two-cycle embedded in a larger matrix oscillates under plain power
  // iteration; the estimate must still converge to sqrt(0.8 * 0.5).
  Mat P = Mat::Zero(3, 3);
  P(0, 1) = 0.8;
  P(1, 0) = 0.5;
  REQUIRE(std::abs(spectral_radius(P) - std::sqrt(0.4)) < 1e-8);
}

TEST_CASE("reflection construction on the symmetric two-company example") {
  const ReflectionMatrix rm = testutil::symmetric2();
  REQUIRE(rm.d == 2);
  REQUIRE(std::abs(rm.rho - 0.5) < 1e-9);
  REQUIRE(std::abs(rm.R(0, 0) - 1.0) < 1e-12);
  REQUIRE(std::abs(rm.R(0, 1) + 0.5) < 1e-12);
  REQUIRE(std::abs(rm.R(1, 0) + 0.5) < 1e-12);
  REQUIRE(std::abs(rm.R(1, 1) - 1.0) < 1e-12);
  REQUIRE(std::abs(rm.Rinv(0, 0) - 4.0 / 3.0) < 1e-10);
  REQUIRE(std::abs(rm.Rinv(0, 1) - 2.0 / 3.0) < 1e-10);
  REQUIRE(std::abs(rm.Rinv(1, 0) - 2.0 / 3.0) < 1e-10);
  REQUIRE(std::abs(rm.Rinv(1, 1) - 4.0 / 3.0) < 1e-10);
  REQUIRE(rm.h2_column.has_value());
  REQUIRE(*rm.h2_column == 1);
  REQUIRE(rm.substochastic);
}

TEST_CASE("decoupled companies produce the identity reflection") {
  const ReflectionMatrix rm = build_reflection(Mat::Zero(3, 3));
  REQUIRE((rm.R - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((rm.Rinv - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  // No column of the identity is strictly positive in every coordinate for
  // d >= 2, so no fully-coupling column exists.
  REQUIRE_FALSE(rm.h2_column.has_value());
  // The scalar case does have one.
  REQUIRE(testutil::scalar1().h2_column.has_value());
  REQUIRE(*testutil::scalar1().h2_column == 1);
}

TEST_CASE("reflection construction rejects inadmissible matrices") {
  Mat perm = mat2(1.0, 1.0);
  REQUIRE(error_code_of([&] { (void)build_reflection(perm); }) ==
          ErrorCode::spectral_radius_not_less_than_one);

  Mat diag = Mat::Zero(2, 2);
  diag(0, 0) = 0.1;
  REQUIRE(error_code_of([&] { (void)build_reflection(diag); }) ==
          ErrorCode::diagonal_nonzero);

  Mat neg = mat2(-0.1, 0.2);
  REQUIRE(error_code_of([&] { (void)build_reflection(neg); }) ==
          ErrorCode::off_diagonal_negative);

  Mat rect = Mat::Zero(2, 3);
  REQUIRE(error_code_of([&] { (void)build_reflection(rect); }) ==
          ErrorCode::invalid_config);

  Mat oversized = Mat::Zero(65, 65);
  REQUIRE(error_code_of([&] { (void)build_reflection(oversized); }) ==
          ErrorCode::invalid_config);

  Mat nan2 = Mat::Zero(2, 2);
  nan2(0, 1) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE(error_code_of([&] { (void)build_reflection(nan2); }) ==
          ErrorCode::non_finite_input);
}

TEST_CASE("row sums above one are flagged but not rejected while the radius "
          "stays below one") {
  const ReflectionMatrix rm = build_reflection(mat2(1.4, 0.1));
  REQUIRE_FALSE(rm.substochastic);
  REQUIRE(std::abs(rm.rho - std::sqrt(0.14)) < 1e-8);
}

TEST_CASE("random admissible matrices have monotone inverses") {
  RngStream stream(314, 3);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + static_cast<int>(stream.next_u64() % 6);
    Mat P = Mat::Zero(d, d);
    if (d > 1) {
      const double cap = 0.9 / static_cast<double>(d - 1);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          if (i != j) P(i, j) = cap * stream.uniform();
        }
      }
    }
    const ReflectionMatrix rm = build_reflection(P);
    REQUIRE(rm.rho < 1.0);
    REQUIRE(rm.Rinv.minCoeff() >= 0.0);
    for (int i = 0; i < d; ++i) {
      REQUIRE(rm.Rinv(i, i) >= 1.0 - 1e-12);
    }
    const double residual =
        (rm.R * rm.Rinv - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
    REQUIRE(residual <= 1e-10);
  }
}
