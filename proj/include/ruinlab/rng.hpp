#pragma once

// Counter-based random streams (Philox-4x32, 10 rounds).  A stream is
// identified by (master_seed, stream_index): the seed is the cipher key and
// the stream index occupies the high counter words, so any number of streams
// can be derived independently and any path can be regenerated in isolation.
// This is what makes Monte Carlo results independent of worker scheduling:
// path i always consumes stream (seed, purpose, i) regardless of which worker
// runs it.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ruinlab/common.hpp"

namespace ruinlab {

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> philox4x32_10(
    std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 =
        static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 =
        static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

}  // namespace detail

// Stream families; keeps every estimator on provably disjoint substreams.
enum class StreamPurpose : std::uint64_t {
  corpus = 1,
  direct_ruin = 2,
  storage_side = 3,
  p_fraction = 4,
  ladder_compound = 5,
  ladder_compound_p = 6,
  ladder_harvest = 7,
  first_passage_table = 8,
  per_horizon_primal = 9,
  per_horizon_dual = 10,
  stationary_qq = 11,
  free_walk = 12,
  model_diagnostics = 13,
  first_passage_p = 14,
  conditional_deficit = 15,
};

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : key_{static_cast<std::uint32_t>(master_seed),
             static_cast<std::uint32_t>(master_seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream_index)),
        stream_hi_(static_cast<std::uint32_t>(stream_index >> 32)) {}

  [[nodiscard]] std::uint64_t next_u64() {
    if (buffer_pos_ >= 2) refill();
    return buffer_[buffer_pos_++];
  }

  // Uniform on the open interval (0,1); never returns an endpoint, so logs
  // and inverse transforms are safe.
  [[nodiscard]] double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  [[nodiscard]] bool bernoulli(double p) { return uniform() < p; }

  [[nodiscard]] double exponential(double mean) {
    return -mean * std::log1p(-uniform());
  }

  [[nodiscard]] double normal() {
    if (have_cached_normal_) {
      have_cached_normal_ = false;
      return cached_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    have_cached_normal_ = true;
    return radius * std::cos(angle);
  }

  [[nodiscard]] double lognormal(double mu, double sigma) {
    return std::exp(mu + sigma * normal());
  }

  [[nodiscard]] double pareto(double alpha, double xm) {
    return xm * std::pow(1.0 - uniform(), -1.0 / alpha);
  }

  // Marsaglia-Tsang squeeze for shape >= 1, boosted for shape < 1.
  [[nodiscard]] double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double boost = std::pow(uniform(), 1.0 / shape);
      return gamma(shape + 1.0, rate) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return d * v / rate;
      }
    }
  }

  // Index into a cumulative probability vector (last entry 1).
  [[nodiscard]] int categorical(const std::vector<double>& cumulative) {
    const double u = uniform();
    for (std::size_t i = 0; i + 1 < cumulative.size(); ++i) {
      if (u < cumulative[i]) return static_cast<int>(i);
    }
    return static_cast<int>(cumulative.size()) - 1;
  }

 private:
  void refill() {
    const std::array<std::uint32_t, 4> block = detail::philox4x32_10(
        {static_cast<std::uint32_t>(counter_),
         static_cast<std::uint32_t>(counter_ >> 32), stream_lo_, stream_hi_},
        key_);
    ++counter_;
    buffer_[0] =
        (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
    buffer_[1] =
        (static_cast<std::uint64_t>(block[3]) << 32) | block[2];
    buffer_pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_ = 0;
  std::uint32_t stream_hi_ = 0;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffer_pos_ = 2;
  double cached_normal_ = 0.0;
  bool have_cached_normal_ = false;
};

// Streams are partitioned as (purpose in the top 16 bits, element index in
// the low 48); indexes must stay below 2^48.
[[nodiscard]] inline RngStream derive_stream(std::uint64_t master_seed,
                                             StreamPurpose purpose,
                                             std::uint64_t index) {
  if (index >= (1ull << 48)) {
    fail(ErrorCode::invalid_config, "stream index exceeds 2^48");
  }
  const std::uint64_t stream_index =
      (static_cast<std::uint64_t>(purpose) << 48) | index;
  return RngStream(master_seed, stream_index);
}

}  // namespace ruinlab
