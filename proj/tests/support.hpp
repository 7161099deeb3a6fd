#pragma once

// Shared helpers for the unit tests: a seeded generator for property tests
// and an assertion on the typed error a call raises.

#include <cmath>
#include <cstdint>
#include <random>

#include <gtest/gtest.h>

#include "jpaforge/error.hpp"
#include "jpaforge/quantities.hpp"

namespace jpatest {

class Gen {
 public:
  explicit Gen(std::uint64_t seed = 0x5eed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  /// Log-uniform on [lo, hi], lo > 0.
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  double normal(double sigma = 1.0) { return std::normal_distribution<double>(0.0, sigma)(rng_); }
  int sign() { return uniform(0.0, 1.0) < 0.5 ? -1 : 1; }
  /// Complex value with magnitude log-uniform in [lo, hi] and uniform phase.
  jpaforge::complex complex_mag(double lo, double hi) {
    return std::polar(log_uniform(lo, hi), uniform(-M_PI, M_PI));
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }
inline double rel_err(jpaforge::complex a, jpaforge::complex b) { return std::abs(a - b) / std::abs(b); }

}  // namespace jpatest

#define EXPECT_ERROR_KIND(stmt, expected_kind)                                             \
  do {                                                                                     \
    try {                                                                                  \
      (void)(stmt);                                                                        \
      ADD_FAILURE() << #stmt " did not throw";                                             \
    } catch (const ::jpaforge::Error& e_) {                                                \
      EXPECT_EQ(e_.kind(), expected_kind) << "message: " << e_.what();                     \
    }                                                                                      \
  } while (0)
