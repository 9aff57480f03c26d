#pragma once

// Helpers shared by the unit and acceptance suites. Nothing here calls into
// the code under test except to build inputs.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "backcache/cache_core.hpp"
#include "backcache/trace.hpp"

namespace backcache::testing_support {

// Upper 0.999 quantiles of the chi-square distribution, by degrees of freedom.
inline constexpr double kChi2Crit999_df3 = 16.266;
inline constexpr double kChi2Crit999_df7 = 24.322;
inline constexpr double kChi2Crit999_df15 = 37.697;
inline constexpr double kChi2Crit999_df64 = 104.716;

inline double chi_square_uniform(const std::vector<std::uint64_t>& counts) {
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

/// 3-sigma binomial band for `n` draws with success probability `p`.
inline bool within_three_sigma(std::uint64_t count, std::uint64_t n, double p) {
  const double mean = static_cast<double>(n) * p;
  const double sigma = std::sqrt(static_cast<double>(n) * p * (1 - p));
  return std::abs(static_cast<double>(count) - mean) <= 3 * sigma;
}

/// Random load/store/ctxswitch/invalidate mix over a small address pool so
/// that every hit case occurs often.
inline std::vector<TraceRecord> random_trace(std::size_t n, std::uint64_t seed,
                                             std::size_t pool_lines = 1024,
                                             std::uint64_t line_size = 64) {
  std::mt19937_64 rng(seed);
  std::vector<TraceRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto roll = rng() % 1000;
    const auto addr = PhysAddr((rng() % pool_lines) * line_size + rng() % line_size);
    if (roll < 3) {
      out.push_back({TraceKind::ctxswitch, PhysAddr{}});
    } else if (roll < 5) {
      out.push_back({TraceKind::invalidate, addr});
    } else if (roll < 300) {
      out.push_back({TraceKind::store, addr});
    } else {
      out.push_back({TraceKind::load, addr});
    }
  }
  return out;
}

}  // namespace backcache::testing_support
