#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace backcache {

/// Single-set attacker against a dynamically resized backup cache.
///
/// `enabled_at_prime` is the enabled size when the attacker primes. `guess_bias`
/// is the probability the attacker answers "victim accessed" on an ambiguous
/// all-hits observation; on the shrunk-backup branch (spurious misses) it
/// answers "victim accessed" with probability 1 - guess_bias.
struct SingleSetModel {
  std::size_t min_lines = 0;
  std::size_t max_lines = 0;
  double guess_bias = 0.5;
  std::optional<std::size_t> enabled_at_prime;

  /// Throws DomainError on an empty range, a bias outside [0, 1], or a prime
  /// size outside the range.
  void validate() const;
};

/// Probability of recovering the victim's access pattern for a known prime
/// size: ((max - B) p + 1 + (B - min)(1 - p)) / (max - min + 1).
/// Requires enabled_at_prime.
double p_correct(const SingleSetModel& model);

/// Average of p_correct over every prime size: 1/2 + 1 / (2 (max - min + 1)).
double p_avg(std::size_t min_lines, std::size_t max_lines);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;  // binomial standard error
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
};

/// Simulates the attacker's observation rules directly: prime size B and probe
/// size B* drawn independently and uniformly, secret bit uniform. B* > B shows
/// all hits, B* = B reveals the truth, B* < B shows misses. Throws DomainError
/// for zero trials.
MonteCarloEstimate monte_carlo_single_set(std::size_t min_lines, std::size_t max_lines,
                                          double guess_bias, std::uint64_t trials,
                                          std::uint64_t seed);

/// Same observation rules with B pinned to model.enabled_at_prime and the
/// victim always accessing the set; converges to p_correct(model).
MonteCarloEstimate monte_carlo_fixed_prime(const SingleSetModel& model, std::uint64_t trials,
                                           std::uint64_t seed);

/// Smallest victim footprint, in lines, that can overflow a backup cache of
/// `min_lines` enabled lines.
constexpr std::size_t worst_case_overflow(std::size_t min_lines) noexcept {
  return min_lines + 1;
}

}  // namespace backcache
