#include "backcache/security.hpp"

#include <cmath>
#include <string>

#include "backcache/error.hpp"
#include "backcache/rng.hpp"

namespace backcache {

void SingleSetModel::validate() const {
  if (min_lines > max_lines) {
    throw DomainError("min_lines " + std::to_string(min_lines) + " exceeds max_lines " +
                      std::to_string(max_lines));
  }
  if (!(guess_bias >= 0.0 && guess_bias <= 1.0)) {
    throw DomainError("guess bias must lie in [0, 1]");
  }
  if (enabled_at_prime && (*enabled_at_prime < min_lines || *enabled_at_prime > max_lines)) {
    throw DomainError("prime size outside [min_lines, max_lines]");
  }
}

double p_correct(const SingleSetModel& model) {
  model.validate();
  if (!model.enabled_at_prime) throw DomainError("p_correct needs the prime size");
  const double b = static_cast<double>(*model.enabled_at_prime);
  const double lo = static_cast<double>(model.min_lines);
  const double hi = static_cast<double>(model.max_lines);
  const double p = model.guess_bias;
  return ((hi - b) * p + 1.0 + (b - lo) * (1.0 - p)) / (hi - lo + 1.0);
}

double p_avg(std::size_t min_lines, std::size_t max_lines) {
  if (min_lines > max_lines) throw DomainError("min_lines exceeds max_lines");
  return 0.5 + 0.5 / static_cast<double>(max_lines - min_lines + 1);
}

namespace {

// One attack round; returns whether the attacker's guess matches the secret.
bool attack_round(Rng& rng, std::size_t prime, std::size_t probe, bool victim_accessed,
                  double bias) {
  bool guess;
  if (probe == prime) {
    guess = victim_accessed;
  } else if (probe > prime) {
    guess = rng.bernoulli(bias);
  } else {
    guess = rng.bernoulli(1.0 - bias);
  }
  return guess == victim_accessed;
}

MonteCarloEstimate finish(std::uint64_t successes, std::uint64_t trials) {
  const double est = static_cast<double>(successes) / static_cast<double>(trials);
  return {est, std::sqrt(est * (1.0 - est) / static_cast<double>(trials)), trials, successes};
}

}  // namespace

MonteCarloEstimate monte_carlo_single_set(std::size_t min_lines, std::size_t max_lines,
                                          double guess_bias, std::uint64_t trials,
                                          std::uint64_t seed) {
  SingleSetModel{min_lines, max_lines, guess_bias, std::nullopt}.validate();
  if (trials == 0) throw DomainError("Monte Carlo needs at least one trial");
  Rng rng(seed);
  std::uint64_t successes = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::size_t prime = rng.between(min_lines, max_lines);
    const std::size_t probe = rng.between(min_lines, max_lines);
    const bool secret = (rng.next() >> 63) != 0;
    successes += attack_round(rng, prime, probe, secret, guess_bias) ? 1 : 0;
  }
  return finish(successes, trials);
}

MonteCarloEstimate monte_carlo_fixed_prime(const SingleSetModel& model, std::uint64_t trials,
                                           std::uint64_t seed) {
  model.validate();
  if (!model.enabled_at_prime) throw DomainError("fixed-prime Monte Carlo needs the prime size");
  if (trials == 0) throw DomainError("Monte Carlo needs at least one trial");
  Rng rng(seed);
  std::uint64_t successes = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::size_t probe = rng.between(model.min_lines, model.max_lines);
    successes += attack_round(rng, *model.enabled_at_prime, probe, true, model.guess_bias);
  }
  return finish(successes, trials);
}

}  // namespace backcache
