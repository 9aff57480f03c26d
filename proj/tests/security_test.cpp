#include "backcache/security.hpp"

#include <gtest/gtest.h>

#include "backcache/error.hpp"

namespace backcache {
namespace {

// Enumerates (B, B*) with B pinned and B* uniform, scoring each branch exactly.
double enumerate_fixed_prime(std::size_t lo, std::size_t hi, std::size_t prime, double p) {
  double total = 0;
  for (std::size_t probe = lo; probe <= hi; ++probe) {
    if (probe == prime) total += 1.0;
    else if (probe > prime) total += p;
    else total += 1.0 - p;
  }
  return total / static_cast<double>(hi - lo + 1);
}

// Exact success probability with B, B* and the secret all uniform.
double enumerate_average(std::size_t lo, std::size_t hi, double p) {
  double total = 0;
  for (std::size_t prime = lo; prime <= hi; ++prime) {
    for (std::size_t probe = lo; probe <= hi; ++probe) {
      for (int secret = 0; secret <= 1; ++secret) {
        const double guess_one = probe > prime ? p : 1.0 - p;
        if (probe == prime) total += 0.5;
        else total += 0.5 * (secret ? guess_one : 1.0 - guess_one);
      }
    }
  }
  const double n = static_cast<double>(hi - lo + 1);
  return total / (n * n);
}

TEST(PCorrect, Examples) {
  EXPECT_DOUBLE_EQ(p_correct({256, 256, 0.5, 256}), 1.0);
  EXPECT_NEAR(p_correct({192, 256, 0.5, 192}), 33.0 / 65.0, 1e-15);
  EXPECT_NEAR(p_correct({192, 256, 0.5, 192}), 0.507692, 5e-7);
  EXPECT_DOUBLE_EQ(p_correct({192, 256, 1.0, 192}), 1.0);
  EXPECT_NEAR(p_correct({192, 256, 1.0, 256}), 1.0 / 65.0, 1e-15);
  EXPECT_NEAR(p_correct({192, 256, 0.0, 256}), 1.0, 1e-15);
}

TEST(PCorrect, MatchesBranchEnumeration) {
  for (std::size_t lo : {64u, 128u, 192u}) {
    for (double p : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}) {
      for (std::size_t b = lo; b <= 256; b += 7) {
        ASSERT_NEAR(p_correct({lo, 256, p, b}), enumerate_fixed_prime(lo, 256, b, p), 1e-12);
      }
    }
  }
}

TEST(PCorrect, MonotoneInPrimeSize) {
  for (double p : {0.0, 0.25, 0.5}) {
    for (std::size_t b = 192; b < 256; ++b) {
      EXPECT_LE(p_correct({192, 256, p, b}), p_correct({192, 256, p, b + 1}) + 1e-15);
    }
  }
  for (double p : {0.75, 1.0}) {
    for (std::size_t b = 192; b < 256; ++b) {
      EXPECT_GE(p_correct({192, 256, p, b}), p_correct({192, 256, p, b + 1}) - 1e-15);
    }
  }
}

TEST(PAvg, ReferenceValues) {
  EXPECT_NEAR(p_avg(192, 256), 0.50769, 5e-5);
  EXPECT_NEAR(p_avg(128, 256), 0.50388, 5e-5);
  EXPECT_NEAR(p_avg(64, 256), 0.50259, 5e-5);
  EXPECT_DOUBLE_EQ(p_avg(10, 10), 1.0);
}

TEST(PAvg, AverageOfPCorrectCancelsBias) {
  for (std::size_t lo : {64u, 128u, 192u, 250u}) {
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      double sum = 0;
      for (std::size_t b = lo; b <= 256; ++b) sum += p_correct({lo, 256, p, b});
      const double avg = sum / static_cast<double>(256 - lo + 1);
      EXPECT_NEAR(avg, p_avg(lo, 256), 1e-12) << lo << " " << p;
      EXPECT_NEAR(enumerate_average(lo, 256, p), p_avg(lo, 256), 1e-12);
    }
  }
}

TEST(PAvg, DecreasesAsRangeWidens) {
  for (std::size_t lo = 1; lo < 256; ++lo) {
    EXPECT_LT(p_avg(lo, 256), p_avg(lo + 1, 256));
  }
}

TEST(WorstCaseOverflow, IsMinPlusOne) {
  static_assert(worst_case_overflow(192) == 193);
  EXPECT_EQ(worst_case_overflow(0), 1u);
  EXPECT_EQ(worst_case_overflow(64), 65u);
}

TEST(MonteCarlo, AgreesWithClosedForm) {
  for (auto [lo, hi] : {std::pair<std::size_t, std::size_t>{192, 256}, {128, 256}, {64, 256}}) {
    for (double p : {0.25, 0.5, 0.75}) {
      const auto mc = monte_carlo_single_set(lo, hi, p, 200000, 7);
      EXPECT_EQ(mc.trials, 200000u);
      EXPECT_NEAR(mc.estimate, p_avg(lo, hi), 3 * mc.std_error) << lo << " " << p;
    }
  }
}

TEST(MonteCarlo, FixedPrimeConvergesToPCorrect) {
  for (std::size_t b : {192u, 220u, 256u}) {
    for (double p : {0.2, 0.5, 0.9}) {
      const SingleSetModel m{192, 256, p, b};
      const auto mc = monte_carlo_fixed_prime(m, 200000, 3);
      const double sigma = std::max(mc.std_error, 1e-9);
      EXPECT_NEAR(mc.estimate, p_correct(m), 3 * sigma) << b << " " << p;
    }
  }
}

TEST(MonteCarlo, DeterministicPerSeed) {
  const auto a = monte_carlo_single_set(192, 256, 0.5, 10000, 99);
  const auto b = monte_carlo_single_set(192, 256, 0.5, 10000, 99);
  EXPECT_EQ(a.successes, b.successes);
}

TEST(SecurityModel, DomainErrors) {
  EXPECT_THROW(p_avg(10, 9), DomainError);
  EXPECT_THROW(p_correct({192, 256, 0.5, std::nullopt}), DomainError);
  EXPECT_THROW(p_correct({192, 256, 1.5, 200}), DomainError);
  EXPECT_THROW(p_correct({192, 256, 0.5, 100}), DomainError);
  EXPECT_THROW(monte_carlo_single_set(192, 256, 0.5, 0, 1), DomainError);
  EXPECT_THROW(monte_carlo_single_set(200, 100, 0.5, 10, 1), DomainError);
}

}  // namespace
}  // namespace backcache
