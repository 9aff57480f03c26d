#include "backcache/attack.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "backcache/aes.hpp"
#include "backcache/error.hpp"

namespace backcache {
namespace {

const CacheGeometry kL1{64, 64, 4, 3};

aes::Block block_from_hex(std::string_view hex) {
  aes::Block b{};
  for (std::size_t i = 0; i < 16; ++i) {
    b[i] = static_cast<std::uint8_t>(std::stoul(std::string(hex.substr(2 * i, 2)), nullptr, 16));
  }
  return b;
}

TEST(EvictionSet, OneTargetSetNoFiller) {
  const std::uint64_t targets[] = {5};
  const auto es = build_eviction_set(kL1, targets, 0, 1);
  ASSERT_EQ(es.set_lines.size(), 1u);
  EXPECT_EQ(es.size(), 4u);
  EXPECT_TRUE(es.backup_filler.empty());
  std::set<std::uint64_t> tags;
  for (const auto& a : es.set_lines[0]) {
    EXPECT_EQ(decompose_address(a, kL1).set_index, 5u);
    tags.insert(decompose_address(a, kL1).tag);
  }
  EXPECT_EQ(tags.size(), 4u);
}

TEST(EvictionSet, FillerSpreadsOverOtherSets) {
  const std::uint64_t targets[] = {0};
  const auto es = build_eviction_set(kL1, targets, 4096, 2);
  EXPECT_EQ(es.backup_filler.size(), 64u);
  EXPECT_EQ(es.size(), 68u);
  std::vector<int> per_set(64, 0);
  for (const auto& a : es.backup_filler) ++per_set[decompose_address(a, kL1).set_index];
  EXPECT_EQ(per_set[0], 0);
  const auto [lo, hi] = std::minmax_element(per_set.begin() + 1, per_set.end());
  EXPECT_LE(*hi - *lo, 1);
  const auto order = es.prime_order();
  ASSERT_EQ(order.size(), 68u);
  EXPECT_TRUE(std::equal(es.set_lines[0].begin(), es.set_lines[0].end(), order.begin()));
}

TEST(EvictionSet, SeedReproducibleAndDistinct) {
  const std::uint64_t targets[] = {3, 9};
  const auto a = build_eviction_set(kL1, targets, 8192, 42);
  const auto b = build_eviction_set(kL1, targets, 8192, 42);
  const auto c = build_eviction_set(kL1, targets, 8192, 43);
  EXPECT_EQ(a.prime_order(), b.prime_order());
  EXPECT_NE(a.prime_order(), c.prime_order());
  const auto order = a.prime_order();
  std::set<PhysAddr> uniq(order.begin(), order.end());
  EXPECT_EQ(uniq.size(), order.size());
}

TEST(EvictionSet, RejectsBadRequests) {
  const std::uint64_t one[] = {0};
  EXPECT_THROW(build_eviction_set(kL1, one, 100, 1), DomainError);
  const std::uint64_t out_of_range[] = {64};
  EXPECT_THROW(build_eviction_set(kL1, out_of_range, 0, 1), DomainError);
  const std::uint64_t dup[] = {1, 1};
  EXPECT_THROW(build_eviction_set(kL1, dup, 0, 1), DomainError);
  std::vector<std::uint64_t> all(64);
  for (std::uint64_t i = 0; i < 64; ++i) all[i] = i;
  EXPECT_NO_THROW(build_eviction_set(kL1, all, 0, 1));
  EXPECT_THROW(build_eviction_set(kL1, all, 64, 1), DomainError);
}

TEST(EvictionSet, AttackerAndVictimRegionsAreDisjoint) {
  const std::uint64_t targets[] = {7};
  const auto es = build_eviction_set(kL1, targets, 16384, 5);
  const auto attacker = es.prime_order();
  const auto victim = conflicting_lines(kL1, 7, 64, 5, AddressRegion::victim);
  for (const auto& v : victim) {
    EXPECT_EQ(decompose_address(v, kL1).set_index, 7u);
    EXPECT_EQ(std::find(attacker.begin(), attacker.end(), v), attacker.end());
  }
  const auto more = conflicting_lines(kL1, 7, 8, 6, AddressRegion::victim, victim);
  for (const auto& m : more) EXPECT_EQ(std::find(victim.begin(), victim.end(), m), victim.end());
}

TEST(Classifier, MidpointThreshold) {
  const std::uint64_t zeros[] = {300, 300};
  const std::uint64_t ones[] = {400, 400};
  const std::uint64_t test[] = {390, 310};
  const std::uint8_t truth[] = {1, 0};
  const auto c = classify_threshold(zeros, ones, test, truth);
  EXPECT_DOUBLE_EQ(c.threshold, 350.0);
  EXPECT_EQ(c.predicted, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_DOUBLE_EQ(c.accuracy, 1.0);
  EXPECT_FALSE(c.degenerate);
}

TEST(Classifier, InvertedOrientationStillSeparates) {
  const std::uint64_t zeros[] = {400};
  const std::uint64_t ones[] = {300};
  const std::uint64_t test[] = {310, 390};
  const auto c = classify_threshold(zeros, ones, test);
  EXPECT_EQ(c.predicted, (std::vector<std::uint8_t>{1, 0}));
}

TEST(Classifier, IdenticalMeansAreDegenerate) {
  const std::uint64_t zeros[] = {12, 12, 12};
  const std::uint64_t ones[] = {12, 12};
  const std::uint64_t test[] = {12, 12, 12, 12, 12};
  const std::uint8_t truth[] = {0, 0, 0, 1, 1};
  const auto c = classify_threshold(zeros, ones, test, truth);
  EXPECT_TRUE(c.degenerate);
  EXPECT_EQ(c.predicted, (std::vector<std::uint8_t>(5, 0)));
  EXPECT_DOUBLE_EQ(c.accuracy, 0.6);
  EXPECT_THROW(classify_threshold({}, ones, test), DomainError);
}

TEST(SingleSetAttack, BaselineRecoversEveryBit) {
  AttackConfig cfg{SimConfig::baseline()};
  const auto secret = split_secret(100);
  const auto r = run_single_set_attack(cfg, secret, 0);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  std::uint64_t max0 = 0, min1 = UINT64_MAX;
  for (std::size_t i = 0; i < secret.size(); ++i) {
    if (secret[i]) min1 = std::min(min1, r.probe_latency[i]);
    else max0 = std::max(max0, r.probe_latency[i]);
  }
  EXPECT_LT(max0, min1);
}

TEST(SingleSetAttack, BackCacheFlattensProbeLatency) {
  AttackConfig cfg{SimConfig{}};
  const auto r = run_single_set_attack(cfg, split_secret(100), 0);
  EXPECT_TRUE(std::all_of(r.probe_latency.begin(), r.probe_latency.end(),
                          [&](auto v) { return v == r.probe_latency.front(); }));
  EXPECT_LE(r.accuracy, 0.6);
}

TEST(SingleSetAttack, BackCacheWithFullFillerNearChance) {
  AttackConfig cfg{SimConfig{}};
  const auto r = run_single_set_attack(cfg, split_secret(100), 16 * 1024);
  EXPECT_LE(r.accuracy, 0.6);
  EXPECT_EQ(r.ground_truth.size(), 100u);
  EXPECT_EQ(r.predicted.size(), 100u);
}

TEST(Aes, Fips197Vector) {
  const auto key = block_from_hex("000102030405060708090a0b0c0d0e0f");
  const auto pt = block_from_hex("00112233445566778899aabbccddeeff");
  EXPECT_EQ(aes::encrypt(key, pt), block_from_hex("69c4e0d86a7b0430d8cdb78070b4c55a"));
}

TEST(Aes, TableLineModel) {
  const auto key = block_from_hex("2b7e151628aed2a6abf7158809cf4f3c");
  const auto pt = block_from_hex("3243f6a8885a308d313198a2e0370734");
  const auto first = aes::ttable_lines(key, pt, false);
  ASSERT_EQ(first.size(), 16u);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(first[i], (i % 4) * 16 + ((pt[i] ^ key[i]) >> 4));
  }
  const auto full = aes::ttable_lines(key, pt, true);
  ASSERT_EQ(full.size(), 160u);
  EXPECT_TRUE(std::equal(first.begin(), first.end(), full.begin()));
  for (auto l : full) EXPECT_LT(l, 64u);
}

TEST(AesAttack, ShapeAndEmptyRun) {
  AttackConfig cfg{SimConfig{}};
  const auto key = block_from_hex("2b7e151628aed2a6abf7158809cf4f3c");
  const auto r = run_aes_attack(cfg, 20, key, 1);
  ASSERT_EQ(r.latency.size(), 20u);
  ASSERT_EQ(r.touched.size(), 20u);
  for (const auto& t : r.touched) EXPECT_GE(t.count(), 1u);
  EXPECT_TRUE(run_aes_attack(cfg, 0, key, 1).latency.empty());
  AesAttackOptions bad;
  bad.filler_bytes = 4096;
  EXPECT_THROW(run_aes_attack(cfg, 1, key, 1, bad), DomainError);
}

TEST(AesAttack, BaselineLeaksTouchedSets) {
  AttackConfig cfg{SimConfig::baseline()};
  const auto key = block_from_hex("2b7e151628aed2a6abf7158809cf4f3c");
  const auto s = summarize_heat_map(run_aes_attack(cfg, 100, key, 2));
  EXPECT_GT(s.touched_gap(), 18.0);
}

TEST(OverflowProbe, BoundaryAtMinimumPlusOne) {
  SimConfig cfg = SimConfig::backcache_range(12, 12);
  cfg.backup_capacity_lines = 256;
  EXPECT_EQ(run_overflow_probe(cfg, 192, 1).probe_misses, 0u);
  EXPECT_GE(run_overflow_probe(cfg, 193, 1).probe_misses, 1u);
  EXPECT_EQ(run_overflow_probe(cfg, 1, 1).probe_misses, 0u);
  EXPECT_THROW(run_overflow_probe(cfg, 257, 1), DomainError);
}

}  // namespace
}  // namespace backcache
