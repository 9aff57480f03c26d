#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "backcache/aes.hpp"
#include "backcache/cache_core.hpp"
#include "backcache/hierarchy.hpp"

namespace backcache {

/// Disjoint tag ranges: attacker and victim never share a line.
enum class AddressRegion : std::uint64_t {
  attacker = std::uint64_t{1} << 20,
  victim = std::uint64_t{1} << 21,
};

struct EvictionSet {
  std::vector<std::uint64_t> target_sets;
  std::vector<std::vector<PhysAddr>> set_lines;  // parallel to target_sets, W lines each
  std::vector<PhysAddr> backup_filler;

  /// Target-set lines in target order, then the filler.
  std::vector<PhysAddr> prime_order() const;
  std::size_t size() const;
};

/// W distinct-tag lines for every target set plus filler_bytes / line_size
/// filler lines spread round-robin over the non-target sets. Throws
/// DomainError when filler_bytes is not a multiple of the line size or every
/// set is a target.
EvictionSet build_eviction_set(const CacheGeometry& geo,
                               std::span<const std::uint64_t> target_sets,
                               std::uint64_t filler_bytes, std::uint64_t seed,
                               AddressRegion region = AddressRegion::attacker);

/// `count` distinct lines in `set_index`, drawn from `region` and avoiding `exclude`.
std::vector<PhysAddr> conflicting_lines(const CacheGeometry& geo, std::uint64_t set_index,
                                        std::size_t count, std::uint64_t seed,
                                        AddressRegion region,
                                        std::span<const PhysAddr> exclude = {});

struct AttackConfig {
  SimConfig sim;
  std::uint64_t target_set = 0;
  std::uint32_t victim_lines = 0;  // 0 selects the L1D associativity

  std::uint32_t effective_victim_lines() const noexcept {
    return victim_lines == 0 ? sim.l1d.associativity : victim_lines;
  }
};

struct Classification {
  double threshold = 0.0;
  std::vector<std::uint8_t> predicted;
  double accuracy = 0.0;  // against ground truth, when supplied
  bool degenerate = false;
};

/// Midpoint-of-means distinguisher: latency above the threshold predicts 1.
/// When the two training means lie within one cycle the result is flagged
/// degenerate and every test sample gets the majority training label (0 on a
/// tie). Throws DomainError for an empty training class.
Classification classify_threshold(std::span<const std::uint64_t> zeros,
                                  std::span<const std::uint64_t> ones,
                                  std::span<const std::uint64_t> test,
                                  std::span<const std::uint8_t> truth = {});

struct AttackResult {
  std::vector<std::uint64_t> probe_latency;  // summed over the eviction set, per trial
  std::vector<std::uint8_t> ground_truth;
  std::vector<std::uint8_t> predicted;
  double accuracy = 0.0;
  double threshold = 0.0;
  bool degenerate = false;
  std::vector<std::uint32_t> probe_misses;  // case-00 probe accesses, per trial
};

/// Single-set Prime+Probe. Per bit: prime the eviction set, context switch, the
/// victim touches its lines in the target set iff the bit is 1, context switch,
/// probe in prime order. The distinguisher is trained and scored on the full run.
AttackResult run_single_set_attack(const AttackConfig& config,
                                   std::span<const std::uint8_t> secret_bits,
                                   std::uint64_t filler_bytes);

/// `n` bits: the first half 0, the rest 1.
std::vector<std::uint8_t> split_secret(std::size_t n);

inline constexpr std::size_t kTTableLines = 64;

struct AesAttackOptions {
  bool full_rounds = false;
  std::uint64_t filler_bytes = 0;
  std::uint64_t table_base_set = 0;
};

struct AesAttackResult {
  std::vector<std::array<std::uint32_t, kTTableLines>> latency;  // [sample][set]
  std::vector<std::bitset<kTTableLines>> touched;                // victim ground truth
};

/// Prime+Probe on the 64 T-table sets with a T-table victim.
AesAttackResult run_aes_attack(const AttackConfig& config, std::size_t n_samples,
                               const aes::Block& key, std::uint64_t seed,
                               const AesAttackOptions& options = {});

struct HeatMapSummary {
  std::array<double, kTTableLines> set_mean{};
  double grand_mean = 0.0;
  double max_set_deviation = 0.0;  // max |set_mean - grand_mean|
  double touched_mean = 0.0;
  double untouched_mean = 0.0;

  double touched_gap() const noexcept { return touched_mean - untouched_mean; }
};

HeatMapSummary summarize_heat_map(const AesAttackResult& result);

struct OverflowProbeResult {
  std::size_t victim_lines = 0;
  std::size_t probe_misses = 0;
  std::uint64_t probe_latency = 0;
};

/// Primes every L1D way, then lets the victim touch `victim_lines` fresh lines
/// spread round-robin over the sets (each one displacing an attacker line into
/// the backup), then probes. Throws DomainError when the victim footprint
/// exceeds the L1D capacity.
OverflowProbeResult run_overflow_probe(const SimConfig& config, std::size_t victim_lines,
                                       std::uint64_t seed);

}  // namespace backcache
