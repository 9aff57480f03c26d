#include "backcache/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "backcache/error.hpp"
#include "backcache/rng.hpp"

namespace backcache {

namespace {

constexpr std::uint64_t kRegionSpan = std::uint64_t{1} << 20;

constexpr std::uint64_t kLayoutStream = 11;
constexpr std::uint64_t kVictimStream = 12;
constexpr std::uint64_t kPlaintextStream = 13;

void check_region_fits(const CacheGeometry& geo) {
  const unsigned tag_bits = PhysAddr::kBits - geo.offset_bits() - geo.index_bits();
  if (tag_bits < 23) throw DomainError("geometry leaves too few tag bits for attack regions");
}

std::uint64_t random_tag(Rng& rng, AddressRegion region,
                         std::unordered_set<std::uint64_t>& taken) {
  for (;;) {
    const std::uint64_t tag = static_cast<std::uint64_t>(region) + rng.below(kRegionSpan);
    if (taken.insert(tag).second) return tag;
  }
}

std::uint64_t sum_latency(Simulator& sim, std::span<const PhysAddr> lines,
                          std::uint32_t* misses = nullptr) {
  std::uint64_t total = 0;
  for (PhysAddr a : lines) {
    const auto out = sim.load(a);
    total += out.latency_cycles;
    if (misses && out.case_code == AccessCase::k00) ++*misses;
  }
  return total;
}

void touch(Simulator& sim, std::span<const PhysAddr> lines) {
  for (PhysAddr a : lines) sim.load(a);
}

double mean_of(std::span<const std::uint64_t> xs) {
  const double sum = std::accumulate(xs.begin(), xs.end(), 0.0,
                                     [](double acc, std::uint64_t x) {
                                       return acc + static_cast<double>(x);
                                     });
  return sum / static_cast<double>(xs.size());
}

}  // namespace

std::vector<PhysAddr> EvictionSet::prime_order() const {
  std::vector<PhysAddr> order;
  order.reserve(size());
  for (const auto& lines : set_lines) order.insert(order.end(), lines.begin(), lines.end());
  order.insert(order.end(), backup_filler.begin(), backup_filler.end());
  return order;
}

std::size_t EvictionSet::size() const {
  std::size_t n = backup_filler.size();
  for (const auto& lines : set_lines) n += lines.size();
  return n;
}

std::vector<PhysAddr> conflicting_lines(const CacheGeometry& geo, std::uint64_t set_index,
                                        std::size_t count, std::uint64_t seed,
                                        AddressRegion region,
                                        std::span<const PhysAddr> exclude) {
  check_region_fits(geo);
  if (set_index >= geo.num_sets) {
    throw DomainError("set index " + std::to_string(set_index) + " out of range");
  }
  std::unordered_set<std::uint64_t> taken;
  for (PhysAddr a : exclude) {
    const auto parts = decompose_address(a, geo);
    if (parts.set_index == set_index) taken.insert(parts.tag);
  }
  Rng rng(seed);
  std::vector<PhysAddr> lines;
  lines.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    lines.push_back(compose_address({random_tag(rng, region, taken), set_index, 0}, geo));
  }
  return lines;
}

EvictionSet build_eviction_set(const CacheGeometry& geo,
                               std::span<const std::uint64_t> target_sets,
                               std::uint64_t filler_bytes, std::uint64_t seed,
                               AddressRegion region) {
  geo.validate();
  check_region_fits(geo);
  if (filler_bytes % geo.line_size_bytes != 0) {
    throw DomainError("filler size must be a multiple of the line size");
  }
  std::vector<bool> is_target(geo.num_sets, false);
  for (auto s : target_sets) {
    if (s >= geo.num_sets) throw DomainError("target set " + std::to_string(s) + " out of range");
    if (is_target[s]) throw DomainError("duplicate target set " + std::to_string(s));
    is_target[s] = true;
  }

  EvictionSet ev;
  ev.target_sets.assign(target_sets.begin(), target_sets.end());
  // One tag pool per set keeps every address distinct at line granularity.
  std::vector<std::unordered_set<std::uint64_t>> taken(geo.num_sets);
  Rng rng(derive_seed(seed, kLayoutStream));
  for (auto s : ev.target_sets) {
    auto& lines = ev.set_lines.emplace_back();
    for (std::uint32_t w = 0; w < geo.associativity; ++w) {
      lines.push_back(compose_address({random_tag(rng, region, taken[s]), s, 0}, geo));
    }
  }

  const std::uint64_t filler_lines = filler_bytes / geo.line_size_bytes;
  if (filler_lines == 0) return ev;
  std::vector<std::uint64_t> others;
  for (std::uint64_t s = 0; s < geo.num_sets; ++s) {
    if (!is_target[s]) others.push_back(s);
  }
  if (others.empty()) throw DomainError("filler cannot avoid the target sets");
  ev.backup_filler.reserve(filler_lines);
  for (std::uint64_t i = 0; i < filler_lines; ++i) {
    const auto s = others[i % others.size()];
    ev.backup_filler.push_back(compose_address({random_tag(rng, region, taken[s]), s, 0}, geo));
  }
  return ev;
}

Classification classify_threshold(std::span<const std::uint64_t> zeros,
                                  std::span<const std::uint64_t> ones,
                                  std::span<const std::uint64_t> test,
                                  std::span<const std::uint8_t> truth) {
  if (zeros.empty() || ones.empty()) throw DomainError("both training classes need samples");
  if (!truth.empty() && truth.size() != test.size()) {
    throw DomainError("ground truth and test samples differ in length");
  }
  const double m0 = mean_of(zeros);
  const double m1 = mean_of(ones);
  Classification c;
  c.threshold = 0.5 * (m0 + m1);
  c.degenerate = std::abs(m1 - m0) < 1.0;
  c.predicted.reserve(test.size());
  const std::uint8_t majority = ones.size() > zeros.size() ? 1 : 0;
  for (auto x : test) {
    const double v = static_cast<double>(x);
    std::uint8_t bit;
    if (c.degenerate) {
      bit = majority;
    } else if (m1 > m0) {
      bit = v > c.threshold ? 1 : 0;
    } else {
      bit = v < c.threshold ? 1 : 0;
    }
    c.predicted.push_back(bit);
  }
  if (!truth.empty()) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) correct += c.predicted[i] == truth[i];
    c.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  }
  return c;
}

std::vector<std::uint8_t> split_secret(std::size_t n) {
  std::vector<std::uint8_t> bits(n, 0);
  std::fill(bits.begin() + static_cast<std::ptrdiff_t>(n / 2), bits.end(), 1);
  return bits;
}

AttackResult run_single_set_attack(const AttackConfig& config,
                                   std::span<const std::uint8_t> secret_bits,
                                   std::uint64_t filler_bytes) {
  if (secret_bits.empty()) throw DomainError("secret must hold at least one bit");
  Simulator sim(config.sim);
  const auto& geo = config.sim.l1d;
  const std::uint64_t target[] = {config.target_set};
  const EvictionSet ev = build_eviction_set(geo, target, filler_bytes, config.sim.seed);
  const auto prime = ev.prime_order();
  const auto victim =
      conflicting_lines(geo, config.target_set, config.effective_victim_lines(),
                        derive_seed(config.sim.seed, kVictimStream), AddressRegion::victim);

  AttackResult result;
  result.ground_truth.assign(secret_bits.begin(), secret_bits.end());
  for (std::uint8_t bit : secret_bits) {
    touch(sim, prime);
    sim.context_switch();
    if (bit) touch(sim, victim);
    sim.context_switch();
    std::uint32_t misses = 0;
    result.probe_latency.push_back(sum_latency(sim, prime, &misses));
    result.probe_misses.push_back(misses);
  }

  std::vector<std::uint64_t> zeros;
  std::vector<std::uint64_t> ones;
  for (std::size_t i = 0; i < secret_bits.size(); ++i) {
    (secret_bits[i] ? ones : zeros).push_back(result.probe_latency[i]);
  }
  if (zeros.empty() || ones.empty()) {
    // Nothing to train on: report the trivial constant guess.
    const std::uint8_t guess = ones.empty() ? 0 : 1;
    result.predicted.assign(secret_bits.size(), guess);
    result.accuracy = 1.0;
    result.degenerate = true;
    return result;
  }
  auto c = classify_threshold(zeros, ones, result.probe_latency, result.ground_truth);
  result.predicted = std::move(c.predicted);
  result.accuracy = c.accuracy;
  result.threshold = c.threshold;
  result.degenerate = c.degenerate;
  return result;
}

AesAttackResult run_aes_attack(const AttackConfig& config, std::size_t n_samples,
                               const aes::Block& key, std::uint64_t seed,
                               const AesAttackOptions& options) {
  const auto& geo = config.sim.l1d;
  if (geo.num_sets < kTTableLines) {
    throw DomainError("T-table model needs an L1D with at least 64 sets");
  }
  Simulator sim(config.sim);
  std::vector<std::uint64_t> targets;
  for (std::uint64_t j = 0; j < kTTableLines; ++j) {
    targets.push_back((options.table_base_set + j) % geo.num_sets);
  }
  const EvictionSet ev = build_eviction_set(geo, targets, options.filler_bytes, seed);
  const auto prime = ev.prime_order();

  // The 4KB table is contiguous: line j falls in target set j.
  const auto base = compose_address(
      {static_cast<std::uint64_t>(AddressRegion::victim), options.table_base_set, 0}, geo);
  std::array<PhysAddr, kTTableLines> table{};
  for (std::size_t j = 0; j < kTTableLines; ++j) {
    table[j] = PhysAddr(base.value() + j * geo.line_size_bytes);
  }

  Rng plaintexts(derive_seed(seed, kPlaintextStream));
  AesAttackResult result;
  result.latency.reserve(n_samples);
  result.touched.reserve(n_samples);
  for (std::size_t n = 0; n < n_samples; ++n) {
    aes::Block pt{};
    for (auto& b : pt) b = static_cast<std::uint8_t>(plaintexts.next());

    touch(sim, prime);
    sim.context_switch();
    std::bitset<kTTableLines> touched;
    for (auto line : aes::ttable_lines(key, pt, options.full_rounds)) {
      sim.load(table[line]);
      touched.set(line);
    }
    sim.context_switch();

    auto& row = result.latency.emplace_back();
    for (std::size_t j = 0; j < kTTableLines; ++j) {
      row[j] = static_cast<std::uint32_t>(sum_latency(sim, ev.set_lines[j]));
    }
    result.touched.push_back(touched);
  }
  return result;
}

HeatMapSummary summarize_heat_map(const AesAttackResult& result) {
  HeatMapSummary s;
  const std::size_t n = result.latency.size();
  if (n == 0) return s;
  double touched_sum = 0.0;
  double untouched_sum = 0.0;
  std::size_t touched_n = 0;
  std::size_t untouched_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kTTableLines; ++j) {
      const double v = result.latency[i][j];
      s.set_mean[j] += v;
      if (result.touched[i][j]) {
        touched_sum += v;
        ++touched_n;
      } else {
        untouched_sum += v;
        ++untouched_n;
      }
    }
  }
  for (auto& m : s.set_mean) {
    m /= static_cast<double>(n);
    s.grand_mean += m;
  }
  s.grand_mean /= static_cast<double>(kTTableLines);
  for (auto m : s.set_mean) s.max_set_deviation = std::max(s.max_set_deviation, std::abs(m - s.grand_mean));
  s.touched_mean = touched_n ? touched_sum / static_cast<double>(touched_n) : 0.0;
  s.untouched_mean = untouched_n ? untouched_sum / static_cast<double>(untouched_n) : 0.0;
  return s;
}

OverflowProbeResult run_overflow_probe(const SimConfig& config, std::size_t victim_lines,
                                       std::uint64_t seed) {
  const auto& geo = config.l1d;
  if (victim_lines > geo.capacity_lines()) {
    throw DomainError("victim footprint exceeds the L1D capacity");
  }
  Simulator sim(config);
  std::vector<std::uint64_t> all_sets(geo.num_sets);
  std::iota(all_sets.begin(), all_sets.end(), std::uint64_t{0});
  const EvictionSet ev = build_eviction_set(geo, all_sets, 0, seed);
  const auto prime = ev.prime_order();

  // Victim line i goes to set i mod S, so no set receives more than W of them.
  std::vector<std::vector<PhysAddr>> per_set(geo.num_sets);
  for (std::uint64_t s = 0; s < geo.num_sets; ++s) {
    const std::size_t in_set = victim_lines / geo.num_sets + (s < victim_lines % geo.num_sets);
    per_set[s] = conflicting_lines(geo, s, in_set, derive_seed(seed, kVictimStream + s),
                                   AddressRegion::victim);
  }
  std::vector<PhysAddr> victim;
  victim.reserve(victim_lines);
  for (std::size_t i = 0; i < victim_lines; ++i) {
    victim.push_back(per_set[i % geo.num_sets][i / geo.num_sets]);
  }

  touch(sim, prime);
  sim.context_switch();
  touch(sim, victim);
  sim.context_switch();
  std::uint32_t misses = 0;
  OverflowProbeResult r;
  r.victim_lines = victim_lines;
  r.probe_latency = sum_latency(sim, prime, &misses);
  r.probe_misses = misses;
  return r;
}

}  // namespace backcache
