#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace backcache {

/// 48-bit physical address (PIPT indexing).
class PhysAddr {
 public:
  static constexpr unsigned kBits = 48;
  static constexpr std::uint64_t kLimit = std::uint64_t{1} << kBits;

  constexpr PhysAddr() = default;
  /// Throws DomainError when value >= 2^48.
  explicit PhysAddr(std::uint64_t value);

  constexpr std::uint64_t value() const noexcept { return value_; }

  friend constexpr bool operator==(PhysAddr, PhysAddr) = default;
  friend constexpr auto operator<=>(PhysAddr, PhysAddr) = default;

 private:
  std::uint64_t value_ = 0;
};

struct CacheGeometry {
  std::uint64_t line_size_bytes = 64;
  std::uint64_t num_sets = 64;
  std::uint32_t associativity = 4;
  std::uint32_t hit_latency_cycles = 3;

  /// Geometry from a total capacity; throws ConfigError when it does not divide evenly.
  static CacheGeometry from_capacity(std::uint64_t capacity_bytes, std::uint32_t associativity,
                                     std::uint64_t line_size_bytes, std::uint32_t hit_latency_cycles);

  std::uint64_t capacity_bytes() const noexcept {
    return line_size_bytes * num_sets * associativity;
  }
  std::uint64_t capacity_lines() const noexcept { return num_sets * associativity; }
  unsigned offset_bits() const noexcept;
  unsigned index_bits() const noexcept;

  /// Throws ConfigError unless line size and set count are powers of two and
  /// associativity and latency are positive.
  void validate() const;

  friend bool operator==(const CacheGeometry&, const CacheGeometry&) = default;
};

struct AddressParts {
  std::uint64_t tag = 0;
  std::uint64_t set_index = 0;
  std::uint64_t offset = 0;

  friend bool operator==(const AddressParts&, const AddressParts&) = default;
};

AddressParts decompose_address(PhysAddr addr, const CacheGeometry& geo);
PhysAddr compose_address(const AddressParts& parts, const CacheGeometry& geo);

/// Address with the line offset cleared.
inline PhysAddr line_align(PhysAddr addr, const CacheGeometry& geo) {
  return PhysAddr(addr.value() & ~(geo.line_size_bytes - 1));
}

struct Eviction {
  PhysAddr line_addr;  // line-aligned
  bool dirty = false;

  friend bool operator==(const Eviction&, const Eviction&) = default;
};

struct L1Line {
  bool valid = false;
  bool dirty = false;
  std::uint64_t tag = 0;
  // 0 = most recently used. Invalid ways always rank older than valid ones.
  std::uint32_t lru_rank = 0;
};

/// Set-associative tag array with true LRU replacement. Stores no data.
class SetAssocCache {
 public:
  explicit SetAssocCache(const CacheGeometry& geo);

  const CacheGeometry& geometry() const noexcept { return geo_; }

  /// Lookup that promotes the matching line to MRU on a hit.
  bool lookup(PhysAddr addr);
  /// Side-effect-free residency query.
  bool contains(PhysAddr addr) const;

  /// Installs addr as MRU. Throws InvariantError when addr is already resident.
  std::optional<Eviction> insert(PhysAddr addr, bool dirty);

  /// Drops the line without write-back. Returns whether it was present.
  bool invalidate(PhysAddr addr);

  /// Store hit: marks the line dirty and promotes it. No change on a miss.
  bool write_touch(PhysAddr addr);

  /// Clears the dirty bit of a resident line. Returns whether it was present.
  bool clean(PhysAddr addr);

  std::optional<bool> dirty_bit(PhysAddr addr) const;

  std::span<const L1Line> set_lines(std::uint64_t set_index) const;
  std::size_t occupancy(std::uint64_t set_index) const;
  std::size_t valid_lines() const;

 private:
  std::span<L1Line> ways(std::uint64_t set_index);
  L1Line* find(PhysAddr addr, std::uint64_t* set_out = nullptr);
  const L1Line* find(PhysAddr addr) const;
  void promote(std::span<L1Line> set, L1Line& line);
  void demote(std::span<L1Line> set, L1Line& line);

  CacheGeometry geo_;
  std::vector<L1Line> lines_;
};

}  // namespace backcache
