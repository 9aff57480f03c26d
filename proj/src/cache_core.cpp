#include "backcache/cache_core.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "backcache/error.hpp"

namespace backcache {

PhysAddr::PhysAddr(std::uint64_t value) : value_(value) {
  if (value >= kLimit) {
    throw DomainError("physical address exceeds 48 bits: " + std::to_string(value));
  }
}

CacheGeometry CacheGeometry::from_capacity(std::uint64_t capacity_bytes,
                                           std::uint32_t associativity,
                                           std::uint64_t line_size_bytes,
                                           std::uint32_t hit_latency_cycles) {
  if (associativity == 0 || line_size_bytes == 0 ||
      capacity_bytes % (line_size_bytes * associativity) != 0) {
    throw ConfigError("capacity " + std::to_string(capacity_bytes) +
                      " is not a multiple of line size x associativity");
  }
  CacheGeometry geo{line_size_bytes, capacity_bytes / (line_size_bytes * associativity),
                    associativity, hit_latency_cycles};
  geo.validate();
  return geo;
}

unsigned CacheGeometry::offset_bits() const noexcept {
  return static_cast<unsigned>(std::countr_zero(line_size_bytes));
}

unsigned CacheGeometry::index_bits() const noexcept {
  return static_cast<unsigned>(std::countr_zero(num_sets));
}

void CacheGeometry::validate() const {
  if (!std::has_single_bit(line_size_bytes)) {
    throw ConfigError("line_size_bytes must be a power of two, got " +
                      std::to_string(line_size_bytes));
  }
  if (!std::has_single_bit(num_sets)) {
    throw ConfigError("num_sets must be a power of two, got " + std::to_string(num_sets));
  }
  if (associativity == 0) throw ConfigError("associativity must be positive");
  if (hit_latency_cycles == 0) throw ConfigError("hit_latency_cycles must be positive");
  if (offset_bits() + index_bits() >= PhysAddr::kBits) {
    throw ConfigError("geometry leaves no tag bits in a 48-bit address");
  }
}

AddressParts decompose_address(PhysAddr addr, const CacheGeometry& geo) {
  const unsigned ob = geo.offset_bits();
  const unsigned ib = geo.index_bits();
  return {addr.value() >> (ob + ib), (addr.value() >> ob) & (geo.num_sets - 1),
          addr.value() & (geo.line_size_bytes - 1)};
}

PhysAddr compose_address(const AddressParts& parts, const CacheGeometry& geo) {
  const unsigned ob = geo.offset_bits();
  const unsigned ib = geo.index_bits();
  return PhysAddr((parts.tag << (ob + ib)) | (parts.set_index << ob) | parts.offset);
}

SetAssocCache::SetAssocCache(const CacheGeometry& geo) : geo_(geo) {
  geo_.validate();
  lines_.resize(geo_.num_sets * geo_.associativity);
  for (std::uint64_t s = 0; s < geo_.num_sets; ++s) {
    auto set = ways(s);
    for (std::uint32_t w = 0; w < geo_.associativity; ++w) set[w].lru_rank = w;
  }
}

std::span<L1Line> SetAssocCache::ways(std::uint64_t set_index) {
  return std::span<L1Line>(lines_).subspan(set_index * geo_.associativity, geo_.associativity);
}

std::span<const L1Line> SetAssocCache::set_lines(std::uint64_t set_index) const {
  return std::span<const L1Line>(lines_).subspan(set_index * geo_.associativity,
                                                 geo_.associativity);
}

L1Line* SetAssocCache::find(PhysAddr addr, std::uint64_t* set_out) {
  const auto parts = decompose_address(addr, geo_);
  if (set_out) *set_out = parts.set_index;
  for (auto& line : ways(parts.set_index)) {
    if (line.valid && line.tag == parts.tag) return &line;
  }
  return nullptr;
}

const L1Line* SetAssocCache::find(PhysAddr addr) const {
  const auto parts = decompose_address(addr, geo_);
  for (const auto& line : set_lines(parts.set_index)) {
    if (line.valid && line.tag == parts.tag) return &line;
  }
  return nullptr;
}

void SetAssocCache::promote(std::span<L1Line> set, L1Line& line) {
  const auto old = line.lru_rank;
  for (auto& other : set) {
    if (other.lru_rank < old) ++other.lru_rank;
  }
  line.lru_rank = 0;
}

void SetAssocCache::demote(std::span<L1Line> set, L1Line& line) {
  const auto old = line.lru_rank;
  for (auto& other : set) {
    if (other.lru_rank > old) --other.lru_rank;
  }
  line.lru_rank = geo_.associativity - 1;
}

bool SetAssocCache::lookup(PhysAddr addr) {
  std::uint64_t set_index = 0;
  L1Line* line = find(addr, &set_index);
  if (!line) return false;
  promote(ways(set_index), *line);
  return true;
}

bool SetAssocCache::contains(PhysAddr addr) const { return find(addr) != nullptr; }

std::optional<Eviction> SetAssocCache::insert(PhysAddr addr, bool dirty) {
  const auto parts = decompose_address(addr, geo_);
  auto set = ways(parts.set_index);
  L1Line* victim = nullptr;
  for (auto& line : set) {
    if (line.valid && line.tag == parts.tag) {
      throw InvariantError("insert of a line already resident in the set-associative cache");
    }
    if (line.lru_rank == geo_.associativity - 1) victim = &line;
  }
  std::optional<Eviction> evicted;
  if (victim->valid) {
    evicted = Eviction{compose_address({victim->tag, parts.set_index, 0}, geo_), victim->dirty};
  }
  victim->valid = true;
  victim->dirty = dirty;
  victim->tag = parts.tag;
  promote(set, *victim);
  return evicted;
}

bool SetAssocCache::invalidate(PhysAddr addr) {
  std::uint64_t set_index = 0;
  L1Line* line = find(addr, &set_index);
  if (!line) return false;
  line->valid = false;
  line->dirty = false;
  line->tag = 0;
  demote(ways(set_index), *line);
  return true;
}

bool SetAssocCache::write_touch(PhysAddr addr) {
  std::uint64_t set_index = 0;
  L1Line* line = find(addr, &set_index);
  if (!line) return false;
  line->dirty = true;
  promote(ways(set_index), *line);
  return true;
}

bool SetAssocCache::clean(PhysAddr addr) {
  L1Line* line = find(addr);
  if (!line) return false;
  line->dirty = false;
  return true;
}

std::optional<bool> SetAssocCache::dirty_bit(PhysAddr addr) const {
  const L1Line* line = find(addr);
  if (!line) return std::nullopt;
  return line->dirty;
}

std::size_t SetAssocCache::occupancy(std::uint64_t set_index) const {
  const auto set = set_lines(set_index);
  return static_cast<std::size_t>(
      std::count_if(set.begin(), set.end(), [](const L1Line& l) { return l.valid; }));
}

std::size_t SetAssocCache::valid_lines() const {
  return static_cast<std::size_t>(
      std::count_if(lines_.begin(), lines_.end(), [](const L1Line& l) { return l.valid; }));
}

}  // namespace backcache
