#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "backcache/cache_core.hpp"
#include "backcache/rng.hpp"

namespace backcache {

struct BackupLine {
  bool valid = false;
  bool dirty = false;
  bool used = false;
  bool enabled = false;
  std::uint64_t line_addr = 0;  // full address with the line offset cleared
};

/// Bounds on the number of enabled backup lines, in lines.
struct BackupSizeLimits {
  std::size_t min_lines = 0;
  std::size_t max_lines = 0;
};

/// Fully associative backup cache with used/enabled bits and random-used replacement.
///
/// Victims are chosen in tiers among enabled lines only: an invalid line first,
/// then a uniformly random line whose used bit is set, then a uniformly random
/// line with the used bit clear. Disabled lines never hold data.
class BackupCache {
 public:
  /// `capacity_lines` physical slots, of which `initial_size` are enabled.
  /// Throws ConfigError when limits are inconsistent with capacity or the
  /// initial size lies outside the limits.
  BackupCache(std::size_t capacity_lines, BackupSizeLimits limits, std::size_t initial_size,
              std::uint64_t seed);

  std::size_t capacity() const noexcept { return lines_.size(); }
  std::size_t current_size() const noexcept { return current_size_; }
  BackupSizeLimits limits() const noexcept { return limits_; }
  std::span<const BackupLine> lines() const noexcept { return lines_; }

  /// Hit iff an enabled valid line matches; sets its used bit.
  bool lookup(PhysAddr line_addr);
  bool contains(PhysAddr line_addr) const;
  const BackupLine* find(PhysAddr line_addr) const;

  /// Slot index of the next replacement victim. Consumes randomness only when
  /// no enabled invalid line exists. Throws InvariantError with zero enabled lines.
  std::size_t select_victim();

  /// Installs a line with used = 0. Throws InvariantError if already resident.
  std::optional<Eviction> insert(PhysAddr line_addr, bool dirty);

  /// Clears every used bit (BUCLR). Returns how many were set.
  std::size_t clear_used();

  /// Grows by enabling disabled slots or shrinks by disabling victims chosen
  /// with select_victim. Returns the addresses of dirty lines dropped by a shrink.
  /// Throws DomainError outside the size limits.
  std::vector<PhysAddr> resize(std::size_t new_size);

  bool invalidate(PhysAddr line_addr);

  /// Store hit: dirty = used = 1.
  bool write_touch(PhysAddr line_addr);

  /// Clears the dirty bit of a resident line.
  bool clean(PhysAddr line_addr);

  std::size_t valid_lines() const;

 private:
  BackupLine* locate(PhysAddr line_addr);
  void drop(std::size_t slot);

  std::vector<BackupLine> lines_;
  std::unordered_map<std::uint64_t, std::size_t> index_;  // line_addr -> slot, valid lines only
  BackupSizeLimits limits_;
  std::size_t current_size_ = 0;
  Rng rng_;
  std::vector<std::size_t> scratch_;
};

}  // namespace backcache
