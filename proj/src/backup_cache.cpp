#include "backcache/backup_cache.hpp"

#include <algorithm>
#include <string>

#include "backcache/error.hpp"

namespace backcache {

BackupCache::BackupCache(std::size_t capacity_lines, BackupSizeLimits limits,
                         std::size_t initial_size, std::uint64_t seed)
    : lines_(capacity_lines), limits_(limits), rng_(seed) {
  if (limits.min_lines > limits.max_lines) {
    throw ConfigError("backup min_lines " + std::to_string(limits.min_lines) +
                      " exceeds max_lines " + std::to_string(limits.max_lines));
  }
  if (limits.max_lines > capacity_lines) {
    throw ConfigError("backup max_lines " + std::to_string(limits.max_lines) +
                      " exceeds physical capacity " + std::to_string(capacity_lines));
  }
  if (limits.min_lines == 0) throw ConfigError("backup min_lines must be positive");
  if (initial_size < limits.min_lines || initial_size > limits.max_lines) {
    throw ConfigError("initial backup size outside [min_lines, max_lines]");
  }
  for (std::size_t i = 0; i < initial_size; ++i) lines_[i].enabled = true;
  current_size_ = initial_size;
  index_.reserve(capacity_lines * 2);
  scratch_.reserve(capacity_lines);
}

BackupLine* BackupCache::locate(PhysAddr line_addr) {
  auto it = index_.find(line_addr.value());
  return it == index_.end() ? nullptr : &lines_[it->second];
}

const BackupLine* BackupCache::find(PhysAddr line_addr) const {
  auto it = index_.find(line_addr.value());
  return it == index_.end() ? nullptr : &lines_[it->second];
}

bool BackupCache::contains(PhysAddr line_addr) const { return find(line_addr) != nullptr; }

bool BackupCache::lookup(PhysAddr line_addr) {
  BackupLine* line = locate(line_addr);
  if (!line) return false;
  line->used = true;
  return true;
}

std::size_t BackupCache::select_victim() {
  scratch_.clear();
  bool any_enabled = false;
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    const auto& line = lines_[i];
    if (!line.enabled) continue;
    any_enabled = true;
    if (!line.valid) return i;
    if (line.used) scratch_.push_back(i);
  }
  if (!any_enabled) throw InvariantError("backup cache has no enabled lines");
  if (scratch_.empty()) {
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      if (lines_[i].enabled) scratch_.push_back(i);
    }
  }
  return scratch_[rng_.below(scratch_.size())];
}

void BackupCache::drop(std::size_t slot) {
  auto& line = lines_[slot];
  if (line.valid) index_.erase(line.line_addr);
  line.valid = false;
  line.dirty = false;
  line.used = false;
  line.line_addr = 0;
}

std::optional<Eviction> BackupCache::insert(PhysAddr line_addr, bool dirty) {
  if (index_.contains(line_addr.value())) {
    throw InvariantError("insert of a line already resident in the backup cache");
  }
  const std::size_t slot = select_victim();
  auto& line = lines_[slot];
  std::optional<Eviction> evicted;
  if (line.valid) evicted = Eviction{PhysAddr(line.line_addr), line.dirty};
  drop(slot);
  line.valid = true;
  line.dirty = dirty;
  line.used = false;
  line.line_addr = line_addr.value();
  index_.emplace(line.line_addr, slot);
  return evicted;
}

std::size_t BackupCache::clear_used() {
  std::size_t cleared = 0;
  for (auto& line : lines_) {
    cleared += line.used ? 1 : 0;
    line.used = false;
  }
  return cleared;
}

std::vector<PhysAddr> BackupCache::resize(std::size_t new_size) {
  if (new_size < limits_.min_lines || new_size > limits_.max_lines) {
    throw DomainError("backup resize to " + std::to_string(new_size) + " outside [" +
                      std::to_string(limits_.min_lines) + ", " +
                      std::to_string(limits_.max_lines) + "]");
  }
  std::vector<PhysAddr> writebacks;
  if (new_size > current_size_) {
    std::size_t needed = new_size - current_size_;
    for (auto& line : lines_) {
      if (needed == 0) break;
      if (!line.enabled) {
        line.enabled = true;
        --needed;
      }
    }
  } else {
    for (std::size_t n = current_size_ - new_size; n > 0; --n) {
      const std::size_t slot = select_victim();
      if (lines_[slot].valid && lines_[slot].dirty) {
        writebacks.emplace_back(lines_[slot].line_addr);
      }
      drop(slot);
      lines_[slot].enabled = false;
    }
  }
  current_size_ = new_size;
  return writebacks;
}

bool BackupCache::invalidate(PhysAddr line_addr) {
  auto it = index_.find(line_addr.value());
  if (it == index_.end()) return false;
  drop(it->second);
  return true;
}

bool BackupCache::write_touch(PhysAddr line_addr) {
  BackupLine* line = locate(line_addr);
  if (!line) return false;
  line->dirty = true;
  line->used = true;
  return true;
}

bool BackupCache::clean(PhysAddr line_addr) {
  BackupLine* line = locate(line_addr);
  if (!line) return false;
  line->dirty = false;
  return true;
}

std::size_t BackupCache::valid_lines() const { return index_.size(); }

}  // namespace backcache
