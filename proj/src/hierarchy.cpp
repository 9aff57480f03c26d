#include "backcache/hierarchy.hpp"

#include <cstdio>

#include "backcache/digest.hpp"
#include "backcache/error.hpp"

namespace backcache {

namespace {

constexpr std::uint64_t kSizeStream = 1;
constexpr std::uint64_t kReplacementStream = 2;

}  // namespace

std::string_view to_string(AccessCase c) noexcept {
  switch (c) {
    case AccessCase::k00: return "00";
    case AccessCase::k01: return "01";
    case AccessCase::k10: return "10";
    case AccessCase::k11: return "11";
  }
  return "??";
}

std::string_view to_string(Mode m) noexcept {
  return m == Mode::baseline ? "baseline" : "backcache";
}

std::string_view to_string(ResizeMode m) noexcept {
  return m == ResizeMode::dynamic ? "dynamic" : "fixed";
}

SimConfig SimConfig::backcache_range(std::uint64_t min_kb, std::uint64_t max_kb) {
  SimConfig cfg;
  cfg.backup_min_lines = min_kb * 1024 / cfg.l1d.line_size_bytes;
  cfg.backup_max_lines = max_kb * 1024 / cfg.l1d.line_size_bytes;
  cfg.backup_capacity_lines = cfg.backup_max_lines;
  return cfg;
}

SimConfig SimConfig::baseline() {
  SimConfig cfg;
  cfg.mode = Mode::baseline;
  cfg.l1d = CacheGeometry{64, 128, 4, 2};
  return cfg;
}

void SimConfig::validate() const {
  l1d.validate();
  l2.validate();
  if (l2.line_size_bytes != l1d.line_size_bytes) {
    throw ConfigError("l1d and l2 must share a line size");
  }
  if (l2.hit_latency_cycles <= l1d.hit_latency_cycles) {
    throw ConfigError("l2 hit latency must exceed the l1d hit latency");
  }
  if (mode == Mode::baseline) return;
  if (backup_min_lines == 0) throw ConfigError("backup min_lines must be positive");
  if (backup_min_lines > backup_max_lines) {
    throw ConfigError("backup min_lines exceeds max_lines");
  }
  if (backup_max_lines > backup_capacity_lines) {
    throw ConfigError("backup max_lines exceeds capacity_lines");
  }
  if (resize_mode == ResizeMode::fixed && fixed_threshold == 0) {
    throw ConfigError("fixed resize mode needs a positive threshold");
  }
}

Simulator::Simulator(const SimConfig& config)
    : config_(config),
      l1d_((config.validate(), config.l1d)),
      l2_(config.l2),
      size_rng_(derive_seed(config.seed, kSizeStream)) {
  if (config_.mode == Mode::baseline) return;
  regs_.bcs_min = config_.backup_min_lines;
  regs_.bcs_max = config_.backup_max_lines;
  const std::size_t initial = size_rng_.between(regs_.bcs_min, regs_.bcs_max);
  backup_.emplace(config_.backup_capacity_lines,
                  BackupSizeLimits{regs_.bcs_min, regs_.bcs_max}, initial,
                  derive_seed(config_.seed, kReplacementStream));
  if (config_.resize_mode == ResizeMode::fixed) {
    regs_.fixed_threshold = config_.fixed_threshold;
    regs_.mem_access_count = config_.fixed_threshold;
  } else {
    regs_.mem_access_count = initial;
  }
}

void Simulator::writeback_to_l2(PhysAddr line_addr, AccessOutcome& out) {
  out.writebacks.push_back(line_addr);
  if (l2_.write_touch(line_addr)) return;
  if (auto ev = l2_.insert(line_addr, true); ev && ev->dirty) ++memory_writebacks_;
}

std::uint32_t Simulator::miss_path(PhysAddr addr, AccessOutcome& out) {
  const std::uint32_t l2_latency = config_.l2.hit_latency_cycles;
  if (l2_.lookup(addr)) {
    out.l2_hit = true;
    return l2_latency;
  }
  if (auto ev = l2_.insert(line_align(addr, config_.l2), false); ev && ev->dirty) {
    ++memory_writebacks_;
  }
  return l2_latency + config_.memory_penalty_cycles;
}

void Simulator::fill_backup_from_l1(const Eviction& ev, AccessOutcome& out) {
  out.l1_eviction = ev.line_addr;
  // The write-back goes out whether or not the line lands in the backup, so the
  // backup copy is always clean afterwards.
  if (ev.dirty) writeback_to_l2(ev.line_addr, out);
  if (!backup_) return;
  if (backup_->contains(ev.line_addr)) {
    if (ev.dirty) backup_->clean(ev.line_addr);
    return;
  }
  if (auto bev = backup_->insert(ev.line_addr, false); bev && bev->dirty) {
    writeback_to_l2(bev->line_addr, out);
  }
}

std::optional<ResizeEvent> Simulator::maybe_resize(AccessOutcome& out) {
  const std::size_t old_size = backup_->current_size();
  const std::size_t new_size = size_rng_.between(regs_.bcs_min, regs_.bcs_max);
  for (PhysAddr wb : backup_->resize(new_size)) writeback_to_l2(wb, out);
  regs_.mem_access_count =
      config_.resize_mode == ResizeMode::fixed ? *regs_.fixed_threshold : new_size;
  return ResizeEvent{old_size, new_size};
}

void Simulator::count_access(AccessOutcome& out) {
  ++accesses_;
  if (!backup_) return;
  if (regs_.mem_access_count == 0) {
    throw InvariantError("memory access count register underflow");
  }
  if (--regs_.mem_access_count == 0) out.resized = maybe_resize(out);
}

AccessOutcome Simulator::access(AccessOp op, PhysAddr addr) {
  AccessOutcome out;
  const bool is_store = op == AccessOp::store;
  const PhysAddr line = line_align(addr, config_.l1d);
  const std::uint32_t l1_latency = config_.l1d.hit_latency_cycles;

  // Parallel probe of both arrays.
  const bool l1_hit = l1d_.lookup(addr);
  const bool bu_hit = backup_ && backup_->lookup(line);

  if (l1_hit && bu_hit) {
    out.case_code = AccessCase::k11;
    out.latency_cycles = l1_latency;
    if (is_store) {
      l1d_.write_touch(addr);
      backup_->write_touch(line);
    }
  } else if (l1_hit) {
    out.case_code = AccessCase::k10;
    out.latency_cycles = l1_latency;
    if (is_store) l1d_.write_touch(addr);
  } else if (bu_hit) {
    out.case_code = AccessCase::k01;
    out.latency_cycles = l1_latency;
    // Dirty data stays with the backup copy; the L1D copy is installed clean.
    if (is_store) backup_->write_touch(line);
    if (auto ev = l1d_.insert(line, false)) fill_backup_from_l1(*ev, out);
  } else {
    out.case_code = AccessCase::k00;
    out.latency_cycles = miss_path(addr, out);
    if (auto ev = l1d_.insert(line, is_store)) fill_backup_from_l1(*ev, out);
  }

  count_access(out);
  return out;
}

std::size_t Simulator::context_switch() { return backup_ ? backup_->clear_used() : 0; }

bool Simulator::external_invalidate(PhysAddr addr) {
  const PhysAddr line = line_align(addr, config_.l1d);
  bool present = l1d_.invalidate(line);
  if (backup_) present = backup_->invalidate(line) || present;
  present = l2_.invalidate(line) || present;
  return present;
}

namespace {

void hash_cache(Fnv1a& h, const SetAssocCache& cache) {
  const auto& geo = cache.geometry();
  for (std::uint64_t s = 0; s < geo.num_sets; ++s) {
    for (const auto& line : cache.set_lines(s)) {
      h.add(static_cast<std::uint8_t>((line.valid ? 1 : 0) | (line.dirty ? 2 : 0)));
      h.add(line.tag);
      h.add(line.lru_rank);
    }
  }
}

}  // namespace

std::string Simulator::state_digest() const {
  Fnv1a h;
  h.add(static_cast<std::uint8_t>(config_.mode));
  hash_cache(h, l1d_);
  hash_cache(h, l2_);
  if (backup_) {
    h.add(static_cast<std::uint64_t>(backup_->current_size()));
    for (const auto& line : backup_->lines()) {
      h.add(static_cast<std::uint8_t>((line.valid ? 1 : 0) | (line.dirty ? 2 : 0) |
                                      (line.used ? 4 : 0) | (line.enabled ? 8 : 0)));
      h.add(line.line_addr);
    }
  }
  h.add(regs_.mem_access_count);
  h.add(static_cast<std::uint64_t>(regs_.bcs_min));
  h.add(static_cast<std::uint64_t>(regs_.bcs_max));
  return h.hex();
}

std::string Simulator::l2_digest() const {
  Fnv1a h;
  hash_cache(h, l2_);
  return h.hex();
}

}  // namespace backcache
