#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "backcache/backup_cache.hpp"
#include "backcache/cache_core.hpp"
#include "backcache/rng.hpp"

namespace backcache {

inline constexpr std::uint64_t kDefaultSeed = 0x5eed;

enum class Mode { baseline, backcache };
enum class ResizeMode { dynamic, fixed };
enum class AccessOp { load, store };

/// Hit/miss combination for one access: high bit is the L1D, low bit the backup.
enum class AccessCase : std::uint8_t {
  k00 = 0b00,  // both miss
  k01 = 0b01,  // backup hit only
  k10 = 0b10,  // L1D hit only
  k11 = 0b11,  // both hit
};

std::string_view to_string(AccessCase c) noexcept;
std::string_view to_string(Mode m) noexcept;
std::string_view to_string(ResizeMode m) noexcept;

struct SimConfig {
  Mode mode = Mode::backcache;
  CacheGeometry l1d{64, 64, 4, 3};     // 16KB, 4-way, 3 cycles
  CacheGeometry l2{64, 2048, 8, 20};   // 1MB, 8-way, 20 cycles
  std::size_t backup_capacity_lines = 256;
  std::size_t backup_min_lines = 192;
  std::size_t backup_max_lines = 256;
  std::uint32_t memory_penalty_cycles = 100;
  std::uint64_t seed = kDefaultSeed;
  ResizeMode resize_mode = ResizeMode::dynamic;
  std::uint64_t fixed_threshold = 0;  // only read in ResizeMode::fixed

  /// 16KB L1D plus a backup cache resizing within [min_kb, max_kb]; 64B lines.
  static SimConfig backcache_range(std::uint64_t min_kb, std::uint64_t max_kb);
  /// Unprotected 32KB 4-way L1D at 2 cycles, no backup cache.
  static SimConfig baseline();

  /// Throws ConfigError on any inconsistency. Backup fields are ignored in baseline mode.
  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct HwRegisters {
  std::uint64_t mem_access_count = 0;
  std::size_t bcs_min = 0;
  std::size_t bcs_max = 0;
  std::optional<std::uint64_t> fixed_threshold;
};

struct ResizeEvent {
  std::size_t old_size = 0;
  std::size_t new_size = 0;

  friend bool operator==(const ResizeEvent&, const ResizeEvent&) = default;
};

struct AccessOutcome {
  AccessCase case_code = AccessCase::k00;
  std::uint32_t latency_cycles = 0;
  bool l2_hit = false;  // meaningful for case 00 only
  std::optional<PhysAddr> l1_eviction;
  std::vector<PhysAddr> writebacks;
  std::optional<ResizeEvent> resized;
};

/// L1D + backup cache + L2 controller.
///
/// The L1D and backup are probed in parallel; either hit answers at the L1D
/// hit latency. Fills between them happen after the response and never reach
/// the L2 except as write-backs of dirty data.
class Simulator {
 public:
  explicit Simulator(const SimConfig& config);

  AccessOutcome access(AccessOp op, PhysAddr addr);
  AccessOutcome load(PhysAddr addr) { return access(AccessOp::load, addr); }
  AccessOutcome store(PhysAddr addr) { return access(AccessOp::store, addr); }

  /// BUCLR at a context switch. Not a memory access.
  std::size_t context_switch();

  /// Invalidation from the lower level: drops the line everywhere.
  bool external_invalidate(PhysAddr addr);

  const SimConfig& config() const noexcept { return config_; }
  const HwRegisters& registers() const noexcept { return regs_; }
  const SetAssocCache& l1d() const noexcept { return l1d_; }
  const SetAssocCache& l2() const noexcept { return l2_; }
  /// nullptr in baseline mode.
  const BackupCache* backup() const noexcept { return backup_ ? &*backup_ : nullptr; }

  std::uint64_t memory_writebacks() const noexcept { return memory_writebacks_; }
  std::uint64_t accesses() const noexcept { return accesses_; }

  /// FNV-1a 64 over every tag array and register, as 16 lowercase hex digits.
  std::string state_digest() const;
  /// Same hash restricted to the L2 tag array.
  std::string l2_digest() const;

 private:
  void fill_backup_from_l1(const Eviction& ev, AccessOutcome& out);
  void writeback_to_l2(PhysAddr line_addr, AccessOutcome& out);
  void count_access(AccessOutcome& out);
  std::optional<ResizeEvent> maybe_resize(AccessOutcome& out);
  std::uint32_t miss_path(PhysAddr addr, AccessOutcome& out);

  SimConfig config_;
  SetAssocCache l1d_;
  SetAssocCache l2_;
  std::optional<BackupCache> backup_;
  HwRegisters regs_;
  Rng size_rng_;
  std::uint64_t memory_writebacks_ = 0;
  std::uint64_t accesses_ = 0;
};

}  // namespace backcache
