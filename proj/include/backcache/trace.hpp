#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "backcache/cache_core.hpp"
#include "backcache/hierarchy.hpp"

namespace backcache {

enum class TraceKind { load, store, ctxswitch, invalidate };

struct TraceRecord {
  TraceKind kind = TraceKind::load;
  PhysAddr addr;  // zero and unused for ctxswitch

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Parses the line-oriented trace grammar:
///
///   line    := comment | blank | event
///   comment := '#' any-text
///   event   := 'R' SP hexaddr | 'W' SP hexaddr | 'INV' SP hexaddr | 'CS'
///   hexaddr := '0x' [0-9a-fA-F]{1,12}
///
/// A trailing '\r' is tolerated. Throws InputError carrying the line number.
std::vector<TraceRecord> parse_trace(std::istream& in);
std::vector<TraceRecord> parse_trace_text(std::string_view text);

/// Inverse of parse_trace for a single record.
std::string format_record(const TraceRecord& rec);

struct SimStats {
  std::uint64_t accesses = 0;
  std::array<std::uint64_t, 4> case_counts{};  // indexed by AccessCase code
  std::uint64_t l1d_hits = 0;
  std::uint64_t l1d_misses = 0;
  std::uint64_t backup_hits = 0;
  std::uint64_t l2_hits = 0;
  std::uint64_t l2_misses = 0;
  std::uint64_t writebacks = 0;
  std::uint64_t memory_writebacks = 0;
  std::uint64_t resizes = 0;
  std::uint64_t context_switches = 0;
  std::uint64_t used_bits_cleared = 0;
  std::uint64_t invalidations = 0;
  std::uint64_t total_latency_cycles = 0;
  std::string final_digest;

  double avg_access_latency() const noexcept {
    return accesses == 0 ? 0.0 : static_cast<double>(total_latency_cycles) /
                                     static_cast<double>(accesses);
  }
  std::uint64_t count(AccessCase c) const noexcept {
    return case_counts[static_cast<std::size_t>(c)];
  }

  /// Adds one access outcome to the tallies.
  void record(const AccessOutcome& out);

  friend bool operator==(const SimStats&, const SimStats&) = default;
};

SimStats run_trace(Simulator& sim, const std::vector<TraceRecord>& records);

/// Flat `key=value` lines.
std::string format_stats_text(const SimStats& stats);
/// Header row plus one value row.
std::string format_stats_csv(const SimStats& stats);
/// JSON document (schema documented in README).
std::string format_stats_json(const SimStats& stats);

}  // namespace backcache
