#include "backcache/trace.hpp"

#include <cstdio>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "backcache/error.hpp"

namespace backcache {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

PhysAddr parse_hexaddr(std::string_view text, std::size_t line_no) {
  if (text.size() < 3 || text[0] != '0' || text[1] != 'x') {
    throw InputError("expected 0x-prefixed hex address, got '" + std::string(text) + "'",
                     line_no);
  }
  const auto digits = text.substr(2);
  if (digits.size() > 12) {
    throw InputError("address wider than 48 bits: '" + std::string(text) + "'", line_no);
  }
  std::uint64_t value = 0;
  for (char c : digits) {
    const int v = hex_value(c);
    if (v < 0) throw InputError("bad hex digit in '" + std::string(text) + "'", line_no);
    value = (value << 4) | static_cast<std::uint64_t>(v);
  }
  return PhysAddr(value);
}

TraceRecord parse_event(std::string_view line, std::size_t line_no) {
  if (line == "CS") return {TraceKind::ctxswitch, PhysAddr{}};
  const auto sp = line.find(' ');
  if (sp == std::string_view::npos) {
    throw InputError("unrecognized record '" + std::string(line) + "'", line_no);
  }
  const auto op = line.substr(0, sp);
  TraceKind kind;
  if (op == "R") {
    kind = TraceKind::load;
  } else if (op == "W") {
    kind = TraceKind::store;
  } else if (op == "INV") {
    kind = TraceKind::invalidate;
  } else {
    throw InputError("unknown record kind '" + std::string(op) + "'", line_no);
  }
  return {kind, parse_hexaddr(line.substr(sp + 1), line_no)};
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

}  // namespace

std::vector<TraceRecord> parse_trace(std::istream& in) {
  std::vector<TraceRecord> records;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_blank(line) || line.front() == '#') continue;
    records.push_back(parse_event(line, line_no));
  }
  return records;
}

std::vector<TraceRecord> parse_trace_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

std::string format_record(const TraceRecord& rec) {
  if (rec.kind == TraceKind::ctxswitch) return "CS";
  const char* op = rec.kind == TraceKind::load ? "R" : rec.kind == TraceKind::store ? "W" : "INV";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s 0x%llx", op,
                static_cast<unsigned long long>(rec.addr.value()));
  return buf;
}

void SimStats::record(const AccessOutcome& out) {
  ++accesses;
  ++case_counts[static_cast<std::size_t>(out.case_code)];
  switch (out.case_code) {
    case AccessCase::k11: ++l1d_hits; ++backup_hits; break;
    case AccessCase::k10: ++l1d_hits; break;
    case AccessCase::k01: ++l1d_misses; ++backup_hits; break;
    case AccessCase::k00:
      ++l1d_misses;
      ++(out.l2_hit ? l2_hits : l2_misses);
      break;
  }
  writebacks += out.writebacks.size();
  if (out.resized) ++resizes;
  total_latency_cycles += out.latency_cycles;
}

SimStats run_trace(Simulator& sim, const std::vector<TraceRecord>& records) {
  SimStats stats;
  for (const auto& rec : records) {
    switch (rec.kind) {
      case TraceKind::load: stats.record(sim.load(rec.addr)); break;
      case TraceKind::store: stats.record(sim.store(rec.addr)); break;
      case TraceKind::ctxswitch:
        ++stats.context_switches;
        stats.used_bits_cleared += sim.context_switch();
        break;
      case TraceKind::invalidate:
        ++stats.invalidations;
        sim.external_invalidate(rec.addr);
        break;
    }
  }
  stats.memory_writebacks = sim.memory_writebacks();
  stats.final_digest = sim.state_digest();
  return stats;
}

namespace {

struct Field {
  const char* key;
  std::uint64_t value;
};

std::vector<Field> counter_fields(const SimStats& s) {
  return {{"accesses", s.accesses},
          {"case_00", s.count(AccessCase::k00)},
          {"case_01", s.count(AccessCase::k01)},
          {"case_10", s.count(AccessCase::k10)},
          {"case_11", s.count(AccessCase::k11)},
          {"l1d_hits", s.l1d_hits},
          {"l1d_misses", s.l1d_misses},
          {"backup_hits", s.backup_hits},
          {"l2_hits", s.l2_hits},
          {"l2_misses", s.l2_misses},
          {"writebacks", s.writebacks},
          {"memory_writebacks", s.memory_writebacks},
          {"resizes", s.resizes},
          {"context_switches", s.context_switches},
          {"used_bits_cleared", s.used_bits_cleared},
          {"invalidations", s.invalidations},
          {"total_latency_cycles", s.total_latency_cycles}};
}

std::string format_avg(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string format_stats_text(const SimStats& stats) {
  std::ostringstream out;
  for (const auto& f : counter_fields(stats)) out << f.key << '=' << f.value << '\n';
  out << "avg_access_latency=" << format_avg(stats.avg_access_latency()) << '\n';
  out << "final_digest=" << stats.final_digest << '\n';
  return out.str();
}

std::string format_stats_csv(const SimStats& stats) {
  std::ostringstream header;
  std::ostringstream row;
  for (const auto& f : counter_fields(stats)) {
    header << f.key << ',';
    row << f.value << ',';
  }
  header << "avg_access_latency,final_digest\n";
  row << format_avg(stats.avg_access_latency()) << ',' << stats.final_digest << '\n';
  return header.str() + row.str();
}

std::string format_stats_json(const SimStats& stats) {
  nlohmann::ordered_json doc;
  doc["schema"] = "backcache.stats/1";
  for (const auto& f : counter_fields(stats)) doc[f.key] = f.value;
  doc["avg_access_latency"] = stats.avg_access_latency();
  doc["final_digest"] = stats.final_digest;
  return doc.dump(2) + "\n";
}

}  // namespace backcache
