#include "backcache/trace.hpp"

#include <gtest/gtest.h>

#include <json.hpp>
#include <random>
#include <sstream>

#include "backcache/error.hpp"
#include "test_support.hpp"

namespace backcache {
namespace {

std::size_t error_line(std::string_view text) {
  try {
    parse_trace_text(text);
  } catch (const InputError& e) {
    return e.line();
  }
  return 0;
}

TEST(ParseTrace, AcceptsEveryRecordKind) {
  const auto recs = parse_trace_text(
      "# header\n"
      "R 0x1040\n"
      "\n"
      "W 0xFFFFFFFFFFFF\r\n"
      "   \n"
      "CS\n"
      "INV 0x0\n");
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_EQ(recs[0], (TraceRecord{TraceKind::load, PhysAddr(0x1040)}));
  EXPECT_EQ(recs[1], (TraceRecord{TraceKind::store, PhysAddr(0xFFFFFFFFFFFFULL)}));
  EXPECT_EQ(recs[2].kind, TraceKind::ctxswitch);
  EXPECT_EQ(recs[3], (TraceRecord{TraceKind::invalidate, PhysAddr(0)}));
  EXPECT_TRUE(parse_trace_text("").empty());
}

TEST(ParseTrace, RejectsMalformedLinesWithLineNumbers) {
  EXPECT_EQ(error_line("R 0x10\nR 0x20\nQ 0x30\n"), 3u);
  EXPECT_EQ(error_line("R 0x1000000000000\n"), 1u);  // 13 digits
  EXPECT_EQ(error_line("# a\n\nR 0xZZ\n"), 3u);
  EXPECT_EQ(error_line("R 1040\n"), 1u);
  EXPECT_EQ(error_line("R  0x10\n"), 1u);
  EXPECT_EQ(error_line("R 0x\n"), 1u);
  EXPECT_EQ(error_line("CS 0x10\n"), 1u);
  EXPECT_EQ(error_line("R\n"), 1u);
  EXPECT_EQ(error_line("r 0x10\n"), 1u);
}

TEST(ParseTrace, FormatRoundTrips) {
  const auto recs = testing_support::random_trace(2000, 9);
  std::string text;
  for (const auto& r : recs) text += format_record(r) + "\n";
  EXPECT_EQ(parse_trace_text(text), recs);
}

TEST(RunTrace, EmptyTraceLeavesStateUntouched) {
  Simulator sim((SimConfig{}));
  const auto before = sim.state_digest();
  const auto stats = run_trace(sim, {});
  EXPECT_EQ(stats.accesses, 0u);
  EXPECT_EQ(stats.avg_access_latency(), 0.0);
  EXPECT_EQ(stats.final_digest, before);
}

TEST(RunTrace, ColdLoadsAllMissToMemory) {
  Simulator sim((SimConfig{}));
  std::vector<TraceRecord> recs;
  for (std::uint64_t i = 0; i < 100; ++i) recs.push_back({TraceKind::load, PhysAddr(i * 64)});
  const auto stats = run_trace(sim, recs);
  EXPECT_EQ(stats.count(AccessCase::k00), 100u);
  EXPECT_EQ(stats.l2_misses, 100u);
  EXPECT_EQ(stats.total_latency_cycles, 100u * 120);
}

TEST(RunTrace, RepeatedLoadHitsAtL1Latency) {
  Simulator sim((SimConfig{}));
  const auto stats = run_trace(sim, {{TraceKind::load, PhysAddr(0x80)},
                                     {TraceKind::load, PhysAddr(0x80)}});
  EXPECT_EQ(stats.total_latency_cycles, 120u + 3u);
  EXPECT_EQ(stats.count(AccessCase::k10), 1u);
  EXPECT_DOUBLE_EQ(stats.avg_access_latency(), 61.5);
}

TEST(RunTrace, CountersAreConsistent) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimConfig cfg;
    cfg.seed = seed;
    Simulator sim(cfg);
    const auto stats = run_trace(sim, testing_support::random_trace(30000, seed, 800));
    std::uint64_t sum = 0;
    for (auto c : stats.case_counts) sum += c;
    EXPECT_EQ(sum, stats.accesses);
    EXPECT_EQ(stats.l1d_hits + stats.l1d_misses, stats.accesses);
    EXPECT_EQ(stats.l2_hits + stats.l2_misses, stats.count(AccessCase::k00));
    EXPECT_EQ(stats.backup_hits, stats.count(AccessCase::k01) + stats.count(AccessCase::k11));
    EXPECT_EQ(stats.accesses, sim.accesses());
    EXPECT_LE(stats.memory_writebacks, stats.writebacks + stats.l2_misses);
    EXPECT_GT(stats.count(AccessCase::k01), 0u);
    EXPECT_GT(stats.count(AccessCase::k11), 0u);
    const std::uint64_t non_miss = stats.accesses - stats.count(AccessCase::k00);
    const std::uint64_t miss_cycles = stats.l2_hits * 20 + stats.l2_misses * 120;
    EXPECT_EQ(stats.total_latency_cycles, non_miss * 3 + miss_cycles);
  }
}

TEST(RunTrace, ReplayIsDeterministic) {
  const auto recs = testing_support::random_trace(20000, 77);
  SimConfig cfg = SimConfig::backcache_range(4, 16);
  cfg.seed = 1234;
  Simulator a(cfg), b(cfg);
  EXPECT_EQ(run_trace(a, recs), run_trace(b, recs));
  cfg.seed = 1235;
  Simulator c(cfg);
  EXPECT_NE(run_trace(c, recs).final_digest, a.state_digest());
}

TEST(RunTrace, WorkingSetThatFitsMissesEquallyInBothModes) {
  std::mt19937_64 rng(8);
  std::vector<TraceRecord> recs;
  for (int i = 0; i < 50000; ++i) {
    recs.push_back({(rng() & 1) ? TraceKind::store : TraceKind::load,
                    PhysAddr((rng() % 256) * 64)});
  }
  Simulator base(SimConfig::baseline());
  Simulator bc((SimConfig{}));
  const auto sb = run_trace(base, recs);
  const auto sc = run_trace(bc, recs);
  EXPECT_EQ(sb.l2_misses, 256u);
  EXPECT_EQ(sc.l2_misses, sb.l2_misses);
  EXPECT_EQ(sc.count(AccessCase::k00), sb.count(AccessCase::k00));
}

TEST(StatsFormat, TextCsvAndJsonAgree) {
  Simulator sim((SimConfig{}));
  const auto stats = run_trace(sim, testing_support::random_trace(5000, 3));
  const std::string text = format_stats_text(stats);
  EXPECT_NE(text.find("accesses=" + std::to_string(stats.accesses) + "\n"), std::string::npos);
  EXPECT_NE(text.find("final_digest=" + stats.final_digest), std::string::npos);

  const std::string csv = format_stats_csv(stats);
  std::istringstream lines(csv);
  std::string header, row, extra;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_FALSE(std::getline(lines, extra));
  EXPECT_EQ(std::count(header.begin(), header.end(), ','),
            std::count(row.begin(), row.end(), ','));
  EXPECT_EQ(header.rfind("accesses,", 0), 0u);

  const auto doc = nlohmann::json::parse(format_stats_json(stats));
  EXPECT_EQ(doc["schema"], "backcache.stats/1");
  EXPECT_EQ(doc["accesses"].get<std::uint64_t>(), stats.accesses);
  EXPECT_EQ(doc["case_01"].get<std::uint64_t>(), stats.count(AccessCase::k01));
  EXPECT_NEAR(doc["avg_access_latency"].get<double>(), stats.avg_access_latency(), 1e-12);
  EXPECT_EQ(doc["final_digest"], stats.final_digest);
}

}  // namespace
}  // namespace backcache
