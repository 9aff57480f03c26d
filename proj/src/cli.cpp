#include "backcache/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "backcache/attack.hpp"
#include "backcache/config_io.hpp"
#include "backcache/error.hpp"
#include "backcache/security.hpp"
#include "backcache/trace.hpp"

#ifndef BACKCACHE_VERSION
#define BACKCACHE_VERSION "0.0.0"
#endif

namespace backcache::cli {

namespace {

namespace fs = std::filesystem;
using OJson = nlohmann::ordered_json;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "text";
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_config = true) {
  if (with_config) cmd->add_option("--config", opts.config_path, "JSON configuration file");
  cmd->add_option("--seed", opts.seed, "Override the configured seed");
  cmd->add_option("--out", opts.out_path, "Output file (stdout when omitted)");
  cmd->add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"text", "csv", "structured"}));
}

SimConfig resolve_config(const CommonOptions& opts) {
  SimConfig cfg = opts.config_path.empty() ? SimConfig{} : load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.validate();
  return cfg;
}

std::vector<TraceRecord> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trace file " + path);
  try {
    return parse_trace(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::string format_double(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Run {
 public:
  Run(std::string command, const std::vector<std::string>& args, std::ostream& out)
      : command_(std::move(command)), out_(out), start_(std::chrono::steady_clock::now()) {
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) invocation_ += ' ';
      invocation_ += args[i];
    }
  }

  /// Writes `data` to `path` (stdout when empty).
  void emit(const std::string& path, const std::string& data) {
    if (path.empty()) {
      out_ << data;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write output file " + path);
    f << data;
    if (!f) throw InputError("failed writing output file " + path);
    outputs_.push_back(path);
  }

  /// One manifest per output file: `<output>.manifest.json`.
  void finish(const OJson& config, std::uint64_t seed, const OJson& summary) {
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start_)
                          .count();
    for (const auto& path : outputs_) {
      OJson m;
      m["schema"] = "backcache.manifest/1";
      m["tool_version"] = version();
      m["command"] = command_;
      m["invocation"] = invocation_;
      m["seed"] = seed;
      m["config"] = config;
      m["output"] = path;
      m["summary"] = summary;
      m["started_at"] = utc_timestamp();
      m["wall_clock_ms"] = ms;
      std::ofstream f(path + ".manifest.json", std::ios::binary);
      if (!f) throw InputError("cannot write manifest for " + path);
      f << m.dump(2) << '\n';
    }
  }

 private:
  std::string command_;
  std::string invocation_;
  std::ostream& out_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

// ---- sim -------------------------------------------------------------------

int cmd_sim(const CommonOptions& opts, const std::string& trace_path,
            const std::vector<std::string>& args, std::ostream& out) {
  const SimConfig cfg = resolve_config(opts);
  const auto records = load_trace(trace_path);
  Simulator sim(cfg);
  const SimStats stats = run_trace(sim, records);

  std::string data;
  if (opts.format == "csv") {
    data = format_stats_csv(stats);
  } else if (opts.format == "structured") {
    data = format_stats_json(stats);
  } else {
    data = format_stats_text(stats);
  }
  Run run("sim", args, out);
  run.emit(opts.out_path, data);
  run.finish(config_to_json(cfg), cfg.seed,
             {{"trace", trace_path}, {"accesses", stats.accesses},
              {"final_digest", stats.final_digest}});
  return kOk;
}

// ---- attack ----------------------------------------------------------------

struct AttackOptions {
  std::string scenario;
  std::size_t bits = 100;
  std::string secret;
  std::uint64_t filler_kb = 0;
  std::uint64_t target_set = 0;
  std::uint32_t victim_lines = 0;
  std::size_t samples = 1000;
  std::string key = "2b7e151628aed2a6abf7158809cf4f3c";
  bool full_rounds = false;
};

aes::Block parse_key(const std::string& hex) {
  if (hex.size() != 32) throw DomainError("AES key must be 32 hex digits");
  aes::Block key{};
  for (std::size_t i = 0; i < 16; ++i) {
    unsigned v = 0;
    if (std::sscanf(hex.c_str() + 2 * i, "%2x", &v) != 1 ||
        !std::isxdigit(static_cast<unsigned char>(hex[2 * i])) ||
        !std::isxdigit(static_cast<unsigned char>(hex[2 * i + 1]))) {
      throw DomainError("AES key must be 32 hex digits");
    }
    key[i] = static_cast<std::uint8_t>(v);
  }
  return key;
}

std::vector<std::uint8_t> parse_secret(const AttackOptions& a) {
  if (a.secret.empty()) {
    if (a.bits == 0) throw DomainError("--bits must be positive");
    return split_secret(a.bits);
  }
  std::vector<std::uint8_t> bits;
  for (char c : a.secret) {
    if (c != '0' && c != '1') throw DomainError("--secret must be a string of 0 and 1");
    bits.push_back(c == '1');
  }
  return bits;
}

int cmd_attack(const CommonOptions& opts, const AttackOptions& a,
               const std::vector<std::string>& args, std::ostream& out) {
  AttackConfig cfg{resolve_config(opts), a.target_set, a.victim_lines};
  Run run("attack " + a.scenario, args, out);
  OJson summary;
  summary["scenario"] = a.scenario;
  std::ostringstream csv;

  if (a.scenario == "single_set") {
    const auto secret = parse_secret(a);
    const auto result = run_single_set_attack(cfg, secret, a.filler_kb * 1024);
    csv << "trial,secret_bit,probe_latency_cycles\n";
    for (std::size_t i = 0; i < secret.size(); ++i) {
      csv << i << ',' << int{secret[i]} << ',' << result.probe_latency[i] << '\n';
    }
    summary["bits"] = secret.size();
    summary["filler_kb"] = a.filler_kb;
    summary["victim_lines"] = cfg.effective_victim_lines();
    summary["accuracy"] = result.accuracy;
    summary["threshold"] = result.threshold;
    summary["degenerate"] = result.degenerate;
  } else {
    const auto key = parse_key(a.key);
    AesAttackOptions aes_opts;
    aes_opts.full_rounds = a.full_rounds;
    aes_opts.filler_bytes = a.filler_kb * 1024;
    const auto result = run_aes_attack(cfg, a.samples, key, cfg.sim.seed, aes_opts);
    csv << "sample";
    for (std::size_t j = 0; j < kTTableLines; ++j) csv << ",set_" << j;
    csv << '\n';
    for (std::size_t i = 0; i < result.latency.size(); ++i) {
      csv << i;
      for (auto v : result.latency[i]) csv << ',' << v;
      csv << '\n';
    }
    const auto heat = summarize_heat_map(result);
    summary["samples"] = a.samples;
    summary["full_rounds"] = a.full_rounds;
    summary["grand_mean"] = heat.grand_mean;
    summary["max_set_deviation"] = heat.max_set_deviation;
    summary["touched_mean"] = heat.touched_mean;
    summary["untouched_mean"] = heat.untouched_mean;
  }

  run.emit(opts.out_path, csv.str());
  if (!opts.out_path.empty()) {
    if (opts.format == "structured") {
      out << summary.dump(2) << '\n';
    } else {
      for (const auto& [k, v] : summary.items()) out << k << '=' << v.dump() << '\n';
    }
  }
  run.finish(config_to_json(cfg.sim), cfg.sim.seed, summary);
  return kOk;
}

// ---- analyze ---------------------------------------------------------------

struct KbRange {
  std::uint64_t min_kb = 0;
  std::uint64_t max_kb = 0;
};

KbRange parse_range(const std::string& text) {
  KbRange r;
  char dash = 0;
  std::istringstream in(text);
  if (!(in >> r.min_kb >> dash >> r.max_kb) || dash != '-' || !in.eof()) {
    // Accept an optional "KB" suffix.
    std::string rest;
    in.clear();
    std::getline(in, rest);
    if (rest != "KB" && rest != "kb") {
      throw DomainError("range must look like 12-16 (KB), got '" + text + "'");
    }
  }
  if (r.min_kb > r.max_kb) throw DomainError("range " + text + " has min above max");
  return r;
}

int cmd_analyze(const CommonOptions& opts, const std::vector<std::string>& ranges,
                std::uint64_t line_size, double p, std::uint64_t trials,
                const std::vector<std::string>& args, std::ostream& out) {
  const std::uint64_t seed = opts.seed.value_or(kDefaultSeed);
  if (line_size == 0 || 1024 % line_size != 0) {
    throw DomainError("line size must divide 1024");
  }
  SingleSetModel{0, 0, p, std::nullopt}.validate();  // bias domain check

  struct Row {
    std::string label;
    std::size_t min_lines, max_lines;
    double avg;
    std::optional<MonteCarloEstimate> mc;
  };
  std::vector<Row> rows;
  for (const auto& text : ranges) {
    const auto r = parse_range(text);
    const std::size_t lo = r.min_kb * 1024 / line_size;
    const std::size_t hi = r.max_kb * 1024 / line_size;
    Row row{std::to_string(r.min_kb) + "-" + std::to_string(r.max_kb) + "KB", lo, hi,
            p_avg(lo, hi), std::nullopt};
    if (trials > 0) row.mc = monte_carlo_single_set(lo, hi, p, trials, seed);
    rows.push_back(row);
  }

  std::ostringstream data;
  if (opts.format == "structured") {
    OJson doc;
    doc["schema"] = "backcache.analysis/1";
    doc["guess_bias"] = p;
    doc["trials"] = trials;
    doc["seed"] = seed;
    doc["rows"] = OJson::array();
    for (const auto& row : rows) {
      OJson j{{"range", row.label}, {"min_lines", row.min_lines}, {"max_lines", row.max_lines},
              {"p_avg", row.avg}, {"worst_case_overflow", worst_case_overflow(row.min_lines)}};
      j["monte_carlo_estimate"] = row.mc ? OJson(row.mc->estimate) : OJson(nullptr);
      j["stderr"] = row.mc ? OJson(row.mc->std_error) : OJson(nullptr);
      doc["rows"].push_back(j);
    }
    data << doc.dump(2) << '\n';
  } else if (opts.format == "csv") {
    data << "range,min_lines,max_lines,p_avg,monte_carlo_estimate,stderr,trials\n";
    for (const auto& row : rows) {
      data << row.label << ',' << row.min_lines << ',' << row.max_lines << ','
           << format_double(row.avg) << ',' << (row.mc ? format_double(row.mc->estimate) : "")
           << ',' << (row.mc ? format_double(row.mc->std_error) : "") << ',' << trials << '\n';
    }
  } else {
    data << std::left << std::setw(10) << "range" << std::setw(10) << "min_lines"
         << std::setw(10) << "max_lines" << std::setw(10) << "p_avg" << std::setw(12)
         << "mc_estimate" << std::setw(10) << "stderr" << "trials\n";
    for (const auto& row : rows) {
      data << std::left << std::setw(10) << row.label << std::setw(10) << row.min_lines
           << std::setw(10) << row.max_lines << std::setw(10) << format_double(row.avg, 4)
           << std::setw(12) << (row.mc ? format_double(row.mc->estimate, 4) : "-")
           << std::setw(10) << (row.mc ? format_double(row.mc->std_error, 5) : "-") << trials
           << '\n';
    }
  }
  Run run("analyze", args, out);
  run.emit(opts.out_path, data.str());
  run.finish(OJson{{"line_size_bytes", line_size}, {"guess_bias", p}, {"trials", trials}},
             seed, OJson{{"rows", rows.size()}});
  return kOk;
}

// ---- sweep -----------------------------------------------------------------

int cmd_sweep(const CommonOptions& opts, const std::string& trace_path,
              const std::vector<std::uint64_t>& thresholds,
              const std::vector<std::string>& args, std::ostream& out) {
  const SimConfig base = resolve_config(opts);
  if (base.mode != Mode::backcache) throw ConfigError("sweep needs a backcache-mode config");
  for (auto t : thresholds) {
    if (t == 0) throw DomainError("sweep thresholds must be positive");
  }
  const auto records = load_trace(trace_path);

  std::ostringstream csv;
  csv << "threshold,resize_count,accesses,avg_access_latency,l1d_misses,case_00,l2_misses\n";
  auto emit_row = [&](const std::string& label, SimConfig cfg) {
    Simulator sim(cfg);
    const auto stats = run_trace(sim, records);
    csv << label << ',' << stats.resizes << ',' << stats.accesses << ','
        << format_double(stats.avg_access_latency()) << ',' << stats.l1d_misses << ','
        << stats.count(AccessCase::k00) << ',' << stats.l2_misses << '\n';
  };
  for (auto t : thresholds) {
    SimConfig cfg = base;
    cfg.resize_mode = ResizeMode::fixed;
    cfg.fixed_threshold = t;
    emit_row(std::to_string(t), cfg);
  }
  SimConfig dyn = base;
  dyn.resize_mode = ResizeMode::dynamic;
  emit_row("dynamic", dyn);

  Run run("sweep", args, out);
  run.emit(opts.out_path, csv.str());
  run.finish(config_to_json(base), base.seed,
             OJson{{"trace", trace_path}, {"rows", thresholds.size() + 1}});
  return kOk;
}

}  // namespace

std::string version() { return BACKCACHE_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"BackCache cache simulator, attack lab, and analysis toolkit", "backcache"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  CommonOptions sim_opts;
  std::string sim_trace;
  auto* sim_cmd = app.add_subcommand("sim", "Run a trace through the simulator");
  add_common(sim_cmd, sim_opts);
  sim_cmd->add_option("--trace", sim_trace, "Trace file")->required();

  CommonOptions attack_opts;
  attack_opts.format = "text";
  AttackOptions attack;
  auto* attack_cmd = app.add_subcommand("attack", "Run a Prime+Probe case study");
  add_common(attack_cmd, attack_opts);
  attack_cmd->add_option("scenario", attack.scenario, "single_set or aes")
      ->required()
      ->check(CLI::IsMember({"single_set", "aes"}));
  attack_cmd->add_option("--bits", attack.bits, "Secret length (half zeros, then ones)");
  attack_cmd->add_option("--secret", attack.secret, "Explicit secret bit string");
  attack_cmd->add_option("--filler-kb", attack.filler_kb, "Backup filler size in KB");
  attack_cmd->add_option("--target-set", attack.target_set, "Target set (single_set)");
  attack_cmd->add_option("--victim-lines", attack.victim_lines,
                         "Victim lines per access burst (0 = associativity)");
  attack_cmd->add_option("--samples", attack.samples, "Samples (aes)");
  attack_cmd->add_option("--key", attack.key, "AES-128 key, 32 hex digits (aes)");
  attack_cmd->add_flag("--full-rounds", attack.full_rounds, "Model all ten rounds (aes)");

  CommonOptions analyze_opts;
  std::vector<std::string> ranges{"12-16", "8-16", "4-16"};
  std::uint64_t line_size = 64;
  double bias = 0.5;
  std::uint64_t trials = 1'000'000;
  auto* analyze_cmd = app.add_subcommand("analyze", "Closed-form and Monte Carlo analysis");
  add_common(analyze_cmd, analyze_opts, false);
  analyze_cmd->add_option("--range", ranges, "Backup size range in KB, e.g. 12-16");
  analyze_cmd->add_option("--line-size", line_size, "Line size in bytes");
  analyze_cmd->add_option("--p", bias, "Attacker guess bias");
  analyze_cmd->add_option("--trials", trials, "Monte Carlo trials (0 = closed form only)");

  CommonOptions sweep_opts;
  std::string sweep_trace;
  std::vector<std::uint64_t> thresholds{10, 50, 100, 200, 500, 1000};
  auto* sweep_cmd = app.add_subcommand("sweep", "Fixed-threshold resize sensitivity sweep");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--trace", sweep_trace, "Trace file")->required();
  sweep_cmd->add_option("--thresholds", thresholds, "Fixed resize thresholds")->delimiter(',');

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim_cmd) return cmd_sim(sim_opts, sim_trace, args, out);
    if (*attack_cmd) return cmd_attack(attack_opts, attack, args, out);
    if (*analyze_cmd) return cmd_analyze(analyze_opts, ranges, line_size, bias, trials, args, out);
    if (*sweep_cmd) return cmd_sweep(sweep_opts, sweep_trace, thresholds, args, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputData;
  } catch (const DomainError& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const InvariantError& e) {
    err << "internal invariant violated: " << e.what() << '\n';
    return kInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace backcache::cli
