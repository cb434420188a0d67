// syncron-sim: runs the simulator from a config file and/or flags.
//
// Exit codes: 0 success, 1 verification failed, 2 invalid configuration,
// 3 deadlock or protocol error. Errors are printed as one line on stderr:
//   error: <kind>: <message>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "syncron/config.hpp"
#include "syncron/errors.hpp"
#include "syncron/report.hpp"
#include "syncron/runner.hpp"
#include "syncron/trace.hpp"
#include "syncron/verifier.hpp"

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfig = 2, kRuntime = 3 };

int fail(int code, const std::string& kind, std::string msg) {
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  std::cerr << "error: " << kind << ": " << msg << "\n";
  return code;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw syncron::ConfigError("out", "cannot write " + p.string());
  out << content;
}

void print_verdict(const std::string& label, const syncron::Verdict& v) {
  std::cout << label << (v.pass() ? "PASS" : "FAIL") << "\n";
  for (const auto& c : v.checks) {
    std::cout << "  " << (c.pass ? "pass " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << ": " << c.detail;
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for hierarchical NDP synchronization"};
  app.require_subcommand(0, 1);

  std::optional<std::string> config_path, scheme, workload, memory, link_latency;
  std::optional<std::uint32_t> units, cores_per_unit, st_entries;
  std::optional<std::uint64_t> seed, drop_grant;
  std::string out_dir = ".";
  bool trace = false, verify_runs = false;
  std::vector<std::string> sweeps, sets;
  std::size_t jobs = 1;

  app.add_option("--config", config_path, "Config file (sectioned key = value)");
  app.add_option("--scheme", scheme, "syncron | flat | central | hier | ideal");
  app.add_option("--workload", workload, "microbench:<prim>[:interval[:iters]] or <structure>[:ops]");
  app.add_option("--units", units, "Number of NDP units");
  app.add_option("--cores-per-unit", cores_per_unit, "Cores per NDP unit");
  app.add_option("--st-entries", st_entries, "Synchronization Table entries per SE");
  app.add_option("--link-latency-ns", link_latency, "Inter-unit transfer latency per 64-byte line");
  app.add_option("--memory", memory, "hbm | hmc | ddr4");
  app.add_option("--seed", seed, "Workload seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--trace", trace, "Write trace.bin and trace.jsonl");
  app.add_option("--sweep", sweeps, "KEY=v1,v2,... (repeatable; cartesian product)");
  app.add_flag("--verify", verify_runs, "Run the verifier suite on every run");
  app.add_option("--jobs,-j", jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);
  app.add_option("--set", sets, "KEY=VALUE override (repeatable)");
  app.add_option("--drop-grant", drop_grant, "Fault injection: drop the N-th message delivered to a core");

  auto* verify_cmd = app.add_subcommand("verify", "Check a recorded trace.jsonl");
  std::string verify_path;
  verify_cmd->add_option("trace", verify_path, "trace.jsonl file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kConfig, "config", e.what());
  }

  if (*verify_cmd) {
    try {
      const syncron::Trace t = syncron::read_trace_jsonl(verify_path);
      const syncron::Verdict v = syncron::verify(t);
      print_verdict("verification: ", v);
      return v.pass() ? kOk : kVerifyFailed;
    } catch (const std::exception& e) {
      return fail(kConfig, "trace", e.what());
    }
  }

  std::vector<syncron::RunConfig> configs;
  try {
    syncron::RunConfig cfg;
    if (config_path) cfg = syncron::load_config_file(*config_path);
    if (scheme) syncron::apply_setting(cfg, "run.scheme", *scheme);
    if (workload) syncron::apply_setting(cfg, "workload.name", *workload);
    if (units) cfg.system.num_units = *units;
    if (cores_per_unit) cfg.system.cores_per_unit = *cores_per_unit;
    if (st_entries) cfg.system.st_entries = *st_entries;
    if (link_latency) syncron::apply_setting(cfg, "latency.link_latency_ns", *link_latency);
    if (memory) syncron::apply_setting(cfg, "latency.memory", *memory);
    if (seed) cfg.seed = *seed;
    if (drop_grant) cfg.drop_grant = *drop_grant == 0 ? std::nullopt : drop_grant;
    if (trace) cfg.trace = true;
    if (verify_runs) cfg.verify = true;
    // Clients default to every core but one; follow --cores-per-unit unless
    // set explicitly.
    if (cores_per_unit && !std::any_of(sets.begin(), sets.end(), [](const std::string& s) {
          return s.rfind("clients", 0) == 0 || s.rfind("system.clients", 0) == 0;
        })) {
      cfg.system.clients_per_unit = cfg.system.cores_per_unit > 0 ? cfg.system.cores_per_unit - 1 : 0;
    }
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw syncron::ConfigError("set", "--set expects KEY=VALUE, got '" + s + "'");
      syncron::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    std::vector<syncron::SweepAxis> axes;
    for (const std::string& s : sweeps) axes.push_back(syncron::parse_sweep(s));
    configs = syncron::expand_sweeps(cfg, axes);
    for (const auto& c : configs) c.system.validate();
  } catch (const std::exception& e) {
    return fail(kConfig, "config", e.what());
  }

  std::vector<syncron::RunResult> results;
  try {
    results = syncron::run_all(configs, jobs);
  } catch (const syncron::ConfigError& e) {
    return fail(kConfig, "config", e.what());
  } catch (const syncron::DeadlockError& e) {
    return fail(kRuntime, "deadlock", e.what());
  } catch (const syncron::ProtocolError& e) {
    return fail(kRuntime, "protocol", e.what());
  } catch (const std::exception& e) {
    return fail(kRuntime, "internal", e.what());
  }

  try {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "stats.json", syncron::stats_json_document(results));
    write_file(dir / "stats.csv", syncron::stats_csv_document(results));
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      if (!r.config.trace || !r.trace) continue;
      const std::string stem = results.size() == 1 ? "trace" : "trace-" + std::to_string(i);
      syncron::write_trace_files(*r.trace, (dir / (stem + ".bin")).string(), (dir / (stem + ".jsonl")).string());
    }
  } catch (const std::exception& e) {
    return fail(kConfig, "output", e.what());
  }

  bool all_pass = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    std::cout << "run " << i << ": " << syncron::scheme_name(r.config.system.scheme) << " "
              << syncron::workload_string(r.config.workload) << " ops=" << r.stats.workload_ops
              << " time_ns=" << syncron::to_ns(r.stats.total_time) << " throughput=" << r.stats.throughput
              << " ops/us\n";
    if (r.verdict) {
      print_verdict("  verification: ", *r.verdict);
      all_pass = all_pass && r.verdict->pass();
    }
  }
  return all_pass ? kOk : kVerifyFailed;
}
