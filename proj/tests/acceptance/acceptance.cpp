// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances and bands are fixed here and never adjusted to
// the measured values.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "syncron/config.hpp"
#include "syncron/errors.hpp"
#include "syncron/messages.hpp"
#include "syncron/network.hpp"
#include "syncron/report.hpp"
#include "syncron/runner.hpp"
#include "syncron/simulator.hpp"
#include "syncron/trace.hpp"
#include "syncron/verifier.hpp"
#include "syncron/workloads.hpp"

using namespace syncron;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED " + what;
    }
  }
  void note(const std::string& s) {
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream o;
  o.precision(prec);
  o << std::fixed << v;
  return o.str();
}

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

RunConfig base(Scheme s, const std::string& workload) {
  RunConfig c;
  c.system.scheme = s;
  apply_setting(c, "workload.name", workload);
  return c;
}

Stats run_stats(const RunConfig& c) { return run_once(c).stats; }

// 1. Codec exactness.
Outcome codec() {
  Outcome o;
  const auto t0 = Clock::now();
  const WireMessage zero = encode_message({0, Opcode::lock_acquire_global, 0, 0});
  o.require(std::all_of(zero.begin(), zero.end(), [](std::uint8_t b) { return b == 0; }), "all-zero example");

  const Message edge{~0ull, Opcode::decrease_indexing_counter, 63, ~0ull};
  const WireMessage w = encode_message(edge);
  bool edge_ok = w[8] == 37 && w[9] == 63 && decode_message(w) == edge;
  for (int i = 0; i < 8; ++i) edge_ok = edge_ok && w[i] == 0xFF && w[10 + i] == 0xFF;
  o.require(edge_ok, "boundary example");

  std::mt19937_64 rng(2024);
  std::size_t bad = 0;
  for (int i = 0; i < 100000; ++i) {
    const Message m{rng(), static_cast<Opcode>(rng() % kOpcodeCount), static_cast<std::uint8_t>(rng() % 64), rng()};
    const WireMessage e = encode_message(m);
    bool layout = e[8] == static_cast<std::uint8_t>(m.opcode) && e[9] == m.core_id;
    for (int b = 0; b < 8; ++b) {
      layout = layout && e[b] == static_cast<std::uint8_t>(m.addr >> (8 * b)) &&
               e[10 + b] == static_cast<std::uint8_t>(m.info >> (8 * b));
    }
    if (!layout || !(decode_message(e) == m)) ++bad;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.require(bad == 0, std::to_string(bad) + " round-trip mismatches");
  o.require(secs < 1.0, "runtime " + fmt(secs) + " s >= 1 s");
  o.note("1e5 round-trips in " + fmt(secs) + " s");
  return o;
}

// 2. Two-unit, two-core lock replay.
class ReplayWorkload final : public Workload {
 public:
  explicit ReplayWorkload(std::uint64_t lock) : lock_(lock) {}
  std::string name() const override { return "replay"; }
  Program program(const CoreEnv&) override { return body(lock_); }
  std::uint64_t expected_ops() const override { return 4; }
  std::uint64_t digest() const override { return 0; }

 private:
  static Program body(std::uint64_t lock) {
    co_yield Step::sync_op(SyncKind::lock_acquire, lock);
    co_yield Step::compute(10);
    co_yield Step::sync_op(SyncKind::lock_release, lock);
    co_yield Step::op_done();
  }
  std::uint64_t lock_;
};

Outcome replay() {
  Outcome o;
  const auto t0 = Clock::now();
  SystemConfig cfg;
  cfg.num_units = 2;
  cfg.cores_per_unit = 2;
  cfg.clients_per_unit = 2;
  ReplayWorkload w(sync_var_addr(cfg, 0, 0));
  Simulator sim(cfg, w, SimOptions{true, std::nullopt, 0});
  sim.run();
  const Trace& t = sim.trace();

  std::vector<std::uint32_t> order;
  for (const auto& r : t.records) {
    if (r.action == TraceAction::cs_enter) order.push_back(r.actor.id);
  }
  auto count = [&](Opcode op) {
    return std::count_if(t.messages.begin(), t.messages.end(), [&](const Message& m) { return m.opcode == op; });
  };
  o.require(order == std::vector<std::uint32_t>{0, 1, 2, 3}, "grant order (0,0),(0,1),(1,0),(1,1)");
  o.require(count(Opcode::lock_acquire_global) == 1, "exactly one lock_acquire_global");
  o.require(count(Opcode::lock_release_global) == 1, "exactly one lock_release_global");
  o.require(verify(t).pass(), "verifier");
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.require(secs < 1.0, "runtime");
  o.note("order 0,1,2,3; 1 acquire_global, 1 release_global");
  return o;
}

const std::vector<std::string> kWorkloads = {
    "microbench:lock:200:20",      "microbench:barrier:200:10", "microbench:barrier_unit:200:10",
    "microbench:semaphore:200:20", "microbench:condvar:200:10",  "stack:20",
    "queue:20",                    "array_map:20",              "hash_table:20",
    "linked_list:3",
};
const std::vector<Scheme> kSchemes = {Scheme::syncron, Scheme::flat, Scheme::central, Scheme::hier, Scheme::ideal};
const std::vector<std::string> kStructures = {"stack:30", "queue:30", "array_map:30", "hash_table:30",
                                              "linked_list:4"};

// 3. Safety suite.
Outcome safety() {
  Outcome o;
  const auto t0 = Clock::now();
  std::vector<RunConfig> runs;
  for (Scheme s : kSchemes) {
    for (const auto& wl : kWorkloads) {
      for (std::uint32_t units : {1u, 2u, 4u}) {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
          RunConfig c = base(s, wl);
          c.system.num_units = units;
          c.seed = seed;
          c.verify = true;
          runs.push_back(c);
        }
      }
    }
  }
  const auto results = run_all(runs, jobs());
  std::size_t failed = 0;
  std::string first;
  for (const auto& r : results) {
    if (r.verdict && r.verdict->pass()) continue;
    ++failed;
    if (first.empty()) {
      first = std::string(scheme_name(r.config.system.scheme)) + " " + workload_string(r.config.workload) +
              " units=" + std::to_string(r.config.system.num_units);
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.require(results.size() >= 150, "at least 150 runs");
  o.require(failed == 0, std::to_string(failed) + " runs failed verification, first: " + first);
  o.require(secs < 300, "runtime " + fmt(secs) + " s");
  o.note(std::to_string(results.size()) + " runs verified in " + fmt(secs, 1) + " s");
  return o;
}

// 4. Scheme equivalence of final shared state.
Outcome equivalence() {
  Outcome o;
  std::vector<RunConfig> runs;
  for (const auto& wl : kStructures) {
    for (Scheme s : kSchemes) {
      RunConfig c = base(s, wl);
      c.seed = 11;
      runs.push_back(c);
    }
  }
  const auto results = run_all(runs, jobs());
  for (std::size_t i = 0; i < results.size(); i += kSchemes.size()) {
    const std::uint64_t d = results[i].stats.digest;
    for (std::size_t k = 1; k < kSchemes.size(); ++k) {
      o.require(results[i + k].stats.digest == d,
                workload_string(results[i].config.workload) + " digest under " +
                    std::string(scheme_name(results[i + k].config.system.scheme)));
    }
  }
  o.note("digests match across 5 schemes on 5 structures");
  return o;
}

// 5. High-contention lock trend.
Outcome contention() {
  Outcome o;
  const auto t0 = Clock::now();
  const double sy = run_stats(base(Scheme::syncron, "microbench:lock:200")).throughput;
  const double ce = run_stats(base(Scheme::central, "microbench:lock:200")).throughput;
  const double hi = run_stats(base(Scheme::hier, "microbench:lock:200")).throughput;
  const double r_central = sy / ce;
  const double r_hier = sy / hi;
  o.require(r_central >= 1.5 && r_central <= 6.0, "SynCron/Central " + fmt(r_central) + " outside [1.5, 6.0]");
  o.require(r_hier >= 1.1 && r_hier <= 2.5, "SynCron/Hier " + fmt(r_hier) + " outside [1.1, 2.5]");
  o.require(sy > hi && hi > ce, "ordering SynCron > Hier > Central");
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.require(secs < 60, "runtime");
  o.note("SynCron/Central " + fmt(r_central) + ", SynCron/Hier " + fmt(r_hier));
  return o;
}

// 6. Link-latency sensitivity on the queue.
Outcome link_latency() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::vector<int> lat = {40, 100, 200, 500};
  const std::vector<Scheme> schemes = {Scheme::ideal, Scheme::central, Scheme::hier, Scheme::syncron};
  std::vector<RunConfig> runs;
  for (int l : lat) {
    for (Scheme s : schemes) {
      RunConfig c = base(s, "queue");
      apply_setting(c, "latency.link_latency_ns", std::to_string(l));
      runs.push_back(c);
    }
  }
  const auto results = run_all(runs, jobs());
  std::vector<double> central, hier, syncron;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double ideal = static_cast<double>(results[i * 4].stats.total_time);
    central.push_back(static_cast<double>(results[i * 4 + 1].stats.total_time) / ideal);
    hier.push_back(static_cast<double>(results[i * 4 + 2].stats.total_time) / ideal);
    syncron.push_back(static_cast<double>(results[i * 4 + 3].stats.total_time) / ideal);
  }
  std::string series;
  for (std::size_t i = 0; i < central.size(); ++i) {
    if (i > 0) {
      o.require(central[i] > central[i - 1], "Central slowdown not increasing at " + std::to_string(lat[i]) + " ns");
      series += " ";
    }
    series += fmt(central[i]);
  }
  o.require(central.back() > hier.back(), "Central slowdown exceeds Hier at 500 ns");
  o.require(central.back() > syncron.back(), "Central slowdown exceeds SynCron at 500 ns");
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.require(secs < 120, "runtime");
  o.note("Central slowdown " + series + "; at 500 ns Hier " + fmt(hier.back()) + ", SynCron " + fmt(syncron.back()));
  return o;
}

// 7. Flat versus hierarchical.
Outcome flat_vs_hier() {
  Outcome o;
  const auto t0 = Clock::now();
  auto ratio = [](const std::string& wl, int ns) {
    RunConfig h = base(Scheme::syncron, wl);
    apply_setting(h, "latency.link_latency_ns", std::to_string(ns));
    RunConfig f = h;
    f.system.scheme = Scheme::flat;
    const auto r = run_all({h, f}, jobs());
    return r[0].stats.throughput / r[1].stats.throughput;
  };
  const double q = ratio("queue", 500);
  const double h = ratio("hash_table", 40);
  o.require(q >= 1.5, "queue at 500 ns ratio " + fmt(q) + " < 1.5");
  o.require(std::abs(h - 1.0) <= 0.15, "hash_table at 40 ns ratio " + fmt(h) + " outside 1 +- 0.15");
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.require(secs < 120, "runtime");
  o.note("queue@500ns " + fmt(q) + ", hash_table@40ns " + fmt(h));
  return o;
}

// 8. Overflow correctness and gracefulness.
Outcome overflow() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::vector<std::uint32_t> sizes = {4, 8, 16, 64};
  std::vector<RunConfig> runs;
  for (std::uint32_t st : sizes) {
    RunConfig c = base(Scheme::syncron, "linked_list");
    c.system.st_entries = st;
    c.verify = true;
    runs.push_back(c);
  }
  const auto results = run_all(runs, jobs());
  std::string fractions;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const std::string st = "st=" + std::to_string(sizes[i]);
    o.require(r.verdict && r.verdict->pass(), "safety at " + st);
    o.require(r.stats.counters_final_total == 0, "indexing counters drained at " + st);
    if (i > 0) {
      o.require(r.stats.overflow_fraction < results[i - 1].stats.overflow_fraction,
                "overflow fraction not decreasing at " + st);
      fractions += " ";
    }
    fractions += fmt(r.stats.overflow_fraction);
  }
  const double rel = results.front().stats.throughput / results.back().stats.throughput;
  o.require(rel >= 0.75, "throughput at st=4 is " + fmt(rel) + "x of st=64 (bound 0.75)");
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.require(secs < 120, "runtime");
  o.note("overflow fraction " + fractions + "; throughput st4/st64 " + fmt(rel));
  return o;
}

// 9. ST occupancy accounting.
Outcome occupancy() {
  Outcome o;
  const Stats lock = run_stats(base(Scheme::syncron, "microbench:lock:200:50"));
  std::size_t involved = 0;
  for (const auto& n : lock.nodes) {
    if (n.messages_handled == 0) continue;
    ++involved;
    o.require(n.st_max == 1.0 / 64, "node " + std::to_string(n.node) + " max occupancy " + fmt(n.st_max, 6));
  }
  o.require(involved > 0, "at least one SE involved");
  const Stats list = run_stats(base(Scheme::syncron, "linked_list"));
  o.require(list.st_occupancy_max > list.st_occupancy_avg, "linked_list max > average");
  o.require(list.st_occupancy_avg >= 0 && list.st_occupancy_max <= 1, "occupancy within [0, 1]");
  o.note("lock: " + std::to_string(involved) + " SEs at 1/64; linked_list avg " + fmt(list.st_occupancy_avg, 4) +
         " max " + fmt(list.st_occupancy_max, 4));
  return o;
}

// 10. Energy and sync-variable memory traffic.
Outcome energy() {
  Outcome o;
  const auto t0 = Clock::now();
  std::vector<RunConfig> runs;
  for (Scheme s : {Scheme::central, Scheme::hier, Scheme::syncron, Scheme::ideal}) {
    runs.push_back(base(s, "microbench:lock:200"));
  }
  const auto r = run_all(runs, jobs());
  const auto& ce = r[0].stats;
  const auto& hi = r[1].stats;
  const auto& sy = r[2].stats;
  const auto& id = r[3].stats;
  o.require(ce.energy_network > hi.energy_network, "network energy Central > Hier");
  o.require(hi.energy_network > sy.energy_network, "network energy Hier > SynCron");
  o.require(sy.energy_network > id.energy_network, "network energy SynCron > Ideal");
  o.require(id.energy_network_sync == 0, "Ideal sync network energy is 0");
  o.require(sy.overflowed_requests == 0 && sy.syncvar_accesses == 0, "SynCron sync-variable memory accesses = 0");
  o.require(hi.syncvar_accesses > 0, "Hier sync-variable memory accesses > 0");
  o.require(ce.syncvar_accesses > 0, "Central sync-variable memory accesses > 0");
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.require(secs < 60, "runtime");
  o.note("network pJ Central " + fmt(ce.energy_network / 1000.0, 0) + " > Hier " +
         fmt(hi.energy_network / 1000.0, 0) + " > SynCron " + fmt(sy.energy_network / 1000.0, 0) + " > Ideal " +
         fmt(id.energy_network / 1000.0, 0));
  return o;
}

// 11. Determinism.
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  Outcome o;
  const auto root = std::filesystem::temp_directory_path() / "syncron_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::vector<RunConfig> runs;
  for (Scheme s : {Scheme::syncron, Scheme::central}) {
    for (const char* wl : {"hash_table:30", "microbench:condvar:200:10"}) {
      RunConfig c = base(s, wl);
      c.trace = true;
      c.seed = 5;
      c.system.st_entries = 8;
      runs.push_back(c);
    }
  }
  auto emit = [&](const std::string& tag, std::size_t j) {
    const auto dir = root / tag;
    std::filesystem::create_directories(dir);
    const auto results = run_all(runs, j);
    std::ofstream(dir / "stats.json", std::ios::binary) << stats_json_document(results);
    for (std::size_t i = 0; i < results.size(); ++i) {
      const std::string stem = "trace-" + std::to_string(i);
      write_trace_files(*results[i].trace, (dir / (stem + ".bin")).string(), (dir / (stem + ".jsonl")).string());
    }
    return dir;
  };
  const auto a = emit("a", 1);
  const auto b = emit("b", 1);
  const auto c = emit("c", 4);
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a)) {
    const auto name = entry.path().filename();
    const std::string ref = slurp(entry.path());
    o.require(!ref.empty(), name.string() + " is empty");
    o.require(ref == slurp(b / name), name.string() + " differs between repeats");
    o.require(ref == slurp(c / name), name.string() + " differs with parallel jobs");
    ++files;
  }
  std::filesystem::remove_all(root);
  o.note(std::to_string(files) + " files byte-identical across repeats and job counts");
  return o;
}

// 12. Unit arithmetic.
Outcome arithmetic() {
  Outcome o;
  const LatencyParams p;
  const EnergyParams e;
  o.require(idle_transfer_latency(p, true, 18) == 800, "18 B same-unit = 0.8 ns");
  o.require(idle_transfer_latency(p, false, 64) == 40000 + 8000 + 2 * 800, "64 B cross-unit = 49.6 ns");
  bool threw = false;
  try {
    idle_transfer_latency(p, true, 0);
  } catch (const std::invalid_argument&) {
    threw = true;
  }
  o.require(threw, "bytes = 0 rejected");
  o.require(memory_latency(MemoryTech::hbm, MemOp::read) == 24000, "HBM read 24 ns");
  o.require(memory_latency(MemoryTech::hbm, MemOp::write) == 14000, "HBM write 14 ns");
  o.require(memory_latency(MemoryTech::hbm, MemOp::read) < memory_latency(MemoryTech::ddr4, MemOp::read),
            "HBM read < DDR4 read");
  o.require(transfer_energy(p, e, true, 18) == 57600, "18 B one hop = 57.6 pJ");
  o.require(memory_energy(e, 64) == 3584000, "64 B memory access = 3.584 nJ");
  o.note("latencies and energies exact");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"codec exactness", codec},
      {"two-unit lock replay", replay},
      {"safety suite", safety},
      {"scheme equivalence", equivalence},
      {"high-contention lock trend", contention},
      {"link-latency sensitivity", link_latency},
      {"flat vs hierarchical", flat_vs_hier},
      {"overflow correctness and gracefulness", overflow},
      {"ST occupancy accounting", occupancy},
      {"energy and traffic ordering", energy},
      {"determinism", determinism},
      {"unit arithmetic", arithmetic},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail = std::string("exception: ") + ex.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
