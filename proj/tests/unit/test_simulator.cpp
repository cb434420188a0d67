#include <algorithm>
#include <map>

#include "doctest.h"
#include "helpers.hpp"
#include "syncron/errors.hpp"
#include "syncron/report.hpp"
#include "syncron/runner.hpp"
#include "syncron/verifier.hpp"

using namespace syncron;
using testing::kAllSchemes;
using testing::ScriptWorkload;
using testing::small_system;

namespace {

Program barrier_once(std::uint64_t bar, std::uint64_t participants) {
  co_yield Step::compute(5);
  co_yield Step::sync_op(SyncKind::barrier_across, bar, participants);
  co_yield Step::op_done();
}

Program cond_waiter(std::uint64_t lock, std::uint64_t cond) {
  co_yield Step::sync_op(SyncKind::lock_acquire, lock);
  co_yield Step::sync_op(SyncKind::cond_wait, cond, lock);
  co_yield Step::sync_op(SyncKind::lock_release, lock);
  co_yield Step::op_done();
}

Program cond_broadcaster(std::uint64_t lock, std::uint64_t cond) {
  co_yield Step::compute(5000);  // let every waiter park first
  co_yield Step::sync_op(SyncKind::lock_acquire, lock);
  co_yield Step::sync_op(SyncKind::cond_broadcast, cond);
  co_yield Step::sync_op(SyncKind::lock_release, lock);
  co_yield Step::op_done();
}

std::size_t sent(const Trace& t, Opcode op) {
  return static_cast<std::size_t>(
      std::count_if(t.messages.begin(), t.messages.end(), [&](const Message& m) { return m.opcode == op; }));
}

RunConfig run_cfg(Scheme s, const std::string& workload, std::uint32_t units = 4) {
  RunConfig rc;
  rc.system.scheme = s;
  rc.system.num_units = units;
  apply_setting(rc, "workload.name", workload);
  rc.verify = true;
  return rc;
}

}  // namespace

TEST_CASE("empty workload finishes at time zero") {
  SystemConfig cfg = small_system(Scheme::syncron, 2, 4, 3);
  ScriptWorkload w([](const CoreEnv&) { return testing::idle_program(); }, 0);
  Simulator sim(cfg, w);
  const Stats s = sim.run();
  CHECK(s.total_time == 0);
  CHECK(s.messages_sent == 0);
}

TEST_CASE("two-level barrier: one global wait and depart per unit") {
  const SystemConfig cfg;  // 4 x 15 clients
  const std::uint64_t bar = sync_var_addr(cfg, 0, 0);
  ScriptWorkload w([&](const CoreEnv&) { return barrier_once(bar, 60); }, 60);
  Simulator sim(cfg, w, SimOptions{true, std::nullopt, 0});
  sim.run();
  // The Master's own arrival stays local; three remote units send one each.
  CHECK(sent(sim.trace(), Opcode::barrier_wait_global) == 3);
  CHECK(sent(sim.trace(), Opcode::barrier_depart_global) == 3);
  CHECK(sent(sim.trace(), Opcode::barrier_depart_local) == 60);
  CHECK(verify(sim.trace()).pass());
}

TEST_CASE("one-level barrier: each participant is forwarded and departed") {
  const SystemConfig cfg;
  const std::uint64_t bar = sync_var_addr(cfg, 0, 0);
  // 20 of 60 clients take part: the first five of each unit.
  ScriptWorkload w(
      [&](const CoreEnv& env) { return env.core.local < 5 ? barrier_once(bar, 20) : testing::idle_program(); }, 20);
  Simulator sim(cfg, w, SimOptions{true, std::nullopt, 0});
  sim.run();
  CHECK(sent(sim.trace(), Opcode::barrier_wait_local_across_units) == 20);
  // Units 1..3 forward their 15 arrivals; unit 0 is the Master.
  CHECK(sent(sim.trace(), Opcode::barrier_wait_global) == 15);
  CHECK(sent(sim.trace(), Opcode::barrier_depart_local) == 20);
  CHECK(verify(sim.trace()).pass());
}

TEST_CASE("condvar broadcast resumes every waiter holding the lock") {
  for (Scheme s : kAllSchemes) {
    CAPTURE(scheme_name(s));
    SystemConfig cfg = small_system(s, 2, 4, 3);
    const std::uint64_t lock = sync_var_addr(cfg, 0, 0);
    const std::uint64_t cond = sync_var_addr(cfg, 0, 1);
    ScriptWorkload w(
        [&](const CoreEnv& env) {
          return env.client_index == 0 ? cond_broadcaster(lock, cond) : cond_waiter(lock, cond);
        },
        6);
    Simulator sim(cfg, w, SimOptions{true, std::nullopt, 0});
    sim.run();
    const auto wakes = std::count_if(sim.trace().records.begin(), sim.trace().records.end(),
                                     [](const TraceRecord& r) { return r.action == TraceAction::cond_wake; });
    CHECK(wakes == 5);
    const Verdict v = verify(sim.trace());
    CHECK_MESSAGE(v.pass(), v.summary());
  }
}

TEST_CASE("stack conservation and identical digests across schemes") {
  std::map<std::string, std::uint64_t> digests;
  for (Scheme s : kAllSchemes) {
    const RunResult r = run_once(run_cfg(s, "stack:20"));
    CAPTURE(scheme_name(s));
    REQUIRE(r.verdict.has_value());
    CHECK_MESSAGE(r.verdict->pass(), r.verdict->summary());
    CHECK(r.stats.workload_ops == 60 * 20);
    digests[std::string(scheme_name(s))] = r.stats.digest;
  }
  for (const auto& [name, d] : digests) CHECK(d == digests["syncron"]);
}

TEST_CASE("ideal sends no synchronization messages") {
  const RunResult r = run_once(run_cfg(Scheme::ideal, "microbench:lock:200:20"));
  CHECK(r.stats.messages_sent == 0);
  CHECK(r.stats.energy_network_sync == 0);
  CHECK(r.verdict->pass());
}

TEST_CASE("hash table spreads load over the SEs") {
  const RunResult r = run_once(run_cfg(Scheme::syncron, "hash_table:50"));
  REQUIRE(r.stats.nodes.size() == 4);
  std::uint64_t lo = ~0ull, hi = 0;
  for (const auto& n : r.stats.nodes) {
    lo = std::min(lo, n.core_requests);
    hi = std::max(hi, n.core_requests);
  }
  CHECK(lo > 0);
  // Each SE sees its own unit's 15 clients: identical request counts.
  CHECK(hi == lo);
  std::uint64_t handled_lo = ~0ull, handled_hi = 0;
  for (const auto& n : r.stats.nodes) {
    handled_lo = std::min(handled_lo, n.messages_handled);
    handled_hi = std::max(handled_hi, n.messages_handled);
  }
  CHECK(static_cast<double>(handled_hi) < 1.5 * static_cast<double>(handled_lo));
}

TEST_CASE("message conservation and counters draining") {
  for (Scheme s : kAllSchemes) {
    for (const char* w : {"microbench:semaphore:100:20", "queue:20", "linked_list:2"}) {
      RunConfig rc = run_cfg(s, w);
      rc.system.st_entries = 8;
      const RunResult r = run_once(rc);
      CAPTURE(scheme_name(s));
      CAPTURE(w);
      CHECK(r.stats.messages_sent == r.stats.messages_received);
      CHECK(r.stats.counters_final_total == 0);
      CHECK(r.verdict->pass());
    }
  }
}

TEST_CASE("no core proceeds before its grant") {
  const RunResult r = run_once(run_cfg(Scheme::syncron, "hash_table:20"));
  REQUIRE(r.trace.has_value());
  std::map<std::uint32_t, Picos> granted;
  std::map<std::uint32_t, bool> waiting;
  for (const auto& rec : r.trace->records) {
    if (rec.actor.kind != Endpoint::Kind::core) continue;
    const auto id = rec.actor.id;
    if (rec.action == TraceAction::sync_request && rec.aux == static_cast<std::uint64_t>(SyncKind::lock_acquire)) {
      waiting[id] = true;
    } else if (rec.action == TraceAction::cs_enter) {
      waiting[id] = false;
      granted[id] = rec.time;
    } else if (rec.action == TraceAction::mem_op) {
      CHECK_FALSE(waiting[id]);
      CHECK(rec.time >= granted[id]);
    }
  }
}

TEST_CASE("a dropped grant is detected as a deadlock") {
  RunConfig rc = run_cfg(Scheme::syncron, "microbench:lock:50:10");
  rc.drop_grant = 5;
  CHECK_THROWS_AS(run_once(rc), DeadlockError);
}

TEST_CASE("runs are deterministic and independent of job count") {
  std::vector<RunConfig> cfgs;
  for (Scheme s : kAllSchemes) {
    RunConfig rc = run_cfg(s, "queue:10", 2);
    rc.trace = true;
    cfgs.push_back(rc);
  }
  const auto serial = run_all(cfgs, 1);
  const auto parallel = run_all(cfgs, 4);
  CHECK(stats_json_document(serial) == stats_json_document(parallel));
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].trace->records == parallel[i].trace->records);
}

TEST_CASE("occupancy of a single-variable microbenchmark") {
  const RunResult r = run_once(run_cfg(Scheme::syncron, "microbench:lock:200:20"));
  CHECK(r.stats.st_occupancy_max == doctest::Approx(1.0 / 64));
  CHECK(r.stats.st_occupancy_avg <= r.stats.st_occupancy_max);
}
