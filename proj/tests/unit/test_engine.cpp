#include <algorithm>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "syncron/errors.hpp"
#include "syncron/sync_engine.hpp"
#include "syncron/verifier.hpp"

using namespace syncron;
using testing::ScriptWorkload;
using testing::small_system;

namespace {

Message msg(std::uint64_t addr, Opcode op, std::uint8_t core, std::uint64_t info = 0) { return {addr, op, core, info}; }

std::size_t count_to_node(const HandlerOutput& out, Opcode op) {
  return static_cast<std::size_t>(std::count_if(out.outgoing.begin(), out.outgoing.end(), [&](const Outgoing& o) {
    return o.to.kind == Endpoint::Kind::node && o.msg.opcode == op;
  }));
}

bool grants_core(const HandlerOutput& out, std::uint32_t g, Opcode op) {
  return std::any_of(out.outgoing.begin(), out.outgoing.end(),
                     [&](const Outgoing& o) { return o.to == Endpoint::core(g) && o.msg.opcode == op; });
}

Program acquire_release(std::uint64_t lock) {
  co_yield Step::sync_op(SyncKind::lock_acquire, lock);
  co_yield Step::compute(10);
  co_yield Step::sync_op(SyncKind::lock_release, lock);
  co_yield Step::op_done();
}

std::size_t sent(const Trace& t, Opcode op) {
  return static_cast<std::size_t>(
      std::count_if(t.messages.begin(), t.messages.end(), [&](const Message& m) { return m.opcode == op; }));
}

}  // namespace

TEST_CASE("local cores at the Master need no global messages") {
  const SystemConfig cfg = small_system(Scheme::syncron, 2, 4, 4);
  SyncEngine se(engine_config_for(cfg, 0));
  const std::uint64_t lock = sync_var_addr(cfg, 0, 0);

  HandlerOutput out = se.handle_message(msg(lock, Opcode::lock_acquire_local, 0), 0);
  CHECK(grants_core(out, 0, Opcode::lock_grant_local));
  for (std::uint8_t c = 1; c < 4; ++c) CHECK(se.handle_message(msg(lock, Opcode::lock_acquire_local, c), 0).outgoing.empty());
  for (std::uint8_t c = 0; c < 4; ++c) {
    out = se.handle_message(msg(lock, Opcode::lock_release_local, c), 0);
    CHECK(count_to_node(out, Opcode::lock_acquire_global) == 0);
    CHECK(count_to_node(out, Opcode::lock_release_global) == 0);
    if (c < 3) CHECK(grants_core(out, c + 1u, Opcode::lock_grant_local));
  }
  CHECK(se.table().occupied() == 0);
}

TEST_CASE("release by a non-owner is a protocol error") {
  const SystemConfig cfg = small_system(Scheme::syncron, 1, 4, 4);
  SyncEngine se(engine_config_for(cfg, 0));
  const std::uint64_t lock = sync_var_addr(cfg, 0, 0);
  se.handle_message(msg(lock, Opcode::lock_acquire_local, 0), 0);
  CHECK_THROWS_AS(se.handle_message(msg(lock, Opcode::lock_release_local, 1), 0), ProtocolError);
}

TEST_CASE("non-Master SE with a one-entry ST sends the second variable down the overflow path") {
  SystemConfig cfg = small_system(Scheme::syncron, 2, 2, 2);
  cfg.st_entries = 1;
  SyncEngine se(engine_config_for(cfg, 1));
  const std::uint64_t a = sync_var_addr(cfg, 0, 0);
  const std::uint64_t b = sync_var_addr(cfg, 0, 1);

  HandlerOutput out = se.handle_message(msg(a, Opcode::lock_acquire_local, 0), 0);
  CHECK(count_to_node(out, Opcode::lock_acquire_global) == 1);
  CHECK_FALSE(out.overflowed);
  CHECK(se.counters().value(b) == 0);

  out = se.handle_message(msg(b, Opcode::lock_acquire_local, 1), 0);
  CHECK(out.overflowed);
  CHECK(count_to_node(out, Opcode::lock_acquire_overflow) == 1);
  CHECK(se.counters().value(b) == 1);
  CHECK(se.table().lookup(b) == nullptr);
}

TEST_CASE("Master with a full ST records a remote SE's acquire as all-ones") {
  SystemConfig cfg = small_system(Scheme::syncron, 2, 4, 4);
  cfg.st_entries = 1;
  SyncEngine se(engine_config_for(cfg, 0));
  const std::uint64_t x = sync_var_addr(cfg, 0, 0);
  const std::uint64_t y = sync_var_addr(cfg, 0, 1);

  se.handle_message(msg(x, Opcode::lock_acquire_local, 0), 0);
  CHECK(se.table().full());
  const HandlerOutput out = se.handle_message(msg(y, Opcode::lock_acquire_global, 1), 0);
  // Only core requests count towards the overflow fraction.
  CHECK_FALSE(out.overflowed);
  CHECK(std::any_of(out.memory_ops.begin(), out.memory_ops.end(),
                    [](const MemoryOp& op) { return op.op == MemOp::read && op.syncronvar; }));
  const SyncronVar* v = se.syncronvar(y);
  REQUIRE(v != nullptr);
  CHECK(v->wait_lists[1] == 0xF);
  CHECK(count_to_node(out, Opcode::lock_grant_global) == 1);
}

TEST_CASE("barrier within a unit departs everyone on the last arrival") {
  const SystemConfig cfg = small_system(Scheme::syncron, 1, 4, 4);
  SyncEngine se(engine_config_for(cfg, 0));
  const std::uint64_t bar = sync_var_addr(cfg, 0, 0);
  for (std::uint8_t c = 0; c < 3; ++c) {
    CHECK(se.handle_message(msg(bar, Opcode::barrier_wait_local_within_unit, c, 4), 0).outgoing.empty());
  }
  const HandlerOutput out = se.handle_message(msg(bar, Opcode::barrier_wait_local_within_unit, 3, 4), 0);
  CHECK(out.outgoing.size() == 4);
  for (std::uint32_t c = 0; c < 4; ++c) CHECK(grants_core(out, c, Opcode::barrier_depart_local));
  CHECK(se.table().occupied() == 0);
}

TEST_CASE("semaphore with two resources") {
  const SystemConfig cfg = small_system(Scheme::syncron, 1, 4, 4);
  SyncEngine se(engine_config_for(cfg, 0));
  const std::uint64_t sem = sync_var_addr(cfg, 0, 0);
  int granted = 0;
  for (std::uint8_t c = 0; c < 4; ++c) {
    if (grants_core(se.handle_message(msg(sem, Opcode::sem_wait_local, c, 2), 0), c, Opcode::sem_grant_local)) ++granted;
  }
  CHECK(granted == 2);
  CHECK(grants_core(se.handle_message(msg(sem, Opcode::sem_post_local, 0), 0), 2, Opcode::sem_grant_local));
  CHECK(grants_core(se.handle_message(msg(sem, Opcode::sem_post_local, 1), 0), 3, Opcode::sem_grant_local));
}

TEST_CASE("condvar signal with no waiters is lost") {
  const SystemConfig cfg = small_system(Scheme::syncron, 1, 4, 4);
  SyncEngine se(engine_config_for(cfg, 0));
  const std::uint64_t cond = sync_var_addr(cfg, 0, 1);
  const HandlerOutput out = se.handle_message(msg(cond, Opcode::cond_signal_local, 0), 0);
  CHECK(out.outgoing.empty());
  CHECK(se.table().occupied() == 0);
}

TEST_CASE("cond_wait without the lock is a protocol error") {
  const SystemConfig cfg = small_system(Scheme::syncron, 1, 4, 4);
  SyncEngine se(engine_config_for(cfg, 0));
  const std::uint64_t lock = sync_var_addr(cfg, 0, 0);
  const std::uint64_t cond = sync_var_addr(cfg, 0, 1);
  CHECK_THROWS_AS(se.handle_message(msg(cond, Opcode::cond_wait_local, 0, lock), 0), ProtocolError);
}

TEST_CASE("lock_info packing") {
  const std::uint64_t none = make_lock_info(std::nullopt, std::nullopt);
  CHECK(none == kNoOwner);
  CHECK_FALSE(lock_info_se(none).has_value());
  CHECK_FALSE(lock_info_core(none).has_value());
  const std::uint64_t se = make_lock_info(3, std::nullopt);
  CHECK(lock_info_se(se) == 3u);
  CHECK_FALSE(lock_info_core(se).has_value());
  const std::uint64_t core = make_lock_info(std::nullopt, 5);
  CHECK(lock_info_core(core) == 5u);
}

TEST_CASE("two-unit lock replay: local-first grants and one aggregated global exchange") {
  // 2 units x 2 cores, all four acquiring one lock homed at unit 0.
  const SystemConfig cfg = small_system(Scheme::syncron, 2, 2, 2);
  const std::uint64_t lock = sync_var_addr(cfg, 0, 0);
  ScriptWorkload w([&](const CoreEnv&) { return acquire_release(lock); }, 4);
  Simulator sim(cfg, w, SimOptions{true, std::nullopt, 0});
  sim.run();
  const Trace& t = sim.trace();

  std::vector<std::uint32_t> order;
  for (const auto& r : t.records) {
    if (r.action == TraceAction::cs_enter) order.push_back(r.actor.id);
  }
  CHECK(order == std::vector<std::uint32_t>{0, 1, 2, 3});
  CHECK(sent(t, Opcode::lock_acquire_global) == 1);
  CHECK(sent(t, Opcode::lock_release_global) == 1);
  CHECK(sent(t, Opcode::lock_grant_global) == 1);
  CHECK(verify(t).pass());

  // Flat sends every request to the Master: strictly more inter-unit traffic.
  SystemConfig flat_cfg = cfg;
  flat_cfg.scheme = Scheme::flat;
  ScriptWorkload wf([&](const CoreEnv&) { return acquire_release(lock); }, 4);
  Simulator flat(flat_cfg, wf, SimOptions{true, std::nullopt, 0});
  Simulator hier_sim(cfg, w, SimOptions{});
  CHECK(flat.run().messages_inter > hier_sim.run().messages_inter);
}

TEST_CASE("overflowed lock completes and counters drain") {
  SystemConfig cfg = small_system(Scheme::syncron, 2, 2, 2);
  cfg.st_entries = 1;
  const std::uint64_t a = sync_var_addr(cfg, 0, 0);
  const std::uint64_t b = sync_var_addr(cfg, 0, 1);
  // Unit 1's cores take different locks at once so its one-entry ST overflows.
  ScriptWorkload w([&](const CoreEnv& env) { return acquire_release(env.core.local == 0 ? a : b); }, 4);
  Simulator sim(cfg, w, SimOptions{true, std::nullopt, 0});
  const Stats s = sim.run();
  CHECK(s.overflowed_requests > 0);
  CHECK(s.syncvar_accesses > 0);
  CHECK(s.counters_final_total == 0);
  for (std::uint32_t n = 0; n < sim.node_count(); ++n) {
    CHECK(sim.engine(n).counters().total() == 0);
    CHECK(sim.engine(n).live_syncronvars() == 0);
  }
  CHECK(verify(sim.trace()).pass());
}
