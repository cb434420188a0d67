#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "syncron/latency.hpp"
#include "syncron/messages.hpp"
#include "syncron/sync_table.hpp"
#include "syncron/topology.hpp"

namespace syncron {

// hierarchical: cores talk to their own unit's engine, which aggregates
// towards the variable's Master. flat: cores talk to the Master directly.
enum class EngineMode { hierarchical, flat };

// table: SE with a bounded ST and the memory-backed overflow path.
// memory: software server keeping every variable record in memory.
enum class StateBackend { table, memory };

// Memory-resident record for a variable that could not be buffered in an ST.
struct SyncronVar {
  std::vector<std::uint64_t> wait_lists;  // one list per SE, one bit per local core
  std::uint64_t var_info = 0;
  std::uint64_t overflow_info = 0;        // SEs that redirected per-core requests
  // Acquire-type overflow requests received from each SE during the current
  // episode; returned to that SE by decrease_indexing_counter.
  std::vector<std::uint32_t> overflow_requests;
  EntryKind kind = EntryKind::none;
};

struct Endpoint {
  enum class Kind : std::uint8_t { core, node };
  Kind kind = Kind::core;
  std::uint32_t id = 0;  // global core id or node (unit) id

  static Endpoint core(std::uint32_t g) { return {Kind::core, g}; }
  static Endpoint node(std::uint32_t n) { return {Kind::node, n}; }
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct Outgoing {
  Endpoint to;
  Message msg;
};

struct MemoryOp {
  MemOp op = MemOp::read;
  std::uint64_t addr = 0;
  std::uint32_t unit = 0;  // memory controller that holds the record
  std::uint32_t bytes = 64;
  bool syncronvar = false;  // SE overflow record, as opposed to server state
};

struct StEvent {
  bool reserve = true;
  std::uint64_t addr = 0;
};

struct HandlerOutput {
  std::vector<Outgoing> outgoing;
  std::vector<MemoryOp> memory_ops;
  std::vector<CoreId> wakeups;
  std::vector<StEvent> st_events;
  bool overflowed = false;  // a core request took the memory/redirect path
};

struct EngineConfig {
  std::uint32_t node_id = 0;
  std::uint32_t num_units = 1;
  std::uint32_t cores_per_unit = 1;
  std::uint32_t clients_per_unit = 1;
  std::size_t st_entries = 64;  // 0 = unbounded
  std::size_t index_counters = 256;
  EngineMode mode = EngineMode::hierarchical;
  StateBackend backend = StateBackend::table;
  std::function<std::uint32_t(std::uint64_t)> master_of;
  std::function<std::uint32_t(std::uint64_t)> home_of;
};

// Engine configuration for node `node_id` of a system running cfg.scheme.
EngineConfig engine_config_for(const SystemConfig& cfg, std::uint32_t node_id);

// A synchronization participant as seen by the variable's coordinator: a
// single core, or a whole SE aggregating its unit's cores.
struct Participant {
  bool se = false;
  std::uint32_t id = 0;  // global core id, or SE id
  static Participant core(std::uint32_t g) { return {false, g}; }
  static Participant unit(std::uint32_t s) { return {true, s}; }
  friend bool operator==(const Participant&, const Participant&) = default;
};

// Lock ownership word: SE id in bits 48..63, core id in bits 0..15, all-ones
// fields mean "none". At the Master exactly one field is set while held; at a
// non-Master SE the SE field marks that this SE holds the global grant.
std::uint64_t make_lock_info(std::optional<std::uint32_t> se, std::optional<std::uint32_t> core);
std::optional<std::uint32_t> lock_info_se(std::uint64_t info);
std::optional<std::uint32_t> lock_info_core(std::uint64_t info);

class SyncEngine {
 public:
  explicit SyncEngine(EngineConfig cfg);

  HandlerOutput handle_message(const Message& m, Picos now);

  const EngineConfig& config() const { return cfg_; }
  const SynchronizationTable& table() const { return table_; }
  const IndexingCounters& counters() const { return counters_; }
  const SyncronVar* syncronvar(std::uint64_t addr) const;
  std::size_t live_syncronvars() const { return memory_.size(); }
  // Human-readable state summary used in deadlock reports.
  std::string describe() const;

 private:
  struct Ctx;
  class View;
  class TableView;
  class MemView;

  struct CoreRegs {
    std::uint64_t cond_lock = 0;
    std::optional<std::uint64_t> wake_cond;
  };

  bool flat() const { return cfg_.mode == EngineMode::flat; }
  bool is_master(std::uint64_t addr) const { return cfg_.master_of(addr) == cfg_.node_id; }
  std::uint32_t to_global(std::uint32_t local) const { return cfg_.node_id * cfg_.cores_per_unit + local; }
  std::uint32_t unit_of_core(std::uint32_t g) const { return g / cfg_.cores_per_unit; }
  std::uint32_t local_of_core(std::uint32_t g) const { return g % cfg_.cores_per_unit; }
  std::uint8_t pack(std::uint32_t g) const;
  std::uint32_t unpack(std::uint8_t packed) const;
  std::uint32_t total_clients() const { return cfg_.num_units * cfg_.clients_per_unit; }

  void dispatch(Ctx& ctx, const Message& m, bool top);
  void process_table(Ctx& ctx, STEntry& e, const Message& m, bool fresh);
  void process_memory(Ctx& ctx, const Message& m);
  void overflow_acquire_at_master(Ctx& ctx, const Message& m);
  void forward_overflow(Ctx& ctx, const Message& m);
  void relay_to_core(Ctx& ctx, const Message& m);

  Participant participant_of(const Message& m) const;
  bool authority_for(const Message& m) const;

  // Coordinator logic, shared by ST entries and syncronVar records.
  void master_lock(Ctx& ctx, View& v, const Message& m, Participant p);
  void master_barrier(Ctx& ctx, View& v, const Message& m, Participant p);
  void master_semaphore(Ctx& ctx, View& v, const Message& m, Participant p);
  void master_condvar(Ctx& ctx, View& v, const Message& m, Participant p);
  bool quiescent(const View& v, EntryKind kind) const;
  void cond_signal_one(Ctx& ctx, View& v, std::uint64_t addr);
  void cond_wake(Ctx& ctx, View& v, std::uint64_t addr, Participant p, bool broadcast);

  // Non-Master side of the hierarchical protocol (ST entries only).
  void local_lock(Ctx& ctx, STEntry& e, const Message& m, bool fresh);
  void local_barrier(Ctx& ctx, STEntry& e, const Message& m, bool fresh);
  void local_semaphore(Ctx& ctx, STEntry& e, const Message& m, bool fresh);
  void local_condvar(Ctx& ctx, STEntry& e, const Message& m, bool fresh);

  void deliver_grant(Ctx& ctx, const View& v, Primitive prim, std::uint64_t addr, Participant p,
                     std::uint64_t count);
  void deliver_depart(Ctx& ctx, const View& v, std::uint64_t addr, Participant p);
  void grant_core(Ctx& ctx, Opcode op, std::uint64_t addr, std::uint32_t g, std::uint64_t info);
  void send_node(Ctx& ctx, std::uint32_t node, Opcode op, std::uint64_t addr, std::uint8_t core_id,
                 std::uint64_t info);
  void internal_lock_release(Ctx& ctx, std::uint64_t lock, std::uint32_t g);
  void release_entry(Ctx& ctx, std::uint64_t addr);

  SyncronVar& load_var(Ctx& ctx, std::uint64_t addr, bool read);
  void finish_var(Ctx& ctx, std::uint64_t addr, bool was_active);
  bool var_quiescent(const SyncronVar& v) const;
  std::uint32_t record_unit(std::uint64_t addr, bool authority) const;

  [[noreturn]] void fail(const Message& m, const std::string& why) const;

  EngineConfig cfg_;
  SynchronizationTable table_;
  IndexingCounters counters_;
  std::map<std::uint64_t, SyncronVar> memory_;
  std::vector<CoreRegs> regs_;
};

}  // namespace syncron
