#include "syncron/simulator.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "syncron/baselines.hpp"
#include "syncron/errors.hpp"
#include "syncron/event_queue.hpp"
#include "syncron/network.hpp"

namespace syncron {
namespace {

Opcode request_opcode(SyncKind k) {
  switch (k) {
    case SyncKind::lock_acquire: return Opcode::lock_acquire_local;
    case SyncKind::lock_release: return Opcode::lock_release_local;
    case SyncKind::barrier_within: return Opcode::barrier_wait_local_within_unit;
    case SyncKind::barrier_across: return Opcode::barrier_wait_local_across_units;
    case SyncKind::sem_wait: return Opcode::sem_wait_local;
    case SyncKind::sem_post: return Opcode::sem_post_local;
    case SyncKind::cond_wait: return Opcode::cond_wait_local;
    case SyncKind::cond_signal: return Opcode::cond_signal_local;
    case SyncKind::cond_broadcast: return Opcode::cond_broad_local;
  }
  return Opcode::lock_acquire_local;
}

Opcode completion_opcode(SyncKind k) {
  switch (k) {
    case SyncKind::lock_acquire: return Opcode::lock_grant_local;
    case SyncKind::barrier_within:
    case SyncKind::barrier_across: return Opcode::barrier_depart_local;
    case SyncKind::sem_wait: return Opcode::sem_grant_local;
    case SyncKind::cond_wait: return Opcode::cond_grant_local;
    default: break;
  }
  throw ProtocolError("non-blocking operation has no completion");
}

std::string ns_string(Picos t) {
  std::ostringstream os;
  os << to_ns(t) << "ns";
  return os.str();
}

}  // namespace

struct Simulator::Impl {
  enum class Phase { idle, running, blocked, finished };

  struct CoreState {
    CoreId id;
    std::uint32_t global = 0;
    bool client = false;
    Program program;
    Phase phase = Phase::idle;
    SyncKind kind = SyncKind::lock_acquire;
    Opcode expect = Opcode::lock_grant_local;
    std::uint64_t expect_addr = 0;
    std::uint64_t info = 0;
    std::uint64_t cond_lock = 0;
    bool relocking = false;
    Picos finish = 0;
  };

  struct InboxItem {
    Message msg;
    Endpoint from;
  };

  struct NodeState {
    std::uint32_t id = 0;
    SyncEngine engine;
    Location loc;
    std::deque<InboxItem> inbox;
    bool busy = false;
    HandlerOutput out;
    OccupancyTracker occupancy;
    ServerCache cache;
    NodeStats stats;
  };

  SystemConfig cfg;
  Workload& workload;
  SimOptions opt;
  bool ideal;
  bool hierarchical;
  bool server;
  Network net;
  EventQueue queue;
  std::vector<CoreState> cores;
  std::vector<std::unique_ptr<NodeState>> nodes;
  std::map<std::pair<std::uint32_t, std::uint32_t>, Picos> pair_last;  // per (src, dst) FIFO delivery
  Stats stats;
  Trace trace;
  std::uint64_t core_deliveries = 0;
  Picos now = 0;
  bool ran = false;

  Impl(const SystemConfig& c, Workload& w, SimOptions o)
      : cfg(c),
        workload(w),
        opt(o),
        ideal(c.scheme == Scheme::ideal),
        hierarchical(is_hierarchical(c.scheme)),
        server(uses_server(c.scheme)),
        net(c) {
    cfg.validate();
    for (std::uint32_t g = 0; g < cfg.total_cores(); ++g) {
      CoreState cs;
      cs.id = resolve_core(g, cfg);
      cs.global = g;
      cs.client = is_client(cs.id, cfg);
      cores.push_back(std::move(cs));
    }
    for (std::uint32_t n = 0; n < num_nodes(cfg); ++n) {
      const NodePlacement p = node_placement(cfg, n);
      auto ns = std::unique_ptr<NodeState>(new NodeState{
          n, SyncEngine(engine_config_for(cfg, n)),
          p.server_core ? Location{p.unit, p.local} : net.se(p.unit), {}, false, {},
          OccupancyTracker(cfg.scheme == Scheme::syncron || cfg.scheme == Scheme::flat ? cfg.st_entries : 0),
          ServerCache(256), NodeStats{}});
      ns->stats.node = n;
      nodes.push_back(std::move(ns));
    }
    trace.header.expected_ops = workload.expected_ops();
    trace.header.scheme = std::string(scheme_name(cfg.scheme));
    trace.header.workload = workload.name();
    trace.header.units = cfg.num_units;
    trace.header.cores_per_unit = cfg.cores_per_unit;
  }

  Location location(const Endpoint& e) const {
    if (e.kind == Endpoint::Kind::core) return net.core(cores[e.id].id);
    return nodes[e.id]->loc;
  }

  void record(Endpoint actor, TraceAction a, std::uint64_t addr, std::uint64_t aux = 0, std::uint64_t aux2 = 0,
              std::uint64_t aux3 = 0) {
    if (opt.record_trace) trace.add(now, actor, a, addr, aux, aux2, aux3);
  }

  void account_transfer(const Transfer& tr, std::uint32_t bytes) {
    (tr.inter ? stats.bytes_inter : stats.bytes_intra) += bytes;
    stats.energy_network += tr.energy;
  }

  void send_message(Endpoint from, Endpoint to, const Message& m) {
    Picos arrival = now;
    if (!ideal) {
      const Transfer tr = net.send(now, location(from), location(to), static_cast<std::uint32_t>(kMessageBytes));
      account_transfer(tr, kMessageBytes);
      stats.energy_network_sync += tr.energy;
      ++stats.messages_sent;
      ++(tr.inter ? stats.messages_inter : stats.messages_intra);
      arrival = tr.arrival;
    }
    // Messages between the same two endpoints never overtake each other.
    Picos& last = pair_last[{source_id(from), source_id(to)}];
    arrival = std::max(arrival, last);
    last = arrival;
    if (opt.record_trace) {
      record(from, TraceAction::msg_send, m.addr, static_cast<std::uint64_t>(m.opcode), source_id(to),
             trace.messages.size());
      trace.messages.push_back(m);
    }
    Event e;
    e.time = arrival;
    e.kind = EventKind::msg_arrival;
    e.source = source_id(from);
    e.target = to;
    e.from = from;
    e.msg = m;
    queue.schedule(e);
  }

  // Round trip to a memory controller; returns the completion time.
  Picos memory_access(Picos t, Location from, std::uint32_t unit, MemOp op) {
    const Location mc = net.memory(unit);
    const std::uint32_t req = op == MemOp::read ? 8 : 64;
    const std::uint32_t resp = op == MemOp::read ? 64 : 8;
    const Transfer a = net.send(t, from, mc, req);
    account_transfer(a, req);
    const Picos done = a.arrival + memory_latency(cfg.latency, op);
    const Transfer b = net.send(done, mc, from, resp);
    account_transfer(b, resp);
    stats.energy_memory += memory_energy(cfg.energy, 64);
    return b.arrival;
  }

  void schedule_core(CoreState& c, Picos t, EventKind kind) {
    Event e;
    e.time = t;
    e.kind = kind;
    e.source = c.global;
    e.target = Endpoint::core(c.global);
    queue.schedule(e);
  }

  void advance(CoreState& c) {
    c.phase = Phase::running;
    const Endpoint self = Endpoint::core(c.global);
    while (true) {
      std::optional<Step> step = c.program.next();
      if (!step) {
        c.phase = Phase::finished;
        c.finish = now;
        return;
      }
      switch (step->kind) {
        case Step::Kind::compute:
          if (step->instructions == 0) continue;
          schedule_core(c, now + static_cast<Picos>(step->instructions) * cfg.latency.core_cycle,
                        EventKind::compute_done);
          return;
        case Step::Kind::mem: {
          const std::uint32_t home = unit_of(step->addr, cfg);
          ++(home == c.id.unit ? stats.mem_local : stats.mem_remote);
          record(self, TraceAction::mem_op, step->addr, step->write ? 1 : 0, home);
          const Picos done = memory_access(now, net.core(c.id), home, step->write ? MemOp::write : MemOp::read);
          schedule_core(c, done, EventKind::mem_done);
          return;
        }
        case Step::Kind::op_done:
          ++stats.workload_ops;
          record(self, TraceAction::op_complete, 0);
          continue;
        case Step::Kind::sync:
          issue_sync(c, *step);
          if (is_blocking(step->sync)) return;
          // Asynchronous requests retire after one cycle.
          schedule_core(c, now + cfg.latency.core_cycle, EventKind::compute_done);
          return;
      }
    }
  }

  std::uint8_t wire_core_id(const CoreState& c) const {
    return static_cast<std::uint8_t>(hierarchical ? c.id.local : c.global);
  }

  void issue_sync(CoreState& c, const Step& s) {
    const Endpoint self = Endpoint::core(c.global);
    switch (s.sync) {
      case SyncKind::lock_acquire: ++stats.lock_acquires; break;
      case SyncKind::lock_release: ++stats.lock_releases; break;
      case SyncKind::barrier_within:
      case SyncKind::barrier_across: ++stats.barrier_waits; break;
      case SyncKind::sem_wait: ++stats.sem_waits; break;
      case SyncKind::sem_post: ++stats.sem_posts; break;
      case SyncKind::cond_wait: ++stats.cond_waits; break;
      case SyncKind::cond_signal: ++stats.cond_signals; break;
      case SyncKind::cond_broadcast: ++stats.cond_broadcasts; break;
    }
    record(self, TraceAction::sync_request, s.addr, static_cast<std::uint64_t>(s.sync));
    switch (s.sync) {
      case SyncKind::lock_release: record(self, TraceAction::cs_exit, s.addr); break;
      case SyncKind::sem_post: record(self, TraceAction::sem_release, s.addr); break;
      case SyncKind::barrier_within:
      case SyncKind::barrier_across: record(self, TraceAction::barrier_arrive, s.addr, s.info); break;
      case SyncKind::cond_wait: record(self, TraceAction::cond_sleep, s.addr, s.info); break;
      default: break;
    }
    const std::uint32_t node = request_target(cfg, c.id, s.addr);
    send_message(self, Endpoint::node(node), Message{s.addr, request_opcode(s.sync), wire_core_id(c), s.info});
    if (is_blocking(s.sync)) {
      c.phase = Phase::blocked;
      c.kind = s.sync;
      c.expect = completion_opcode(s.sync);
      c.expect_addr = s.addr;
      c.info = s.info;
      if (s.sync == SyncKind::cond_wait) c.cond_lock = s.info;
    }
  }

  void on_core_message(CoreState& c, const Message& m, const Endpoint& from) {
    const Endpoint self = Endpoint::core(c.global);
    record(self, TraceAction::msg_recv, m.addr, static_cast<std::uint64_t>(m.opcode), source_id(from));
    ++core_deliveries;
    if (opt.drop_grant && core_deliveries == *opt.drop_grant) {
      ++stats.grants_dropped;
      record(self, TraceAction::grant_dropped, m.addr, static_cast<std::uint64_t>(m.opcode));
      return;
    }
    if (c.phase != Phase::blocked || m.opcode != c.expect || m.addr != c.expect_addr) {
      std::ostringstream os;
      os << "core " << c.global << " received unexpected " << opcode_name(m.opcode) << " for 0x" << std::hex << m.addr
         << std::dec << " at " << ns_string(now);
      throw ProtocolError(os.str());
    }
    switch (m.opcode) {
      case Opcode::lock_grant_local:
        c.relocking = false;
        record(self, TraceAction::cs_enter, m.addr);
        break;
      case Opcode::barrier_depart_local: record(self, TraceAction::barrier_depart, m.addr); break;
      case Opcode::sem_grant_local: record(self, TraceAction::sem_acquire, m.addr, c.info); break;
      case Opcode::cond_grant_local:
        record(self, TraceAction::cond_wake, m.addr);
        if (hierarchical) {
          // The SE re-acquired the lock before answering.
          record(self, TraceAction::cs_enter, c.cond_lock);
          break;
        }
        // Flat schemes: the woken core takes the lock back itself.
        c.relocking = true;
        c.expect = Opcode::lock_grant_local;
        c.expect_addr = c.cond_lock;
        send_message(self, Endpoint::node(request_target(cfg, c.id, c.cond_lock)),
                     Message{c.cond_lock, Opcode::lock_acquire_local, wire_core_id(c), 0});
        return;
      default: break;
    }
    advance(c);
  }

  Picos server_access(NodeState& n, const MemoryOp& op, Picos t) {
    ++stats.syncvar_accesses;
    const ServerCache::Access a = n.cache.access(op.addr, op.op);
    if (a.writeback) {
      // Dirty victim drains in the background.
      ++stats.syncvar_dram;
      const std::uint32_t home = cfg.scheme == Scheme::central ? unit_of(*a.writeback, cfg) : n.loc.unit;
      memory_access(t, n.loc, home, MemOp::write);
    }
    if (a.hit) {
      ++n.stats.cache_hits;
      stats.energy_cache += cfg.energy.l1_hit;
      return t + cfg.latency.l1_hit();
    }
    ++n.stats.cache_misses;
    ++stats.syncvar_dram;
    stats.energy_cache += cfg.energy.l1_miss;
    return memory_access(t, n.loc, op.unit, MemOp::read) + cfg.latency.l1_hit();
  }

  Picos table_access(NodeState& n, const MemoryOp& op, Picos t) {
    ++stats.syncvar_accesses;
    ++stats.syncvar_dram;
    return memory_access(t, n.loc, op.unit, op.op);
  }

  void start_service(NodeState& n) {
    const InboxItem item = n.inbox.front();
    n.inbox.pop_front();
    n.busy = true;
    const Endpoint self = Endpoint::node(n.id);
    try {
      n.out = n.engine.handle_message(item.msg, now);
    } catch (const ProtocolError& e) {
      throw ProtocolError(std::string(e.what()) + " at " + ns_string(now));
    }
    if (item.from.kind == Endpoint::Kind::core) {
      ++n.stats.core_requests;
      if (n.out.overflowed) ++n.stats.overflowed_requests;
    }
    for (const StEvent& ev : n.out.st_events) {
      record(self, ev.reserve ? TraceAction::st_reserve : TraceAction::st_release, ev.addr);
    }
    n.occupancy.update(now, n.engine.table().occupied());

    Picos t = now;
    if (!ideal) {
      for (const MemoryOp& op : n.out.memory_ops) {
        if (op.op != MemOp::read) continue;
        record(self, TraceAction::mem_op, op.addr, 0, op.unit);
        t = server ? server_access(n, op, t) : table_access(n, op, t);
      }
      t += cfg.latency.se_service();
      for (const MemoryOp& op : n.out.memory_ops) {
        if (op.op != MemOp::write) continue;
        record(self, TraceAction::mem_op, op.addr, 1, op.unit);
        t = server ? server_access(n, op, t) : table_access(n, op, t);
      }
    }
    n.stats.busy_time += t - now;
    Event e;
    e.time = t;
    e.kind = EventKind::se_service_done;
    e.source = source_id(self);
    e.target = self;
    queue.schedule(e);
  }

  void finish_service(NodeState& n) {
    const Endpoint self = Endpoint::node(n.id);
    ++n.stats.messages_handled;
    HandlerOutput out = std::move(n.out);
    n.out = {};
    for (const Outgoing& o : out.outgoing) send_message(self, o.to, o.msg);
    n.busy = false;
    if (!n.inbox.empty()) start_service(n);
  }

  void on_node_message(NodeState& n, const Message& m, const Endpoint& from) {
    record(Endpoint::node(n.id), TraceAction::msg_recv, m.addr, static_cast<std::uint64_t>(m.opcode), source_id(from));
    if (n.inbox.size() >= cfg.inbox_depth) ++n.stats.inbox_full_events;
    n.inbox.push_back(InboxItem{m, from});
    n.stats.max_inbox = std::max<std::uint64_t>(n.stats.max_inbox, n.inbox.size());
    if (!n.busy) start_service(n);
  }

  [[noreturn]] void deadlock(const std::string& why) {
    std::ostringstream os;
    os << why << " at " << ns_string(now) << "; blocked cores:";
    for (const CoreState& c : cores) {
      if (c.phase == Phase::finished || !c.client) continue;
      os << " [core " << c.global << " waits " << opcode_name(c.expect) << " 0x" << std::hex << c.expect_addr << std::dec
         << "]";
    }
    for (const auto& n : nodes) {
      os << "\n" << n->engine.describe() << " inbox=" << n->inbox.size();
    }
    throw DeadlockError(os.str());
  }

  Stats run() {
    if (ran) throw ProtocolError("simulator already ran");
    ran = true;
    std::uint32_t client_index = 0;
    const std::uint32_t clients = cfg.num_units * cfg.clients_per_unit;
    for (CoreState& c : cores) {
      if (!c.client) {
        c.phase = Phase::finished;
        continue;
      }
      c.program = workload.program(CoreEnv{c.id, c.global, client_index++, clients});
      schedule_core(c, 0, EventKind::compute_done);
    }
    while (auto e = queue.pop()) {
      now = e->time;
      ++stats.events;
      if (opt.max_events != 0 && stats.events > opt.max_events) deadlock("event limit exceeded");
      switch (e->kind) {
        case EventKind::msg_arrival:
          if (!ideal) ++stats.messages_received;
          if (e->target.kind == Endpoint::Kind::core) {
            on_core_message(cores[e->target.id], e->msg, e->from);
          } else {
            on_node_message(*nodes[e->target.id], e->msg, e->from);
          }
          break;
        case EventKind::compute_done:
        case EventKind::mem_done: advance(cores[e->target.id]); break;
        case EventKind::se_service_done: finish_service(*nodes[e->target.id]); break;
      }
    }
    for (const CoreState& c : cores) {
      if (c.phase != Phase::finished) deadlock("no events left with blocked cores");
    }
    for (const auto& n : nodes) {
      if (n->busy || !n->inbox.empty()) deadlock("node " + std::to_string(n->id) + " still has queued messages");
    }
    finalize();
    return stats;
  }

  void finalize() {
    Picos end = 0;
    for (const CoreState& c : cores) end = std::max(end, c.finish);
    stats.total_time = end;
    stats.throughput = end > 0 ? static_cast<double>(stats.workload_ops) / (to_ns(end) / 1000.0) : 0.0;
    double occ_sum = 0;
    for (auto& n : nodes) {
      n->occupancy.finish(end);
      n->stats.st_avg = n->occupancy.average();
      n->stats.st_max = n->occupancy.max();
      n->stats.final_counter_total = n->engine.counters().total();
      n->stats.live_syncronvars = n->engine.live_syncronvars();
      stats.core_requests += n->stats.core_requests;
      stats.overflowed_requests += n->stats.overflowed_requests;
      stats.counters_final_total += n->stats.final_counter_total;
      occ_sum += n->stats.st_avg;
      stats.st_occupancy_max = std::max(stats.st_occupancy_max, n->stats.st_max);
      stats.nodes.push_back(n->stats);
    }
    stats.st_occupancy_avg = nodes.empty() ? 0.0 : occ_sum / static_cast<double>(nodes.size());
    stats.overflow_fraction = stats.core_requests == 0 ? 0.0
                                                       : static_cast<double>(stats.overflowed_requests) /
                                                             static_cast<double>(stats.core_requests);
    stats.saturated_transfers = net.saturated_transfers();
    stats.digest = workload.digest();
  }
};

Simulator::Simulator(const SystemConfig& cfg, Workload& workload, SimOptions opt)
    : impl_(std::make_unique<Impl>(cfg, workload, opt)) {}

Simulator::~Simulator() = default;

Stats Simulator::run() { return impl_->run(); }

const Trace& Simulator::trace() const { return impl_->trace; }

std::uint32_t Simulator::node_count() const { return static_cast<std::uint32_t>(impl_->nodes.size()); }

const SyncEngine& Simulator::engine(std::uint32_t node) const { return impl_->nodes.at(node)->engine; }

}  // namespace syncron
