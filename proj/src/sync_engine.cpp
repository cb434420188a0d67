#include "syncron/sync_engine.hpp"

#include <bit>
#include <sstream>

#include "syncron/errors.hpp"

namespace syncron {
namespace {

constexpr std::uint64_t kField = 0xFFFF;

template <typename F>
void for_each_bit(std::uint64_t mask, F&& f) {
  while (mask != 0) {
    const int b = std::countr_zero(mask);
    f(static_cast<std::uint32_t>(b));
    mask &= mask - 1;
  }
}

std::uint64_t bit(std::uint32_t i) { return std::uint64_t{1} << i; }

std::uint64_t all_ones(std::uint32_t n) { return n >= 64 ? ~std::uint64_t{0} : bit(n) - 1; }

// Barrier word: participant count in bits 0..31, barrier flavour in 32..33.
enum : std::uint64_t { kWithinUnit = 1, kTwoLevel = 2, kOneLevel = 3 };
std::uint64_t barrier_word(std::uint64_t participants, std::uint64_t kind) { return (kind << 32) | participants; }
std::uint64_t barrier_participants(std::uint64_t w) { return w & 0xFFFFFFFFu; }
std::uint64_t barrier_kind(std::uint64_t w) { return (w >> 32) & 3; }

// Semaphore word at the coordinator: declared flag (63), initial resources
// (32..62), signed posts-minus-grants delta (0..31).
struct SemWord {
  bool declared = false;
  std::int64_t init = 0;
  std::int64_t delta = 0;
};
SemWord sem_unpack(std::uint64_t w) {
  SemWord s;
  s.declared = (w >> 63) != 0;
  s.init = static_cast<std::int64_t>((w >> 32) & 0x7FFFFFFFu);
  s.delta = static_cast<std::int32_t>(static_cast<std::uint32_t>(w & 0xFFFFFFFFu));
  return s;
}
std::uint64_t sem_pack(const SemWord& s) {
  return (s.declared ? bit(63) : 0) | (static_cast<std::uint64_t>(s.init) << 32) |
         static_cast<std::uint32_t>(static_cast<std::int32_t>(s.delta));
}

// Semaphore word at a non-Master SE: request-outstanding flag in bit 0.
constexpr std::uint64_t kSemPending = 1;

std::uint64_t initial_info(EntryKind k) { return k == EntryKind::lock ? kNoOwner : 0; }

EntryKind kind_of(Primitive p) {
  switch (p) {
    case Primitive::lock: return EntryKind::lock;
    case Primitive::barrier: return EntryKind::barrier;
    case Primitive::semaphore: return EntryKind::semaphore;
    case Primitive::condvar: return EntryKind::condvar;
    case Primitive::none: break;
  }
  return EntryKind::none;
}

std::optional<Opcode> overflow_form(Opcode op) {
  switch (op) {
    case Opcode::lock_acquire_local: return Opcode::lock_acquire_overflow;
    case Opcode::lock_release_local: return Opcode::lock_release_overflow;
    case Opcode::barrier_wait_local_within_unit:
    case Opcode::barrier_wait_local_across_units: return Opcode::barrier_wait_overflow;
    case Opcode::sem_wait_local: return Opcode::sem_wait_overflow;
    case Opcode::sem_post_local: return Opcode::sem_post_overflow;
    case Opcode::cond_wait_local: return Opcode::cond_wait_overflow;
    case Opcode::cond_signal_local: return Opcode::cond_signal_overflow;
    case Opcode::cond_broad_local: return Opcode::cond_broad_overflow;
    default: return std::nullopt;
  }
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

std::uint64_t make_lock_info(std::optional<std::uint32_t> se, std::optional<std::uint32_t> core) {
  std::uint64_t w = kNoOwner;
  if (se) w = (w & ~(kField << 48)) | (std::uint64_t{*se} << 48);
  if (core) w = (w & ~kField) | *core;
  return w;
}

std::optional<std::uint32_t> lock_info_se(std::uint64_t info) {
  const std::uint64_t f = info >> 48;
  if (f == kField) return std::nullopt;
  return static_cast<std::uint32_t>(f);
}

std::optional<std::uint32_t> lock_info_core(std::uint64_t info) {
  const std::uint64_t f = info & kField;
  if (f == kField) return std::nullopt;
  return static_cast<std::uint32_t>(f);
}

EngineConfig engine_config_for(const SystemConfig& cfg, std::uint32_t node_id) {
  EngineConfig ec;
  ec.node_id = node_id;
  ec.num_units = cfg.num_units;
  ec.cores_per_unit = cfg.cores_per_unit;
  ec.clients_per_unit = cfg.clients_per_unit;
  ec.index_counters = cfg.num_index_counters;
  const SystemConfig copy = cfg;
  ec.home_of = [copy](std::uint64_t a) { return unit_of(a, copy); };
  ec.master_of = ec.home_of;
  switch (cfg.scheme) {
    case Scheme::syncron:
      ec.mode = EngineMode::hierarchical;
      ec.backend = StateBackend::table;
      ec.st_entries = cfg.st_entries;
      break;
    case Scheme::flat:
      ec.mode = EngineMode::flat;
      ec.backend = StateBackend::table;
      ec.st_entries = cfg.st_entries;
      break;
    case Scheme::hier:
      ec.mode = EngineMode::hierarchical;
      ec.backend = StateBackend::memory;
      ec.st_entries = 0;
      break;
    case Scheme::central:
      ec.mode = EngineMode::flat;
      ec.backend = StateBackend::memory;
      ec.st_entries = 0;
      ec.master_of = [](std::uint64_t) { return 0u; };
      break;
    case Scheme::ideal:
      ec.mode = EngineMode::flat;
      ec.backend = StateBackend::table;
      ec.st_entries = 0;
      ec.master_of = [](std::uint64_t) { return 0u; };
      break;
  }
  return ec;
}

// ---------------------------------------------------------------------------
// Views: the coordinator logic is written once against this interface and
// runs over either an ST entry or a syncronVar record.

struct SyncEngine::Ctx {
  HandlerOutput* out;
  Picos now;
  std::deque<Message> deferred;
};

class SyncEngine::View {
 public:
  virtual ~View() = default;
  virtual void add(Participant p) = 0;
  virtual void remove(Participant p) = 0;
  virtual bool contains(Participant p) const = 0;
  // Members in grant priority order.
  virtual std::vector<Participant> members() const = 0;
  virtual std::uint64_t info() const = 0;
  virtual void set_info(std::uint64_t v) = 0;
  // syncronVar keeps a lock owner's bits set while it holds the lock.
  virtual bool keeps_owner_bits() const = 0;
  virtual bool overflowed_unit(std::uint32_t) const { return false; }
};

class SyncEngine::TableView final : public SyncEngine::View {
 public:
  TableView(const SyncEngine& eng, STEntry& e) : eng_(eng), e_(e) {}

  void add(Participant p) override { mask_for(p) |= bit(bit_for(p)); }
  void remove(Participant p) override { mask_for(p) &= ~bit(bit_for(p)); }
  bool contains(Participant p) const override {
    return (const_cast<TableView*>(this)->mask_for(p) & bit(bit_for(p))) != 0;
  }
  std::vector<Participant> members() const override {
    std::vector<Participant> out;
    if (flat_indexed()) {
      for_each_bit(e_.local_wait, [&](std::uint32_t g) { out.push_back(Participant::core(g)); });
      return out;
    }
    for_each_bit(e_.local_wait, [&](std::uint32_t l) { out.push_back(Participant::core(eng_.to_global(l))); });
    for_each_bit(e_.global_wait, [&](std::uint32_t s) { out.push_back(Participant::unit(s)); });
    return out;
  }
  std::uint64_t info() const override { return e_.table_info; }
  void set_info(std::uint64_t v) override { e_.table_info = v; }
  bool keeps_owner_bits() const override { return false; }

 private:
  // Flat-mode entries and one-level barriers track cores system-wide.
  bool flat_indexed() const {
    return eng_.flat() || (e_.kind == EntryKind::barrier && barrier_kind(e_.table_info) == kOneLevel);
  }
  std::uint64_t& mask_for(Participant p) {
    if (p.se) {
      if (flat_indexed()) throw ProtocolError("SE participant in a flat waiting list");
      return e_.global_wait;
    }
    return e_.local_wait;
  }
  std::uint32_t bit_for(Participant p) const {
    if (p.se || flat_indexed()) return p.id;
    if (eng_.unit_of_core(p.id) != eng_.cfg_.node_id) {
      throw ProtocolError("remote core " + std::to_string(p.id) + " in a local waiting list at SE " +
                          std::to_string(eng_.cfg_.node_id));
    }
    return eng_.local_of_core(p.id);
  }

  const SyncEngine& eng_;
  STEntry& e_;
};

class SyncEngine::MemView final : public SyncEngine::View {
 public:
  MemView(const SyncEngine& eng, SyncronVar& v) : eng_(eng), v_(v) {}

  void add(Participant p) override {
    if (p.se) {
      check_aggregate(p.id);
      v_.wait_lists[p.id] = all_ones(eng_.cfg_.cores_per_unit);
    } else {
      const std::uint32_t s = eng_.unit_of_core(p.id);
      if (!per_core(s)) throw ProtocolError("per-core bit for non-overflowed SE " + std::to_string(s));
      v_.wait_lists[s] |= bit(eng_.local_of_core(p.id));
    }
  }
  void remove(Participant p) override {
    if (p.se) {
      v_.wait_lists[p.id] = 0;
    } else {
      v_.wait_lists[eng_.unit_of_core(p.id)] &= ~bit(eng_.local_of_core(p.id));
    }
  }
  bool contains(Participant p) const override {
    if (p.se) return !per_core(p.id) && v_.wait_lists[p.id] != 0;
    const std::uint32_t s = eng_.unit_of_core(p.id);
    return per_core(s) && (v_.wait_lists[s] & bit(eng_.local_of_core(p.id))) != 0;
  }
  std::vector<Participant> members() const override {
    std::vector<Participant> out;
    const std::uint32_t me = eng_.cfg_.node_id;
    auto emit_unit = [&](std::uint32_t s) {
      if (v_.wait_lists[s] == 0) return;
      if (per_core(s)) {
        for_each_bit(v_.wait_lists[s],
                     [&](std::uint32_t l) { out.push_back(Participant::core(s * eng_.cfg_.cores_per_unit + l)); });
      } else {
        out.push_back(Participant::unit(s));
      }
    };
    if (eng_.flat()) {
      for (std::uint32_t s = 0; s < v_.wait_lists.size(); ++s) emit_unit(s);
      return out;
    }
    emit_unit(me);
    for (std::uint32_t s = 0; s < v_.wait_lists.size(); ++s) {
      if (s != me) emit_unit(s);
    }
    return out;
  }
  std::uint64_t info() const override { return v_.var_info; }
  void set_info(std::uint64_t v) override { v_.var_info = v; }
  bool keeps_owner_bits() const override { return true; }
  bool overflowed_unit(std::uint32_t s) const override { return (v_.overflow_info & bit(s)) != 0; }

 private:
  bool per_core(std::uint32_t s) const {
    return eng_.flat() || s == eng_.cfg_.node_id || overflowed_unit(s) ||
           (v_.kind == EntryKind::barrier && barrier_kind(v_.var_info) == kOneLevel);
  }
  void check_aggregate(std::uint32_t s) const {
    if (per_core(s)) throw ProtocolError("aggregate request from per-core SE " + std::to_string(s));
  }

  const SyncEngine& eng_;
  SyncronVar& v_;
};

// ---------------------------------------------------------------------------

SyncEngine::SyncEngine(EngineConfig cfg)
    : cfg_(std::move(cfg)), table_(cfg_.st_entries), counters_(cfg_.index_counters), regs_(cfg_.cores_per_unit) {
  if (!cfg_.master_of || !cfg_.home_of) throw ConfigError("engine", "engine needs address mapping functions");
  if (cfg_.num_units > 64 || cfg_.cores_per_unit > 64 || cfg_.num_units * cfg_.cores_per_unit > 64) {
    throw ConfigError("engine", "waiting lists are limited to 64 cores");
  }
}

const SyncronVar* SyncEngine::syncronvar(std::uint64_t addr) const {
  auto it = memory_.find(addr);
  return it == memory_.end() ? nullptr : &it->second;
}

std::uint8_t SyncEngine::pack(std::uint32_t g) const {
  const std::uint32_t lb = bits_for(cfg_.cores_per_unit);
  return static_cast<std::uint8_t>((unit_of_core(g) << lb) | local_of_core(g));
}

std::uint32_t SyncEngine::unpack(std::uint8_t packed) const {
  const std::uint32_t lb = bits_for(cfg_.cores_per_unit);
  const std::uint32_t s = packed >> lb;
  const std::uint32_t l = packed & ((1u << lb) - 1);
  if (s >= cfg_.num_units || l >= cfg_.cores_per_unit) {
    throw ProtocolError("bad packed core id " + std::to_string(packed));
  }
  return s * cfg_.cores_per_unit + l;
}

void SyncEngine::fail(const Message& m, const std::string& why) const {
  std::ostringstream os;
  os << "SE " << cfg_.node_id << ": " << why << " [" << opcode_name(m.opcode) << " addr=" << hex(m.addr)
     << " core=" << int(m.core_id) << " info=" << m.info << "]";
  throw ProtocolError(os.str());
}

HandlerOutput SyncEngine::handle_message(const Message& m, Picos now) {
  HandlerOutput out;
  Ctx ctx{&out, now, {}};
  dispatch(ctx, m, true);
  while (!ctx.deferred.empty()) {
    const Message d = ctx.deferred.front();
    ctx.deferred.pop_front();
    dispatch(ctx, d, false);
  }
  return out;
}

bool SyncEngine::authority_for(const Message& m) const {
  return flat() || is_master(m.addr) || m.opcode == Opcode::barrier_wait_local_within_unit;
}

Participant SyncEngine::participant_of(const Message& m) const {
  switch (scope_of(m.opcode)) {
    case Scope::local:
      return Participant::core(flat() ? m.core_id : to_global(m.core_id));
    case Scope::global:
      if (m.opcode == Opcode::barrier_wait_global && m.info != total_clients()) {
        return Participant::core(unpack(m.core_id));
      }
      return Participant::unit(m.core_id);
    case Scope::overflow:
      return Participant::core(unpack(m.core_id));
    case Scope::control:
      break;
  }
  fail(m, "message has no participant");
}

std::uint32_t SyncEngine::record_unit(std::uint64_t addr, bool) const {
  return is_master(addr) ? cfg_.home_of(addr) : cfg_.node_id;
}

void SyncEngine::dispatch(Ctx& ctx, const Message& m, bool top) {
  const OpcodeClass cls = classify_opcode(m.opcode);
  if (m.opcode == Opcode::decrease_indexing_counter) {
    if (m.info == 0) fail(m, "empty counter decrease");
    counters_.dec(m.addr, static_cast<std::uint32_t>(m.info));
    return;
  }
  const bool master = flat() || is_master(m.addr);
  if (cls == OpcodeClass::overflow_grant || (m.opcode == Opcode::barrier_depart_global && m.info == 1)) {
    if (master) fail(m, "redirected grant at the Master");
    relay_to_core(ctx, m);
    return;
  }
  if (cls == OpcodeClass::overflow_acquire) {
    if (flat() || !master) fail(m, "overflow request at a non-Master SE");
    overflow_acquire_at_master(ctx, m);
    return;
  }
  if (cls == OpcodeClass::overflow_release && (flat() || !master)) fail(m, "overflow release at a non-Master SE");

  if (!master) {
    if (m.opcode == Opcode::barrier_wait_local_across_units && m.info != total_clients()) {
      // Partial-participation barrier: the Master tracks every core.
      send_node(ctx, cfg_.master_of(m.addr), Opcode::barrier_wait_global, m.addr, pack(to_global(m.core_id)), m.info);
      return;
    }
    if (scope_of(m.opcode) == Scope::global) {
      STEntry* e = table_.lookup(m.addr);
      if (e == nullptr) {
        if (m.opcode == Opcode::cond_grant_global) {
          // Nobody left to take the signal; hand it back.
          send_node(ctx, cfg_.master_of(m.addr), Opcode::cond_signal_global, m.addr,
                    static_cast<std::uint8_t>(cfg_.node_id), 1);
          return;
        }
        if (m.opcode == Opcode::cond_broad_global) return;
        fail(m, "response for a variable not buffered here");
      }
      const STEntry before = *e;
      process_table(ctx, *e, m, false);
      if (cfg_.backend == StateBackend::memory) {
        const STEntry* after = table_.lookup(m.addr);
        const std::uint32_t unit = record_unit(m.addr, false);
        ctx.out->memory_ops.push_back({MemOp::read, m.addr, unit, 64, false});
        if (after == nullptr || !(*after == before)) {
          ctx.out->memory_ops.push_back({MemOp::write, m.addr, unit, 64, false});
        }
      }
      return;
    }
  }

  // ST lookup, then the counter/occupancy check, then the overflow path.
  STEntry* e = table_.lookup(m.addr);
  bool fresh = false;
  std::optional<STEntry> before;
  if (e != nullptr) before = *e;
  if (e == nullptr &&
      (cfg_.backend == StateBackend::memory || (counters_.value(m.addr) == 0 && !table_.full()))) {
    e = table_.reserve(m.addr);
    fresh = true;
    ctx.out->st_events.push_back({true, m.addr});
  }
  if (e != nullptr) {
    process_table(ctx, *e, m, fresh);
    if (cfg_.backend == StateBackend::memory) {
      const STEntry* after = table_.lookup(m.addr);
      const std::uint32_t unit = record_unit(m.addr, true);
      ctx.out->memory_ops.push_back({MemOp::read, m.addr, unit, 64, false});
      const bool changed = before.has_value() != (after != nullptr) || (after != nullptr && !(*after == *before));
      if (changed) ctx.out->memory_ops.push_back({MemOp::write, m.addr, unit, 64, false});
    }
    return;
  }
  if (top && scope_of(m.opcode) == Scope::local) ctx.out->overflowed = true;
  if (master) {
    process_memory(ctx, m);
  } else {
    forward_overflow(ctx, m);
  }
}

void SyncEngine::release_entry(Ctx& ctx, std::uint64_t addr) {
  table_.release(addr);
  ctx.out->st_events.push_back({false, addr});
}

void SyncEngine::process_table(Ctx& ctx, STEntry& e, const Message& m, bool fresh) {
  const EntryKind kind = kind_of(primitive_of(m.opcode));
  if (e.kind == EntryKind::none) {
    e.kind = kind;
    e.table_info = initial_info(kind);
  } else if (e.kind != kind) {
    fail(m, "opcode does not match the buffered primitive");
  }
  const std::uint64_t addr = e.addr;
  if (!authority_for(m)) {
    switch (kind) {
      case EntryKind::lock: local_lock(ctx, e, m, fresh); break;
      case EntryKind::barrier: local_barrier(ctx, e, m, fresh); break;
      case EntryKind::semaphore: local_semaphore(ctx, e, m, fresh); break;
      case EntryKind::condvar: local_condvar(ctx, e, m, fresh); break;
      case EntryKind::none: fail(m, "no primitive");
    }
    return;
  }
  TableView v(*this, e);
  const Participant p = participant_of(m);
  switch (kind) {
    case EntryKind::lock: master_lock(ctx, v, m, p); break;
    case EntryKind::barrier: master_barrier(ctx, v, m, p); break;
    case EntryKind::semaphore: master_semaphore(ctx, v, m, p); break;
    case EntryKind::condvar: master_condvar(ctx, v, m, p); break;
    case EntryKind::none: fail(m, "no primitive");
  }
  if (quiescent(v, kind)) release_entry(ctx, addr);
}

SyncronVar& SyncEngine::load_var(Ctx& ctx, std::uint64_t addr, bool read) {
  if (read) ctx.out->memory_ops.push_back({MemOp::read, addr, cfg_.home_of(addr), 64, true});
  auto it = memory_.find(addr);
  if (it == memory_.end()) {
    SyncronVar v;
    v.wait_lists.assign(cfg_.num_units, 0);
    v.overflow_requests.assign(cfg_.num_units, 0);
    it = memory_.emplace(addr, std::move(v)).first;
  }
  return it->second;
}

bool SyncEngine::var_quiescent(const SyncronVar& v) const {
  if (v.kind == EntryKind::none) return true;
  MemView view(*this, const_cast<SyncronVar&>(v));
  return quiescent(view, v.kind);
}

void SyncEngine::finish_var(Ctx& ctx, std::uint64_t addr, bool was_active) {
  SyncronVar& v = memory_.at(addr);
  const bool active = !var_quiescent(v);
  if (!was_active && active) counters_.inc(addr);
  if (was_active && !active) counters_.dec(addr);
  ctx.out->memory_ops.push_back({MemOp::write, addr, cfg_.home_of(addr), 64, true});
  if (active) return;
  for_each_bit(v.overflow_info, [&](std::uint32_t s) {
    if (v.overflow_requests[s] == 0) return;
    send_node(ctx, s, Opcode::decrease_indexing_counter, addr, static_cast<std::uint8_t>(s), v.overflow_requests[s]);
  });
  memory_.erase(addr);
}

void SyncEngine::process_memory(Ctx& ctx, const Message& m) {
  SyncronVar& v = load_var(ctx, m.addr, true);
  const EntryKind kind = kind_of(primitive_of(m.opcode));
  if (v.kind == EntryKind::none) {
    v.kind = kind;
    v.var_info = initial_info(kind);
  } else if (v.kind != kind) {
    fail(m, "opcode does not match the syncronVar primitive");
  }
  const bool was_active = !var_quiescent(v);
  MemView view(*this, v);
  const Participant p = participant_of(m);
  switch (kind) {
    case EntryKind::lock: master_lock(ctx, view, m, p); break;
    case EntryKind::barrier: master_barrier(ctx, view, m, p); break;
    case EntryKind::semaphore: master_semaphore(ctx, view, m, p); break;
    case EntryKind::condvar: master_condvar(ctx, view, m, p); break;
    case EntryKind::none: fail(m, "no primitive");
  }
  finish_var(ctx, m.addr, was_active);
}

void SyncEngine::overflow_acquire_at_master(Ctx& ctx, const Message& m) {
  const EntryKind kind = kind_of(primitive_of(m.opcode));
  bool was_active = false;
  if (STEntry* e = table_.lookup(m.addr)) {
    // The variable is buffered here but another SE now needs per-core state:
    // move it into the syncronVar.
    if (e->kind != kind) fail(m, "opcode does not match the buffered primitive");
    SyncronVar& v = load_var(ctx, m.addr, false);
    v.kind = e->kind;
    v.var_info = e->table_info;
    const bool flat_idx = e->kind == EntryKind::barrier && barrier_kind(e->table_info) == kOneLevel;
    if (flat_idx) {
      for_each_bit(e->local_wait, [&](std::uint32_t g) { v.wait_lists[unit_of_core(g)] |= bit(local_of_core(g)); });
    } else {
      v.wait_lists[cfg_.node_id] = e->local_wait;
      for_each_bit(e->global_wait, [&](std::uint32_t s) { v.wait_lists[s] = all_ones(cfg_.cores_per_unit); });
    }
    if (e->kind == EntryKind::lock) {
      if (auto s = lock_info_se(e->table_info)) v.wait_lists[*s] = all_ones(cfg_.cores_per_unit);
      if (auto c = lock_info_core(e->table_info)) v.wait_lists[unit_of_core(*c)] |= bit(local_of_core(*c));
    }
    e->local_wait = 0;
    e->global_wait = 0;
    release_entry(ctx, m.addr);
    ctx.out->memory_ops.push_back({MemOp::write, m.addr, cfg_.home_of(m.addr), 64, true});
    was_active = !var_quiescent(v);
    if (was_active) counters_.inc(m.addr);
  } else {
    SyncronVar& v = load_var(ctx, m.addr, true);
    if (v.kind == EntryKind::none) {
      v.kind = kind;
      v.var_info = initial_info(kind);
    } else if (v.kind != kind) {
      fail(m, "opcode does not match the syncronVar primitive");
    }
    was_active = !var_quiescent(v);
  }
  SyncronVar& v = memory_.at(m.addr);
  const std::uint32_t g = unpack(m.core_id);
  const std::uint32_t s = unit_of_core(g);
  if (s == cfg_.node_id) fail(m, "overflow request from the Master's own unit");
  if ((v.overflow_info & bit(s)) == 0 && v.wait_lists[s] != 0) {
    fail(m, "SE " + std::to_string(s) + " mixes aggregated and per-core requests");
  }
  v.overflow_info |= bit(s);
  v.overflow_requests[s] += 1;
  MemView view(*this, v);
  const Participant p = Participant::core(g);
  switch (kind) {
    case EntryKind::lock: master_lock(ctx, view, m, p); break;
    case EntryKind::barrier: master_barrier(ctx, view, m, p); break;
    case EntryKind::semaphore: master_semaphore(ctx, view, m, p); break;
    case EntryKind::condvar: master_condvar(ctx, view, m, p); break;
    case EntryKind::none: fail(m, "no primitive");
  }
  finish_var(ctx, m.addr, was_active);
}

void SyncEngine::forward_overflow(Ctx& ctx, const Message& m) {
  const auto op = overflow_form(m.opcode);
  if (!op) fail(m, "message has no overflow form");
  const std::uint32_t g = to_global(m.core_id);
  send_node(ctx, cfg_.master_of(m.addr), *op, m.addr, pack(g), m.info);
  if (is_acquire_type(*op)) counters_.inc(m.addr);
  if (m.opcode == Opcode::cond_wait_local) {
    regs_[m.core_id].cond_lock = m.info;
    internal_lock_release(ctx, m.info, g);
  }
}

void SyncEngine::relay_to_core(Ctx& ctx, const Message& m) {
  const std::uint32_t g = unpack(m.core_id);
  if (unit_of_core(g) != cfg_.node_id) fail(m, "redirected grant for another unit's core");
  switch (m.opcode) {
    case Opcode::lock_grant_overflow: grant_core(ctx, Opcode::lock_grant_local, m.addr, g, 0); break;
    case Opcode::sem_grant_overflow: grant_core(ctx, Opcode::sem_grant_local, m.addr, g, 0); break;
    case Opcode::barrier_departure_overflow:
    case Opcode::barrier_depart_global: grant_core(ctx, Opcode::barrier_depart_local, m.addr, g, 0); break;
    case Opcode::cond_grant_overflow: {
      CoreRegs& r = regs_[local_of_core(g)];
      r.wake_cond = m.addr;
      ctx.deferred.push_back(Message{r.cond_lock, Opcode::lock_acquire_local,
                                     static_cast<std::uint8_t>(local_of_core(g)), 0});
      break;
    }
    default: fail(m, "not a redirected grant");
  }
}

// ---------------------------------------------------------------------------
// Coordinator logic.

bool SyncEngine::quiescent(const View& v, EntryKind kind) const {
  if (!v.members().empty()) return false;
  switch (kind) {
    case EntryKind::lock: return !lock_info_se(v.info()) && !lock_info_core(v.info());
    case EntryKind::semaphore: return sem_unpack(v.info()).delta == 0;
    default: return true;
  }
}

void SyncEngine::master_lock(Ctx& ctx, View& v, const Message& m, Participant p) {
  const std::uint64_t info = v.info();
  std::optional<Participant> owner;
  if (auto s = lock_info_se(info)) owner = Participant::unit(*s);
  if (auto c = lock_info_core(info)) owner = Participant::core(*c);

  const OpcodeClass cls = classify_opcode(m.opcode);
  if (cls == OpcodeClass::acquire || cls == OpcodeClass::overflow_acquire) {
    if (owner && *owner == p) fail(m, "lock re-acquired by its owner");
    if (v.contains(p)) fail(m, "duplicate lock request");
    v.add(p);
    if (owner) return;
  } else if (cls == OpcodeClass::release || cls == OpcodeClass::overflow_release) {
    if (!owner || !(*owner == p)) fail(m, "lock released by a non-owner");
    v.set_info(kNoOwner);
    if (v.keeps_owner_bits()) v.remove(p);
  } else {
    fail(m, "unexpected lock message at the coordinator");
  }

  const auto ms = v.members();
  if (ms.empty()) return;
  const Participant next = ms.front();
  v.set_info(next.se ? make_lock_info(next.id, std::nullopt) : make_lock_info(std::nullopt, next.id));
  if (!v.keeps_owner_bits()) v.remove(next);
  deliver_grant(ctx, v, Primitive::lock, m.addr, next, 1);
}

void SyncEngine::master_barrier(Ctx& ctx, View& v, const Message& m, Participant p) {
  std::uint64_t kind;
  switch (m.opcode) {
    case Opcode::barrier_wait_local_within_unit: kind = kWithinUnit; break;
    case Opcode::barrier_wait_local_across_units:
    case Opcode::barrier_wait_global: kind = m.info == total_clients() ? kTwoLevel : kOneLevel; break;
    case Opcode::barrier_wait_overflow: kind = m.info == total_clients() ? kTwoLevel : kWithinUnit; break;
    default: fail(m, "unexpected barrier message at the coordinator");
  }
  if (m.info == 0) fail(m, "barrier with zero participants");
  const std::uint64_t w = v.info();
  if (barrier_participants(w) == 0) {
    v.set_info(barrier_word(m.info, kind));
  } else if (barrier_participants(w) != m.info || barrier_kind(w) != kind) {
    fail(m, "barrier participant count mismatch (expected " + std::to_string(barrier_participants(w)) + ")");
  }
  if (v.contains(p)) fail(m, "duplicate barrier arrival");
  v.add(p);
  const auto ms = v.members();
  std::uint64_t arrived = 0;
  for (const Participant& q : ms) arrived += q.se ? cfg_.clients_per_unit : 1;
  if (arrived > m.info) fail(m, "more barrier arrivals than participants");
  if (arrived < m.info) return;
  for (const Participant& q : ms) deliver_depart(ctx, v, m.addr, q);
  for (const Participant& q : ms) v.remove(q);
  v.set_info(0);
}

void SyncEngine::master_semaphore(Ctx& ctx, View& v, const Message& m, Participant p) {
  SemWord w = sem_unpack(v.info());
  const OpcodeClass cls = classify_opcode(m.opcode);
  if (cls == OpcodeClass::acquire || cls == OpcodeClass::overflow_acquire) {
    std::int64_t init;
    std::int64_t count = 1;
    if (m.opcode == Opcode::sem_wait_global) {
      init = static_cast<std::int64_t>(m.info >> 32);
      count = static_cast<std::int64_t>(m.info & 0xFFFFFFFFu);
      if (count == 0) fail(m, "semaphore request for zero waiters");
    } else {
      init = static_cast<std::int64_t>(m.info);
    }
    if (init > 0x7FFFFFFF) fail(m, "initial resources out of range");
    if (!w.declared) {
      w.declared = true;
      w.init = init;
    } else if (w.init != init) {
      fail(m, "semaphore initial resources re-declared inconsistently");
    }
    const std::int64_t available = std::max<std::int64_t>(0, w.init + w.delta);
    if (p.se) {
      const std::int64_t granted = std::min(count, available);
      w.delta -= granted;
      v.set_info(sem_pack(w));
      if (granted > 0) {
        deliver_grant(ctx, v, Primitive::semaphore, m.addr, p, static_cast<std::uint64_t>(granted));
      } else {
        if (v.contains(p)) fail(m, "duplicate semaphore request");
        v.add(p);
      }
      return;
    }
    if (available > 0) {
      w.delta -= 1;
      v.set_info(sem_pack(w));
      deliver_grant(ctx, v, Primitive::semaphore, m.addr, p, 1);
    } else {
      if (v.contains(p)) fail(m, "duplicate semaphore request");
      v.set_info(sem_pack(w));
      v.add(p);
    }
    return;
  }
  if (cls != OpcodeClass::release && cls != OpcodeClass::overflow_release) {
    fail(m, "unexpected semaphore message at the coordinator");
  }
  if (w.delta >= 0x7FFFFFFF) fail(m, "semaphore counter overflow");
  w.delta += 1;
  const auto ms = v.members();
  if (!ms.empty() && w.init + w.delta > 0) {
    const Participant next = ms.front();
    v.remove(next);
    w.delta -= 1;
    v.set_info(sem_pack(w));
    deliver_grant(ctx, v, Primitive::semaphore, m.addr, next, 1);
    return;
  }
  v.set_info(sem_pack(w));
}

void SyncEngine::master_condvar(Ctx& ctx, View& v, const Message& m, Participant p) {
  switch (m.opcode) {
    case Opcode::cond_wait_local:
    case Opcode::cond_wait_global:
    case Opcode::cond_wait_overflow: {
      if (v.contains(p)) fail(m, "duplicate condition wait");
      v.add(p);
      if (p.se) return;
      if (flat()) {
        internal_lock_release(ctx, m.info, p.id);
      } else if (unit_of_core(p.id) == cfg_.node_id) {
        regs_[local_of_core(p.id)].cond_lock = m.info;
        internal_lock_release(ctx, m.info, p.id);
      }
      return;
    }
    case Opcode::cond_signal_global:
      if (m.info == 1) {
        const Participant s = Participant::unit(m.core_id);
        if (v.contains(s)) v.remove(s);
      }
      cond_signal_one(ctx, v, m.addr);
      return;
    case Opcode::cond_signal_local:
    case Opcode::cond_signal_overflow:
      cond_signal_one(ctx, v, m.addr);
      return;
    case Opcode::cond_broad_local:
    case Opcode::cond_broad_global:
    case Opcode::cond_broad_overflow: {
      const auto ms = v.members();
      for (const Participant& q : ms) v.remove(q);
      for (const Participant& q : ms) cond_wake(ctx, v, m.addr, q, true);
      return;
    }
    default: fail(m, "unexpected condition-variable message at the coordinator");
  }
}

void SyncEngine::cond_signal_one(Ctx& ctx, View& v, std::uint64_t addr) {
  const auto ms = v.members();
  if (ms.empty()) return;
  const Participant p = ms.front();
  // A whole SE stays registered until it bounces the grant or is broadcast.
  if (!p.se) v.remove(p);
  cond_wake(ctx, v, addr, p, false);
}

void SyncEngine::cond_wake(Ctx& ctx, View&, std::uint64_t addr, Participant p, bool broadcast) {
  if (p.se) {
    send_node(ctx, p.id, broadcast ? Opcode::cond_broad_global : Opcode::cond_grant_global, addr,
              static_cast<std::uint8_t>(p.id), 0);
    return;
  }
  const std::uint32_t g = p.id;
  if (flat()) {
    // The woken core re-acquires the lock itself.
    grant_core(ctx, Opcode::cond_grant_local, addr, g, 0);
  } else if (unit_of_core(g) == cfg_.node_id) {
    CoreRegs& r = regs_[local_of_core(g)];
    r.wake_cond = addr;
    ctx.deferred.push_back(
        Message{r.cond_lock, Opcode::lock_acquire_local, static_cast<std::uint8_t>(local_of_core(g)), 0});
  } else {
    send_node(ctx, unit_of_core(g), Opcode::cond_grant_overflow, addr, pack(g), 0);
  }
}

// ---------------------------------------------------------------------------
// Non-Master side.

void SyncEngine::local_lock(Ctx& ctx, STEntry& e, const Message& m, bool fresh) {
  const std::uint64_t addr = e.addr;
  const std::uint32_t master = cfg_.master_of(addr);
  auto grant_next = [&] {
    const std::uint32_t c = static_cast<std::uint32_t>(std::countr_zero(e.local_wait));
    e.local_wait &= ~bit(c);
    e.table_info = make_lock_info(cfg_.node_id, c);
    grant_core(ctx, Opcode::lock_grant_local, addr, to_global(c), 0);
  };
  const bool holds = lock_info_se(e.table_info).has_value();
  const auto owner = lock_info_core(e.table_info);
  switch (m.opcode) {
    case Opcode::lock_acquire_local:
      if ((e.local_wait & bit(m.core_id)) != 0 || (owner && *owner == m.core_id)) fail(m, "duplicate lock request");
      e.local_wait |= bit(m.core_id);
      if (fresh) {
        send_node(ctx, master, Opcode::lock_acquire_global, addr, static_cast<std::uint8_t>(cfg_.node_id), 0);
      } else if (holds && !owner) {
        grant_next();
      }
      return;
    case Opcode::lock_grant_global:
      if (holds || e.local_wait == 0) fail(m, "unexpected global lock grant");
      grant_next();
      return;
    case Opcode::lock_release_local:
      if (!owner || *owner != m.core_id) fail(m, "lock released by a non-owner");
      if (e.local_wait != 0) {
        grant_next();
        return;
      }
      send_node(ctx, master, Opcode::lock_release_global, addr, static_cast<std::uint8_t>(cfg_.node_id), 0);
      release_entry(ctx, addr);
      return;
    default: fail(m, "unexpected lock message at a local SE");
  }
}

void SyncEngine::local_barrier(Ctx& ctx, STEntry& e, const Message& m, bool) {
  const std::uint64_t addr = e.addr;
  switch (m.opcode) {
    case Opcode::barrier_wait_local_across_units: {
      if (barrier_participants(e.table_info) == 0) {
        e.table_info = barrier_word(m.info, kTwoLevel);
      } else if (barrier_participants(e.table_info) != m.info) {
        fail(m, "barrier participant count mismatch");
      }
      if ((e.local_wait & bit(m.core_id)) != 0) fail(m, "duplicate barrier arrival");
      e.local_wait |= bit(m.core_id);
      const auto n = static_cast<std::uint32_t>(std::popcount(e.local_wait));
      if (n > cfg_.clients_per_unit) fail(m, "more local arrivals than clients");
      if (n == cfg_.clients_per_unit) {
        send_node(ctx, cfg_.master_of(addr), Opcode::barrier_wait_global, addr,
                  static_cast<std::uint8_t>(cfg_.node_id), m.info);
      }
      return;
    }
    case Opcode::barrier_depart_global: {
      const std::uint64_t waiters = e.local_wait;
      e.local_wait = 0;
      for_each_bit(waiters, [&](std::uint32_t c) { grant_core(ctx, Opcode::barrier_depart_local, addr, to_global(c), 0); });
      release_entry(ctx, addr);
      return;
    }
    default: fail(m, "unexpected barrier message at a local SE");
  }
}

void SyncEngine::local_semaphore(Ctx& ctx, STEntry& e, const Message& m, bool fresh) {
  const std::uint64_t addr = e.addr;
  const std::uint32_t master = cfg_.master_of(addr);
  const auto me = static_cast<std::uint8_t>(cfg_.node_id);
  auto request = [&] {
    const std::uint64_t init = (e.table_info >> 32) & 0x7FFFFFFFu;
    const auto n = static_cast<std::uint64_t>(std::popcount(e.local_wait));
    send_node(ctx, master, Opcode::sem_wait_global, addr, me, (init << 32) | n);
    e.table_info |= kSemPending;
  };
  switch (m.opcode) {
    case Opcode::sem_wait_local: {
      if (m.info > 0x7FFFFFFF) fail(m, "initial resources out of range");
      if ((e.table_info >> 63) == 0) {
        e.table_info = bit(63) | (m.info << 32);
      } else if (((e.table_info >> 32) & 0x7FFFFFFFu) != m.info) {
        fail(m, "semaphore initial resources re-declared inconsistently");
      }
      if ((e.local_wait & bit(m.core_id)) != 0) fail(m, "duplicate semaphore request");
      e.local_wait |= bit(m.core_id);
      if ((e.table_info & kSemPending) == 0) request();
      return;
    }
    case Opcode::sem_post_local:
      send_node(ctx, master, Opcode::sem_post_global, addr, me, 0);
      if (fresh) release_entry(ctx, addr);
      return;
    case Opcode::sem_grant_global: {
      if ((e.table_info & kSemPending) == 0) fail(m, "unrequested semaphore grant");
      e.table_info &= ~kSemPending;
      for (std::uint64_t i = 0; i < m.info; ++i) {
        if (e.local_wait == 0) fail(m, "semaphore grant exceeds local waiters");
        const auto c = static_cast<std::uint32_t>(std::countr_zero(e.local_wait));
        e.local_wait &= ~bit(c);
        grant_core(ctx, Opcode::sem_grant_local, addr, to_global(c), 0);
      }
      if (e.local_wait != 0) {
        request();
      } else {
        release_entry(ctx, addr);
      }
      return;
    }
    default: fail(m, "unexpected semaphore message at a local SE");
  }
}

void SyncEngine::local_condvar(Ctx& ctx, STEntry& e, const Message& m, bool fresh) {
  const std::uint64_t addr = e.addr;
  const std::uint32_t master = cfg_.master_of(addr);
  const auto me = static_cast<std::uint8_t>(cfg_.node_id);
  auto wake_local = [&](std::uint32_t c) {
    CoreRegs& r = regs_[c];
    r.wake_cond = addr;
    ctx.deferred.push_back(Message{r.cond_lock, Opcode::lock_acquire_local, static_cast<std::uint8_t>(c), 0});
  };
  switch (m.opcode) {
    case Opcode::cond_wait_local:
      if ((e.local_wait & bit(m.core_id)) != 0) fail(m, "duplicate condition wait");
      e.local_wait |= bit(m.core_id);
      regs_[m.core_id].cond_lock = m.info;
      if (fresh) send_node(ctx, master, Opcode::cond_wait_global, addr, me, 0);
      internal_lock_release(ctx, m.info, to_global(m.core_id));
      return;
    case Opcode::cond_signal_local:
    case Opcode::cond_broad_local:
      send_node(ctx, master,
                m.opcode == Opcode::cond_signal_local ? Opcode::cond_signal_global : Opcode::cond_broad_global, addr,
                me, 0);
      if (fresh) release_entry(ctx, addr);
      return;
    case Opcode::cond_grant_global:
      if (e.local_wait != 0) {
        const auto c = static_cast<std::uint32_t>(std::countr_zero(e.local_wait));
        e.local_wait &= ~bit(c);
        wake_local(c);
        return;
      }
      send_node(ctx, master, Opcode::cond_signal_global, addr, me, 1);
      release_entry(ctx, addr);
      return;
    case Opcode::cond_broad_global: {
      const std::uint64_t waiters = e.local_wait;
      e.local_wait = 0;
      for_each_bit(waiters, wake_local);
      release_entry(ctx, addr);
      return;
    }
    default: fail(m, "unexpected condition-variable message at a local SE");
  }
}

// ---------------------------------------------------------------------------
// Output helpers.

void SyncEngine::deliver_grant(Ctx& ctx, const View&, Primitive prim, std::uint64_t addr, Participant p,
                               std::uint64_t count) {
  const bool lock = prim == Primitive::lock;
  if (p.se) {
    send_node(ctx, p.id, lock ? Opcode::lock_grant_global : Opcode::sem_grant_global, addr,
              static_cast<std::uint8_t>(p.id), lock ? 0 : count);
    return;
  }
  const std::uint32_t g = p.id;
  if (flat() || unit_of_core(g) == cfg_.node_id) {
    grant_core(ctx, lock ? Opcode::lock_grant_local : Opcode::sem_grant_local, addr, g, 0);
  } else {
    send_node(ctx, unit_of_core(g), lock ? Opcode::lock_grant_overflow : Opcode::sem_grant_overflow, addr, pack(g), 0);
  }
}

void SyncEngine::deliver_depart(Ctx& ctx, const View& v, std::uint64_t addr, Participant p) {
  if (p.se) {
    send_node(ctx, p.id, Opcode::barrier_depart_global, addr, static_cast<std::uint8_t>(p.id), 0);
    return;
  }
  const std::uint32_t g = p.id;
  const std::uint32_t u = unit_of_core(g);
  if (flat() || u == cfg_.node_id) {
    grant_core(ctx, Opcode::barrier_depart_local, addr, g, 0);
  } else if (v.overflowed_unit(u)) {
    send_node(ctx, u, Opcode::barrier_departure_overflow, addr, pack(g), 0);
  } else {
    send_node(ctx, u, Opcode::barrier_depart_global, addr, pack(g), 1);
  }
}

void SyncEngine::grant_core(Ctx& ctx, Opcode op, std::uint64_t addr, std::uint32_t g, std::uint64_t info) {
  if (!flat() && op == Opcode::lock_grant_local) {
    CoreRegs& r = regs_[local_of_core(g)];
    if (r.wake_cond) {
      // Lock re-acquired on behalf of a woken condition waiter.
      op = Opcode::cond_grant_local;
      addr = *r.wake_cond;
      r.wake_cond.reset();
    }
  }
  const auto core_id = static_cast<std::uint8_t>(flat() ? g : local_of_core(g));
  ctx.out->outgoing.push_back({Endpoint::core(g), Message{addr, op, core_id, info}});
  ctx.out->wakeups.push_back(CoreId{unit_of_core(g), local_of_core(g)});
}

void SyncEngine::send_node(Ctx& ctx, std::uint32_t node, Opcode op, std::uint64_t addr, std::uint8_t core_id,
                           std::uint64_t info) {
  const Message msg{addr, op, core_id, info};
  if (node == cfg_.node_id) {
    ctx.deferred.push_back(msg);
    return;
  }
  ctx.out->outgoing.push_back({Endpoint::node(node), msg});
}

void SyncEngine::internal_lock_release(Ctx& ctx, std::uint64_t lock, std::uint32_t g) {
  if (flat()) {
    send_node(ctx, cfg_.master_of(lock), Opcode::lock_release_local, lock, static_cast<std::uint8_t>(g), 0);
    return;
  }
  ctx.deferred.push_back(Message{lock, Opcode::lock_release_local, static_cast<std::uint8_t>(local_of_core(g)), 0});
}

std::string SyncEngine::describe() const {
  std::ostringstream os;
  os << "SE " << cfg_.node_id << ": st " << table_.occupied() << "/" << table_.capacity()
     << " counters_total=" << counters_.total();
  for (const STEntry* e : table_.resident()) {
    os << "\n  st " << hex(e->addr) << " kind=" << int(e->kind) << " local=" << hex(e->local_wait)
       << " global=" << hex(e->global_wait) << " info=" << hex(e->table_info);
  }
  for (const auto& [addr, v] : memory_) {
    os << "\n  mem " << hex(addr) << " kind=" << int(v.kind) << " info=" << hex(v.var_info)
       << " ovf=" << hex(v.overflow_info) << " lists=";
    for (auto w : v.wait_lists) os << hex(w) << ",";
  }
  return os.str();
}

}  // namespace syncron
