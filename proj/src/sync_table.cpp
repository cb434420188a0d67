#include "syncron/sync_table.hpp"

#include <sstream>

#include "syncron/errors.hpp"

namespace syncron {
namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

SynchronizationTable::SynchronizationTable(std::size_t capacity) : capacity_(capacity) {
  slots_.resize(capacity_);
  for (std::size_t i = 0; i < capacity_; ++i) free_slots_.insert(i);
}

STEntry* SynchronizationTable::lookup(std::uint64_t addr) {
  auto it = index_.find(addr);
  return it == index_.end() ? nullptr : &slots_[it->second];
}

const STEntry* SynchronizationTable::lookup(std::uint64_t addr) const {
  auto it = index_.find(addr);
  return it == index_.end() ? nullptr : &slots_[it->second];
}

STEntry* SynchronizationTable::reserve(std::uint64_t addr) {
  if (index_.count(addr) != 0) throw ProtocolError("ST reserve of resident address " + hex(addr));
  std::size_t slot;
  if (!free_slots_.empty()) {
    slot = *free_slots_.begin();
    free_slots_.erase(free_slots_.begin());
  } else if (unbounded()) {
    slot = slots_.size();
    slots_.emplace_back();
  } else {
    return nullptr;
  }
  STEntry& e = slots_[slot];
  e = STEntry{};
  e.addr = addr;
  e.state = EntryState::occupied;
  index_.emplace(addr, slot);
#ifndef NDEBUG
  check_invariants();
#endif
  return &e;
}

void SynchronizationTable::release(std::uint64_t addr) {
  auto it = index_.find(addr);
  if (it == index_.end()) throw ProtocolError("ST release of non-resident address " + hex(addr));
  STEntry& e = slots_[it->second];
  if (e.local_wait != 0 || e.global_wait != 0) {
    throw ProtocolError("ST release of " + hex(addr) + " with waiters still queued");
  }
  e = STEntry{};
  free_slots_.insert(it->second);
  index_.erase(it);
#ifndef NDEBUG
  check_invariants();
#endif
}

double SynchronizationTable::occupancy() const {
  if (unbounded()) return 0.0;
  return static_cast<double>(occupied()) / static_cast<double>(capacity_);
}

std::vector<const STEntry*> SynchronizationTable::resident() const {
  std::vector<const STEntry*> out;
  for (const STEntry& e : slots_) {
    if (e.state == EntryState::occupied) out.push_back(&e);
  }
  return out;
}

std::size_t SynchronizationTable::slot_of(std::uint64_t addr) const {
  auto it = index_.find(addr);
  if (it == index_.end()) throw ProtocolError("address " + hex(addr) + " not resident");
  return it->second;
}

void SynchronizationTable::check_invariants() const {
  std::size_t occupied_slots = 0;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const STEntry& e = slots_[i];
    if (e.state == EntryState::free) {
      if (e.local_wait != 0 || e.global_wait != 0) throw ProtocolError("free ST entry with waiters");
      continue;
    }
    ++occupied_slots;
    auto it = index_.find(e.addr);
    if (it == index_.end() || it->second != i) throw ProtocolError("ST index out of sync at " + hex(e.addr));
  }
  if (occupied_slots != index_.size()) throw ProtocolError("duplicate ST address");
}

IndexingCounters::IndexingCounters(std::size_t count) : values_(count, 0) {
  if (count == 0) throw ConfigError("index_counters", "need at least one indexing counter");
}

std::uint32_t IndexingCounters::inc(std::uint64_t addr) { return ++values_[index(addr)]; }

std::uint32_t IndexingCounters::dec(std::uint64_t addr, std::uint32_t by) {
  std::uint32_t& v = values_[index(addr)];
  if (v < by) {
    throw ProtocolError("indexing counter " + std::to_string(index(addr)) + " would go negative (" +
                        std::to_string(v) + " - " + std::to_string(by) + ")");
  }
  v -= by;
  return v;
}

std::uint64_t IndexingCounters::total() const {
  std::uint64_t t = 0;
  for (auto v : values_) t += v;
  return t;
}

}  // namespace syncron
