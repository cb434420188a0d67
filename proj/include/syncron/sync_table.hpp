#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <set>
#include <unordered_map>
#include <vector>

namespace syncron {

inline constexpr std::uint64_t kNoOwner = ~std::uint64_t{0};

enum class EntryState : std::uint8_t { free, occupied };
enum class EntryKind : std::uint8_t { none, lock, barrier, semaphore, condvar };

struct STEntry {
  std::uint64_t addr = 0;
  std::uint64_t global_wait = 0;  // one bit per SE
  std::uint64_t local_wait = 0;   // one bit per local core (global core id in flat-indexed entries)
  EntryState state = EntryState::free;
  std::uint64_t table_info = kNoOwner;
  EntryKind kind = EntryKind::none;

  friend bool operator==(const STEntry&, const STEntry&) = default;
};

// Fixed-capacity table with lowest-index-first allocation. A capacity of 0
// makes the table unbounded (used for the software servers' in-memory state).
class SynchronizationTable {
 public:
  explicit SynchronizationTable(std::size_t capacity = 64);

  STEntry* lookup(std::uint64_t addr);
  const STEntry* lookup(std::uint64_t addr) const;
  // Returns nullptr when every entry is occupied. Reserving an address that is
  // already resident throws ProtocolError.
  STEntry* reserve(std::uint64_t addr);
  // Throws ProtocolError if addr is not resident or still has waiters.
  void release(std::uint64_t addr);

  std::size_t occupied() const { return index_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool unbounded() const { return capacity_ == 0; }
  bool full() const { return !unbounded() && occupied() == capacity_; }
  double occupancy() const;

  // Slot index of a resident entry (test hook for the allocation policy).
  std::size_t slot_of(std::uint64_t addr) const;
  // Occupied entries in slot order.
  std::vector<const STEntry*> resident() const;
  void check_invariants() const;

 private:
  std::size_t capacity_;
  std::deque<STEntry> slots_;
  std::set<std::size_t> free_slots_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

// Per-SE counters marking variables currently serviced through memory.
class IndexingCounters {
 public:
  explicit IndexingCounters(std::size_t count = 256);

  std::size_t index(std::uint64_t addr) const { return static_cast<std::size_t>(addr % values_.size()); }
  std::uint32_t value(std::uint64_t addr) const { return values_[index(addr)]; }
  std::uint32_t inc(std::uint64_t addr);
  // Throws ProtocolError if the counter would go negative.
  std::uint32_t dec(std::uint64_t addr, std::uint32_t by = 1);
  std::uint64_t total() const;
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<std::uint32_t> values_;
};

// Index into a 256-entry counter array: the 8 least-significant address bits.
constexpr std::size_t counter_index(std::uint64_t addr) { return static_cast<std::size_t>(addr & 0xFF); }

}  // namespace syncron
