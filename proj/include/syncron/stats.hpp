#pragma once

#include <cstdint>
#include <vector>

#include "syncron/units.hpp"

namespace syncron {

// Time-weighted occupancy of one ST.
class OccupancyTracker {
 public:
  explicit OccupancyTracker(std::size_t capacity = 0) : capacity_(capacity) {}

  void update(Picos now, std::size_t occupied);
  // Closes the integral at `end`.
  void finish(Picos end);

  double average() const;  // fraction of entries, averaged over time
  double max() const;      // peak fraction of entries
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  Picos last_ = 0;
  std::size_t current_ = 0;
  std::size_t peak_ = 0;
  long double area_ = 0;  // entry-picoseconds
  Picos end_ = 0;
};

struct NodeStats {
  std::uint32_t node = 0;
  std::uint64_t messages_handled = 0;
  std::uint64_t core_requests = 0;
  std::uint64_t overflowed_requests = 0;
  std::uint64_t max_inbox = 0;
  std::uint64_t inbox_full_events = 0;  // arrivals that found the inbox full
  Picos busy_time = 0;
  double st_avg = 0;
  double st_max = 0;
  std::uint64_t final_counter_total = 0;
  std::uint64_t live_syncronvars = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
};

struct Stats {
  Picos total_time = 0;
  std::uint64_t workload_ops = 0;
  double throughput = 0;  // workload ops per microsecond

  std::uint64_t lock_acquires = 0;
  std::uint64_t lock_releases = 0;
  std::uint64_t barrier_waits = 0;
  std::uint64_t sem_waits = 0;
  std::uint64_t sem_posts = 0;
  std::uint64_t cond_waits = 0;
  std::uint64_t cond_signals = 0;
  std::uint64_t cond_broadcasts = 0;

  // Synchronization messages (18 bytes each).
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_received = 0;
  std::uint64_t messages_intra = 0;
  std::uint64_t messages_inter = 0;
  // All traffic, synchronization and memory.
  std::uint64_t bytes_intra = 0;
  std::uint64_t bytes_inter = 0;

  std::uint64_t mem_local = 0;   // workload data accesses
  std::uint64_t mem_remote = 0;
  std::uint64_t syncvar_accesses = 0;  // server record or syncronVar accesses
  std::uint64_t syncvar_dram = 0;      // of which reached DRAM

  Femtojoules energy_cache = 0;
  Femtojoules energy_network = 0;
  Femtojoules energy_network_sync = 0;  // share of network energy spent on sync messages
  Femtojoules energy_memory = 0;

  std::uint64_t core_requests = 0;
  std::uint64_t overflowed_requests = 0;
  double overflow_fraction = 0;
  std::uint64_t counters_final_total = 0;
  double st_occupancy_avg = 0;  // mean over SEs
  double st_occupancy_max = 0;  // max over SEs
  std::uint64_t grants_dropped = 0;
  std::uint64_t saturated_transfers = 0;
  std::uint64_t events = 0;
  std::uint64_t digest = 0;

  std::vector<NodeStats> nodes;

  Femtojoules energy_total() const { return energy_cache + energy_network + energy_memory; }
};

}  // namespace syncron
