#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "syncron/stats.hpp"
#include "syncron/sync_engine.hpp"
#include "syncron/topology.hpp"
#include "syncron/trace.hpp"
#include "syncron/workloads.hpp"

namespace syncron {

struct SimOptions {
  bool record_trace = false;
  // Fault injection: silently drop the N-th (1-based) message delivered to a core.
  std::optional<std::uint64_t> drop_grant;
  // Abort with DeadlockError after this many events (0 = no limit).
  std::uint64_t max_events = 0;
};

// One simulated system running one workload. Single-threaded; independent
// instances share nothing and may run concurrently.
class Simulator {
 public:
  Simulator(const SystemConfig& cfg, Workload& workload, SimOptions opt = {});
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  // Runs to completion. Throws DeadlockError if cores remain blocked once no
  // events are left, ProtocolError on an invalid protocol step.
  Stats run();

  const Trace& trace() const;
  std::uint32_t node_count() const;
  const SyncEngine& engine(std::uint32_t node) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace syncron
