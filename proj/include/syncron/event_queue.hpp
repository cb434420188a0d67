#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "syncron/messages.hpp"
#include "syncron/sync_engine.hpp"
#include "syncron/units.hpp"

namespace syncron {

// Declaration order is the tie-break rank between events at the same time.
enum class EventKind : std::uint8_t { msg_arrival, compute_done, mem_done, se_service_done };

struct Event {
  Picos time = 0;
  EventKind kind = EventKind::msg_arrival;
  std::uint32_t source = 0;  // see source_id()
  std::uint64_t seq = 0;     // assigned by the queue
  Endpoint target;
  Endpoint from;   // msg_arrival only
  Message msg;     // msg_arrival only
};

// Stable numeric id used for tie-breaking: cores first, then nodes.
std::uint32_t source_id(const Endpoint& e);

// Min-queue on (time, kind, source, seq). Sequence numbers make the order
// total, so runs are reproducible regardless of insertion pattern.
class EventQueue {
 public:
  void schedule(Event e);
  std::optional<Event> pop();
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  std::uint64_t scheduled() const { return next_seq_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const;
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace syncron
