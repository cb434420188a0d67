#include "syncron/event_queue.hpp"

#include <tuple>

namespace syncron {

namespace {
constexpr std::uint32_t kNodeBase = 1u << 16;
}

std::uint32_t source_id(const Endpoint& e) {
  return e.kind == Endpoint::Kind::core ? e.id : kNodeBase + e.id;
}

bool EventQueue::Later::operator()(const Event& a, const Event& b) const {
  return std::tie(a.time, a.kind, a.source, a.seq) > std::tie(b.time, b.kind, b.source, b.seq);
}

void EventQueue::schedule(Event e) {
  e.seq = next_seq_++;
  heap_.push(std::move(e));
}

std::optional<Event> EventQueue::pop() {
  if (heap_.empty()) return std::nullopt;
  Event e = heap_.top();
  heap_.pop();
  return e;
}

}  // namespace syncron
