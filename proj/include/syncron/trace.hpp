#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "syncron/messages.hpp"
#include "syncron/sync_engine.hpp"
#include "syncron/units.hpp"

namespace syncron {

enum class TraceAction : std::uint8_t {
  cs_enter,
  cs_exit,
  barrier_arrive,
  barrier_depart,
  sem_acquire,
  sem_release,
  cond_sleep,
  cond_wake,
  msg_send,
  msg_recv,
  mem_op,
  st_reserve,
  st_release,
  sync_request,
  op_complete,
  grant_dropped,
};

std::string_view trace_action_name(TraceAction a);
std::optional<TraceAction> trace_action_from_name(std::string_view s);

// aux by action:
//   cs_*            -
//   barrier_arrive  participant count
//   sem_acquire     initial resources
//   cond_sleep      associated lock address
//   msg_send/recv   opcode; aux2 = peer source id, aux3 = index into Trace::messages
//   mem_op          1 = write; aux2 = home unit
//   sync_request    SyncKind
struct TraceRecord {
  Picos time = 0;
  std::uint64_t seq = 0;
  Endpoint actor;
  TraceAction action = TraceAction::cs_enter;
  std::uint64_t addr = 0;
  std::uint64_t aux = 0;
  std::uint64_t aux2 = 0;
  std::uint64_t aux3 = 0;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct TraceHeader {
  std::uint64_t expected_ops = 0;
  std::string scheme;
  std::string workload;
  std::uint32_t units = 0;
  std::uint32_t cores_per_unit = 0;
};

struct Trace {
  TraceHeader header;
  std::vector<TraceRecord> records;
  std::vector<Message> messages;  // every sent message, in send order

  void add(Picos time, Endpoint actor, TraceAction action, std::uint64_t addr, std::uint64_t aux = 0,
           std::uint64_t aux2 = 0, std::uint64_t aux3 = 0);
};

std::string endpoint_string(const Endpoint& e);
Endpoint endpoint_from_string(std::string_view s);

// trace.bin: the 18-byte wire encoding of each sent message, back to back.
// trace.jsonl: a header line, then one JSON object per record.
void write_trace_files(const Trace& t, const std::string& bin_path, const std::string& jsonl_path);
Trace read_trace_jsonl(const std::string& jsonl_path);
std::vector<Message> read_trace_bin(const std::string& bin_path);

}  // namespace syncron
