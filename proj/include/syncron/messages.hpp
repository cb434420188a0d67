#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace syncron {

// Opcode values are the wire encoding; order follows the opcode table.
enum class Opcode : std::uint8_t {
  lock_acquire_global,
  lock_acquire_local,
  lock_release_global,
  lock_release_local,
  lock_grant_global,
  lock_grant_local,
  lock_acquire_overflow,
  lock_release_overflow,
  lock_grant_overflow,
  barrier_wait_global,
  barrier_wait_local_within_unit,
  barrier_wait_local_across_units,
  barrier_depart_global,
  barrier_depart_local,
  barrier_wait_overflow,
  barrier_departure_overflow,
  sem_wait_global,
  sem_wait_local,
  sem_grant_global,
  sem_grant_local,
  sem_post_global,
  sem_post_local,
  sem_wait_overflow,
  sem_grant_overflow,
  sem_post_overflow,
  cond_wait_global,
  cond_wait_local,
  cond_signal_global,
  cond_signal_local,
  cond_broad_global,
  cond_broad_local,
  cond_grant_global,
  cond_grant_local,
  cond_wait_overflow,
  cond_signal_overflow,
  cond_broad_overflow,
  cond_grant_overflow,
  decrease_indexing_counter,
};

inline constexpr std::size_t kOpcodeCount = 38;
inline constexpr std::size_t kMessageBytes = 18;

enum class OpcodeClass {
  acquire,
  release,
  grant,
  depart,
  overflow_acquire,
  overflow_release,
  overflow_grant,
  control,
};

enum class Primitive { lock, barrier, semaphore, condvar, none };

// Which hop of the hierarchy a message travels on.
enum class Scope { local, global, overflow, control };

struct Message {
  std::uint64_t addr = 0;
  Opcode opcode = Opcode::lock_acquire_global;
  std::uint8_t core_id = 0;
  std::uint64_t info = 0;
  friend bool operator==(const Message&, const Message&) = default;
};

using WireMessage = std::array<std::uint8_t, kMessageBytes>;

// Throws CodecError if opcode or core_id does not fit in 6 bits.
WireMessage encode_message(const Message& m);
// Throws CodecError on wrong length, nonzero reserved bits or an unknown opcode.
Message decode_message(std::span<const std::uint8_t> bytes);

OpcodeClass classify_opcode(Opcode op);
Primitive primitive_of(Opcode op);
Scope scope_of(Opcode op);
bool is_acquire_type(Opcode op);

std::string_view opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(std::string_view name);
std::string_view opcode_class_name(OpcodeClass c);

}  // namespace syncron
