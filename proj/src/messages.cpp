#include "syncron/messages.hpp"

#include <string>

#include "syncron/errors.hpp"

namespace syncron {
namespace {

struct OpcodeInfo {
  std::string_view name;
  OpcodeClass cls;
  Primitive prim;
  Scope scope;
};

using C = OpcodeClass;
using P = Primitive;
using S = Scope;

constexpr std::array<OpcodeInfo, kOpcodeCount> kTable = {{
    {"lock_acquire_global", C::acquire, P::lock, S::global},
    {"lock_acquire_local", C::acquire, P::lock, S::local},
    {"lock_release_global", C::release, P::lock, S::global},
    {"lock_release_local", C::release, P::lock, S::local},
    {"lock_grant_global", C::grant, P::lock, S::global},
    {"lock_grant_local", C::grant, P::lock, S::local},
    {"lock_acquire_overflow", C::overflow_acquire, P::lock, S::overflow},
    {"lock_release_overflow", C::overflow_release, P::lock, S::overflow},
    {"lock_grant_overflow", C::overflow_grant, P::lock, S::overflow},
    {"barrier_wait_global", C::acquire, P::barrier, S::global},
    {"barrier_wait_local_within_unit", C::acquire, P::barrier, S::local},
    {"barrier_wait_local_across_units", C::acquire, P::barrier, S::local},
    {"barrier_depart_global", C::depart, P::barrier, S::global},
    {"barrier_depart_local", C::depart, P::barrier, S::local},
    {"barrier_wait_overflow", C::overflow_acquire, P::barrier, S::overflow},
    {"barrier_departure_overflow", C::overflow_grant, P::barrier, S::overflow},
    {"sem_wait_global", C::acquire, P::semaphore, S::global},
    {"sem_wait_local", C::acquire, P::semaphore, S::local},
    {"sem_grant_global", C::grant, P::semaphore, S::global},
    {"sem_grant_local", C::grant, P::semaphore, S::local},
    {"sem_post_global", C::release, P::semaphore, S::global},
    {"sem_post_local", C::release, P::semaphore, S::local},
    {"sem_wait_overflow", C::overflow_acquire, P::semaphore, S::overflow},
    {"sem_grant_overflow", C::overflow_grant, P::semaphore, S::overflow},
    {"sem_post_overflow", C::overflow_release, P::semaphore, S::overflow},
    {"cond_wait_global", C::acquire, P::condvar, S::global},
    {"cond_wait_local", C::acquire, P::condvar, S::local},
    {"cond_signal_global", C::release, P::condvar, S::global},
    {"cond_signal_local", C::release, P::condvar, S::local},
    {"cond_broad_global", C::release, P::condvar, S::global},
    {"cond_broad_local", C::release, P::condvar, S::local},
    {"cond_grant_global", C::grant, P::condvar, S::global},
    {"cond_grant_local", C::grant, P::condvar, S::local},
    {"cond_wait_overflow", C::overflow_acquire, P::condvar, S::overflow},
    {"cond_signal_overflow", C::overflow_release, P::condvar, S::overflow},
    {"cond_broad_overflow", C::overflow_release, P::condvar, S::overflow},
    {"cond_grant_overflow", C::overflow_grant, P::condvar, S::overflow},
    {"decrease_indexing_counter", C::control, P::none, S::control},
}};

const OpcodeInfo& info_of(Opcode op) {
  const auto i = static_cast<std::size_t>(op);
  if (i >= kOpcodeCount) throw CodecError("opcode " + std::to_string(i) + " is not defined");
  return kTable[i];
}

}  // namespace

WireMessage encode_message(const Message& m) {
  const auto op = static_cast<std::uint8_t>(m.opcode);
  if (op >= 64) throw CodecError("opcode does not fit in 6 bits");
  if (m.core_id >= 64) throw CodecError("core_id does not fit in 6 bits");
  WireMessage out{};
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(m.addr >> (8 * i));
  out[8] = op;
  out[9] = m.core_id;
  for (int i = 0; i < 8; ++i) out[10 + i] = static_cast<std::uint8_t>(m.info >> (8 * i));
  return out;
}

Message decode_message(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kMessageBytes) {
    throw CodecError("message must be 18 bytes, got " + std::to_string(bytes.size()));
  }
  if ((bytes[8] & 0xC0) != 0 || (bytes[9] & 0xC0) != 0) {
    throw CodecError("reserved bits set in opcode/core_id bytes");
  }
  if (bytes[8] >= kOpcodeCount) throw CodecError("unknown opcode " + std::to_string(bytes[8]));
  Message m;
  for (int i = 0; i < 8; ++i) m.addr |= std::uint64_t{bytes[i]} << (8 * i);
  m.opcode = static_cast<Opcode>(bytes[8]);
  m.core_id = bytes[9];
  for (int i = 0; i < 8; ++i) m.info |= std::uint64_t{bytes[10 + i]} << (8 * i);
  return m;
}

OpcodeClass classify_opcode(Opcode op) { return info_of(op).cls; }
Primitive primitive_of(Opcode op) { return info_of(op).prim; }
Scope scope_of(Opcode op) { return info_of(op).scope; }
std::string_view opcode_name(Opcode op) { return info_of(op).name; }

bool is_acquire_type(Opcode op) {
  const OpcodeClass c = classify_opcode(op);
  return c == OpcodeClass::acquire || c == OpcodeClass::overflow_acquire;
}

std::optional<Opcode> opcode_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kOpcodeCount; ++i) {
    if (kTable[i].name == name) return static_cast<Opcode>(i);
  }
  return std::nullopt;
}

std::string_view opcode_class_name(OpcodeClass c) {
  switch (c) {
    case C::acquire: return "acquire";
    case C::release: return "release";
    case C::grant: return "grant";
    case C::depart: return "depart";
    case C::overflow_acquire: return "overflow_acquire";
    case C::overflow_release: return "overflow_release";
    case C::overflow_grant: return "overflow_grant";
    case C::control: return "control";
  }
  return "?";
}

}  // namespace syncron
