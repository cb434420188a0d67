#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "syncron/errors.hpp"
#include "syncron/messages.hpp"

using namespace syncron;

namespace {

// Independent statement of the wire layout.
std::vector<std::uint8_t> reference_encode(std::uint64_t addr, std::uint8_t op, std::uint8_t core, std::uint64_t info) {
  std::vector<std::uint8_t> b(18, 0);
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(addr >> (8 * i));
  b[8] = op;
  b[9] = core;
  for (int i = 0; i < 8; ++i) b[10 + i] = static_cast<std::uint8_t>(info >> (8 * i));
  return b;
}

}  // namespace

TEST_CASE("all-zero message encodes to 18 zero bytes") {
  const WireMessage w = encode_message({0, Opcode::lock_acquire_global, 0, 0});
  for (auto byte : w) CHECK(byte == 0);
  CHECK(decode_message(w) == Message{0, Opcode::lock_acquire_global, 0, 0});
}

TEST_CASE("address is little-endian") {
  const WireMessage w = encode_message({0x0102030405060708ull, Opcode::lock_acquire_global, 0, 0});
  const std::uint8_t expect[8] = {8, 7, 6, 5, 4, 3, 2, 1};
  for (int i = 0; i < 8; ++i) CHECK(w[i] == expect[i]);
}

TEST_CASE("boundary values") {
  const Message m{~0ull, Opcode::decrease_indexing_counter, 63, ~0ull};
  const WireMessage w = encode_message(m);
  CHECK(w[8] == 37);
  CHECK(w[9] == 63);
  CHECK(decode_message(w) == m);
  CHECK_THROWS_AS(encode_message({0, Opcode::lock_acquire_global, 64, 0}), CodecError);
}

TEST_CASE("random round-trip matches the reference layout") {
  std::mt19937_64 rng(12345);
  for (int i = 0; i < 1000; ++i) {
    const Message m{rng(), static_cast<Opcode>(rng() % kOpcodeCount), static_cast<std::uint8_t>(rng() % 64), rng()};
    const WireMessage w = encode_message(m);
    const auto ref = reference_encode(m.addr, static_cast<std::uint8_t>(m.opcode), m.core_id, m.info);
    CHECK(std::vector<std::uint8_t>(w.begin(), w.end()) == ref);
    CHECK(decode_message(w) == m);
  }
}

TEST_CASE("decode rejects malformed input") {
  std::vector<std::uint8_t> short_msg(17, 0);
  CHECK_THROWS_AS(decode_message(short_msg), CodecError);
  std::vector<std::uint8_t> long_msg(19, 0);
  CHECK_THROWS_AS(decode_message(long_msg), CodecError);

  WireMessage w = encode_message({0, Opcode::lock_acquire_global, 0, 0});
  w[8] = 0x40;  // reserved bit
  CHECK_THROWS_AS(decode_message(w), CodecError);
  w[8] = 38;  // one past the last opcode
  CHECK_THROWS_AS(decode_message(w), CodecError);
  w[8] = 0;
  w[9] = 0x80;
  CHECK_THROWS_AS(decode_message(w), CodecError);
}

TEST_CASE("opcode classification") {
  CHECK(classify_opcode(Opcode::lock_acquire_local) == OpcodeClass::acquire);
  CHECK(classify_opcode(Opcode::sem_post_global) == OpcodeClass::release);
  CHECK(classify_opcode(Opcode::decrease_indexing_counter) == OpcodeClass::control);
  CHECK(classify_opcode(Opcode::barrier_depart_local) == OpcodeClass::depart);
  CHECK(classify_opcode(Opcode::cond_broad_local) == OpcodeClass::release);
  CHECK(classify_opcode(Opcode::cond_grant_overflow) == OpcodeClass::overflow_grant);
  CHECK(classify_opcode(Opcode::barrier_wait_overflow) == OpcodeClass::overflow_acquire);
  CHECK(classify_opcode(Opcode::sem_post_overflow) == OpcodeClass::overflow_release);

  // Total, with names that agree with the class.
  std::set<std::string_view> names;
  for (std::size_t i = 0; i < kOpcodeCount; ++i) {
    const auto op = static_cast<Opcode>(i);
    const auto name = opcode_name(op);
    names.insert(name);
    CHECK(opcode_from_name(name) == op);
    const OpcodeClass c = classify_opcode(op);
    const bool overflow = name.find("overflow") != std::string_view::npos;
    if (op == Opcode::decrease_indexing_counter) {
      CHECK(c == OpcodeClass::control);
    } else if (name.find("grant") != std::string_view::npos) {
      CHECK(c == (overflow ? OpcodeClass::overflow_grant : OpcodeClass::grant));
    } else if (name.find("wait") != std::string_view::npos || name.find("acquire") != std::string_view::npos) {
      CHECK(c == (overflow ? OpcodeClass::overflow_acquire : OpcodeClass::acquire));
      CHECK(is_acquire_type(op));
    } else if (name.find("depart") != std::string_view::npos) {
      CHECK((c == OpcodeClass::depart || c == OpcodeClass::overflow_grant));
    } else {
      CHECK(c == (overflow ? OpcodeClass::overflow_release : OpcodeClass::release));
    }
  }
  CHECK(names.size() == 38);
  CHECK_FALSE(opcode_from_name("lock_steal").has_value());
}
