#pragma once

#include <cstdint>

namespace syncron {

// Simulated time is kept in integer picoseconds so that 2.5 GHz core cycles
// (400 ps) and 1 GHz SE cycles (1000 ps) mix without rounding.
using Picos = std::int64_t;

// Energy is accumulated in integer femtojoules (0.4 pJ = 400 fJ).
using Femtojoules = std::uint64_t;

inline constexpr Picos kPicosPerNs = 1000;

constexpr Picos nanos(std::int64_t n) { return n * kPicosPerNs; }
constexpr double to_ns(Picos p) { return static_cast<double>(p) / 1000.0; }
constexpr double to_pj(Femtojoules f) { return static_cast<double>(f) / 1000.0; }

}  // namespace syncron
