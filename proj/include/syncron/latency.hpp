#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "syncron/units.hpp"

namespace syncron {

enum class MemoryTech { hbm, hmc, ddr4 };
enum class MemOp { read, write };

std::string_view memory_tech_name(MemoryTech t);
std::optional<MemoryTech> memory_tech_from_name(std::string_view s);

// Row-level DRAM parameters (ns) reduced to fixed read/write latencies:
// read = tRCD(read) + tRAS, write = tRCD(write) + tWR.
struct DramTiming {
  int rcd_read_ns;
  int rcd_write_ns;
  int ras_ns;
  int wr_ns;
};
DramTiming dram_timing(MemoryTech t);

struct LatencyParams {
  Picos core_cycle = 400;     // 2.5 GHz
  Picos se_cycle = 1000;      // 1 GHz
  int se_service_cycles = 12;
  int intra_hops = 1;
  int hop_cycles = 1;
  int arbiter_cycles = 1;
  int flit_bytes = 16;
  Picos link_latency_per_line = nanos(40);
  int link_fixed_cycles = 20;
  double link_bandwidth_gbps = 12.8;  // GB/s, per direction
  int l1_hit_cycles = 4;
  Picos queue_window = nanos(1000);
  int queue_cap_factor = 10;
  MemoryTech memory = MemoryTech::hbm;
  std::optional<Picos> mem_read_override;
  std::optional<Picos> mem_write_override;

  Picos se_service() const { return se_cycle * se_service_cycles; }
  Picos l1_hit() const { return core_cycle * l1_hit_cycles; }
  // Idle cost of one crossbar traversal inside a unit.
  Picos intra_base() const { return core_cycle * (intra_hops * hop_cycles + arbiter_cycles); }
  Picos link_fixed() const { return core_cycle * link_fixed_cycles; }
  // Time a message of `bytes` occupies a link direction.
  Picos link_occupancy(std::uint32_t bytes) const;
  // Crossbar port service time (deterministic, whole flits).
  Picos port_service(std::uint32_t bytes) const;

  void validate() const;
};

Picos memory_latency(MemoryTech tech, MemOp op);
Picos memory_latency(const LatencyParams& p, MemOp op);

// M/D/1 mean waiting time for utilization rho and deterministic service time
// s: W = rho * s / (2 (1 - rho)), clamped at cap_factor * s. Saturation
// (rho >= 1) yields the cap.
Picos md1_wait(double rho, Picos service, int cap_factor);

struct EnergyParams {
  Femtojoules hop_per_bit = 400;      // 0.4 pJ/bit per hop
  Femtojoules link_per_bit = 4000;    // 4 pJ/bit
  Femtojoules memory_per_bit = 7000;  // 7 pJ/bit
  Femtojoules l1_hit = 23000;         // 23 pJ
  Femtojoules l1_miss = 47000;        // 47 pJ
};

// DRAM array energy for one access of `bytes`.
inline Femtojoules memory_energy(const EnergyParams& e, std::uint32_t bytes) {
  return Femtojoules{bytes} * 8 * e.memory_per_bit;
}

}  // namespace syncron
