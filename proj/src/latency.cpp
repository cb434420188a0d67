#include "syncron/latency.hpp"

#include <algorithm>
#include <cmath>

#include "syncron/errors.hpp"

namespace syncron {

std::string_view memory_tech_name(MemoryTech t) {
  switch (t) {
    case MemoryTech::hbm: return "hbm";
    case MemoryTech::hmc: return "hmc";
    case MemoryTech::ddr4: return "ddr4";
  }
  return "?";
}

std::optional<MemoryTech> memory_tech_from_name(std::string_view s) {
  for (MemoryTech t : {MemoryTech::hbm, MemoryTech::hmc, MemoryTech::ddr4}) {
    if (memory_tech_name(t) == s) return t;
  }
  return std::nullopt;
}

DramTiming dram_timing(MemoryTech t) {
  switch (t) {
    case MemoryTech::hbm: return {7, 6, 17, 8};
    case MemoryTech::hmc: return {17, 17, 34, 19};
    case MemoryTech::ddr4: return {16, 16, 39, 18};
  }
  throw ConfigError("memory", "unknown memory technology");
}

Picos memory_latency(MemoryTech tech, MemOp op) {
  const DramTiming t = dram_timing(tech);
  return op == MemOp::read ? nanos(t.rcd_read_ns + t.ras_ns) : nanos(t.rcd_write_ns + t.wr_ns);
}

Picos memory_latency(const LatencyParams& p, MemOp op) {
  if (op == MemOp::read && p.mem_read_override) return *p.mem_read_override;
  if (op == MemOp::write && p.mem_write_override) return *p.mem_write_override;
  return memory_latency(p.memory, op);
}

Picos LatencyParams::link_occupancy(std::uint32_t bytes) const {
  // bytes / (GB/s) = ns; ceil to whole picoseconds.
  const double ps = static_cast<double>(bytes) * 1000.0 / link_bandwidth_gbps;
  return static_cast<Picos>(std::ceil(ps - 1e-9));
}

Picos LatencyParams::port_service(std::uint32_t bytes) const {
  const std::uint32_t flits = (bytes + flit_bytes - 1) / flit_bytes;
  return core_cycle * std::max<std::uint32_t>(1, flits);
}

void LatencyParams::validate() const {
  if (core_cycle <= 0 || se_cycle <= 0) throw ConfigError("clock", "clock periods must be > 0");
  if (se_service_cycles <= 0) throw ConfigError("se_service_cycles", "SE service time must be > 0");
  if (intra_hops < 1 || hop_cycles < 1 || arbiter_cycles < 0) {
    throw ConfigError("intra_hops", "intra-unit hop parameters must be positive");
  }
  if (flit_bytes < 1) throw ConfigError("flit_bytes", "flit_bytes must be >= 1");
  if (link_latency_per_line <= 0) throw ConfigError("link_latency_ns", "link latency must be > 0");
  if (link_fixed_cycles < 0) throw ConfigError("link_fixed_cycles", "link_fixed_cycles must be >= 0");
  if (!(link_bandwidth_gbps > 0)) throw ConfigError("link_bandwidth_gbps", "link bandwidth must be > 0");
  if (l1_hit_cycles <= 0) throw ConfigError("l1_hit_cycles", "L1 hit latency must be > 0");
  if (queue_window <= 0) throw ConfigError("queue_window_ns", "queue window must be > 0");
  if (queue_cap_factor < 0) throw ConfigError("queue_cap_factor", "queue cap must be >= 0");
  if (mem_read_override && *mem_read_override <= 0) throw ConfigError("mem_read_ns", "must be > 0");
  if (mem_write_override && *mem_write_override <= 0) throw ConfigError("mem_write_ns", "must be > 0");
}

Picos md1_wait(double rho, Picos service, int cap_factor) {
  const Picos cap = service * cap_factor;
  if (rho <= 0.0) return 0;
  if (rho >= 1.0) return cap;
  const double w = rho * static_cast<double>(service) / (2.0 * (1.0 - rho));
  return std::min(cap, static_cast<Picos>(std::llround(w)));
}

}  // namespace syncron
