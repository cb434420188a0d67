#include "syncron/topology.hpp"

#include <bit>
#include <limits>
#include <string>

#include "syncron/errors.hpp"

namespace syncron {

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::syncron: return "syncron";
    case Scheme::flat: return "flat";
    case Scheme::central: return "central";
    case Scheme::hier: return "hier";
    case Scheme::ideal: return "ideal";
  }
  return "?";
}

std::optional<Scheme> scheme_from_name(std::string_view s) {
  for (Scheme v : {Scheme::syncron, Scheme::flat, Scheme::central, Scheme::hier, Scheme::ideal}) {
    if (scheme_name(v) == s) return v;
  }
  return std::nullopt;
}

std::uint32_t bits_for(std::uint32_t n) {
  if (n <= 1) return 0;
  return static_cast<std::uint32_t>(std::bit_width(n - 1));
}

std::uint32_t SystemConfig::unit_bits() const { return bits_for(num_units); }
std::uint32_t SystemConfig::local_bits() const { return bits_for(cores_per_unit); }

void SystemConfig::validate() const {
  if (num_units < 1) throw ConfigError("units", "units must be >= 1");
  if (cores_per_unit < 1) throw ConfigError("cores_per_unit", "cores_per_unit must be >= 1");
  if (clients_per_unit > cores_per_unit) {
    throw ConfigError("clients_per_unit", "clients_per_unit must be <= cores_per_unit");
  }
  if (scheme == Scheme::central || scheme == Scheme::hier) {
    if (cores_per_unit < 2) {
      throw ConfigError("cores_per_unit", "central/hier need cores_per_unit >= 2 for the server core");
    }
    if (clients_per_unit > cores_per_unit - 1) {
      throw ConfigError("clients_per_unit", "central/hier reserve one core per unit as server");
    }
  }
  // Overflow messages pack {SE id, local core id} into the 6-bit core_id
  // field; flat-mode messages carry a global core id in the same field.
  if (unit_bits() + local_bits() > 6) {
    throw ConfigError("cores_per_unit", "units x cores_per_unit does not fit the 6-bit core_id field");
  }
  if (st_entries < 1) throw ConfigError("st_entries", "st_entries must be >= 1");
  if (num_index_counters < 1) throw ConfigError("index_counters", "index_counters must be >= 1");
  if (inbox_depth < 1) throw ConfigError("inbox_depth", "inbox_depth must be >= 1");
  if (unit_mem_bytes < 4096) throw ConfigError("unit_mem_bytes", "unit_mem_bytes must be >= 4096");
  if (unit_mem_bytes > std::numeric_limits<std::uint64_t>::max() / num_units) {
    throw ConfigError("unit_mem_bytes", "address space exceeds 64 bits");
  }
  latency.validate();
}

std::uint32_t unit_of(std::uint64_t addr, const SystemConfig& cfg) {
  if (addr >= cfg.address_space()) {
    throw ConfigError("addr", "address " + std::to_string(addr) + " outside the simulated address space");
  }
  return static_cast<std::uint32_t>(addr / cfg.unit_mem_bytes);
}

std::uint32_t master_se_of(std::uint64_t addr, const SystemConfig& cfg) { return unit_of(addr, cfg); }

CoreId resolve_core(std::uint32_t global_id, const SystemConfig& cfg) {
  if (global_id >= cfg.total_cores()) {
    throw ConfigError("core", "core id " + std::to_string(global_id) + " out of range");
  }
  return CoreId{global_id / cfg.cores_per_unit, global_id % cfg.cores_per_unit};
}

std::uint32_t global_core_id(CoreId c, const SystemConfig& cfg) {
  if (c.unit >= cfg.num_units || c.local >= cfg.cores_per_unit) {
    throw ConfigError("core", "core (" + std::to_string(c.unit) + "," + std::to_string(c.local) + ") out of range");
  }
  return c.unit * cfg.cores_per_unit + c.local;
}

bool is_client(CoreId c, const SystemConfig& cfg) { return c.local < cfg.clients_per_unit; }

}  // namespace syncron
