#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "syncron/latency.hpp"

namespace syncron {

enum class Scheme { syncron, flat, central, hier, ideal };

std::string_view scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(std::string_view s);

struct SystemConfig {
  std::uint32_t num_units = 4;
  std::uint32_t cores_per_unit = 16;
  std::uint32_t clients_per_unit = 15;
  std::uint32_t st_entries = 64;
  std::uint32_t num_index_counters = 256;
  std::uint32_t inbox_depth = 16;
  std::uint64_t unit_mem_bytes = 1ull << 30;
  Scheme scheme = Scheme::syncron;
  LatencyParams latency;
  EnergyParams energy;

  // Throws ConfigError naming the offending key.
  void validate() const;

  std::uint32_t total_cores() const { return num_units * cores_per_unit; }
  std::uint64_t address_space() const { return num_units * unit_mem_bytes; }
  std::uint32_t unit_bits() const;
  std::uint32_t local_bits() const;
};

struct CoreId {
  std::uint32_t unit = 0;
  std::uint32_t local = 0;
  friend bool operator==(const CoreId&, const CoreId&) = default;
  friend auto operator<=>(const CoreId&, const CoreId&) = default;
};

// Number of bits needed to name n distinct values (0 for n <= 1).
std::uint32_t bits_for(std::uint32_t n);

std::uint32_t unit_of(std::uint64_t addr, const SystemConfig& cfg);
std::uint32_t master_se_of(std::uint64_t addr, const SystemConfig& cfg);
CoreId resolve_core(std::uint32_t global_id, const SystemConfig& cfg);
std::uint32_t global_core_id(CoreId c, const SystemConfig& cfg);

// Whether the core is a workload client (as opposed to a server or idle core).
bool is_client(CoreId c, const SystemConfig& cfg);

}  // namespace syncron
