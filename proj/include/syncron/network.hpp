#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "syncron/latency.hpp"
#include "syncron/topology.hpp"

namespace syncron {

// A crossbar port inside a unit. Ports 0..cores_per_unit-1 are cores,
// followed by the SE, the memory controller and the inter-unit link
// interface.
struct Location {
  std::uint32_t unit = 0;
  std::uint32_t port = 0;
  friend bool operator==(const Location&, const Location&) = default;
};

struct Transfer {
  Picos arrival = 0;
  Picos queueing = 0;
  Femtojoules energy = 0;
  bool inter = false;
};

// Latency of a transfer on an idle network.
//   same unit:  (hops * hop_cycles + arbiter_cycles) core cycles
//   cross unit: ceil(bytes / 64) * link latency + link fixed cost
//               + one intra-unit segment at each end
// Throws std::invalid_argument for bytes == 0.
Picos idle_transfer_latency(const LatencyParams& p, bool same_unit, std::uint32_t bytes);
Femtojoules transfer_energy(const LatencyParams& p, const EnergyParams& e, bool same_unit, std::uint32_t bytes);

class Network {
 public:
  // zero_cost: every transfer arrives instantly and costs nothing.
  Network(const SystemConfig& cfg, bool zero_cost = false);

  Location core(CoreId c) const { return {c.unit, c.local}; }
  Location se(std::uint32_t unit) const { return {unit, cores_}; }
  Location memory(std::uint32_t unit) const { return {unit, cores_ + 1}; }

  Transfer send(Picos now, Location src, Location dst, std::uint32_t bytes);

  // Current utilization estimate of a destination port at time t.
  double utilization(Location port, Picos t) const;
  std::uint64_t saturated_transfers() const { return saturated_; }

 private:
  Location link_port(std::uint32_t unit) const { return {unit, cores_ + 2}; }
  std::size_t port_index(Location l) const { return l.unit * (cores_ + 3) + l.port; }
  // One intra-unit crossbar traversal ending at dst; returns its latency.
  Picos intra(Picos t, Location dst, std::uint32_t bytes, Picos& queueing);

  struct PortLoad {
    std::map<std::int64_t, Picos> busy;  // busy time per window bucket
  };

  LatencyParams lat_;
  EnergyParams energy_;
  std::uint32_t units_;
  std::uint32_t cores_;
  bool zero_cost_;
  Picos bucket_;
  std::vector<PortLoad> ports_;
  std::vector<Picos> link_free_;  // per directed link (src * units + dst)
  std::uint64_t saturated_ = 0;
};

}  // namespace syncron
