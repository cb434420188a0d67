#include "syncron/network.hpp"

#include <stdexcept>

namespace syncron {
namespace {

constexpr int kBuckets = 10;  // sub-windows per utilization window

std::uint32_t lines_of(std::uint32_t bytes) { return (bytes + 63) / 64; }

}  // namespace

Picos idle_transfer_latency(const LatencyParams& p, bool same_unit, std::uint32_t bytes) {
  if (bytes == 0) throw std::invalid_argument("transfer of zero bytes");
  if (same_unit) return p.intra_base();
  return 2 * p.intra_base() + lines_of(bytes) * p.link_latency_per_line + p.link_fixed();
}

Femtojoules transfer_energy(const LatencyParams& p, const EnergyParams& e, bool same_unit, std::uint32_t bytes) {
  if (bytes == 0) throw std::invalid_argument("transfer of zero bytes");
  const Femtojoules bits = Femtojoules{bytes} * 8;
  const Femtojoules hop = bits * e.hop_per_bit * static_cast<Femtojoules>(p.intra_hops);
  if (same_unit) return hop;
  return 2 * hop + bits * e.link_per_bit;
}

Network::Network(const SystemConfig& cfg, bool zero_cost)
    : lat_(cfg.latency),
      energy_(cfg.energy),
      units_(cfg.num_units),
      cores_(cfg.cores_per_unit),
      zero_cost_(zero_cost),
      bucket_(std::max<Picos>(1, cfg.latency.queue_window / kBuckets)),
      ports_(static_cast<std::size_t>(cfg.num_units) * (cfg.cores_per_unit + 3)),
      link_free_(static_cast<std::size_t>(cfg.num_units) * cfg.num_units, 0) {}

double Network::utilization(Location port, Picos t) const {
  const PortLoad& pl = ports_[port_index(port)];
  const std::int64_t b = t / bucket_;
  Picos busy = 0;
  for (auto it = pl.busy.lower_bound(b - kBuckets + 1); it != pl.busy.end() && it->first <= b; ++it) {
    busy += it->second;
  }
  return static_cast<double>(busy) / static_cast<double>(bucket_ * kBuckets);
}

Picos Network::intra(Picos t, Location dst, std::uint32_t bytes, Picos& queueing) {
  const Picos service = lat_.port_service(bytes);
  const double rho = utilization(dst, t);
  if (rho >= 1.0) ++saturated_;
  const Picos wait = md1_wait(rho, service, lat_.queue_cap_factor);
  queueing += wait;
  PortLoad& pl = ports_[port_index(dst)];
  const std::int64_t b = t / bucket_;
  pl.busy[b] += service;
  // Keep a few windows of history; older buckets can no longer be queried.
  while (!pl.busy.empty() && pl.busy.begin()->first < b - 4 * kBuckets) pl.busy.erase(pl.busy.begin());
  return lat_.intra_base() + wait;
}

Transfer Network::send(Picos now, Location src, Location dst, std::uint32_t bytes) {
  if (bytes == 0) throw std::invalid_argument("transfer of zero bytes");
  Transfer tr;
  tr.inter = src.unit != dst.unit;
  if (zero_cost_) {
    tr.arrival = now;
    return tr;
  }
  tr.energy = transfer_energy(lat_, energy_, !tr.inter, bytes);
  if (!tr.inter) {
    tr.arrival = now + intra(now, dst, bytes, tr.queueing);
    return tr;
  }
  Picos t = now + intra(now, link_port(src.unit), bytes, tr.queueing);
  // Links are point-to-point and FIFO per direction: a transfer starts once
  // the previous one has finished occupying the link.
  Picos& free_at = link_free_[src.unit * units_ + dst.unit];
  const Picos start = std::max(t, free_at);
  tr.queueing += start - t;
  free_at = start + lat_.link_occupancy(bytes);
  t = start + lines_of(bytes) * lat_.link_latency_per_line + lat_.link_fixed();
  tr.arrival = t + intra(t, dst, bytes, tr.queueing);
  return tr;
}

}  // namespace syncron
