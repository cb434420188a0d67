#pragma once

#include <cstddef>
#include <cstdint>
#include <list>
#include <optional>
#include <unordered_map>

#include "syncron/latency.hpp"
#include "syncron/topology.hpp"

namespace syncron {

// Private cache of a software synchronization server. Holds variable
// records only (workload data bypasses it): LRU over 64-byte lines,
// write-back with write-allocate.
class ServerCache {
 public:
  struct Access {
    bool hit = false;
    std::optional<std::uint64_t> writeback;  // dirty line evicted by this access
  };

  explicit ServerCache(std::size_t lines = 256);

  Access access(std::uint64_t line, MemOp op);
  bool contains(std::uint64_t line) const { return map_.count(line) != 0; }
  bool dirty(std::uint64_t line) const;
  std::size_t size() const { return lru_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  struct Line {
    std::uint64_t tag;
    bool dirty;
  };
  std::size_t capacity_;
  std::list<Line> lru_;  // front = most recently used
  std::unordered_map<std::uint64_t, std::list<Line>::iterator> map_;
};

// Where a synchronization node sits: the SE of a unit, or a server core.
struct NodePlacement {
  std::uint32_t unit = 0;
  bool server_core = false;
  std::uint32_t local = 0;  // core slot when server_core
};

bool is_hierarchical(Scheme s);
// Central and Hier keep variable state in memory behind a server cache.
bool uses_server(Scheme s);

std::uint32_t num_nodes(const SystemConfig& cfg);
NodePlacement node_placement(const SystemConfig& cfg, std::uint32_t node);
// Node a core sends its requests for `addr` to.
std::uint32_t request_target(const SystemConfig& cfg, CoreId core, std::uint64_t addr);

}  // namespace syncron
