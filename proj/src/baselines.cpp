#include "syncron/baselines.hpp"

#include "syncron/errors.hpp"

namespace syncron {

ServerCache::ServerCache(std::size_t lines) : capacity_(lines) {
  if (lines == 0) throw ConfigError("server_cache_lines", "server cache needs at least one line");
}

ServerCache::Access ServerCache::access(std::uint64_t line, MemOp op) {
  Access a;
  auto it = map_.find(line);
  if (it != map_.end()) {
    a.hit = true;
    lru_.splice(lru_.begin(), lru_, it->second);
    if (op == MemOp::write) lru_.front().dirty = true;
    return a;
  }
  if (lru_.size() == capacity_) {
    const Line victim = lru_.back();
    if (victim.dirty) a.writeback = victim.tag;
    map_.erase(victim.tag);
    lru_.pop_back();
  }
  lru_.push_front(Line{line, op == MemOp::write});
  map_[line] = lru_.begin();
  return a;
}

bool ServerCache::dirty(std::uint64_t line) const {
  auto it = map_.find(line);
  return it != map_.end() && it->second->dirty;
}

bool is_hierarchical(Scheme s) { return s == Scheme::syncron || s == Scheme::hier; }

bool uses_server(Scheme s) { return s == Scheme::central || s == Scheme::hier; }

std::uint32_t num_nodes(const SystemConfig& cfg) {
  switch (cfg.scheme) {
    case Scheme::central:
    case Scheme::ideal: return 1;
    default: return cfg.num_units;
  }
}

NodePlacement node_placement(const SystemConfig& cfg, std::uint32_t node) {
  if (node >= num_nodes(cfg)) throw ConfigError("node", "node " + std::to_string(node) + " out of range");
  NodePlacement p;
  p.unit = node;
  if (uses_server(cfg.scheme)) {
    p.server_core = true;
    p.local = cfg.cores_per_unit - 1;
  }
  return p;
}

std::uint32_t request_target(const SystemConfig& cfg, CoreId core, std::uint64_t addr) {
  switch (cfg.scheme) {
    case Scheme::syncron:
    case Scheme::hier: return core.unit;
    case Scheme::flat: return master_se_of(addr, cfg);
    case Scheme::central:
    case Scheme::ideal: return 0;
  }
  return 0;
}

}  // namespace syncron
