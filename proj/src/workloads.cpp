#include "syncron/workloads.hpp"

#include <random>
#include <sstream>
#include <vector>

#include "syncron/errors.hpp"

namespace syncron {

std::string_view sync_kind_name(SyncKind k) {
  switch (k) {
    case SyncKind::lock_acquire: return "lock_acquire";
    case SyncKind::lock_release: return "lock_release";
    case SyncKind::barrier_within: return "barrier_wait_within_unit";
    case SyncKind::barrier_across: return "barrier_wait_across_units";
    case SyncKind::sem_wait: return "sem_wait";
    case SyncKind::sem_post: return "sem_post";
    case SyncKind::cond_wait: return "cond_wait";
    case SyncKind::cond_signal: return "cond_signal";
    case SyncKind::cond_broadcast: return "cond_broadcast";
  }
  return "?";
}

bool is_blocking(SyncKind k) {
  switch (k) {
    case SyncKind::lock_acquire:
    case SyncKind::barrier_within:
    case SyncKind::barrier_across:
    case SyncKind::sem_wait:
    case SyncKind::cond_wait: return true;
    default: return false;
  }
}

std::optional<Step> Program::next() {
  if (!h_ || h_.done()) return std::nullopt;
  h_.resume();
  if (h_.promise().error) std::rethrow_exception(h_.promise().error);
  if (h_.done()) return std::nullopt;
  return h_.promise().current;
}

std::uint64_t sync_var_addr(const SystemConfig& cfg, std::uint32_t unit, std::uint64_t k) {
  const std::uint64_t off = 0x1000 + 8 * k;
  if (unit >= cfg.num_units || off >= cfg.unit_mem_bytes / 2) throw ConfigError("workload", "sync variable out of range");
  return unit * cfg.unit_mem_bytes + off;
}

std::uint64_t data_addr(const SystemConfig& cfg, std::uint32_t unit, std::uint64_t k) {
  const std::uint64_t off = cfg.unit_mem_bytes / 2 + 64 * k;
  if (unit >= cfg.num_units || off >= cfg.unit_mem_bytes) throw ConfigError("workload", "data address out of range");
  return unit * cfg.unit_mem_bytes + off;
}

std::uint64_t WorkloadSpec::ops() const {
  if (ops_per_core != 0) return ops_per_core;
  if (kind == "microbench") return 100;
  if (kind == "linked_list") return 5;
  return 100;
}

namespace {

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  if (s.empty()) throw ConfigError("workload", "missing " + std::string(what));
  for (char c : s) {
    if (c < '0' || c > '9') throw ConfigError("workload", "bad " + std::string(what) + " '" + std::string(s) + "'");
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

// Mixes a value into a 64-bit digest (splitmix64 finalizer).
std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::mt19937_64 core_rng(std::uint64_t seed, std::uint32_t global) {
  return std::mt19937_64(mix(seed) ^ mix(0x5EED0000ull + global));
}

// Unit holding element i of n when n elements are block-partitioned.
std::uint32_t block_home(std::uint64_t i, std::uint64_t n, std::uint32_t units) {
  return static_cast<std::uint32_t>(i * units / n);
}

class WorkloadBase : public Workload {
 public:
  WorkloadBase(const WorkloadSpec& spec, const SystemConfig& cfg, std::uint64_t seed)
      : spec_(spec), cfg_(cfg), seed_(seed), clients_(cfg.num_units * cfg.clients_per_unit) {}
  std::string name() const override { return workload_string(spec_); }

 protected:
  WorkloadSpec spec_;
  SystemConfig cfg_;
  std::uint64_t seed_;
  std::uint32_t clients_;
};

class LockBench final : public WorkloadBase {
 public:
  using WorkloadBase::WorkloadBase;
  Program program(const CoreEnv& env) override { return run(env); }
  std::uint64_t expected_ops() const override { return std::uint64_t{clients_} * spec_.ops(); }
  std::uint64_t digest() const override { return mix(count_); }
  std::string check_final() const override {
    return count_ == expected_ops() ? "" : "lock counter " + std::to_string(count_) + " != " + std::to_string(expected_ops());
  }

 private:
  Program run(CoreEnv) {
    const std::uint64_t lock = sync_var_addr(cfg_, 0, 0);
    for (std::uint64_t i = 0; i < spec_.ops(); ++i) {
      co_yield Step::compute(spec_.interval);
      co_yield Step::sync_op(SyncKind::lock_acquire, lock);
      ++count_;  // empty critical section
      co_yield Step::sync_op(SyncKind::lock_release, lock);
      co_yield Step::op_done();
    }
  }
  std::uint64_t count_ = 0;
};

class BarrierBench final : public WorkloadBase {
 public:
  BarrierBench(const WorkloadSpec& spec, const SystemConfig& cfg, std::uint64_t seed, bool within_unit)
      : WorkloadBase(spec, cfg, seed), within_(within_unit), arrivals_(spec.ops(), 0) {}
  Program program(const CoreEnv& env) override { return run(env); }
  std::uint64_t expected_ops() const override { return std::uint64_t{clients_} * spec_.ops(); }
  std::uint64_t digest() const override {
    std::uint64_t d = 0;
    for (std::size_t i = 0; i < arrivals_.size(); ++i) d ^= mix(i * 1315423911ull + arrivals_[i]);
    return d;
  }
  std::string check_final() const override {
    for (std::uint64_t a : arrivals_) {
      if (a != clients_) return "barrier episode with " + std::to_string(a) + " arrivals";
    }
    return {};
  }

 private:
  Program run(CoreEnv env) {
    // Within-unit barriers are homed one unit over so non-Master SEs act as
    // the coordinator for them.
    const std::uint32_t home = within_ ? (env.core.unit + 1) % cfg_.num_units : 0;
    const std::uint64_t bar = sync_var_addr(cfg_, home, within_ ? 1 + env.core.unit : 0);
    const std::uint64_t participants = within_ ? cfg_.clients_per_unit : clients_;
    const SyncKind kind = within_ ? SyncKind::barrier_within : SyncKind::barrier_across;
    for (std::uint64_t i = 0; i < spec_.ops(); ++i) {
      co_yield Step::compute(spec_.interval);
      ++arrivals_[i];
      co_yield Step::sync_op(kind, bar, participants);
      co_yield Step::op_done();
    }
  }
  bool within_;
  std::vector<std::uint64_t> arrivals_;
};

// Half the clients wait, the rest post; an odd client goes to the posting
// side so every wait is eventually matched.
class SemaphoreBench final : public WorkloadBase {
 public:
  using WorkloadBase::WorkloadBase;
  Program program(const CoreEnv& env) override { return run(env); }
  std::uint64_t expected_ops() const override { return std::uint64_t{clients_} * spec_.ops(); }
  std::uint64_t digest() const override { return mix(acquired_) ^ mix(posted_ << 1); }
  std::string check_final() const override {
    const std::uint64_t waiters = clients_ / 2;
    if (acquired_ != waiters * spec_.ops()) return "semaphore grants " + std::to_string(acquired_);
    return {};
  }

 private:
  Program run(CoreEnv env) {
    const std::uint64_t sem = sync_var_addr(cfg_, 0, 0);
    const bool waiter = env.client_index < clients_ / 2;
    for (std::uint64_t i = 0; i < spec_.ops(); ++i) {
      co_yield Step::compute(spec_.interval);
      if (waiter) {
        co_yield Step::sync_op(SyncKind::sem_wait, sem, 0);
        ++acquired_;
      } else {
        ++posted_;
        co_yield Step::sync_op(SyncKind::sem_post, sem);
      }
      co_yield Step::op_done();
    }
  }
  std::uint64_t acquired_ = 0;
  std::uint64_t posted_ = 0;
};

// Monitor-style token passing: waiters consume a token under the lock and
// sleep on the condition while none is available; signalers produce one.
class CondvarBench final : public WorkloadBase {
 public:
  using WorkloadBase::WorkloadBase;
  Program program(const CoreEnv& env) override { return run(env); }
  std::uint64_t expected_ops() const override { return std::uint64_t{clients_} * spec_.ops(); }
  std::uint64_t digest() const override { return mix(consumed_) ^ mix(produced_ << 1); }
  std::string check_final() const override {
    if (produced_ - consumed_ != tokens_) return "token count does not balance";
    return {};
  }

 private:
  Program run(CoreEnv env) {
    // Lock and condition share a home so the waiter's registration always
    // reaches the coordinator before the lock is handed on.
    const std::uint64_t lock = sync_var_addr(cfg_, 0, 0);
    const std::uint64_t cond = sync_var_addr(cfg_, 0, 1);
    const bool waiter = env.client_index < clients_ / 2;
    for (std::uint64_t i = 0; i < spec_.ops(); ++i) {
      co_yield Step::compute(spec_.interval);
      co_yield Step::sync_op(SyncKind::lock_acquire, lock);
      if (waiter) {
        while (tokens_ == 0) co_yield Step::sync_op(SyncKind::cond_wait, cond, lock);
        --tokens_;
        ++consumed_;
      } else {
        ++tokens_;
        ++produced_;
        co_yield Step::sync_op(SyncKind::cond_signal, cond);
      }
      co_yield Step::sync_op(SyncKind::lock_release, lock);
      co_yield Step::op_done();
    }
  }
  std::uint64_t tokens_ = 0;
  std::uint64_t consumed_ = 0;
  std::uint64_t produced_ = 0;
};

// Single coarse lock; every push writes a node in the pusher's unit and the
// top-of-stack descriptor.
class StackWorkload final : public WorkloadBase {
 public:
  using WorkloadBase::WorkloadBase;
  Program program(const CoreEnv& env) override { return run(env); }
  std::uint64_t expected_ops() const override { return std::uint64_t{clients_} * spec_.ops(); }
  std::uint64_t digest() const override { return mix(size_) ^ mix(sum_ + 17); }
  std::string check_final() const override {
    return size_ == expected_ops() ? "" : "stack size " + std::to_string(size_) + " != " + std::to_string(expected_ops());
  }

 private:
  Program run(CoreEnv env) {
    const std::uint64_t lock = sync_var_addr(cfg_, 0, 0);
    const std::uint64_t top = data_addr(cfg_, 0, 0);
    for (std::uint64_t i = 0; i < spec_.ops(); ++i) {
      co_yield Step::compute(spec_.think);
      const std::uint64_t value = mix(std::uint64_t{env.global} << 32 | i);
      const std::uint64_t node = data_addr(cfg_, env.core.unit, 1 + env.core.local * spec_.ops() + i);
      co_yield Step::sync_op(SyncKind::lock_acquire, lock);
      const std::uint64_t size = size_;
      co_yield Step::write_to(node);
      co_yield Step::write_to(top);
      size_ = size + 1;
      sum_ += value;
      co_yield Step::sync_op(SyncKind::lock_release, lock);
      co_yield Step::op_done();
    }
  }
  std::uint64_t size_ = 0;
  std::uint64_t sum_ = 0;
};

// Pops from a pre-filled queue guarded by head and tail locks. A pop reads
// the head node (block-partitioned across units) and updates the head
// descriptor next to the lock.
class QueueWorkload final : public WorkloadBase {
 public:
  QueueWorkload(const WorkloadSpec& spec, const SystemConfig& cfg, std::uint64_t seed)
      : WorkloadBase(spec, cfg, seed), length_(std::uint64_t{clients_} * spec.ops()) {}
  Program program(const CoreEnv& env) override { return run(env); }
  std::uint64_t expected_ops() const override { return length_; }
  std::uint64_t digest() const override { return mix(head_) ^ mix(sum_ + 29); }
  std::string check_final() const override {
    return head_ == length_ ? "" : "queue head " + std::to_string(head_) + " != " + std::to_string(length_);
  }

 private:
  std::uint64_t node_addr(std::uint64_t i) const {
    const std::uint32_t home = block_home(i, length_, cfg_.num_units);
    return data_addr(cfg_, home, 2 + i);
  }
  Program run(CoreEnv) {
    const std::uint64_t head_lock = sync_var_addr(cfg_, 0, 0);
    const std::uint64_t head_desc = data_addr(cfg_, 0, 0);
    for (std::uint64_t i = 0; i < spec_.ops(); ++i) {
      co_yield Step::compute(spec_.think);
      co_yield Step::sync_op(SyncKind::lock_acquire, head_lock);
      const std::uint64_t h = head_;
      co_yield Step::read(node_addr(h));
      co_yield Step::write_to(head_desc);
      head_ = h + 1;
      sum_ += mix(h);
      co_yield Step::sync_op(SyncKind::lock_release, head_lock);
      co_yield Step::op_done();
    }
  }
  std::uint64_t length_;
  std::uint64_t head_ = 0;
  std::uint64_t sum_ = 0;
};

// Coarse-locked array; a lookup reads a run of consecutive elements.
class ArrayMapWorkload final : public WorkloadBase {
 public:
  using WorkloadBase::WorkloadBase;
  Program program(const CoreEnv& env) override { return run(env); }
  std::uint64_t expected_ops() const override { return std::uint64_t{clients_} * spec_.ops(); }
  std::uint64_t digest() const override { return mix(lookups_) ^ mix(keysum_ + 31); }
  std::string check_final() const override {
    return lookups_ == expected_ops() ? "" : "array map lookups " + std::to_string(lookups_);
  }

 private:
  Program run(CoreEnv env) {
    auto rng = core_rng(seed_, env.global);
    const std::uint64_t n = spec_.array_map_elements;
    const std::uint64_t lock = sync_var_addr(cfg_, 0, 0);
    for (std::uint64_t i = 0; i < spec_.ops(); ++i) {
      co_yield Step::compute(spec_.think);
      const std::uint64_t start = rng() % n;
      co_yield Step::sync_op(SyncKind::lock_acquire, lock);
      const std::uint64_t seen = lookups_;
      for (std::uint64_t r = 0; r < spec_.array_map_reads; ++r) {
        const std::uint64_t e = (start + r) % n;
        co_yield Step::read(data_addr(cfg_, block_home(e, n, cfg_.num_units), 1 + e));
      }
      lookups_ = seen + 1;
      keysum_ += start;
      co_yield Step::sync_op(SyncKind::lock_release, lock);
      co_yield Step::op_done();
    }
  }
  std::uint64_t lookups_ = 0;
  std::uint64_t keysum_ = 0;
};

// Per-bucket locks; a lookup reads the bucket head and one chain node.
class HashTableWorkload final : public WorkloadBase {
 public:
  HashTableWorkload(const WorkloadSpec& spec, const SystemConfig& cfg, std::uint64_t seed)
      : WorkloadBase(spec, cfg, seed), hits_(spec.hash_buckets, 0) {
    if (spec.hash_buckets == 0 || spec.hash_elements == 0) throw ConfigError("workload", "empty hash table");
  }
  Program program(const CoreEnv& env) override { return run(env); }
  std::uint64_t expected_ops() const override { return std::uint64_t{clients_} * spec_.ops(); }
  std::uint64_t digest() const override {
    std::uint64_t d = 0;
    for (std::size_t b = 0; b < hits_.size(); ++b) d ^= mix(b * 0x100000001B3ull + hits_[b]);
    return d;
  }
  std::string check_final() const override {
    std::uint64_t total = 0;
    for (auto h : hits_) total += h;
    return total == expected_ops() ? "" : "hash lookups " + std::to_string(total);
  }

 private:
  Program run(CoreEnv env) {
    auto rng = core_rng(seed_, env.global);
    const std::uint64_t buckets = spec_.hash_buckets;
    const std::uint64_t per_bucket = std::max<std::uint64_t>(1, spec_.hash_elements / buckets);
    for (std::uint64_t i = 0; i < spec_.ops(); ++i) {
      co_yield Step::compute(spec_.think);
      const std::uint64_t key = rng() % spec_.hash_elements;
      const std::uint64_t b = mix(key) % buckets;
      const std::uint32_t home = block_home(b, buckets, cfg_.num_units);
      const std::uint64_t lock = sync_var_addr(cfg_, home, b);
      co_yield Step::sync_op(SyncKind::lock_acquire, lock);
      const std::uint64_t seen = hits_[b];
      co_yield Step::read(data_addr(cfg_, home, b * (per_bucket + 1)));
      co_yield Step::read(data_addr(cfg_, home, b * (per_bucket + 1) + 1 + key % per_bucket));
      hits_[b] = seen + 1;
      co_yield Step::sync_op(SyncKind::lock_release, lock);
      co_yield Step::op_done();
    }
  }
  std::vector<std::uint64_t> hits_;
};

// Sorted list with one lock per node, traversed hand-over-hand: a core holds
// two locks while moving to the next node.
class LinkedListWorkload final : public WorkloadBase {
 public:
  LinkedListWorkload(const WorkloadSpec& spec, const SystemConfig& cfg, std::uint64_t seed)
      : WorkloadBase(spec, cfg, seed), visits_(spec.list_nodes, 0) {
    if (spec.list_nodes < 2) throw ConfigError("workload", "linked_list needs at least 2 nodes");
  }
  Program program(const CoreEnv& env) override { return run(env); }
  std::uint64_t expected_ops() const override { return std::uint64_t{clients_} * spec_.ops(); }
  std::uint64_t digest() const override {
    std::uint64_t d = 0;
    for (std::size_t n = 0; n < visits_.size(); ++n) d ^= mix(n * 0x9E3779B1ull + visits_[n]);
    return d;
  }
  std::string check_final() const override {
    std::uint64_t total = 0;
    for (auto v : visits_) total += v;
    return total == expected_ops() ? "" : "list updates " + std::to_string(total);
  }

 private:
  // Nodes are interleaved across units so the hot head of the list does not
  // pile onto one SE.
  std::uint32_t home(std::uint64_t n) const { return static_cast<std::uint32_t>(n % cfg_.num_units); }
  std::uint64_t lock_of(std::uint64_t n) const { return sync_var_addr(cfg_, home(n), n / cfg_.num_units); }
  std::uint64_t node_of(std::uint64_t n) const { return data_addr(cfg_, home(n), n / cfg_.num_units); }

  Program run(CoreEnv env) {
    auto rng = core_rng(seed_, env.global);
    const std::uint64_t nodes = spec_.list_nodes;
    for (std::uint64_t i = 0; i < spec_.ops(); ++i) {
      co_yield Step::compute(spec_.think);
      const std::uint64_t target = 1 + rng() % (nodes - 1);
      co_yield Step::sync_op(SyncKind::lock_acquire, lock_of(0));
      co_yield Step::read(node_of(0));
      for (std::uint64_t n = 1; n <= target; ++n) {
        co_yield Step::sync_op(SyncKind::lock_acquire, lock_of(n));
        co_yield Step::sync_op(SyncKind::lock_release, lock_of(n - 1));
        co_yield Step::read(node_of(n));
      }
      const std::uint64_t seen = visits_[target];
      co_yield Step::write_to(node_of(target));
      visits_[target] = seen + 1;
      co_yield Step::sync_op(SyncKind::lock_release, lock_of(target));
      co_yield Step::op_done();
    }
  }
  std::vector<std::uint64_t> visits_;
};

}  // namespace

WorkloadSpec parse_workload(std::string_view text) {
  const auto parts = split(text, ':');
  WorkloadSpec spec;
  spec.kind = std::string(parts[0]);
  if (spec.kind == "microbench") {
    if (parts.size() < 2 || parts.size() > 4) {
      throw ConfigError("workload", "expected microbench:<primitive>[:<interval>[:<iterations>]]");
    }
    spec.primitive = std::string(parts[1]);
    if (spec.primitive != "lock" && spec.primitive != "barrier" && spec.primitive != "barrier_unit" &&
        spec.primitive != "semaphore" && spec.primitive != "condvar") {
      throw ConfigError("workload", "unknown microbench primitive '" + spec.primitive + "'");
    }
    if (parts.size() >= 3) spec.interval = parse_u64(parts[2], "interval");
    if (parts.size() == 4) spec.ops_per_core = parse_u64(parts[3], "iterations");
    return spec;
  }
  if (spec.kind != "stack" && spec.kind != "queue" && spec.kind != "array_map" && spec.kind != "hash_table" &&
      spec.kind != "linked_list") {
    throw ConfigError("workload", "unknown workload '" + spec.kind + "'");
  }
  if (parts.size() > 2) throw ConfigError("workload", "expected <structure>[:<ops_per_core>]");
  if (parts.size() == 2) spec.ops_per_core = parse_u64(parts[1], "ops per core");
  return spec;
}

std::string workload_string(const WorkloadSpec& spec) {
  std::ostringstream os;
  if (spec.kind == "microbench") {
    os << "microbench:" << spec.primitive << ":" << spec.interval << ":" << spec.ops();
  } else {
    os << spec.kind << ":" << spec.ops();
  }
  return os.str();
}

std::unique_ptr<Workload> make_workload(const WorkloadSpec& spec, const SystemConfig& cfg, std::uint64_t seed) {
  if (spec.kind == "microbench") {
    if (spec.primitive == "lock") return std::make_unique<LockBench>(spec, cfg, seed);
    if (spec.primitive == "barrier") return std::make_unique<BarrierBench>(spec, cfg, seed, false);
    if (spec.primitive == "barrier_unit") return std::make_unique<BarrierBench>(spec, cfg, seed, true);
    if (spec.primitive == "semaphore") return std::make_unique<SemaphoreBench>(spec, cfg, seed);
    if (spec.primitive == "condvar") return std::make_unique<CondvarBench>(spec, cfg, seed);
    throw ConfigError("workload", "unknown microbench primitive '" + spec.primitive + "'");
  }
  if (spec.kind == "stack") return std::make_unique<StackWorkload>(spec, cfg, seed);
  if (spec.kind == "queue") return std::make_unique<QueueWorkload>(spec, cfg, seed);
  if (spec.kind == "array_map") return std::make_unique<ArrayMapWorkload>(spec, cfg, seed);
  if (spec.kind == "hash_table") return std::make_unique<HashTableWorkload>(spec, cfg, seed);
  if (spec.kind == "linked_list") return std::make_unique<LinkedListWorkload>(spec, cfg, seed);
  throw ConfigError("workload", "unknown workload '" + spec.kind + "'");
}

}  // namespace syncron
