#pragma once

#include <coroutine>
#include <cstdint>
#include <exception>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "syncron/topology.hpp"

namespace syncron {

enum class SyncKind : std::uint8_t {
  lock_acquire,
  lock_release,
  barrier_within,
  barrier_across,
  sem_wait,
  sem_post,
  cond_wait,
  cond_signal,
  cond_broadcast,
};

std::string_view sync_kind_name(SyncKind k);
// req_sync operations block the core until the SE answers; the rest are
// req_async and only wait for earlier steps to finish.
bool is_blocking(SyncKind k);

struct Step {
  enum class Kind : std::uint8_t { compute, mem, sync, op_done };
  Kind kind = Kind::compute;
  std::uint64_t instructions = 0;
  std::uint64_t addr = 0;
  bool write = false;
  SyncKind sync = SyncKind::lock_acquire;
  // barrier: participants; sem_wait: initial resources; cond_wait: lock address.
  std::uint64_t info = 0;

  static Step compute(std::uint64_t n) { return {Kind::compute, n, 0, false, SyncKind::lock_acquire, 0}; }
  static Step read(std::uint64_t a) { return {Kind::mem, 0, a, false, SyncKind::lock_acquire, 0}; }
  static Step write_to(std::uint64_t a) { return {Kind::mem, 0, a, true, SyncKind::lock_acquire, 0}; }
  static Step sync_op(SyncKind k, std::uint64_t a, std::uint64_t info = 0) { return {Kind::sync, 0, a, false, k, info}; }
  // Marks the end of one workload-level operation.
  static Step op_done() { return {Kind::op_done, 0, 0, false, SyncKind::lock_acquire, 0}; }
};

// A core's instruction stream, written as a coroutine that yields steps. The
// simulator resumes it only once the previous step has completed.
class Program {
 public:
  struct promise_type {
    Step current;
    std::exception_ptr error;
    Program get_return_object() { return Program{std::coroutine_handle<promise_type>::from_promise(*this)}; }
    std::suspend_always initial_suspend() noexcept { return {}; }
    std::suspend_always final_suspend() noexcept { return {}; }
    std::suspend_always yield_value(Step s) noexcept {
      current = s;
      return {};
    }
    void return_void() noexcept {}
    void unhandled_exception() { error = std::current_exception(); }
  };

  Program() = default;
  explicit Program(std::coroutine_handle<promise_type> h) : h_(h) {}
  Program(Program&& o) noexcept : h_(std::exchange(o.h_, {})) {}
  Program& operator=(Program&& o) noexcept {
    if (this != &o) {
      if (h_) h_.destroy();
      h_ = std::exchange(o.h_, {});
    }
    return *this;
  }
  Program(const Program&) = delete;
  Program& operator=(const Program&) = delete;
  ~Program() {
    if (h_) h_.destroy();
  }

  explicit operator bool() const { return static_cast<bool>(h_); }
  // Runs the program up to its next step; nullopt once it has returned.
  std::optional<Step> next();

 private:
  std::coroutine_handle<promise_type> h_;
};

struct CoreEnv {
  CoreId core;
  std::uint32_t global = 0;
  std::uint32_t client_index = 0;  // dense index over client cores
  std::uint32_t clients = 0;       // total client cores
};

class Workload {
 public:
  virtual ~Workload() = default;
  virtual std::string name() const = 0;
  virtual Program program(const CoreEnv& env) = 0;
  // Number of op_done steps a complete run produces.
  virtual std::uint64_t expected_ops() const = 0;
  // Order-independent digest of the final shared state.
  virtual std::uint64_t digest() const = 0;
  // Empty when the final shared state is consistent, else a description.
  virtual std::string check_final() const { return {}; }
};

struct WorkloadSpec {
  std::string kind = "microbench";  // microbench, stack, queue, array_map, hash_table, linked_list
  std::string primitive = "lock";   // microbench only: lock, barrier, barrier_unit, semaphore, condvar
  std::uint64_t interval = 200;     // microbench instructions between sync points
  std::uint64_t ops_per_core = 0;   // 0 = per-kind default
  std::uint64_t think = 100;        // data structures: instructions between operations
  std::uint64_t array_map_reads = 10;
  std::uint64_t array_map_elements = 1024;
  std::uint64_t hash_buckets = 64;
  std::uint64_t hash_elements = 1024;
  std::uint64_t list_nodes = 128;

  std::uint64_t ops() const;
};

// "microbench:<primitive>:<interval>[:<iterations>]" or "<structure>[:<ops>]".
WorkloadSpec parse_workload(std::string_view text);
std::string workload_string(const WorkloadSpec& spec);

std::unique_ptr<Workload> make_workload(const WorkloadSpec& spec, const SystemConfig& cfg, std::uint64_t seed);

// Address of the k-th synchronization variable / data line homed at `unit`.
std::uint64_t sync_var_addr(const SystemConfig& cfg, std::uint32_t unit, std::uint64_t k);
std::uint64_t data_addr(const SystemConfig& cfg, std::uint32_t unit, std::uint64_t k);

}  // namespace syncron
