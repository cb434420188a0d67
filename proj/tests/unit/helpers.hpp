#pragma once

#include <functional>
#include <string>
#include <utility>

#include "syncron/simulator.hpp"
#include "syncron/workloads.hpp"

namespace testing {

// Workload assembled from a per-core program factory, for hand-built scenarios.
class ScriptWorkload final : public syncron::Workload {
 public:
  using Factory = std::function<syncron::Program(const syncron::CoreEnv&)>;
  ScriptWorkload(Factory f, std::uint64_t expected_ops) : f_(std::move(f)), expected_(expected_ops) {}
  std::string name() const override { return "script"; }
  syncron::Program program(const syncron::CoreEnv& env) override { return f_(env); }
  std::uint64_t expected_ops() const override { return expected_; }
  std::uint64_t digest() const override { return 0; }

 private:
  Factory f_;
  std::uint64_t expected_;
};

inline syncron::Program idle_program() { co_return; }

inline syncron::SystemConfig small_system(syncron::Scheme s, std::uint32_t units, std::uint32_t cores,
                                          std::uint32_t clients) {
  syncron::SystemConfig c;
  c.scheme = s;
  c.num_units = units;
  c.cores_per_unit = cores;
  c.clients_per_unit = clients;
  return c;
}

inline constexpr syncron::Scheme kAllSchemes[] = {syncron::Scheme::syncron, syncron::Scheme::flat,
                                                  syncron::Scheme::central, syncron::Scheme::hier,
                                                  syncron::Scheme::ideal};

}  // namespace testing
