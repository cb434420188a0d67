#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "syncron/config.hpp"
#include "syncron/stats.hpp"
#include "syncron/trace.hpp"
#include "syncron/verifier.hpp"

namespace syncron {

struct RunResult {
  RunConfig config;
  Stats stats;
  std::uint64_t expected_ops = 0;
  std::optional<Verdict> verdict;  // set when config.verify
  std::optional<Trace> trace;      // set when config.trace or config.verify
};

// Builds the system and workload for cfg and runs it to completion. With
// verify set, the verdict also carries a shared_state check from the workload.
// Throws ConfigError, DeadlockError or ProtocolError.
RunResult run_once(const RunConfig& cfg);

// Runs every config on up to `jobs` threads; results keep the input order.
// If any run throws, the first failure (in input order) is rethrown once all
// runs have finished.
std::vector<RunResult> run_all(const std::vector<RunConfig>& configs, std::size_t jobs = 1);

}  // namespace syncron
