#include "syncron/runner.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include "syncron/simulator.hpp"
#include "syncron/workloads.hpp"

namespace syncron {

RunResult run_once(const RunConfig& cfg) {
  cfg.system.validate();
  auto workload = make_workload(cfg.workload, cfg.system, cfg.seed);

  SimOptions opt;
  opt.record_trace = cfg.trace || cfg.verify;
  opt.drop_grant = cfg.drop_grant;
  opt.max_events = cfg.max_events;

  RunResult r;
  r.config = cfg;
  r.expected_ops = workload->expected_ops();
  Simulator sim(cfg.system, *workload, opt);
  r.stats = sim.run();
  if (opt.record_trace) r.trace = sim.trace();
  if (cfg.verify) {
    Verdict v = verify(sim.trace());
    const std::string bad = workload->check_final();
    v.checks.push_back({"shared_state", bad.empty(), bad});
    r.verdict = std::move(v);
  }
  return r;
}

std::vector<RunResult> run_all(const std::vector<RunConfig>& configs, std::size_t jobs) {
  std::vector<RunResult> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run_once(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, configs.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace syncron
