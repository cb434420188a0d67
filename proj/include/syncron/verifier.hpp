#pragma once

#include <string>
#include <vector>

#include "syncron/trace.hpp"

namespace syncron {

struct CheckResult {
  std::string name;
  bool pass = true;
  std::string detail;  // first violation found
};

struct Verdict {
  std::vector<CheckResult> checks;
  bool pass() const;
  std::string summary() const;
};

// Each monitor expects the records of one complete run; they are ordered by
// (time, seq) internally.
CheckResult check_mutual_exclusion(const std::vector<TraceRecord>& records);
CheckResult check_barrier(const std::vector<TraceRecord>& records);
CheckResult check_semaphore(const std::vector<TraceRecord>& records);
CheckResult check_condvar(const std::vector<TraceRecord>& records);
CheckResult check_termination(const std::vector<TraceRecord>& records, std::uint64_t expected_ops);

Verdict verify(const Trace& trace);

}  // namespace syncron
