#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "syncron/errors.hpp"
#include "syncron/runner.hpp"
#include "syncron/trace.hpp"

using namespace syncron;

TEST_CASE("endpoint strings") {
  CHECK(endpoint_string(Endpoint::core(12)) == "core:12");
  CHECK(endpoint_string(Endpoint::node(3)) == "node:3");
  CHECK(endpoint_from_string("node:3") == Endpoint::node(3));
  CHECK_THROWS(endpoint_from_string("se:1"));
}

TEST_CASE("trace files round-trip") {
  RunConfig rc;
  rc.system.num_units = 2;
  apply_setting(rc, "workload", "microbench:lock:100:5");
  rc.trace = true;
  const RunResult r = run_once(rc);
  REQUIRE(r.trace.has_value());

  const auto dir = std::filesystem::temp_directory_path() / "syncron_trace_test";
  std::filesystem::create_directories(dir);
  const auto bin = (dir / "t.bin").string();
  const auto jsonl = (dir / "t.jsonl").string();
  write_trace_files(*r.trace, bin, jsonl);

  CHECK(std::filesystem::file_size(bin) == 18 * r.trace->messages.size());
  CHECK(read_trace_bin(bin) == r.trace->messages);

  const Trace back = read_trace_jsonl(jsonl);
  CHECK(back.header.expected_ops == r.expected_ops);
  CHECK(back.header.scheme == "syncron");
  CHECK(back.records == r.trace->records);
  std::filesystem::remove_all(dir);
}
