#include "doctest.h"
#include "syncron/verifier.hpp"

using namespace syncron;

namespace {

struct Builder {
  Trace t;
  Builder& at(Picos time, std::uint32_t core, TraceAction a, std::uint64_t addr, std::uint64_t aux = 0) {
    t.add(time, Endpoint::core(core), a, addr, aux);
    return *this;
  }
  const std::vector<TraceRecord>& records() const { return t.records; }
};

}  // namespace

TEST_CASE("mutual exclusion") {
  Builder ok;
  ok.at(0, 0, TraceAction::cs_enter, 0x10).at(5, 0, TraceAction::cs_exit, 0x10);
  ok.at(6, 1, TraceAction::cs_enter, 0x10).at(9, 1, TraceAction::cs_exit, 0x10);
  ok.at(7, 2, TraceAction::cs_enter, 0x20).at(8, 2, TraceAction::cs_exit, 0x20);
  CHECK(check_mutual_exclusion(ok.records()).pass);

  Builder bad;
  bad.at(0, 3, TraceAction::cs_enter, 0x10).at(4, 7, TraceAction::cs_enter, 0x10);
  bad.at(5, 3, TraceAction::cs_exit, 0x10).at(6, 7, TraceAction::cs_exit, 0x10);
  const CheckResult r = check_mutual_exclusion(bad.records());
  CHECK_FALSE(r.pass);
  CHECK(r.detail.find("core:3") != std::string::npos);
  CHECK(r.detail.find("core:7") != std::string::npos);
}

TEST_CASE("cond_sleep releases the associated lock") {
  Builder b;
  b.at(0, 0, TraceAction::cs_enter, 0x10).at(1, 0, TraceAction::cond_sleep, 0x18, 0x10);
  b.at(2, 1, TraceAction::cs_enter, 0x10).at(3, 1, TraceAction::cs_exit, 0x10);
  b.at(4, 0, TraceAction::cond_wake, 0x18).at(4, 0, TraceAction::cs_enter, 0x10).at(5, 0, TraceAction::cs_exit, 0x10);
  CHECK(check_mutual_exclusion(b.records()).pass);
  CHECK(check_condvar(b.records()).pass);
}

TEST_CASE("barrier episodes") {
  Builder ok;
  for (std::uint32_t c = 0; c < 3; ++c) ok.at(c, c, TraceAction::barrier_arrive, 0x40, 3);
  for (std::uint32_t c = 0; c < 3; ++c) ok.at(10, c, TraceAction::barrier_depart, 0x40);
  CHECK(check_barrier(ok.records()).pass);

  Builder early;
  early.at(0, 0, TraceAction::barrier_arrive, 0x40, 2).at(1, 0, TraceAction::barrier_depart, 0x40);
  early.at(2, 1, TraceAction::barrier_arrive, 0x40, 2).at(3, 1, TraceAction::barrier_depart, 0x40);
  CHECK_FALSE(check_barrier(early.records()).pass);

  Builder missing;
  missing.at(0, 0, TraceAction::barrier_arrive, 0x40, 2).at(1, 1, TraceAction::barrier_arrive, 0x40, 2);
  missing.at(2, 0, TraceAction::barrier_depart, 0x40);
  CHECK_FALSE(check_barrier(missing.records()).pass);
}

TEST_CASE("semaphore bound") {
  Builder ok;
  ok.at(0, 0, TraceAction::sem_acquire, 0x80, 1).at(1, 0, TraceAction::sem_release, 0x80);
  ok.at(2, 1, TraceAction::sem_acquire, 0x80, 1);
  CHECK(check_semaphore(ok.records()).pass);

  Builder over;
  over.at(0, 0, TraceAction::sem_acquire, 0x80, 1).at(1, 1, TraceAction::sem_acquire, 0x80, 1);
  CHECK_FALSE(check_semaphore(over.records()).pass);
}

TEST_CASE("condvar wake must follow a sleep and relock first") {
  Builder unmatched;
  unmatched.at(0, 0, TraceAction::cond_wake, 0x18);
  CHECK_FALSE(check_condvar(unmatched.records()).pass);

  Builder no_relock;
  no_relock.at(0, 0, TraceAction::cs_enter, 0x10).at(1, 0, TraceAction::cond_sleep, 0x18, 0x10);
  no_relock.at(2, 0, TraceAction::cond_wake, 0x18).at(3, 0, TraceAction::mem_op, 0x1000);
  CHECK_FALSE(check_condvar(no_relock.records()).pass);
}

TEST_CASE("termination") {
  Builder ok;
  ok.at(0, 0, TraceAction::sync_request, 0x10, 0).at(1, 0, TraceAction::cs_enter, 0x10);
  ok.at(2, 0, TraceAction::sync_request, 0x10, 1).at(2, 0, TraceAction::cs_exit, 0x10);
  ok.at(3, 0, TraceAction::op_complete, 0);
  CHECK(check_termination(ok.records(), 1).pass);
  CHECK_FALSE(check_termination(ok.records(), 2).pass);

  Builder pending;
  pending.at(0, 0, TraceAction::sync_request, 0x10, 0);
  CHECK_FALSE(check_termination(pending.records(), 0).pass);
}

TEST_CASE("verify aggregates every monitor") {
  Trace t;
  t.header.expected_ops = 0;
  const Verdict v = verify(t);
  CHECK(v.pass());
  CHECK(v.checks.size() == 5);
}
