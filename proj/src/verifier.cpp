#include "syncron/verifier.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "syncron/workloads.hpp"

namespace syncron {
namespace {

std::vector<TraceRecord> ordered(const std::vector<TraceRecord>& in) {
  std::vector<TraceRecord> out = in;
  std::stable_sort(out.begin(), out.end(), [](const TraceRecord& a, const TraceRecord& b) {
    return a.time != b.time ? a.time < b.time : a.seq < b.seq;
  });
  return out;
}

std::string at(const TraceRecord& r) {
  std::ostringstream os;
  os << endpoint_string(r.actor) << " " << trace_action_name(r.action) << " addr=0x" << std::hex << r.addr
     << std::dec << " t=" << r.time << "ps";
  return os.str();
}

CheckResult fail(std::string name, std::string detail) { return CheckResult{std::move(name), false, std::move(detail)}; }

bool is_core(const TraceRecord& r) { return r.actor.kind == Endpoint::Kind::core; }

}  // namespace

bool Verdict::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string Verdict::summary() const {
  std::ostringstream os;
  for (const CheckResult& c : checks) {
    os << c.name << ": " << (c.pass ? "pass" : "FAIL");
    if (!c.pass) os << " (" << c.detail << ")";
    os << "\n";
  }
  return os.str();
}

CheckResult check_mutual_exclusion(const std::vector<TraceRecord>& records) {
  const std::string name = "mutual_exclusion";
  struct Hold {
    TraceRecord enter;
  };
  std::map<std::uint64_t, Hold> held;
  for (const TraceRecord& r : ordered(records)) {
    if (!is_core(r)) continue;
    if (r.action == TraceAction::cs_enter) {
      auto it = held.find(r.addr);
      if (it != held.end()) {
        return fail(name, "overlapping critical sections: " + at(it->second.enter) + " and " + at(r));
      }
      held.emplace(r.addr, Hold{r});
    } else if (r.action == TraceAction::cs_exit || r.action == TraceAction::cond_sleep) {
      const std::uint64_t lock = r.action == TraceAction::cs_exit ? r.addr : r.aux;
      auto it = held.find(lock);
      if (it == held.end() || !(it->second.enter.actor == r.actor)) {
        return fail(name, "lock released by a core that does not hold it: " + at(r));
      }
      held.erase(it);
    }
  }
  return {name, true, {}};
}

CheckResult check_barrier(const std::vector<TraceRecord>& records) {
  const std::string name = "barrier";
  struct Episode {
    std::uint64_t participants = 0;
    std::set<std::uint32_t> arrived;
    std::set<std::uint32_t> departed;
  };
  std::map<std::uint64_t, std::deque<Episode>> barriers;
  for (const TraceRecord& r : ordered(records)) {
    if (!is_core(r)) continue;
    if (r.action == TraceAction::barrier_arrive) {
      if (r.aux == 0) return fail(name, "arrival without a participant count: " + at(r));
      auto& eps = barriers[r.addr];
      // A core joins the oldest episode it is not already part of.
      Episode* target = nullptr;
      for (Episode& e : eps) {
        if (e.arrived.size() < e.participants && e.arrived.count(r.actor.id) == 0) {
          target = &e;
          break;
        }
      }
      if (target == nullptr) {
        eps.push_back(Episode{r.aux, {}, {}});
        target = &eps.back();
      }
      if (target->participants != r.aux) return fail(name, "participant count mismatch: " + at(r));
      target->arrived.insert(r.actor.id);
    } else if (r.action == TraceAction::barrier_depart) {
      auto& eps = barriers[r.addr];
      auto it = std::find_if(eps.begin(), eps.end(), [&](const Episode& e) {
        return e.arrived.count(r.actor.id) != 0 && e.departed.count(r.actor.id) == 0;
      });
      if (it == eps.end()) return fail(name, "departure without arrival: " + at(r));
      if (it->arrived.size() < it->participants) {
        return fail(name, "departure before all " + std::to_string(it->participants) + " participants arrived (" +
                              std::to_string(it->arrived.size()) + " so far): " + at(r));
      }
      it->departed.insert(r.actor.id);
      while (!eps.empty() && eps.front().departed.size() == eps.front().participants) eps.pop_front();
    }
  }
  for (const auto& [addr, eps] : barriers) {
    if (!eps.empty()) {
      std::ostringstream os;
      os << "barrier 0x" << std::hex << addr << std::dec << " has an unfinished episode (" << eps.front().arrived.size()
         << " arrived, " << eps.front().departed.size() << " departed)";
      return fail(name, os.str());
    }
  }
  return {name, true, {}};
}

CheckResult check_semaphore(const std::vector<TraceRecord>& records) {
  const std::string name = "semaphore";
  struct Sem {
    std::uint64_t init = 0;
    std::int64_t acquired = 0;
    std::int64_t released = 0;
    bool declared = false;
  };
  std::map<std::uint64_t, Sem> sems;
  for (const TraceRecord& r : ordered(records)) {
    if (!is_core(r)) continue;
    if (r.action == TraceAction::sem_acquire) {
      Sem& s = sems[r.addr];
      if (s.declared && s.init != r.aux) return fail(name, "initial resources changed: " + at(r));
      s.declared = true;
      s.init = r.aux;
      ++s.acquired;
      if (s.acquired - s.released > static_cast<std::int64_t>(s.init)) {
        return fail(name, "grants exceed initial resources plus posts (" + std::to_string(s.acquired) +
                              " acquired, " + std::to_string(s.released) + " posted, " + std::to_string(s.init) +
                              " initial): " + at(r));
      }
    } else if (r.action == TraceAction::sem_release) {
      ++sems[r.addr].released;
    }
  }
  return {name, true, {}};
}

CheckResult check_condvar(const std::vector<TraceRecord>& records) {
  const std::string name = "condvar";
  struct Sleep {
    std::uint64_t cond;
    std::uint64_t lock;
  };
  std::map<std::uint64_t, std::uint32_t> holder;  // lock -> core
  std::map<std::uint32_t, Sleep> sleeping;
  std::map<std::uint32_t, std::uint64_t> relock;  // woken core -> lock it must take next
  for (const TraceRecord& r : ordered(records)) {
    if (!is_core(r)) continue;
    const std::uint32_t c = r.actor.id;
    auto pending = relock.find(c);
    switch (r.action) {
      case TraceAction::cs_enter:
        if (pending != relock.end()) {
          if (pending->second != r.addr) return fail(name, "woken waiter entered another lock first: " + at(r));
          relock.erase(pending);
        }
        holder[r.addr] = c;
        break;
      case TraceAction::cs_exit:
        holder.erase(r.addr);
        break;
      case TraceAction::cond_sleep:
        if (sleeping.count(c) != 0) return fail(name, "core sleeps twice: " + at(r));
        sleeping[c] = Sleep{r.addr, r.aux};
        holder.erase(r.aux);
        break;
      case TraceAction::cond_wake: {
        auto it = sleeping.find(c);
        if (it == sleeping.end() || it->second.cond != r.addr) return fail(name, "wake without a matching sleep: " + at(r));
        const std::uint64_t lock = it->second.lock;
        sleeping.erase(it);
        auto h = holder.find(lock);
        if (h == holder.end() || h->second != c) relock[c] = lock;
        break;
      }
      case TraceAction::sync_request:
        if (pending != relock.end() &&
            !(static_cast<SyncKind>(r.aux) == SyncKind::lock_acquire && r.addr == pending->second)) {
          return fail(name, "woken waiter continued without re-acquiring its lock: " + at(r));
        }
        break;
      case TraceAction::mem_op:
      case TraceAction::barrier_arrive:
      case TraceAction::sem_release:
      case TraceAction::op_complete:
        if (pending != relock.end()) return fail(name, "woken waiter continued without re-acquiring its lock: " + at(r));
        break;
      default:
        break;
    }
  }
  if (!sleeping.empty()) {
    return fail(name, "core " + std::to_string(sleeping.begin()->first) + " never woken");
  }
  return {name, true, {}};
}

CheckResult check_termination(const std::vector<TraceRecord>& records, std::uint64_t expected_ops) {
  const std::string name = "termination";
  struct Pending {
    SyncKind kind;
    std::uint64_t addr;
    TraceRecord req;
  };
  std::map<std::uint32_t, Pending> pending;
  std::map<std::uint32_t, Picos> last_time;
  std::uint64_t ops = 0;
  auto complete = [&](const TraceRecord& r, SyncKind kind) -> bool {
    auto it = pending.find(r.actor.id);
    if (it == pending.end() || it->second.kind != kind || it->second.addr != r.addr) return false;
    pending.erase(it);
    return true;
  };
  for (const TraceRecord& r : ordered(records)) {
    if (!is_core(r)) continue;
    const std::uint32_t c = r.actor.id;
    auto lt = last_time.find(c);
    if (lt != last_time.end() && r.time < lt->second) return fail(name, "core records out of time order: " + at(r));
    last_time[c] = r.time;
    switch (r.action) {
      case TraceAction::sync_request: {
        const auto kind = static_cast<SyncKind>(r.aux);
        if (pending.count(c) != 0) return fail(name, "request issued while another is outstanding: " + at(r));
        if (is_blocking(kind)) pending.emplace(c, Pending{kind, r.addr, r});
        break;
      }
      case TraceAction::cs_enter: {
        // A flat-mode condition waiter re-acquires its lock without a new
        // program-level request.
        auto it = pending.find(c);
        if (it != pending.end() && !complete(r, SyncKind::lock_acquire)) {
          return fail(name, "lock grant that does not match the outstanding request: " + at(r));
        }
        break;
      }
      case TraceAction::barrier_depart:
        if (!complete(r, SyncKind::barrier_across) && !complete(r, SyncKind::barrier_within)) {
          return fail(name, "departure without a request: " + at(r));
        }
        break;
      case TraceAction::sem_acquire:
        if (!complete(r, SyncKind::sem_wait)) return fail(name, "semaphore grant without a request: " + at(r));
        break;
      case TraceAction::cond_wake:
        if (!complete(r, SyncKind::cond_wait)) return fail(name, "condition grant without a request: " + at(r));
        break;
      case TraceAction::mem_op:
      case TraceAction::op_complete:
        if (pending.count(c) != 0) return fail(name, "core stepped past an ungranted request: " + at(r));
        if (r.action == TraceAction::op_complete) ++ops;
        break;
      default:
        break;
    }
  }
  if (!pending.empty()) return fail(name, "request never granted: " + at(pending.begin()->second.req));
  if (ops != expected_ops) {
    return fail(name, "completed " + std::to_string(ops) + " operations, expected " + std::to_string(expected_ops));
  }
  return {name, true, {}};
}

Verdict verify(const Trace& trace) {
  Verdict v;
  v.checks.push_back(check_mutual_exclusion(trace.records));
  v.checks.push_back(check_barrier(trace.records));
  v.checks.push_back(check_semaphore(trace.records));
  v.checks.push_back(check_condvar(trace.records));
  v.checks.push_back(check_termination(trace.records, trace.header.expected_ops));
  return v;
}

}  // namespace syncron
