#include "syncron/report.hpp"

#include <functional>
#include <sstream>

namespace syncron {

nlohmann::ordered_json stats_to_json(const Stats& s) {
  nlohmann::ordered_json j;
  j["total_time_ps"] = s.total_time;
  j["workload_ops"] = s.workload_ops;
  j["throughput_ops_per_us"] = s.throughput;
  j["primitives"] = {
      {"lock_acquire", s.lock_acquires}, {"lock_release", s.lock_releases}, {"barrier_wait", s.barrier_waits},
      {"sem_wait", s.sem_waits},         {"sem_post", s.sem_posts},         {"cond_wait", s.cond_waits},
      {"cond_signal", s.cond_signals},   {"cond_broadcast", s.cond_broadcasts},
  };
  j["messages"] = {
      {"sent", s.messages_sent},
      {"received", s.messages_received},
      {"intra_unit", s.messages_intra},
      {"inter_unit", s.messages_inter},
  };
  j["traffic_bytes"] = {{"intra_unit", s.bytes_intra}, {"inter_unit", s.bytes_inter}};
  j["memory"] = {
      {"data_local", s.mem_local},
      {"data_remote", s.mem_remote},
      {"syncvar_accesses", s.syncvar_accesses},
      {"syncvar_dram", s.syncvar_dram},
  };
  j["energy_fj"] = {
      {"cache", s.energy_cache},
      {"network", s.energy_network},
      {"network_sync", s.energy_network_sync},
      {"memory", s.energy_memory},
      {"total", s.energy_total()},
  };
  j["overflow"] = {
      {"core_requests", s.core_requests},
      {"overflowed_requests", s.overflowed_requests},
      {"fraction", s.overflow_fraction},
      {"counters_final_total", s.counters_final_total},
  };
  j["st_occupancy"] = {{"average", s.st_occupancy_avg}, {"max", s.st_occupancy_max}};
  j["grants_dropped"] = s.grants_dropped;
  j["saturated_transfers"] = s.saturated_transfers;
  j["events"] = s.events;
  j["digest"] = s.digest;
  auto nodes = nlohmann::ordered_json::array();
  for (const NodeStats& n : s.nodes) {
    nodes.push_back({
        {"node", n.node},
        {"messages_handled", n.messages_handled},
        {"core_requests", n.core_requests},
        {"overflowed_requests", n.overflowed_requests},
        {"max_inbox", n.max_inbox},
        {"inbox_full_events", n.inbox_full_events},
        {"busy_time_ps", n.busy_time},
        {"st_occupancy_average", n.st_avg},
        {"st_occupancy_max", n.st_max},
        {"final_counter_total", n.final_counter_total},
        {"live_syncronvars", n.live_syncronvars},
        {"cache_hits", n.cache_hits},
        {"cache_misses", n.cache_misses},
    });
  }
  j["nodes"] = std::move(nodes);
  return j;
}

nlohmann::ordered_json verdict_to_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["pass"] = v.pass();
  auto checks = nlohmann::ordered_json::array();
  for (const CheckResult& c : v.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["checks"] = std::move(checks);
  return j;
}

std::string stats_json_document(const std::vector<RunResult>& runs) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kStatsSchemaVersion;
  auto arr = nlohmann::ordered_json::array();
  for (const RunResult& r : runs) {
    nlohmann::ordered_json run;
    run["config"] = config_to_json(r.config);
    run["expected_ops"] = r.expected_ops;
    run["stats"] = stats_to_json(r.stats);
    run["verification"] = r.verdict ? verdict_to_json(*r.verdict) : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(run));
  }
  doc["runs"] = std::move(arr);
  return doc.dump(2) + "\n";
}

namespace {

using Column = std::pair<std::string, std::function<std::string(const RunResult&)>>;

template <typename T>
std::string str(T v) {
  if constexpr (std::is_floating_point_v<T>) {
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
  } else {
    return std::to_string(v);
  }
}

const std::vector<Column>& columns() {
  static const std::vector<Column> cols = {
      {"run", nullptr},
      {"scheme", [](const RunResult& r) { return std::string(scheme_name(r.config.system.scheme)); }},
      {"workload", [](const RunResult& r) { return workload_string(r.config.workload); }},
      {"units", [](const RunResult& r) { return str(r.config.system.num_units); }},
      {"cores_per_unit", [](const RunResult& r) { return str(r.config.system.cores_per_unit); }},
      {"clients_per_unit", [](const RunResult& r) { return str(r.config.system.clients_per_unit); }},
      {"st_entries", [](const RunResult& r) { return str(r.config.system.st_entries); }},
      {"link_latency_ns", [](const RunResult& r) { return str(to_ns(r.config.system.latency.link_latency_per_line)); }},
      {"memory", [](const RunResult& r) { return std::string(memory_tech_name(r.config.system.latency.memory)); }},
      {"seed", [](const RunResult& r) { return str(r.config.seed); }},
      {"total_time_ps", [](const RunResult& r) { return str(r.stats.total_time); }},
      {"workload_ops", [](const RunResult& r) { return str(r.stats.workload_ops); }},
      {"throughput_ops_per_us", [](const RunResult& r) { return str(r.stats.throughput); }},
      {"messages_sent", [](const RunResult& r) { return str(r.stats.messages_sent); }},
      {"messages_intra", [](const RunResult& r) { return str(r.stats.messages_intra); }},
      {"messages_inter", [](const RunResult& r) { return str(r.stats.messages_inter); }},
      {"bytes_intra", [](const RunResult& r) { return str(r.stats.bytes_intra); }},
      {"bytes_inter", [](const RunResult& r) { return str(r.stats.bytes_inter); }},
      {"syncvar_accesses", [](const RunResult& r) { return str(r.stats.syncvar_accesses); }},
      {"syncvar_dram", [](const RunResult& r) { return str(r.stats.syncvar_dram); }},
      {"energy_cache_fj", [](const RunResult& r) { return str(r.stats.energy_cache); }},
      {"energy_network_fj", [](const RunResult& r) { return str(r.stats.energy_network); }},
      {"energy_network_sync_fj", [](const RunResult& r) { return str(r.stats.energy_network_sync); }},
      {"energy_memory_fj", [](const RunResult& r) { return str(r.stats.energy_memory); }},
      {"energy_total_fj", [](const RunResult& r) { return str(r.stats.energy_total()); }},
      {"overflow_fraction", [](const RunResult& r) { return str(r.stats.overflow_fraction); }},
      {"st_occupancy_avg", [](const RunResult& r) { return str(r.stats.st_occupancy_avg); }},
      {"st_occupancy_max", [](const RunResult& r) { return str(r.stats.st_occupancy_max); }},
      {"counters_final_total", [](const RunResult& r) { return str(r.stats.counters_final_total); }},
      {"digest", [](const RunResult& r) { return str(r.stats.digest); }},
      {"verified",
       [](const RunResult& r) { return r.verdict ? std::string(r.verdict->pass() ? "pass" : "fail") : std::string(); }},
  };
  return cols;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : columns()) n.push_back(c.first);
    return n;
  }();
  return names;
}

std::string csv_header() {
  std::string out;
  for (const auto& n : csv_columns()) {
    if (!out.empty()) out += ',';
    out += n;
  }
  return out + "\n";
}

std::string csv_row(const RunResult& r, std::size_t index) {
  std::string out = std::to_string(index);
  for (const auto& [name, get] : columns()) {
    if (!get) continue;  // the "run" column
    out += ',';
    out += get(r);
  }
  return out + "\n";
}

std::string stats_csv_document(const std::vector<RunResult>& runs) {
  std::string out = csv_header();
  for (std::size_t i = 0; i < runs.size(); ++i) out += csv_row(runs[i], i);
  return out;
}

}  // namespace syncron
