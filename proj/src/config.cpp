#include "syncron/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "syncron/errors.hpp"

namespace syncron {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t to_u64(const std::string& key, std::string_view v) {
  const std::string s = trim(v);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key, key + ": expected a non-negative integer, got '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError(key, key + ": value out of range '" + s + "'");
  }
}

std::uint32_t to_u32(const std::string& key, std::string_view v) {
  const std::uint64_t x = to_u64(key, v);
  if (x > std::numeric_limits<std::uint32_t>::max()) throw ConfigError(key, key + ": value out of range");
  return static_cast<std::uint32_t>(x);
}

int to_int(const std::string& key, std::string_view v) {
  const std::uint64_t x = to_u64(key, v);
  if (x > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) throw ConfigError(key, key + ": value out of range");
  return static_cast<int>(x);
}

double to_double(const std::string& key, std::string_view v) {
  const std::string s = trim(v);
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(d) || d < 0) throw std::invalid_argument(s);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, key + ": expected a non-negative number, got '" + s + "'");
  }
}

// Nanosecond quantity to integer picoseconds.
Picos to_picos_ns(const std::string& key, std::string_view v) {
  return static_cast<Picos>(std::llround(to_double(key, v) * 1000.0));
}

bool to_bool(const std::string& key, std::string_view v) {
  const std::string s = trim(v);
  if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "off" || s == "no") return false;
  throw ConfigError(key, key + ": expected a boolean, got '" + s + "'");
}

std::string fmt_ns(Picos p) {
  std::ostringstream os;
  os << to_ns(p);
  return os.str();
}

std::string fmt_double(double d) {
  std::ostringstream os;
  os << d;
  return os.str();
}

struct Setting {
  std::function<void(RunConfig&, const std::string&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<std::pair<std::string, Setting>>& settings() {
  static const std::vector<std::pair<std::string, Setting>> table = [] {
    std::vector<std::pair<std::string, Setting>> t;
    auto add = [&](std::string key, auto set, auto get) { t.push_back({std::move(key), Setting{set, get}}); };
    using K = const std::string&;
    using V = std::string_view;
    add("system.units", [](RunConfig& c, K k, V v) { c.system.num_units = to_u32(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.num_units); });
    add("system.cores_per_unit", [](RunConfig& c, K k, V v) { c.system.cores_per_unit = to_u32(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.cores_per_unit); });
    add("system.clients_per_unit", [](RunConfig& c, K k, V v) { c.system.clients_per_unit = to_u32(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.clients_per_unit); });
    add("system.st_entries", [](RunConfig& c, K k, V v) { c.system.st_entries = to_u32(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.st_entries); });
    add("system.index_counters", [](RunConfig& c, K k, V v) { c.system.num_index_counters = to_u32(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.num_index_counters); });
    add("system.inbox_depth", [](RunConfig& c, K k, V v) { c.system.inbox_depth = to_u32(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.inbox_depth); });
    add("system.unit_mem_bytes", [](RunConfig& c, K k, V v) { c.system.unit_mem_bytes = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.unit_mem_bytes); });

    add("run.scheme",
        [](RunConfig& c, K k, V v) {
          const auto s = scheme_from_name(trim(v));
          if (!s) throw ConfigError(k, k + ": unknown scheme '" + trim(v) + "'");
          c.system.scheme = *s;
        },
        [](const RunConfig& c) { return std::string(scheme_name(c.system.scheme)); });
    add("run.seed", [](RunConfig& c, K k, V v) { c.seed = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.seed); });
    add("run.trace", [](RunConfig& c, K k, V v) { c.trace = to_bool(k, v); },
        [](const RunConfig& c) { return std::string(c.trace ? "true" : "false"); });
    add("run.verify", [](RunConfig& c, K k, V v) { c.verify = to_bool(k, v); },
        [](const RunConfig& c) { return std::string(c.verify ? "true" : "false"); });
    add("run.drop_grant",
        [](RunConfig& c, K k, V v) {
          const auto n = to_u64(k, v);
          c.drop_grant = n == 0 ? std::nullopt : std::optional<std::uint64_t>(n);
        },
        [](const RunConfig& c) { return std::to_string(c.drop_grant.value_or(0)); });
    add("run.max_events", [](RunConfig& c, K k, V v) { c.max_events = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.max_events); });

    add("latency.link_latency_ns", [](RunConfig& c, K k, V v) { c.system.latency.link_latency_per_line = to_picos_ns(k, v); },
        [](const RunConfig& c) { return fmt_ns(c.system.latency.link_latency_per_line); });
    add("latency.link_fixed_cycles", [](RunConfig& c, K k, V v) { c.system.latency.link_fixed_cycles = to_int(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.latency.link_fixed_cycles); });
    add("latency.link_bandwidth_gbps", [](RunConfig& c, K k, V v) { c.system.latency.link_bandwidth_gbps = to_double(k, v); },
        [](const RunConfig& c) { return fmt_double(c.system.latency.link_bandwidth_gbps); });
    add("latency.memory",
        [](RunConfig& c, K k, V v) {
          const auto t = memory_tech_from_name(trim(v));
          if (!t) throw ConfigError(k, k + ": unknown memory technology '" + trim(v) + "'");
          c.system.latency.memory = *t;
        },
        [](const RunConfig& c) { return std::string(memory_tech_name(c.system.latency.memory)); });
    add("latency.mem_read_ns",
        [](RunConfig& c, K k, V v) {
          const Picos p = to_picos_ns(k, v);
          c.system.latency.mem_read_override = p == 0 ? std::nullopt : std::optional<Picos>(p);
        },
        [](const RunConfig& c) { return fmt_ns(memory_latency(c.system.latency, MemOp::read)); });
    add("latency.mem_write_ns",
        [](RunConfig& c, K k, V v) {
          const Picos p = to_picos_ns(k, v);
          c.system.latency.mem_write_override = p == 0 ? std::nullopt : std::optional<Picos>(p);
        },
        [](const RunConfig& c) { return fmt_ns(memory_latency(c.system.latency, MemOp::write)); });
    add("latency.core_cycle_ps", [](RunConfig& c, K k, V v) { c.system.latency.core_cycle = static_cast<Picos>(to_u64(k, v)); },
        [](const RunConfig& c) { return std::to_string(c.system.latency.core_cycle); });
    add("latency.se_cycle_ps", [](RunConfig& c, K k, V v) { c.system.latency.se_cycle = static_cast<Picos>(to_u64(k, v)); },
        [](const RunConfig& c) { return std::to_string(c.system.latency.se_cycle); });
    add("latency.se_service_cycles", [](RunConfig& c, K k, V v) { c.system.latency.se_service_cycles = to_int(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.latency.se_service_cycles); });
    add("latency.intra_hops", [](RunConfig& c, K k, V v) { c.system.latency.intra_hops = to_int(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.latency.intra_hops); });
    add("latency.l1_hit_cycles", [](RunConfig& c, K k, V v) { c.system.latency.l1_hit_cycles = to_int(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.latency.l1_hit_cycles); });
    add("latency.flit_bytes", [](RunConfig& c, K k, V v) { c.system.latency.flit_bytes = to_int(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.latency.flit_bytes); });
    add("latency.queue_window_ns", [](RunConfig& c, K k, V v) { c.system.latency.queue_window = to_picos_ns(k, v); },
        [](const RunConfig& c) { return fmt_ns(c.system.latency.queue_window); });
    add("latency.queue_cap_factor", [](RunConfig& c, K k, V v) { c.system.latency.queue_cap_factor = to_int(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.latency.queue_cap_factor); });

    add("energy.hop_fj_per_bit", [](RunConfig& c, K k, V v) { c.system.energy.hop_per_bit = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.energy.hop_per_bit); });
    add("energy.link_fj_per_bit", [](RunConfig& c, K k, V v) { c.system.energy.link_per_bit = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.energy.link_per_bit); });
    add("energy.memory_fj_per_bit", [](RunConfig& c, K k, V v) { c.system.energy.memory_per_bit = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.energy.memory_per_bit); });
    add("energy.l1_hit_fj", [](RunConfig& c, K k, V v) { c.system.energy.l1_hit = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.energy.l1_hit); });
    add("energy.l1_miss_fj", [](RunConfig& c, K k, V v) { c.system.energy.l1_miss = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.system.energy.l1_miss); });

    // The workload name resets kind, primitive, interval and op count;
    // put it before the other workload keys.
    add("workload.name",
        [](RunConfig& c, K, V v) {
          const WorkloadSpec s = parse_workload(trim(v));
          c.workload.kind = s.kind;
          c.workload.primitive = s.primitive;
          c.workload.interval = s.interval;
          c.workload.ops_per_core = s.ops_per_core;
        },
        [](const RunConfig& c) { return workload_string(c.workload); });
    add("workload.ops_per_core", [](RunConfig& c, K k, V v) { c.workload.ops_per_core = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.workload.ops()); });
    add("workload.interval", [](RunConfig& c, K k, V v) { c.workload.interval = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.workload.interval); });
    add("workload.think", [](RunConfig& c, K k, V v) { c.workload.think = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.workload.think); });
    add("workload.array_map_reads", [](RunConfig& c, K k, V v) { c.workload.array_map_reads = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.workload.array_map_reads); });
    add("workload.array_map_elements", [](RunConfig& c, K k, V v) { c.workload.array_map_elements = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.workload.array_map_elements); });
    add("workload.hash_buckets", [](RunConfig& c, K k, V v) { c.workload.hash_buckets = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.workload.hash_buckets); });
    add("workload.hash_elements", [](RunConfig& c, K k, V v) { c.workload.hash_elements = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.workload.hash_elements); });
    add("workload.list_nodes", [](RunConfig& c, K k, V v) { c.workload.list_nodes = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.workload.list_nodes); });

    // Deferred hardware extensions: accepted only when switched off.
    add("engine.fairness_threshold",
        [](RunConfig&, K k, V v) {
          const std::string s = trim(v);
          if (s != "0" && s != "off") throw ConfigError(k, k + ": lock fairness threshold is not supported");
        },
        [](const RunConfig&) { return std::string("off"); });
    add("engine.se_rmw",
        [](RunConfig&, K k, V v) {
          if (to_bool(k, v)) throw ConfigError(k, k + ": read-modify-write in the SE is not supported");
        },
        [](const RunConfig&) { return std::string("false"); });
    return t;
  }();
  return table;
}

const Setting& setting(const std::string& canonical) {
  for (const auto& [k, s] : settings()) {
    if (k == canonical) return s;
  }
  throw ConfigError(canonical, "unknown setting '" + canonical + "'");
}

}  // namespace

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, s] : settings()) k.push_back(name);
    return k;
  }();
  return keys;
}

std::string canonical_key(std::string_view key) {
  std::string k = trim(key);
  std::replace(k.begin(), k.end(), '-', '_');
  static const std::map<std::string, std::string> aliases = {
      {"workload", "workload.name"}, {"memory", "latency.memory"}, {"link_latency", "latency.link_latency_ns"},
      {"ops", "workload.ops_per_core"},
  };
  if (auto it = aliases.find(k); it != aliases.end()) return it->second;
  if (k.find('.') != std::string::npos) {
    for (const auto& name : setting_keys()) {
      if (name == k) return name;
    }
    throw ConfigError(k, "unknown setting '" + k + "'");
  }
  std::string found;
  for (const auto& name : setting_keys()) {
    if (name.size() > k.size() && name.compare(name.size() - k.size(), k.size(), k) == 0 &&
        name[name.size() - k.size() - 1] == '.') {
      if (!found.empty()) throw ConfigError(k, "ambiguous setting '" + k + "'");
      found = name;
    }
  }
  if (found.empty()) throw ConfigError(k, "unknown setting '" + k + "'");
  return found;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  const std::string k = canonical_key(key);
  setting(k).set(cfg, k, value);
}

RunConfig parse_config_text(std::string_view text, RunConfig base, const std::string& origin) {
  std::string section;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    std::string line = std::string(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    const std::string where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config", where + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("config", where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config", where + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("config", where + ": missing key");
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      apply_setting(base, full, value);
    } catch (const ConfigError& e) {
      throw ConfigError(e.key(), where + ": " + e.what());
    }
    if (nl == text.size()) break;
  }
  return base;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base), path);
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, s] : settings()) out.emplace_back(k, s.get(cfg));
  return out;
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : config_entries(cfg)) {
    const auto dot = k.find('.');
    j[k.substr(0, dot)][k.substr(dot + 1)] = v;
  }
  return j;
}

std::string config_to_text(const RunConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const auto& [k, v] : config_entries(cfg)) {
    const auto dot = k.find('.');
    const std::string sec = k.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) os << "\n";
      os << "[" << sec << "]\n";
      section = sec;
    }
    os << k.substr(dot + 1) << " = " << v << "\n";
  }
  return os.str();
}

SweepAxis parse_sweep(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("sweep", "expected KEY=v1,v2,... in '" + std::string(text) + "'");
  SweepAxis axis;
  axis.key = canonical_key(text.substr(0, eq));
  std::string_view rest = text.substr(eq + 1);
  while (true) {
    const auto comma = rest.find(',');
    const std::string v = trim(rest.substr(0, comma));
    if (v.empty()) throw ConfigError(axis.key, "empty sweep value for " + axis.key);
    axis.values.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return axis;
}

std::vector<RunConfig> expand_sweeps(const RunConfig& base, const std::vector<SweepAxis>& axes) {
  std::vector<RunConfig> out{base};
  for (const SweepAxis& axis : axes) {
    std::vector<RunConfig> next;
    for (const RunConfig& c : out) {
      for (const std::string& v : axis.values) {
        RunConfig r = c;
        apply_setting(r, axis.key, v);
        next.push_back(std::move(r));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace syncron
