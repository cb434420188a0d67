#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "syncron/topology.hpp"
#include "syncron/workloads.hpp"

namespace syncron {

struct RunConfig {
  SystemConfig system;
  WorkloadSpec workload;
  std::uint64_t seed = 1;
  bool trace = false;
  bool verify = false;
  std::optional<std::uint64_t> drop_grant;
  std::uint64_t max_events = 0;
};

// Canonical "section.key" names of every setting, in documentation order.
const std::vector<std::string>& setting_keys();

// Resolves a user-supplied key: "section.key", a bare key that is unique
// across sections, or a CLI-style dashed name ("link-latency-ns"). Throws
// ConfigError for unknown or ambiguous keys.
std::string canonical_key(std::string_view key);

// Applies one setting. Throws ConfigError naming the key on bad values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

// Sectioned key = value text; '#' and ';' start comments.
RunConfig parse_config_text(std::string_view text, RunConfig base = {}, const std::string& origin = "config");
RunConfig load_config_file(const std::string& path, RunConfig base = {});

// Current value of every setting as a string, keyed canonically.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);
std::string config_to_text(const RunConfig& cfg);

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};
// Parses "KEY=v1,v2,...".
SweepAxis parse_sweep(std::string_view text);
// Cartesian product of the axes applied over base; the last axis varies fastest.
std::vector<RunConfig> expand_sweeps(const RunConfig& base, const std::vector<SweepAxis>& axes);

}  // namespace syncron
