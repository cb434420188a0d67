#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "syncron/runner.hpp"

namespace syncron {

inline constexpr int kStatsSchemaVersion = 1;

nlohmann::ordered_json stats_to_json(const Stats& s);
nlohmann::ordered_json verdict_to_json(const Verdict& v);

// {"schema_version": 1, "runs": [{"config", "stats", "verification"}...]}
std::string stats_json_document(const std::vector<RunResult>& runs);

// Stable column set of stats.csv, one row per run.
const std::vector<std::string>& csv_columns();
std::string csv_header();
std::string csv_row(const RunResult& r, std::size_t index);
std::string stats_csv_document(const std::vector<RunResult>& runs);

}  // namespace syncron
