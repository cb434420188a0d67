#include "syncron/trace.hpp"

#include <array>
#include <fstream>
#include "json.hpp"

#include "syncron/errors.hpp"

namespace syncron {
namespace {

constexpr std::array<std::string_view, 16> kActionNames = {
    "cs_enter",   "cs_exit",  "barrier_arrive", "barrier_depart", "sem_acquire",  "sem_release",
    "cond_sleep", "cond_wake", "msg_send",      "msg_recv",       "mem_op",       "st_reserve",
    "st_release", "sync_request", "op_complete", "grant_dropped",
};

}  // namespace

std::string_view trace_action_name(TraceAction a) { return kActionNames.at(static_cast<std::size_t>(a)); }

std::optional<TraceAction> trace_action_from_name(std::string_view s) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == s) return static_cast<TraceAction>(i);
  }
  return std::nullopt;
}

void Trace::add(Picos time, Endpoint actor, TraceAction action, std::uint64_t addr, std::uint64_t aux,
                std::uint64_t aux2, std::uint64_t aux3) {
  records.push_back(TraceRecord{time, records.size(), actor, action, addr, aux, aux2, aux3});
}

std::string endpoint_string(const Endpoint& e) {
  return (e.kind == Endpoint::Kind::core ? "core:" : "node:") + std::to_string(e.id);
}

Endpoint endpoint_from_string(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) throw ConfigError("trace", "bad actor '" + std::string(s) + "'");
  const std::string_view kind = s.substr(0, colon);
  const auto id = static_cast<std::uint32_t>(std::stoul(std::string(s.substr(colon + 1))));
  if (kind == "core") return Endpoint::core(id);
  if (kind == "node") return Endpoint::node(id);
  throw ConfigError("trace", "bad actor '" + std::string(s) + "'");
}

void write_trace_files(const Trace& t, const std::string& bin_path, const std::string& jsonl_path) {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw ConfigError("out", "cannot write " + bin_path);
  for (const Message& m : t.messages) {
    const WireMessage w = encode_message(m);
    bin.write(reinterpret_cast<const char*>(w.data()), static_cast<std::streamsize>(w.size()));
  }
  std::ofstream js(jsonl_path);
  if (!js) throw ConfigError("out", "cannot write " + jsonl_path);
  nlohmann::ordered_json h;
  h["format"] = "syncron-trace";
  h["version"] = 1;
  h["expected_ops"] = t.header.expected_ops;
  h["scheme"] = t.header.scheme;
  h["workload"] = t.header.workload;
  h["units"] = t.header.units;
  h["cores_per_unit"] = t.header.cores_per_unit;
  h["messages"] = t.messages.size();
  js << h.dump() << '\n';
  for (const TraceRecord& r : t.records) {
    nlohmann::ordered_json j;
    j["t"] = r.time;
    j["seq"] = r.seq;
    j["actor"] = endpoint_string(r.actor);
    j["action"] = trace_action_name(r.action);
    j["addr"] = r.addr;
    if (r.aux != 0) j["aux"] = r.aux;
    if (r.aux2 != 0) j["aux2"] = r.aux2;
    if (r.aux3 != 0) j["aux3"] = r.aux3;
    js << j.dump() << '\n';
  }
}

Trace read_trace_jsonl(const std::string& jsonl_path) {
  std::ifstream in(jsonl_path);
  if (!in) throw ConfigError("trace", "cannot read " + jsonl_path);
  Trace t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trace", jsonl_path + ": empty trace");
  try {
    const auto h = nlohmann::json::parse(line);
    if (h.value("format", "") != "syncron-trace") throw ConfigError("trace", jsonl_path + ": missing trace header");
    t.header.expected_ops = h.at("expected_ops").get<std::uint64_t>();
    t.header.scheme = h.value("scheme", "");
    t.header.workload = h.value("workload", "");
    t.header.units = h.value("units", 0u);
    t.header.cores_per_unit = h.value("cores_per_unit", 0u);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      TraceRecord r;
      r.time = j.at("t").get<Picos>();
      r.seq = j.at("seq").get<std::uint64_t>();
      r.actor = endpoint_from_string(j.at("actor").get<std::string>());
      const auto a = trace_action_from_name(j.at("action").get<std::string>());
      if (!a) throw ConfigError("trace", jsonl_path + ":" + std::to_string(lineno) + ": unknown action");
      r.action = *a;
      r.addr = j.at("addr").get<std::uint64_t>();
      r.aux = j.value("aux", std::uint64_t{0});
      r.aux2 = j.value("aux2", std::uint64_t{0});
      r.aux3 = j.value("aux3", std::uint64_t{0});
      t.records.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("trace", jsonl_path + ": " + e.what());
  }
  return t;
}

std::vector<Message> read_trace_bin(const std::string& bin_path) {
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw ConfigError("trace", "cannot read " + bin_path);
  std::vector<Message> out;
  WireMessage w{};
  while (in.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(w.size()))) {
    out.push_back(decode_message(w));
  }
  if (in.gcount() != 0) throw CodecError(bin_path + ": truncated record");
  return out;
}

}  // namespace syncron
