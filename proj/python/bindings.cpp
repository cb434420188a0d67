#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>

#include "syncron/config.hpp"
#include "syncron/errors.hpp"
#include "syncron/messages.hpp"
#include "syncron/report.hpp"
#include "syncron/runner.hpp"
#include "syncron/trace.hpp"
#include "syncron/verifier.hpp"

namespace py = pybind11;

namespace {

syncron::RunConfig make_config(const std::map<std::string, std::string>& settings) {
  syncron::RunConfig cfg;
  for (const auto& [k, v] : settings) syncron::apply_setting(cfg, k, v);
  return cfg;
}

py::dict verdict_dict(const syncron::Verdict& v) {
  py::list checks;
  for (const auto& c : v.checks) {
    py::dict d;
    d["name"] = c.name;
    d["pass"] = c.pass;
    d["detail"] = c.detail;
    checks.append(d);
  }
  py::dict out;
  out["pass"] = v.pass();
  out["checks"] = checks;
  return out;
}

}  // namespace

PYBIND11_MODULE(_syncron, m) {
  m.doc() = "Bindings for the SynCron discrete-event simulator";

  py::register_exception<syncron::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<syncron::CodecError>(m, "CodecError", PyExc_ValueError);
  py::register_exception<syncron::DeadlockError>(m, "DeadlockError", PyExc_RuntimeError);
  py::register_exception<syncron::ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);

  m.attr("MESSAGE_BYTES") = syncron::kMessageBytes;
  m.attr("STATS_SCHEMA_VERSION") = syncron::kStatsSchemaVersion;

  m.def("setting_keys", &syncron::setting_keys, "Canonical names of every configuration setting.");

  m.def(
      "encode_message",
      [](std::uint64_t addr, const std::string& opcode, std::uint8_t core_id, std::uint64_t info) {
        const auto op = syncron::opcode_from_name(opcode);
        if (!op) throw syncron::CodecError("unknown opcode '" + opcode + "'");
        const auto w = syncron::encode_message({addr, *op, core_id, info});
        return py::bytes(reinterpret_cast<const char*>(w.data()), w.size());
      },
      py::arg("addr"), py::arg("opcode"), py::arg("core_id"), py::arg("info"));

  m.def("decode_message", [](const py::bytes& b) {
    const std::string s = b;
    const auto msg = syncron::decode_message(
        std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    py::dict d;
    d["addr"] = msg.addr;
    d["opcode"] = std::string(syncron::opcode_name(msg.opcode));
    d["core_id"] = msg.core_id;
    d["info"] = msg.info;
    return d;
  });

  m.def(
      "run",
      [](const std::map<std::string, std::string>& settings) {
        syncron::RunResult r;
        {
          py::gil_scoped_release release;
          r = syncron::run_once(make_config(settings));
        }
        return syncron::stats_json_document({r});
      },
      py::arg("settings") = std::map<std::string, std::string>{},
      "Runs one simulation; returns the stats.json document as a string.");

  m.def(
      "verify_trace",
      [](const std::string& jsonl_path) { return verdict_dict(syncron::verify(syncron::read_trace_jsonl(jsonl_path))); },
      py::arg("path"));
}
