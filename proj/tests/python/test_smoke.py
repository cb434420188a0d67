import os
import subprocess

import pytest

import syncron


def test_codec_round_trip():
    wire = syncron.encode_message(0x1000, "lock_acquire_local", 3, 42)
    assert len(wire) == syncron.MESSAGE_BYTES == 18
    msg = syncron.decode_message(wire)
    assert msg["addr"] == 0x1000
    assert msg["opcode"] == "lock_acquire_local"
    assert msg["core_id"] == 3
    assert msg["info"] == 42


def test_codec_errors():
    with pytest.raises(ValueError):
        syncron.encode_message(0, "lock_acquire_local", 64, 0)
    with pytest.raises(ValueError):
        syncron.decode_message(bytes(17))


def test_run_returns_stats():
    doc = syncron.run(scheme="hier", workload="microbench:lock:200:10", units=2, verify=True)
    assert doc["schema_version"] == syncron.STATS_SCHEMA_VERSION
    (run,) = doc["runs"]
    assert run["stats"]["workload_ops"] == run["expected_ops"]
    assert run["verification"]["pass"]


def test_run_rejects_bad_config():
    with pytest.raises(ValueError):
        syncron.run(units=0)
    with pytest.raises(ValueError):
        syncron.run(no_such_key=1)


def test_setting_keys():
    keys = syncron.setting_keys()
    assert "system.st_entries" in keys
    assert "latency.link_latency_ns" in keys


def _sim():
    path = os.environ.get("SYNCRON_SIM")
    if not path:
        pytest.skip("SYNCRON_SIM not set")
    return path


def test_cli_trace_and_verify(tmp_path):
    sim = _sim()
    out = subprocess.run(
        [sim, "--workload", "microbench:barrier:200:5", "--units", "2", "--trace", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "stats.csv").read_text().startswith("run,scheme,workload,")
    result = syncron.verify_trace(str(tmp_path / "trace.jsonl"))
    assert result["pass"]
    again = subprocess.run([sim, "verify", str(tmp_path / "trace.jsonl")], capture_output=True, text=True)
    assert again.returncode == 0


def test_cli_config_error_exit_code(tmp_path):
    out = subprocess.run([_sim(), "--units", "0", "--out", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 2
    assert out.stderr.startswith("error: config:")
