"""End-to-end `run-remote` checks: CLI + stub inference server binaries."""

import json
import os
import pathlib
import socket
import subprocess
import time
import urllib.request

import pytest

CLI = os.environ.get("SEMOBS_CLI")
STUB = os.environ.get("SEMOBS_STUB")
FIXTURES = pathlib.Path(os.environ["SEMOBS_FIXTURE_DIR"])

pytestmark = pytest.mark.skipif(
    not CLI or not STUB, reason="CLI/stub binaries not provided via environment"
)


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class Stub:
    def __init__(self, *args):
        self.port = free_port()
        self.proc = subprocess.Popen(
            [STUB, "--port", str(self.port), *args],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
        )
        deadline = time.time() + 5.0
        while time.time() < deadline:
            try:
                with urllib.request.urlopen(self.endpoint + "/healthz", timeout=0.2):
                    return
            except OSError:
                time.sleep(0.05)
        raise RuntimeError("stub server did not become ready")

    @property
    def endpoint(self):
        return f"http://127.0.0.1:{self.port}"

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.proc.terminate()
        self.proc.wait(timeout=5)


def write_normal_manifest(path, clips=2, frames=13):
    with open(path, "w") as f:
        for c in range(clips):
            for i in range(frames):
                f.write(
                    json.dumps(
                        {
                            "clip_id": f"live_{c}",
                            "frame_index": i,
                            "timestamp_s": float(i),
                            "uri": f"frames/live_{c}/{i}.png",
                            "label": "Normal",
                        }
                    )
                    + "\n"
                )


def run_remote(endpoint, manifest, out):
    return subprocess.run(
        [
            CLI,
            "run-remote",
            "--config",
            str(FIXTURES / "configs" / "remote_demo.json"),
            "--manifest",
            str(manifest),
            "--endpoint",
            endpoint,
            "--out",
            str(out),
        ],
        capture_output=True,
        text=True,
    )


def read_records(path):
    records = []
    for line in pathlib.Path(path).read_text().splitlines():
        doc = json.loads(line)
        if doc.get("type") != "meta":
            records.append(doc)
    return records


def test_healthy_stub_answers_every_window(tmp_path):
    manifest = tmp_path / "live.jsonl"
    write_normal_manifest(manifest)
    with Stub("--answer", "Normal") as stub:
        result = run_remote(stub.endpoint, manifest, tmp_path / "out")
    assert result.returncode == 0, result.stderr
    records = read_records(tmp_path / "out" / "predictions.jsonl")
    # 2 clips x 12 s at the 5 s / 2 s grid -> 4 windows each
    assert len(records) == 8
    assert all(r["decision"] == "Normal" for r in records)
    # every window counts as a true negative against the all-Normal manifest
    assert sum(1 for r in records if r["gt"] == "Normal") == len(records)


def test_unreachable_endpoint_is_an_operational_error(tmp_path):
    manifest = tmp_path / "live.jsonl"
    write_normal_manifest(manifest, clips=1)
    result = run_remote(f"http://127.0.0.1:{free_port()}", manifest, tmp_path / "out")
    # Preflight refuses to start a run against a dead endpoint.
    assert result.returncode == 1
    assert "unavailable" in result.stderr.lower()
    assert not (tmp_path / "out" / "predictions.jsonl").exists()


def test_slow_stub_times_out_every_window(tmp_path):
    manifest = tmp_path / "live.jsonl"
    write_normal_manifest(manifest, clips=1, frames=13)  # 4 windows
    with Stub("--answer", "Normal", "--delay-ms", "1500") as stub:
        result = run_remote(stub.endpoint, manifest, tmp_path / "out")
    assert result.returncode == 0, result.stderr
    records = read_records(tmp_path / "out" / "predictions.jsonl")
    assert len(records) == 4
    assert all(r["decision"] == "TimedOut" and r["deadline_violated"] for r in records)
