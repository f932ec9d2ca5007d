"""CLI behavior: exit codes, file outputs, and the serve lifecycle."""

import csv
import json
import signal
import socket
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

import pytest

from streamloom.cli import main, parse_bind

REPO = Path(__file__).parent.parent
DATASETS = REPO / "datasets"
WORKFLOWS = REPO / "workflows"


def run_cli(argv):
    return main([str(a) for a in argv])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestHelp:
    @pytest.mark.parametrize("argv", [
        ["--help"],
        ["serve", "--help"],
        ["validate", "--help"],
        ["run", "--help"],
        ["bench", "--help"],
    ])
    def test_help_exits_zero(self, argv, capsys):
        with pytest.raises(SystemExit) as err:
            run_cli(argv)
        assert err.value.code == 0
        assert "usage" in capsys.readouterr().out


class TestParseBind:
    def test_host_port(self):
        assert parse_bind("127.0.0.1:8787") == ("127.0.0.1", 8787)

    @pytest.mark.parametrize("bad", ["nonsense", ":80", "host:", "host:http",
                                     "host:0", "host:70000"])
    def test_rejected(self, bad):
        from streamloom.errors import BindError
        with pytest.raises(BindError):
            parse_bind(bad)


class TestValidate:
    def test_bundled_files_are_valid(self, capsys):
        code = run_cli([
            "validate",
            DATASETS / "synthetic-gaze" / "synthetic-gaze.dataset.json",
            DATASETS / "synthetic-weather" / "synthetic-weather.dataset.json",
            WORKFLOWS / "eye-movement.workflow.json",
            WORKFLOWS / "weather.workflow.json",
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert out.count("OK") == 4 and "ERROR" not in out

    def test_zero_frequency_names_the_invariant(self, tmp_path, capsys):
        doc = json.loads(
            (DATASETS / "synthetic-gaze" / "synthetic-gaze.dataset.json").read_text()
        )
        doc["streams"][0]["frequency_hz"] = 0
        bad = tmp_path / "bad.dataset.json"
        bad.write_text(json.dumps(doc))
        code = run_cli(["validate", bad])
        out = capsys.readouterr().out
        assert code == 1
        assert "frequency_hz" in out and "ERROR" in out

    def test_mixed_batch_reports_each_file(self, tmp_path, capsys):
        good = WORKFLOWS / "weather.workflow.json"
        bad = tmp_path / "broken.workflow.json"
        bad.write_text("{not json")
        code = run_cli(["validate", good, bad])
        out = capsys.readouterr().out
        assert code == 1
        assert f"OK     {good}" in out
        assert f"ERROR  {bad}" in out

    def test_unknown_suffix_is_an_error(self, tmp_path, capsys):
        stray = tmp_path / "data.yaml"
        stray.write_text("x: 1")
        assert run_cli(["validate", stray]) == 1
        assert "cannot infer" in capsys.readouterr().out

    def test_json_report_is_valid_json(self, tmp_path, capsys):
        bad = tmp_path / "broken.dataset.json"
        bad.write_text("[]")
        code = run_cli([
            "validate", "--json", WORKFLOWS / "weather.workflow.json", bad,
        ])
        report = json.loads(capsys.readouterr().out)
        assert code == 1
        assert report["ok"] is False
        assert [r["ok"] for r in report["results"]] == [True, False]
        assert "error" in report["results"][1]


class TestRun:
    def test_weather_routes_into_four_sinks(self, tmp_path, capsys):
        code = run_cli([
            "run", "--workflow", WORKFLOWS / "weather.workflow.json",
            "--root", DATASETS, "--out", tmp_path, "--json",
        ])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        # oracle: rows per type in the fixture, then one mean per stride
        rows = read_csv(DATASETS / "synthetic-weather" / "harborview.csv")[1:]
        per_type = {}
        for _, kind, _ in rows:
            per_type[kind] = per_type.get(kind, 0) + 1
        for sink in ("temperature", "dew_point", "humidity", "wind_speed"):
            expect = per_type[sink] // 7
            assert summary["sinks"][sink]["frames"] == expect
            got = read_csv(tmp_path / f"{sink}.csv")
            assert got[0] == ["seq", "t", "value"]
            assert len(got) - 1 == expect

    def test_eye_movement_writes_labels_and_metadata(self, tmp_path, capsys):
        code = run_cli([
            "run", "--workflow", WORKFLOWS / "eye-movement.workflow.json",
            "--root", DATASETS, "--out", tmp_path,
        ])
        assert code == 0
        labeled = read_csv(tmp_path / "labeled.csv")
        assert labeled[0] == ["seq", "t", "label", "x", "y"]
        labels = {row[2] for row in labeled[1:]}
        assert labels == {"fixation", "saccade"}
        meta = json.loads((tmp_path / "labeled.analytic.json").read_text())
        assert [rec["node_kind"] for rec in meta["provenance"]] == [
            "smooth", "differentiate", "ivt_threshold", "join",
        ]
        for sink in ("raw", "synthetic", "noisy"):
            assert (tmp_path / f"{sink}.csv").exists()
            assert (tmp_path / f"{sink}.analytic.json").exists()

    def test_duration_zero_writes_headers_and_metadata(self, tmp_path, capsys):
        code = run_cli([
            "run", "--workflow", WORKFLOWS / "weather.workflow.json",
            "--root", DATASETS, "--out", tmp_path, "--duration", 0,
        ])
        assert code == 0
        for sink in ("temperature", "dew_point", "humidity", "wind_speed"):
            assert read_csv(tmp_path / f"{sink}.csv") == [["seq", "t", "value"]]
            meta = json.loads((tmp_path / f"{sink}.analytic.json").read_text())
            assert meta["stream"]["channels"][0]["name"] == "value"

    def test_duration_caps_frame_count(self, tmp_path, capsys):
        code = run_cli([
            "run", "--workflow", WORKFLOWS / "eye-movement.workflow.json",
            "--root", DATASETS, "--out", tmp_path, "--duration", 2,
        ])
        assert code == 0
        # 2 s at 50 Hz = 100 source frames pass the inlet untouched
        assert len(read_csv(tmp_path / "raw.csv")) - 1 == 100

    def test_source_flag_overrides_workflow_binding(self, tmp_path, capsys):
        code = run_cli([
            "run", "--workflow", WORKFLOWS / "eye-movement.workflow.json",
            "--root", DATASETS, "--out", tmp_path,
            "--source", "inlet1.in=replay:gaze/s02/read",
        ])
        assert code == 0
        meta = json.loads((tmp_path / "raw.analytic.json").read_text())
        assert meta["stream"]["stream_id"] == "gaze/s02/read"

    def test_unknown_stream_lists_known_ids(self, tmp_path, capsys):
        code = run_cli([
            "run", "--workflow", WORKFLOWS / "weather.workflow.json",
            "--root", DATASETS, "--out", tmp_path,
            "--source", "in1.in=replay:weather/atlantis",
        ])
        assert code == 1
        err = capsys.readouterr().err
        assert "weather/atlantis" in err and "weather/harborview" in err

    def test_simulate_binding_needs_duration(self, tmp_path, capsys):
        spec = json.dumps({
            "mode": "simulate",
            "stream": "gaze/s01/scan",
            "simulation": {
                "kind": "unguided", "seed": 7,
                "generators": {"x": {"kind": "uniform", "lo": 0, "hi": 1},
                               "y": {"kind": "uniform", "lo": 0, "hi": 1},
                               "d": {"kind": "constant", "value": 4.0}},
            },
        })
        argv = [
            "run", "--workflow", WORKFLOWS / "eye-movement.workflow.json",
            "--root", DATASETS, "--out", tmp_path,
            "--source", f"inlet1.in={spec}",
        ]
        assert run_cli(argv) == 1
        assert "--duration" in capsys.readouterr().err

        assert run_cli(argv + ["--duration", 1]) == 0
        assert len(read_csv(tmp_path / "raw.csv")) - 1 == 50

    def test_missing_binding_is_reported(self, tmp_path, capsys):
        doc = json.loads((WORKFLOWS / "weather.workflow.json").read_text())
        doc["sources"] = {}
        wf = tmp_path / "unbound.workflow.json"
        wf.write_text(json.dumps(doc))
        code = run_cli(["run", "--workflow", wf, "--root", DATASETS,
                        "--out", tmp_path / "out"])
        assert code == 1
        assert "in1.in" in capsys.readouterr().err


class TestBench:
    def test_table_output(self, capsys):
        code = run_cli(["bench", "--node", "mean", "--n", 500, "--rate", 50])
        out = capsys.readouterr().out
        assert code == 0
        assert "mean" in out and "GF" in out

    def test_json_line_and_out_file(self, tmp_path, capsys):
        out_file = tmp_path / "reports.jsonl"
        for _ in range(2):
            code = run_cli(["bench", "--node", "ivt_threshold", "--n", 200,
                            "--json", "--out", out_file])
            assert code == 0
        doc = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert doc["kind"] == "ivt_threshold"
        assert doc["gf"] is None  # volume is data-dependent
        lines = out_file.read_text().splitlines()
        assert len(lines) == 2 and all(json.loads(l) for l in lines)

    def test_unknown_kind_exits_one(self, capsys):
        assert run_cli(["bench", "--node", "ghost", "--n", 10]) == 1
        assert "ghost" in capsys.readouterr().err

    def test_zero_samples_exits_one(self, capsys):
        assert run_cli(["bench", "--node", "mean", "--n", 0]) == 1
        assert "n_samples" in capsys.readouterr().err


class TestConfig:
    def test_config_file_supplies_root(self, tmp_path, capsys):
        cfg = tmp_path / "loom.json"
        cfg.write_text(json.dumps({"dataset_root": str(DATASETS)}))
        code = run_cli([
            "run", "--workflow", WORKFLOWS / "weather.workflow.json",
            "--config", cfg, "--out", tmp_path / "out",
        ])
        assert code == 0

    def test_flag_overrides_config(self, tmp_path, capsys):
        cfg = tmp_path / "loom.json"
        cfg.write_text(json.dumps({"dataset_root": "/nope"}))
        code = run_cli([
            "run", "--workflow", WORKFLOWS / "weather.workflow.json",
            "--config", cfg, "--root", DATASETS, "--out", tmp_path / "out",
        ])
        assert code == 0

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "loom.json"
        cfg.write_text(json.dumps({"dataset_rot": str(DATASETS)}))
        code = run_cli([
            "run", "--workflow", WORKFLOWS / "weather.workflow.json",
            "--config", cfg, "--out", tmp_path / "out",
        ])
        assert code == 1
        assert "dataset_rot" in capsys.readouterr().err


class TestServe:
    def test_missing_root_exits_two(self, tmp_path, capsys):
        assert run_cli(["serve", "--root", tmp_path / "ghost"]) == 2
        assert "not a directory" in capsys.readouterr().err

    def test_occupied_port_exits_two(self, capsys):
        blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        try:
            code = run_cli(["serve", "--root", DATASETS,
                            "--bind", f"127.0.0.1:{port}"])
        finally:
            blocker.close()
        assert code == 2
        assert "cannot bind" in capsys.readouterr().err

    def test_serve_healthz_and_clean_interrupt(self, tmp_path):
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
        sock.close()
        proc = subprocess.Popen(
            [sys.executable, "-m", "streamloom.cli", "serve",
             "--root", str(DATASETS), "--bind", f"127.0.0.1:{port}",
             "--log-level", "warning"],
            stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True,
        )
        try:
            body = None
            deadline = time.time() + 20
            while time.time() < deadline:
                try:
                    body = urllib.request.urlopen(
                        f"http://127.0.0.1:{port}/healthz", timeout=1).read()
                    break
                except OSError:
                    time.sleep(0.2)
            assert body == b"ok"
            stats = json.loads(urllib.request.urlopen(
                f"http://127.0.0.1:{port}/stats", timeout=2).read())
            assert stats == {"nodes": {}}
            proc.send_signal(signal.SIGINT)
            assert proc.wait(timeout=20) == 0
        finally:
            if proc.poll() is None:
                proc.kill()
                proc.wait()
