import csv
import json
import os
import struct
import subprocess
import sys

import numpy as np
import pytest

from onis.cli import main


@pytest.fixture
def spec_file(tmp_path):
    spec = {
        "dim": 8,
        "fps": 30.0,
        "seed": 12,
        "intra_sd": 0.05,
        "centers": [
            [1.0, 1.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
            [0.1, 0.1, 1.0, 1.0, 0.1, 0.1, 0.1, 0.1],
            [0.1, 0.1, 0.1, 0.1, 1.0, 1.0, 0.1, 0.1],
        ],
        "schedule": [[0, 12], [1, 12], [2, 12]],
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    return path


@pytest.fixture
def stream_file(tmp_path, spec_file):
    out = tmp_path / "stream.onis"
    assert main(["gen", "--spec", str(spec_file), "--output", str(out)]) == 0
    return out


def make_sample(path, frames, fps=30.0):
    path.write_text(json.dumps({"frames": frames, "fps": fps}))
    return path


def make_labels(path, entries):
    path.write_text(json.dumps({str(k): v for k, v in entries.items()}))
    return path


class TestSample:
    def test_samples_k_frames(self, tmp_path, stream_file):
        out = tmp_path / "sample.json"
        code = main(
            ["sample", "--input", str(stream_file), "--k", "3",
             "--distance", "symmetric-kl", "--output", str(out)]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert len(payload["frames"]) == 3
        assert payload["fps"] == 30.0
        assert payload["frames"] == sorted(payload["frames"])

    def test_default_k_is_six(self, tmp_path, stream_file):
        out = tmp_path / "sample.json"
        assert main(["sample", "--input", str(stream_file), "--output", str(out)]) == 0
        assert len(json.loads(out.read_text())["frames"]) == 6

    def test_deterministic_byte_identical_outputs(self, tmp_path, stream_file):
        outs = [tmp_path / "a.json", tmp_path / "b.json"]
        traces = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for out, trace in zip(outs, traces):
            assert main(
                ["sample", "--input", str(stream_file), "--k", "3",
                 "--output", str(out), "--trace", str(trace)]
            ) == 0
        assert outs[0].read_bytes() == outs[1].read_bytes()
        assert traces[0].read_bytes() == traces[1].read_bytes()

    def test_trace_columns_and_consistency(self, tmp_path, stream_file):
        out, trace = tmp_path / "s.json", tmp_path / "t.csv"
        assert main(
            ["sample", "--input", str(stream_file), "--k", "3",
             "--output", str(out), "--trace", str(trace)]
        ) == 0
        with open(trace, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == [
            "frame_index", "surprise", "threshold", "admitted", "evicted_frame_index"
        ]
        assert len(rows) == 1 + 36
        # warm-up rows are admitted; first row has infinite surprise
        assert rows[1][1] == "inf" and rows[1][3] == "true"
        admitted_frames = [int(r[0]) for r in rows[1:] if r[3] == "true"]
        evictions = [int(r[4]) for r in rows[1:] if r[4] != ""]
        final = set(json.loads(out.read_text())["frames"])
        assert final == set(admitted_frames) - set(evictions)

    def test_jsonl_input_accepted(self, tmp_path, spec_file):
        stream = tmp_path / "stream.jsonl"
        assert main(["gen", "--spec", str(spec_file), "--output", str(stream)]) == 0
        out = tmp_path / "s.json"
        assert main(["sample", "--input", str(stream), "--k", "3", "--output", str(out)]) == 0
        assert len(json.loads(out.read_text())["frames"]) == 3

    def test_corrupt_stream_exits_2_naming_offset(self, tmp_path, stream_file, capsys):
        data = stream_file.read_bytes()
        corrupt = tmp_path / "corrupt.onis"
        corrupt.write_bytes(data[: len(data) - 5])
        out = tmp_path / "s.json"
        assert main(["sample", "--input", str(corrupt), "--output", str(out)]) == 2
        err = capsys.readouterr().err
        assert "byte" in err

    def test_missing_input_file_exits_2(self, tmp_path, capsys):
        assert main(
            ["sample", "--input", str(tmp_path / "nope.onis"),
             "--output", str(tmp_path / "s.json")]
        ) == 2

    def test_stdout_is_clean(self, tmp_path, stream_file, capsys):
        out = tmp_path / "s.json"
        main(["sample", "--input", str(stream_file), "--k", "3", "--output", str(out)])
        assert capsys.readouterr().out == ""


class TestUsageErrors:
    def test_missing_required_flag(self, capsys):
        assert main(["sample", "--k", "3"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_no_subcommand(self, capsys):
        assert main([]) == 1

    def test_bad_distance_choice(self, tmp_path, capsys):
        assert main(
            ["sample", "--input", "x", "--distance", "manhattan", "--output", "y"]
        ) == 1

    def test_version_and_help_exit_zero(self, capsys):
        assert main(["--version"]) == 0
        assert "onis" in capsys.readouterr().out
        assert main(["--help"]) == 0


class TestEvaluate:
    @pytest.fixture
    def eval_fixture(self, tmp_path):
        auto = make_sample(tmp_path / "auto.json", [12, 400], fps=10.0)
        h1 = make_sample(tmp_path / "h1.json", [10, 100], fps=10.0)
        h2 = make_sample(tmp_path / "h2.json", [14, 100], fps=10.0)
        labels = make_labels(
            tmp_path / "labels.json",
            {10: ["clownfish"], 100: ["eel"], 12: ["clownfish"],
             400: ["shark"], 14: ["clownfish"]},
        )
        return auto, h1, h2, labels

    def test_scores_and_report(self, tmp_path, eval_fixture, capsys):
        auto, h1, h2, labels = eval_fixture
        report_path = tmp_path / "report.json"
        code = main(
            ["evaluate", "--auto", str(auto), "--human", str(h1), "--human", str(h2),
             "--labels", str(labels), "--alpha", "0.5", "--report", str(report_path)]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "average" in out and "percent of human" in out
        report = json.loads(report_path.read_text())
        assert report["alpha"] == 0.5
        assert report["average"] == pytest.approx(0.5)
        assert len(report["per_human_sample"]) == 2
        matches = report["per_human_sample"][0]["per_human_frame"]
        assert matches[0]["auto_frame"] == 12
        assert matches[1]["auto_frame"] is None
        assert report["human_benchmark"] is not None
        assert report["percent_of_human"] is not None

    def test_single_human_sample_skips_benchmark(self, tmp_path, eval_fixture, capsys):
        auto, h1, _, labels = eval_fixture
        code = main(
            ["evaluate", "--auto", str(auto), "--human", str(h1), "--labels", str(labels)]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "benchmark" not in out

    def test_fps_mismatch_exits_2_without_override(self, tmp_path, eval_fixture, capsys):
        auto, h1, _, labels = eval_fixture
        h3 = make_sample(tmp_path / "h3.json", [10], fps=25.0)
        args = ["evaluate", "--auto", str(auto), "--human", str(h1),
                "--human", str(h3), "--labels", str(labels)]
        assert main(args) == 2
        assert "fps" in capsys.readouterr().err
        assert main(args + ["--fps", "10.0"]) == 0

    def test_missing_label_exits_2(self, tmp_path, eval_fixture, capsys):
        auto, h1, _, labels = eval_fixture
        bad = make_sample(tmp_path / "bad.json", [9999], fps=10.0)
        assert main(
            ["evaluate", "--auto", str(bad), "--human", str(h1), "--labels", str(labels)]
        ) == 2
        assert "9999" in capsys.readouterr().err

    def test_bad_alpha_exits_2(self, tmp_path, eval_fixture):
        auto, h1, _, labels = eval_fixture
        assert main(
            ["evaluate", "--auto", str(auto), "--human", str(h1),
             "--labels", str(labels), "--alpha", "1.5"]
        ) == 2


class TestGenInspectConvert:
    def test_gen_is_deterministic(self, tmp_path, spec_file):
        a, b = tmp_path / "a.onis", tmp_path / "b.onis"
        assert main(["gen", "--spec", str(spec_file), "--output", str(a)]) == 0
        assert main(["gen", "--spec", str(spec_file), "--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_gen_bad_spec_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        assert main(["gen", "--spec", str(bad), "--output", str(tmp_path / "o.onis")]) == 2

    def test_inspect_prints_header_and_count(self, stream_file, capsys):
        assert main(["inspect", str(stream_file)]) == 0
        out = capsys.readouterr().out
        assert "dim=8" in out and "fps=30.0" in out
        assert "36 records" in out

    def test_convert_round_trip(self, tmp_path, stream_file):
        jsonl = tmp_path / "s.jsonl"
        back = tmp_path / "back.onis"
        assert main(["convert", "--to", "jsonl", "--input", str(stream_file),
                     "--output", str(jsonl)]) == 0
        assert main(["convert", "--to", "binary", "--input", str(jsonl),
                     "--output", str(back)]) == 0
        assert back.read_bytes() == stream_file.read_bytes()


class TestEnvironment:
    def _run(self, args, env_extra):
        env = dict(os.environ, **env_extra)
        return subprocess.run(
            [sys.executable, "-m", "onis", *args],
            capture_output=True, text=True, env=env,
        )

    def test_numpy_backend_produces_identical_sample(self, tmp_path, stream_file):
        outs = {}
        for backend in ("numba", "numpy"):
            out = tmp_path / f"{backend}.json"
            proc = self._run(
                ["sample", "--input", str(stream_file), "--k", "3",
                 "--output", str(out)],
                {"ONIS_BACKEND": backend},
            )
            assert proc.returncode == 0, proc.stderr
            outs[backend] = json.loads(out.read_text())["frames"]
        assert outs["numba"] == outs["numpy"]

    def test_invalid_backend_is_reported(self, tmp_path, stream_file):
        proc = self._run(["--version"], {"ONIS_BACKEND": "fortran"})
        assert proc.returncode != 0
        assert "ONIS_BACKEND" in proc.stderr

    def test_log_env_controls_stderr(self, tmp_path, stream_file):
        out = tmp_path / "s.json"
        quiet = self._run(
            ["sample", "--input", str(stream_file), "--k", "3", "--output", str(out)],
            {"ONIS_LOG": "error"},
        )
        chatty = self._run(
            ["sample", "--input", str(stream_file), "--k", "3", "--output", str(out)],
            {"ONIS_LOG": "info"},
        )
        assert quiet.returncode == 0 and chatty.returncode == 0
        assert quiet.stderr == ""
        assert "sampled" in chatty.stderr
        assert quiet.stdout == "" and chatty.stdout == ""
