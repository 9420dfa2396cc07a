"""Tests for worker caps and deterministic report writing."""

import json

import numpy as np

from quclab.utils import Manifest, worker_count, write_csv, write_json


class TestWorkerCount:
    def test_env_cap_respected(self, monkeypatch):
        monkeypatch.setenv("QUC_THREADS", "2")
        assert worker_count() == 2
        assert worker_count(tasks=1) == 1
        assert worker_count(tasks=10) == 2

    def test_floor_at_one(self, monkeypatch):
        monkeypatch.setenv("QUC_THREADS", "0")
        assert worker_count() == 1

    def test_default_positive(self, monkeypatch):
        monkeypatch.delenv("QUC_THREADS", raising=False)
        assert worker_count() >= 1


class TestWriters:
    def test_json_deterministic_and_numpy_safe(self, tmp_path):
        payload = {"b": np.float64(1.5), "a": np.int32(3),
                   "arr": np.array([1.0, np.inf]), "flag": np.bool_(True)}
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        write_json(p1, payload)
        write_json(p2, dict(reversed(list(payload.items()))))
        assert p1.read_bytes() == p2.read_bytes()
        loaded = json.loads(p1.read_text())
        assert loaded["arr"] == [1.0, "inf"]

    def test_csv_float_repr(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ["x"], [[0.1 + 0.2]])
        assert path.read_text().splitlines()[1] == repr(0.1 + 0.2)

    def test_manifest_lists_outputs(self, tmp_path):
        man = Manifest("demo", ["--x"], seed=5)
        man.add(tmp_path / "out.json")
        man.write(tmp_path)
        data = json.loads((tmp_path / "manifest.json").read_text())
        assert data["outputs"] == ["out.json"]
        assert data["seed"] == 5 and data["wall_time_s"] >= 0.0
