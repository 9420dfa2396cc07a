"""Shared plumbing: worker caps, deterministic report writing, manifests."""

from __future__ import annotations

import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__


def worker_count(tasks: int | None = None) -> int:
    """Worker cap from QUC_THREADS (default: cpu count), floored at 1."""
    env = os.environ.get("QUC_THREADS", "").strip()
    cap = int(env) if env else (os.cpu_count() or 1)
    cap = max(1, cap)
    if tasks is not None:
        cap = min(cap, max(1, tasks))
    return cap


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path: Path, payload: dict) -> None:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    path.write_text(text + "\n")


def write_csv(path: Path, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])


def _format_cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


class Manifest:
    """Run metadata written beside each subcommand's outputs.

    Contains wall time, so the manifest itself is exempt from the
    byte-identical determinism contract that the report files obey.
    """

    def __init__(self, subcommand: str, argv: list[str], seed: int | None):
        self.subcommand = subcommand
        self.argv = list(argv)
        self.seed = seed
        self.outputs: list[str] = []
        self._t0 = time.perf_counter()

    def add(self, path: Path) -> Path:
        self.outputs.append(str(Path(path).name))
        return Path(path)

    def write(self, out_dir: Path) -> None:
        payload = {
            "subcommand": self.subcommand,
            "argv": self.argv,
            "seed": self.seed,
            "outputs": sorted(self.outputs),
            "package_version": __version__,
            "numpy_version": np.__version__,
            "python_version": sys.version.split()[0],
            "wall_time_s": round(time.perf_counter() - self._t0, 6),
        }
        write_json(Path(out_dir) / "manifest.json", payload)
