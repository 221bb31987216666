"""Persistence: matrix containers, CSV tables and run manifests.

Matrix container
    ``<stem>.npz`` holds the arrays (``numpy.savez``, complex arrays kept
    as complex) and ``<stem>.json`` is a sidecar with the metadata: the
    kind of object (``operators``, ``ensemble``, ``measurements``,
    ``recovery``), the experiment config, seeds, and any scalars.

CSV headers
    trials:      seed, seed_key, rel_err, success, eta, gamma, csr, mu0_sq,
                 wall_time_ms, reason
    min-rate:    S, R, axis, value, successes, trials, found
    phase:       axis1, value1, axis2, value2, eta, gamma, csr, trials,
                 failures, p_fail, status
    noise:       snr_db, median_rel_err, median_rel_err_db, trials, successes
    csr-scaling: alpha, M, W, csr_nyquist, csr_lowrank_only, csr_ours, delta_min
    array-rank:  k, lambda_normalized, log10_lambda

Manifest
    ``manifest.json`` next to the CSV: command, config, root seed,
    package version, ``git describe`` of the working tree, wall time.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import subprocess
from pathlib import Path

import numpy as np

from .. import __version__

TRIAL_HEADER = ["seed", "seed_key", "rel_err", "success", "eta", "gamma", "csr",
                "mu0_sq", "wall_time_ms", "reason"]
MIN_RATE_HEADER = ["S", "R", "axis", "value", "successes", "trials", "found"]
PHASE_HEADER = ["axis1", "value1", "axis2", "value2", "eta", "gamma", "csr", "trials",
                "failures", "p_fail", "status"]
NOISE_HEADER = ["snr_db", "median_rel_err", "median_rel_err_db", "trials", "successes"]
CSR_HEADER = ["alpha", "M", "W", "csr_nyquist", "csr_lowrank_only", "csr_ours", "delta_min"]


def _stem(path) -> Path:
    p = Path(path)
    return p.with_suffix("") if p.suffix in (".npz", ".json") else p


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return None if math.isnan(f) else ("inf" if math.isinf(f) and f > 0 else
                                            "-inf" if math.isinf(f) else f)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def save_container(path, arrays: dict, meta: dict) -> tuple[Path, Path]:
    """Write ``arrays`` to ``<stem>.npz`` and ``meta`` to ``<stem>.json``."""
    stem = _stem(path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    npz, side = stem.with_suffix(".npz"), stem.with_suffix(".json")
    np.savez(npz, **arrays)
    side.write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True))
    return npz, side


def load_container(path) -> tuple[dict, dict]:
    stem = _stem(path)
    with np.load(stem.with_suffix(".npz")) as data:
        arrays = {k: data[k] for k in data.files}
    meta = json.loads(stem.with_suffix(".json").read_text())
    return arrays, meta


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=header)
        w.writeheader()
        for row in rows:
            w.writerow({k: row.get(k, "") for k in header})
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             capture_output=True, text=True, timeout=5,
                             cwd=Path(__file__).resolve().parent)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def write_manifest(directory, command: str, config: dict, root_seed, wall_time_s: float,
                   extra: dict | None = None) -> Path:
    path = Path(directory) / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config": config,
        "root_seed": root_seed,
        "version": __version__,
        "git_describe": git_describe(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": wall_time_s,
    }
    if extra:
        manifest.update(extra)
    path.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True))
    return path
