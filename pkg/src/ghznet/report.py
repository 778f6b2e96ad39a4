"""Deterministic file writers and the per-run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import os
import platform
from datetime import datetime, timezone
from pathlib import Path

import networkx
import numpy

from . import __version__

MANIFEST = "manifest.json"


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_csv(path: Path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _timestamp(inputs) -> str:
    # reproducible: SOURCE_DATE_EPOCH if set, else the newest input's mtime
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is None:
        mtimes = [os.path.getmtime(p) for p in inputs if os.path.exists(p)]
        epoch = max(mtimes) if mtimes else 0
    return datetime.fromtimestamp(int(float(epoch)), tz=timezone.utc).isoformat()


def write_manifest(out_dir: Path, command: str, config: dict, inputs, outputs) -> Path:
    inputs = sorted(str(p) for p in inputs)
    manifest = {
        "command": command,
        "config": config,
        "versions": {
            "ghznet": __version__,
            "numpy": numpy.__version__,
            "networkx": networkx.__version__,
            "python": platform.python_version(),
            "rng": "numpy PCG64 per edge, seeded by blake2b(seed|u|v)",
        },
        "inputs": {p: sha256_file(p) for p in inputs},
        "outputs": {Path(p).name: sha256_file(p) for p in sorted(outputs)},
        "timestamp": _timestamp(inputs),
    }
    return write_json(Path(out_dir) / MANIFEST, manifest)
