"""Deterministic CSV and JSON writers.

Every CSV starts with a ``#`` manifest line carrying the seed, config hash
and package version, followed by a header row. Nothing time-dependent is
written, so reruns with the same manifest reproduce the same bytes.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from ridgelet import __version__


def manifest_line(seed: int, config_hash: str) -> str:
    return f"# seed={seed} config_sha256={config_hash} version={__version__}"


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v)
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, columns, rows, seed: int, config_hash: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(manifest_line(seed, config_hash) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c, "")) for c in columns])
    return path


def read_csv(path) -> tuple[str, list[dict]]:
    """Manifest line and data rows (as strings) of a file written by :func:`write_csv`."""
    with Path(path).open(newline="") as fh:
        manifest = fh.readline().rstrip("\n")
        rows = list(csv.DictReader(fh))
    return manifest, rows


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return path
