"""CSV and JSON serialization for features, trajectories, and reports."""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable

import numpy as np

from oversmooth.propagation import Trajectory
from oversmooth.smoothness import RECORD_FIELDS

TRAJECTORY_HEADER = list(RECORD_FIELDS)
COMPARE_HEADER = ["arch", *RECORD_FIELDS]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_features(h: np.ndarray) -> str:
    """Features as CSV: header ``c0,c1,...``, one node per line in id order."""
    h = np.atleast_2d(np.asarray(h, dtype=np.float64))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"c{j}" for j in range(h.shape[1])])
    for row in h:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_features(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty feature file")
    header, body = rows[0], [r for r in rows[1:] if r]
    if header != [f"c{j}" for j in range(len(header))]:
        raise ValueError("feature CSV header must be c0,c1,...")
    try:
        h = np.array([[float(v) for v in r] for r in body], dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"bad feature value: {exc}") from None
    if h.ndim != 2 or h.shape[1] != len(header):
        raise ValueError("every feature row needs one value per header column")
    if not np.isfinite(h).all():
        raise ValueError("feature values must be finite")
    return h


def trajectory_rows(traj: Trajectory) -> list[list[str]]:
    return [[_fmt(getattr(r, f)) for f in RECORD_FIELDS] for r in traj.records]


def write_trajectory(traj: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_HEADER)
    w.writerows(trajectory_rows(traj))
    return buf.getvalue()


def write_comparison(runs: Iterable[tuple[str, Trajectory]]) -> str:
    """Long-format CSV ``arch,layer,d_m,mad,row_diff,col_diff``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARE_HEADER)
    for label, traj in runs:
        for row in trajectory_rows(traj):
            w.writerow([label, *row])
    return buf.getvalue()


def write_table(rows: list[dict]) -> str:
    """Generic CSV for a list of flat dicts sharing the first row's keys."""
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if v is None else v) for k, v in r.items()})
    return buf.getvalue()


def dump_report(doc: dict) -> str:
    """Stable JSON: insertion-ordered keys, 2-space indent, trailing newline."""
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def load_report(text: str) -> dict:
    return json.loads(text)
