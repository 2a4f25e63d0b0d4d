"""Assemble the JSON analysis report for one graph."""

from __future__ import annotations

import os
from datetime import datetime, timezone

from oversmooth import __version__
from oversmooth.bounds import BoundReport, audit_bounds
from oversmooth.graph import Graph, degree_stats, diameter
from oversmooth.spectral import fiedler_value, graph_spectrum

__all__ = ["build_report", "strip_timestamp", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1


def _sig(x: float | None) -> float | None:
    return None if x is None else float(f"{x:.12g}")


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the stamp for reproducible builds
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def build_report(
    g: Graph,
    source: str,
    epsilon: float,
    s: float,
    d0: float,
    dmax_reading: str = "paper",
    config: dict | None = None,
) -> tuple[dict, BoundReport | None]:
    """Return the report document and the bound audit (``None`` when disconnected)."""
    sp = graph_spectrum(g)
    connected = sp.m == 1
    d_max, _ = degree_stats(g)
    diam = diameter(g) if connected else None
    fied = fiedler_value(g) if connected and g.n >= 2 else None
    evals = sp.decomposition.eigenvalues

    audit = None
    if connected and g.n >= 2:
        audit = audit_bounds(g, epsilon, s, d0, sp)
        bounds: dict | str = audit.to_dict()
        bounds["dmax_reading"] = dmax_reading
        bounds["failed_links"] = audit.failed_links(dmax_reading)
    elif not connected:
        bounds = "n/a: disconnected"
    else:
        bounds = "n/a: single node"

    doc = {
        "tool_version": __version__,
        "schema_version": SCHEMA_VERSION,
        "graph": {
            "source": source,
            "n": g.n,
            "edges": g.edge_count,
            "components": sp.m,
            "d_max": d_max,
            "diameter": diam,
        },
        "spectral": {
            "eigenvalue_min": _sig(float(evals[0])),
            "eigenvalue_max": _sig(float(evals[-1])),
            "lambda": _sig(sp.lam),
            "multiplicity_m": sp.m,
            "top_nonunit": _sig(sp.top_nonunit_eigenvalue()),
            "fiedler": _sig(fied),
        },
        "bounds": bounds,
        "config": {"epsilon": epsilon, "s": s, "d0": _sig(d0), "dmax_reading": dmax_reading,
                   **(config or {})},
        "timestamp": _timestamp(),
    }
    return doc, audit


def strip_timestamp(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if k != "timestamp"}

