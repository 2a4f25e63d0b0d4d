"""Smoothness metrics for node-feature matrices."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import pdist

__all__ = [
    "SmoothnessRecord",
    "subspace_distance",
    "normalized_subspace_distance",
    "mad",
    "row_col_diff",
    "measure",
    "RECORD_FIELDS",
]

RECORD_FIELDS = ("layer", "d_m", "mad", "row_diff", "col_diff")


def _as_features(h) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.ndim == 1:
        h = h[:, None]
    if h.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {h.shape}")
    return h


def subspace_distance(h, basis: np.ndarray) -> float:
    """Frobenius distance from ``h`` to the column space of the orthonormal ``basis``.

    The infimum over ``basis @ C`` is attained by orthogonal projection, so this
    is ``||h - basis basis^T h||_F``.
    """
    h = _as_features(h)
    if h.shape[0] != basis.shape[0]:
        raise ValueError(f"feature rows ({h.shape[0]}) do not match basis rows ({basis.shape[0]})")
    return float(np.linalg.norm(h - basis @ (basis.T @ h)))


def normalized_subspace_distance(h, basis: np.ndarray) -> float:
    """``subspace_distance(h) / ||h||_F``; 0 for the zero matrix."""
    h = _as_features(h)
    norm = float(np.linalg.norm(h))
    return subspace_distance(h, basis) / norm if norm > 0 else 0.0


def mad(h) -> float:
    """Mean cosine distance ``1 - cos(h_i, h_j)`` over unordered pairs of nonzero rows.

    Raises ``ValueError`` when fewer than two rows are nonzero.
    """
    h = _as_features(h)
    norms = np.linalg.norm(h, axis=1)
    keep = norms > 0
    if keep.sum() < 2:
        raise ValueError("MAD needs at least two nonzero rows")
    u = h[keep] / norms[keep, None]
    cos = np.clip(u @ u.T, -1.0, 1.0)
    iu = np.triu_indices(u.shape[0], k=1)
    return float(np.mean(1.0 - cos[iu]))


def _mean_pairwise_l2(rows: np.ndarray) -> float:
    # ordered pairs: each unordered distance counted twice, diagonal contributes 0
    return float(2.0 * pdist(rows).sum() / rows.shape[0] ** 2)


def row_col_diff(h) -> tuple[float, float]:
    """Row-diff and col-diff (PairNorm-style).

    row-diff averages ``||h_i - h_j||`` over all ordered row pairs (``/ N^2``).
    col-diff does the same over columns after scaling each to unit L1 norm;
    all-zero columns are left out of both the pairs and the denominator.
    """
    h = _as_features(h)
    n, c = h.shape
    if n < 2 or c < 2:
        raise ValueError(f"row/col diff needs at least 2 rows and 2 columns, got {h.shape}")
    row = _mean_pairwise_l2(h)
    l1 = np.abs(h).sum(axis=0)
    cols = h[:, l1 > 0] / l1[l1 > 0]
    col = _mean_pairwise_l2(cols.T) if cols.shape[1] >= 1 else 0.0
    return row, col


@dataclass(frozen=True)
class SmoothnessRecord:
    layer: int
    d_m: float
    mad: float
    row_diff: float
    col_diff: float

    def as_row(self) -> dict:
        return asdict(self)


def measure(h, basis: np.ndarray, layer: int) -> SmoothnessRecord:
    """All metrics for one layer.

    A layer whose rows have collapsed (fewer than two nonzero rows, e.g. after
    ReLU or a zero kernel) has MAD 0; a single-column layer has col-diff 0 and
    a single-row layer has row-diff 0.
    """
    h = _as_features(h)
    try:
        m = mad(h)
    except ValueError:
        m = 0.0
    n, c = h.shape
    if n >= 2 and c >= 2:
        row, col = row_col_diff(h)
    else:
        row = _mean_pairwise_l2(h) if n >= 2 else 0.0
        col = 0.0
    return SmoothnessRecord(layer, subspace_distance(h, basis), m, row, col)
