"""Propagation operators, a cyclic Jacobi eigensolver, and the spectral quantities built on them.

Naming follows the GCN literature loosely: ``S`` is the symmetrically
normalized adjacency of the graph with one self-loop per node (the GCN
propagation matrix), ``L`` is the combinatorial Laplacian ``D - A``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from oversmooth.graph import ComponentPartition, Graph, GraphError, connected_components

__all__ = [
    "EigenError",
    "SpectralDecomposition",
    "LimitProjector",
    "GraphSpectrum",
    "ConvergencePoint",
    "normalized_adjacency",
    "normalized_adjacency_from_edges",
    "unnormalized_laplacian",
    "eig_sym",
    "second_eigenvalue",
    "fiedler_value",
    "limit_projector",
    "power_convergence",
    "graph_spectrum",
]

MAX_SWEEPS = 100
OFFDIAG_RTOL = 1e-12
SYMMETRY_TOL = 1e-12
_SIGN_TOL = 1e-10


class EigenError(ArithmeticError):
    """Raised when the eigensolver input is invalid or it fails to converge."""


def _check_finite(m: np.ndarray) -> np.ndarray:
    if not np.isfinite(m).all():
        raise ValueError("matrix has non-finite entries")
    return m


def normalized_adjacency_from_edges(n: int, edges: np.ndarray) -> np.ndarray:
    """``D~^-1/2 (A + I) D~^-1/2`` for the undirected edge array ``edges`` (shape (E, 2))."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    deg = np.ones(n)
    np.add.at(deg, edges[:, 0], 1.0)
    np.add.at(deg, edges[:, 1], 1.0)
    inv_sqrt = 1.0 / np.sqrt(deg)
    s = np.zeros((n, n))
    u, v = edges[:, 0], edges[:, 1]
    w = inv_sqrt[u] * inv_sqrt[v]
    s[u, v] = w
    s[v, u] = w
    s[np.arange(n), np.arange(n)] = inv_sqrt * inv_sqrt
    return s


def normalized_adjacency(g: Graph) -> np.ndarray:
    """GCN propagation matrix ``S[i, j] = a~_ij / sqrt((d_i + 1)(d_j + 1))``."""
    return normalized_adjacency_from_edges(g.n, g.edges)


def unnormalized_laplacian(g: Graph) -> np.ndarray:
    """``L = D~ - A~``; the self-loops cancel, leaving ``D - A``."""
    a = g.dense_adjacency()
    return np.diag(a.sum(axis=1)) - a


# ----------------------------------------------------------------------------
# eigensolver
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigen-pairs of a symmetric matrix, ascending.

    ``multiplicity_m`` and ``second_eigenvalue`` are only filled in when the
    matrix is a graph's ``S`` (see :func:`graph_spectrum`).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0
    multiplicity_m: int | None = None
    second_eigenvalue: float | None = None

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Pairings of a cyclic round-robin ordering; every pair (p, q) appears once per sweep."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a >= n or b >= n:
                continue
            ps.append(min(a, b))
            qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.int64), np.array(qs, dtype=np.int64)))
        players = [players[0], players[-1], *players[1:-1]]
    return tuple(rounds)


def _max_offdiag(a: np.ndarray) -> float:
    if a.shape[0] < 2:
        return 0.0
    off = np.abs(a - np.diag(np.diag(a)))
    return float(off.max())


def eig_sym(m: np.ndarray) -> SpectralDecomposition:
    """Full eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Each sweep visits every off-diagonal pair once in round-robin order; the
    ``n // 2`` rotations of one round act on disjoint row/column pairs and are
    applied together. Iteration stops when the largest off-diagonal magnitude
    is at most ``1e-12 * ||m||_F``.

    Eigenvalues come back ascending; each eigenvector's first component of
    magnitude above 1e-10 is made positive.

    Raises
    ------
    EigenError
        If ``m`` is not square and symmetric (entrywise tolerance 1e-12), or the
        iteration has not converged after 100 sweeps.
    """
    a = np.array(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise EigenError(f"expected a square matrix, got shape {a.shape}")
    _check_finite(a)
    if np.abs(a - a.T).max(initial=0.0) > SYMMETRY_TOL:
        raise EigenError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)
    tol = OFFDIAG_RTOL * float(np.linalg.norm(a))
    rounds = _round_robin(n)

    sweeps = 0
    while _max_offdiag(a) > tol:
        if sweeps == MAX_SWEEPS:
            raise EigenError(f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            # a negligible a_pq overflows theta; t -> 0 is then the right rotation
            with np.errstate(over="ignore"):
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # A <- J^T A J with J[p,p]=J[q,q]=c, J[p,q]=s, J[q,p]=-s
            ap, aq = a[:, p], a[:, q]
            a[:, p], a[:, q] = c * ap - s * aq, s * ap + c * aq
            ap, aq = a[p, :], a[q, :]
            cc, ss = c[:, None], s[:, None]
            a[p, :], a[q, :] = cc * ap - ss * aq, ss * ap + cc * aq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p], v[:, q]
            v[:, p], v[:, q] = c * vp - s * vq, s * vp + c * vq
        sweeps += 1

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    for j in range(n):
        big = np.flatnonzero(np.abs(v[:, j]) > _SIGN_TOL)
        if big.size and v[big[0], j] < 0:
            v[:, j] = -v[:, j]
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v, sweeps=sweeps)


def second_eigenvalue(d: SpectralDecomposition, component_count: int) -> float:
    """Largest ``|eigenvalue|`` once the top ``component_count`` eigenvalues (the 1s) are removed.

    The multiplicity of eigenvalue 1 is taken from the component count rather
    than from clustering of computed eigenvalues.
    """
    if component_count < 1:
        raise ValueError("component_count must be >= 1")
    rest = d.eigenvalues[: len(d.eigenvalues) - component_count]
    if rest.size == 0:
        return 0.0
    return float(np.abs(rest).max())


def fiedler_value(g: Graph) -> float:
    """Algebraic connectivity: second-smallest eigenvalue of ``L`` for a connected graph."""
    if g.n < 2:
        raise GraphError("algebraic connectivity needs at least two nodes")
    if connected_components(g).component_count != 1:
        raise GraphError("algebraic connectivity is only defined here for connected graphs")
    return float(eig_sym(unnormalized_laplacian(g)).eigenvalues[1])


@dataclass(frozen=True)
class LimitProjector:
    """``pi = basis @ basis.T``; one basis column per connected component."""

    pi: np.ndarray
    basis: np.ndarray


def limit_projector(g: Graph, partition: ComponentPartition | None = None) -> LimitProjector:
    """The matrix ``S^k`` tends to: per component, the outer product of the normalized
    ``sqrt(d_i + 1)`` vector supported on that component."""
    part = partition if partition is not None else connected_components(g)
    root = np.sqrt(g.degrees + 1.0)
    basis = np.zeros((g.n, part.component_count))
    for c in range(part.component_count):
        idx = part.members(c)
        basis[idx, c] = root[idx] / math.sqrt(float(np.sum(root[idx] ** 2)))
    return LimitProjector(pi=basis @ basis.T, basis=basis)


@dataclass(frozen=True)
class GraphSpectrum:
    """Everything spectral about one graph, computed once."""

    graph: Graph
    s: np.ndarray
    decomposition: SpectralDecomposition
    partition: ComponentPartition
    projector: LimitProjector

    @property
    def lam(self) -> float:
        return float(self.decomposition.second_eigenvalue)

    @property
    def m(self) -> int:
        return int(self.decomposition.multiplicity_m)

    @property
    def basis(self) -> np.ndarray:
        return self.projector.basis

    def top_nonunit_eigenvalue(self) -> float | None:
        """Largest eigenvalue of ``S`` below the ``M`` unit eigenvalues (``None`` if N == M)."""
        k = self.graph.n - self.m
        return float(self.decomposition.eigenvalues[k - 1]) if k > 0 else None

    def slowest_mode(self) -> np.ndarray:
        """Unit eigenvector whose eigenvalue has magnitude ``lam`` (outside the limit space)."""
        k = self.graph.n - self.m
        if k == 0:
            raise GraphError("every eigenvalue is 1; there is no decaying mode")
        vals = np.abs(self.decomposition.eigenvalues[:k])
        return self.decomposition.eigenvectors[:, int(np.argmax(vals))].copy()


def graph_spectrum(g: Graph) -> GraphSpectrum:
    s = normalized_adjacency(g)
    part = connected_components(g)
    d = eig_sym(s)
    d = replace(d, multiplicity_m=part.component_count,
                second_eigenvalue=second_eigenvalue(d, part.component_count))
    return GraphSpectrum(graph=g, s=s, decomposition=d, partition=part,
                         projector=limit_projector(g, part))


class ConvergencePoint(NamedTuple):
    k: int
    residual: float
    bound: float


def power_convergence(g: Graph, k_max: int, spectrum: GraphSpectrum | None = None) -> list[ConvergencePoint]:
    """``||S^k - Pi||_F`` for ``k = 1..k_max`` next to the bound ``sqrt(N - M) * lam^k``.

    ``S^k`` is formed by repeated multiplication, independently of the
    eigendecomposition that supplies ``lam``.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    sp = spectrum if spectrum is not None else graph_spectrum(g)
    pi = sp.projector.pi
    scale = math.sqrt(g.n - sp.m)
    out = []
    power = sp.s.copy()
    for k in range(1, k_max + 1):
        if k > 1:
            power = power @ sp.s
        out.append(ConvergencePoint(k, float(np.linalg.norm(power - pi)), scale * sp.lam**k))
    return out
