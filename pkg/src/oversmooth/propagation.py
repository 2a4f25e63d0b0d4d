"""Forward-only propagation for GCN-family architectures.

Every run records smoothness metrics per layer against the limit subspace of
the input graph. Nothing here is trained: kernels are random with a controlled
top singular value, which is the only kernel property the decay bounds use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import spearmanr

from oversmooth.graph import Graph, GraphError
from oversmooth.smoothness import SmoothnessRecord, measure, normalized_subspace_distance
from oversmooth.spectral import (
    GraphSpectrum,
    eig_sym,
    graph_spectrum,
    normalized_adjacency_from_edges,
)

__all__ = [
    "KernelSet",
    "ArchitectureConfig",
    "Trajectory",
    "NodeProfile",
    "ARCHITECTURES",
    "max_singular_value",
    "kernel_set",
    "make_kernels",
    "identity_kernels",
    "init_features",
    "forward_gcn",
    "forward_sgc",
    "sgc_trajectory",
    "forward_gcnii",
    "forward_dagnn",
    "dagnn_trajectory",
    "forward_dropedge",
    "forward_residual",
    "run_architecture",
    "node_convergence_profile",
]

ARCHITECTURES = ("gcn", "sgc", "gcnii", "dagnn", "dropedge", "residual")


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def identity(x: np.ndarray) -> np.ndarray:
    return x


_ACTIVATIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {"relu": relu, "identity": identity}


def _activation(name: str) -> Callable[[np.ndarray], np.ndarray]:
    try:
        return _ACTIVATIONS[name]
    except KeyError:
        raise ValueError(f"unknown activation {name!r}; expected relu or identity") from None


# ----------------------------------------------------------------------------
# kernels and features
# ----------------------------------------------------------------------------


def max_singular_value(theta: np.ndarray) -> float:
    """Top singular value, as the square root of the top eigenvalue of ``theta^T theta``."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.size == 0:
        return 0.0
    top = eig_sym(theta.T @ theta).eigenvalues[-1]
    return float(np.sqrt(max(top, 0.0)))


@dataclass(frozen=True)
class KernelSet:
    layer_kernels: tuple[np.ndarray, ...]
    s_values: tuple[float, ...]
    s_sup: float

    @property
    def depth(self) -> int:
        return len(self.layer_kernels)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.layer_kernels[i]


def kernel_set(kernels: Sequence[np.ndarray]) -> KernelSet:
    ks = tuple(np.asarray(k, dtype=np.float64) for k in kernels)
    for a, b in zip(ks, ks[1:]):
        if a.shape[1] != b.shape[0]:
            raise ValueError(f"kernel shapes do not chain: {a.shape} then {b.shape}")
    s_vals = tuple(max_singular_value(k) for k in ks)
    return KernelSet(ks, s_vals, max(s_vals, default=0.0))


def make_kernels(depth: int, dims: Sequence[int], s_target: float, seed: int) -> KernelSet:
    """Random Gaussian kernels ``dims[l] x dims[l+1]`` rescaled to top singular value ``s_target``."""
    if depth < 0 or len(dims) != depth + 1 or any(int(d) < 1 for d in dims):
        raise ValueError(f"dims must list depth + 1 = {depth + 1} positive widths, got {list(dims)}")
    if s_target < 0:
        raise ValueError("s_target must be non-negative")
    rng = np.random.default_rng(seed)
    out = []
    for l in range(depth):
        theta = rng.standard_normal((int(dims[l]), int(dims[l + 1])))
        if s_target == 0:
            theta = np.zeros_like(theta)
        else:
            theta *= s_target / max_singular_value(theta)
        out.append(theta)
    return kernel_set(out)


def identity_kernels(depth: int, channels: int) -> KernelSet:
    return kernel_set([np.eye(channels) for _ in range(depth)])


def init_features(
    g: Graph,
    channels: int,
    seed: int,
    mode: str = "uniform",
    spectrum: GraphSpectrum | None = None,
) -> np.ndarray:
    """Seeded node features.

    ``uniform``: i.i.d. U[-1, 1]. ``orthogonal``: the same draw with its
    component in the limit subspace removed. ``eigvec``: a single column, the
    unit eigenvector of the slowest-decaying mode of ``S`` (``channels`` ignored).
    """
    if mode == "eigvec":
        sp = spectrum if spectrum is not None else graph_spectrum(g)
        return sp.slowest_mode()[:, None]
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(g.n, channels))
    if mode == "uniform":
        return x
    if mode == "orthogonal":
        sp = spectrum if spectrum is not None else graph_spectrum(g)
        e = sp.basis
        return x - e @ (e.T @ x)
    raise ValueError(f"unknown feature init {mode!r}")


# ----------------------------------------------------------------------------
# trajectories
# ----------------------------------------------------------------------------


@dataclass
class Trajectory:
    records: list[SmoothnessRecord]
    final_features: np.ndarray
    metadata: dict = field(default_factory=dict)
    extra: dict[str, list[float]] = field(default_factory=dict)

    @property
    def d_m(self) -> np.ndarray:
        return np.array([r.d_m for r in self.records])

    def decay_slope(self, first: int = 0, last: int | None = None) -> float:
        """Least-squares slope of ``log d_M`` against layer over ``[first, last]``."""
        dm = self.d_m[first : None if last is None else last + 1]
        layers = np.arange(first, first + dm.size)
        ok = dm > 0
        if ok.sum() < 2:
            raise ValueError("need at least two positive d_M values to fit a slope")
        return float(np.polyfit(layers[ok], np.log(dm[ok]), 1)[0])


class _Recorder:
    def __init__(self, basis: np.ndarray, metadata: dict, normalized: bool = False):
        self.basis = basis
        self.records: list[SmoothnessRecord] = []
        self.normalized: list[float] | None = [] if normalized else None
        self.metadata = metadata

    def __call__(self, h: np.ndarray) -> None:
        self.records.append(measure(h, self.basis, len(self.records)))
        if self.normalized is not None:
            self.normalized.append(normalized_subspace_distance(h, self.basis))

    def finish(self, h: np.ndarray) -> Trajectory:
        extra = {} if self.normalized is None else {"d_m_normalized": self.normalized}
        return Trajectory(self.records, h, self.metadata, extra)


def _prepare(g: Graph, x, spectrum: GraphSpectrum | None) -> tuple[np.ndarray, GraphSpectrum]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != g.n:
        raise ValueError(f"feature matrix has {x.shape[0]} rows, graph has {g.n} nodes")
    return x, (spectrum if spectrum is not None else graph_spectrum(g))


def _check_chain(x: np.ndarray, kernels: KernelSet) -> None:
    if kernels.depth and kernels[0].shape[0] != x.shape[1]:
        raise ValueError(f"first kernel expects {kernels[0].shape[0]} channels, features have {x.shape[1]}")


def _gcn_layer(s: np.ndarray, h: np.ndarray, theta: np.ndarray, act) -> np.ndarray:
    return act(s @ h @ theta)


def forward_gcn(
    g: Graph,
    x,
    kernels: KernelSet,
    activation: str = "relu",
    spectrum: GraphSpectrum | None = None,
) -> Trajectory:
    """``H <- act(S H Theta_l)`` for every kernel in ``kernels``."""
    x, sp = _prepare(g, x, spectrum)
    _check_chain(x, kernels)
    act = _activation(activation)
    rec = _Recorder(sp.basis, {"arch": "gcn", "activation": activation, "depth": kernels.depth})
    h = x
    rec(h)
    for theta in kernels.layer_kernels:
        h = _gcn_layer(sp.s, h, theta, act)
        rec(h)
    return rec.finish(h)


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward_sgc(
    g: Graph,
    x,
    k_hops: int,
    theta: np.ndarray,
    apply_softmax: bool = False,
    spectrum: GraphSpectrum | None = None,
) -> np.ndarray:
    """``S^K X Theta``, optionally followed by a row-wise softmax."""
    if k_hops < 0:
        raise ValueError("k_hops must be >= 0")
    x, sp = _prepare(g, x, spectrum)
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape[0] != x.shape[1]:
        raise ValueError(f"theta expects {theta.shape[0]} channels, features have {x.shape[1]}")
    h = x
    for _ in range(k_hops):
        h = sp.s @ h
    out = h @ theta
    return _softmax_rows(out) if apply_softmax else out


def sgc_trajectory(
    g: Graph, x, depth: int, theta: np.ndarray, spectrum: GraphSpectrum | None = None
) -> Trajectory:
    """Metrics of ``S^l X Theta`` for ``l = 0..depth``."""
    x, sp = _prepare(g, x, spectrum)
    rec = _Recorder(sp.basis, {"arch": "sgc", "depth": depth})
    h = x
    rec(h @ theta)
    for _ in range(depth):
        h = sp.s @ h
        rec(h @ theta)
    return rec.finish(h @ theta)


def _per_layer(value, depth: int, name: str) -> list[float]:
    vals = [float(value)] * depth if np.isscalar(value) else [float(v) for v in value]
    if len(vals) != depth:
        raise ValueError(f"{name} needs {depth} values, got {len(vals)}")
    if any(not 0.0 <= v <= 1.0 for v in vals):
        raise ValueError(f"{name} values must lie in [0, 1]")
    return vals


def forward_gcnii(
    g: Graph,
    x,
    kernels: KernelSet,
    alpha,
    beta,
    activation: str = "relu",
    spectrum: GraphSpectrum | None = None,
) -> Trajectory:
    """Initial-residual + identity-mapping propagation:

    ``H <- act(((1 - a_l) S H + a_l H0) ((1 - b_l) I + b_l Theta_l))`` with ``H0 = x``.
    ``alpha``/``beta`` are scalars or per-layer sequences.
    """
    x, sp = _prepare(g, x, spectrum)
    for theta in kernels.layer_kernels:
        if theta.shape != (x.shape[1], x.shape[1]):
            raise ValueError(f"GCNII needs square {x.shape[1]}x{x.shape[1]} kernels, got {theta.shape}")
    alphas = _per_layer(alpha, kernels.depth, "alpha")
    betas = _per_layer(beta, kernels.depth, "beta")
    act = _activation(activation)
    eye = np.eye(x.shape[1])
    rec = _Recorder(sp.basis, {"arch": "gcnii", "activation": activation, "depth": kernels.depth,
                               "alpha": alphas, "beta": betas})
    h = x
    rec(h)
    for theta, a, b in zip(kernels.layer_kernels, alphas, betas):
        # a == 0 and b == 1 skip the mixing terms so the plain-GCN case is exact
        mixed = sp.s @ h if a == 0 else (1.0 - a) * (sp.s @ h) + a * x
        kernel = theta if b == 1 else (1.0 - b) * eye + b * theta
        h = act(mixed @ kernel)
        rec(h)
    return rec.finish(h)


def _dagnn_parts(x, hops, mlp_kernels, proj_vector, seed, hidden, sp):
    if hops < 0:
        raise ValueError("hops must be >= 0")
    rng = np.random.default_rng(seed)
    c = x.shape[1]
    if mlp_kernels is None:
        width = hidden or c
        w1 = rng.standard_normal((c, width)) / np.sqrt(c)
        w2 = rng.standard_normal((width, width)) / np.sqrt(width)
    else:
        w1, w2 = (np.asarray(w, dtype=np.float64) for w in mlp_kernels)
    if w1.shape[0] != c or w2.shape[0] != w1.shape[1]:
        raise ValueError("MLP kernel shapes do not match the features")
    z = relu(x @ w1) @ w2
    proj = rng.standard_normal(z.shape[1]) if proj_vector is None else np.asarray(proj_vector, dtype=np.float64)
    if proj.shape != (z.shape[1],):
        raise ValueError(f"projection vector must have length {z.shape[1]}")
    hs = [z]
    for _ in range(hops):
        hs.append(sp.s @ hs[-1])
    gates = np.stack([1.0 / (1.0 + np.exp(-(h @ proj))) for h in hs])
    return hs, gates


def forward_dagnn(
    g: Graph,
    x,
    hops: int,
    mlp_kernels: tuple[np.ndarray, np.ndarray] | None = None,
    proj_vector: np.ndarray | None = None,
    seed: int = 0,
    hidden: int | None = None,
    spectrum: GraphSpectrum | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Depth-adaptive aggregation.

    ``Z = relu(X W1) W2``, ``H_l = S^l Z`` for ``l = 0..hops``, node-wise gates
    ``sigmoid(H_l proj)``, output ``sum_l gate_l * H_l``. Missing MLP weights
    and projection are drawn from ``seed``.

    Returns
    -------
    output : ndarray, shape (N, C')
    gates : ndarray, shape (hops + 1, N)
    """
    x, sp = _prepare(g, x, spectrum)
    hs, gates = _dagnn_parts(x, hops, mlp_kernels, proj_vector, seed, hidden, sp)
    out = np.zeros_like(hs[0])
    for gate, h in zip(gates, hs):
        out = out + gate[:, None] * h
    return out, gates


def dagnn_trajectory(
    g: Graph, x, depth: int, seed: int = 0, hidden: int | None = None,
    spectrum: GraphSpectrum | None = None,
) -> Trajectory:
    """Metrics of the DAGNN output truncated at ``l = 0..depth`` hops (gates are per hop, so
    truncation is a prefix of the gated sum)."""
    x, sp = _prepare(g, x, spectrum)
    hs, gates = _dagnn_parts(x, depth, None, None, seed, hidden, sp)
    rec = _Recorder(sp.basis, {"arch": "dagnn", "depth": depth, "seed": seed})
    out = np.zeros_like(hs[0])
    for gate, h in zip(gates, hs):
        out = out + gate[:, None] * h
        rec(out)
    return rec.finish(out)


def forward_dropedge(
    g: Graph,
    x,
    kernels: KernelSet,
    drop_rate: float,
    activation: str = "relu",
    seed: int = 0,
    spectrum: GraphSpectrum | None = None,
) -> Trajectory:
    """GCN where each layer uses a freshly masked graph.

    Every undirected edge is dropped independently with probability
    ``drop_rate``; the survivors get self-loops back and are renormalized to
    ``D~^-1/2 A~ D~^-1/2``. Metrics use the unmasked graph's limit subspace.
    """
    if not 0.0 <= drop_rate < 1.0:
        raise ValueError("drop_rate must lie in [0, 1)")
    x, sp = _prepare(g, x, spectrum)
    _check_chain(x, kernels)
    act = _activation(activation)
    rng = np.random.default_rng(seed)
    rec = _Recorder(sp.basis, {"arch": "dropedge", "activation": activation, "depth": kernels.depth,
                               "drop_rate": drop_rate, "seed": seed})
    h = x
    rec(h)
    for theta in kernels.layer_kernels:
        keep = rng.random(g.edge_count) >= drop_rate
        s = normalized_adjacency_from_edges(g.n, g.edges[keep])
        h = _gcn_layer(s, h, theta, act)
        rec(h)
    return rec.finish(h)


def forward_residual(
    g: Graph,
    x,
    kernels: KernelSet,
    activation: str = "relu",
    spectrum: GraphSpectrum | None = None,
) -> Trajectory:
    """``H <- act(S H Theta_l) + H``.

    Feature norms grow under this rule, so the trajectory also carries the
    scale-free ``d_M / ||H||_F`` under ``extra["d_m_normalized"]``.
    """
    x, sp = _prepare(g, x, spectrum)
    for theta in kernels.layer_kernels:
        if theta.shape != (x.shape[1], x.shape[1]):
            raise ValueError(f"residual layers need square kernels, got {theta.shape}")
    act = _activation(activation)
    rec = _Recorder(sp.basis, {"arch": "residual", "activation": activation, "depth": kernels.depth},
                    normalized=True)
    h = x
    rec(h)
    for theta in kernels.layer_kernels:
        h = _gcn_layer(sp.s, h, theta, act) + h
        rec(h)
    return rec.finish(h)


# ----------------------------------------------------------------------------
# configuration-driven runs
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ArchitectureConfig:
    variant: str = "gcn"
    depth: int = 16
    activation: str = "relu"
    alpha: float = 0.1
    beta: float = 0.0
    drop_rate: float = 0.5
    dagnn_hops: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.variant not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.variant!r}; expected one of {ARCHITECTURES}")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        _activation(self.activation)
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ValueError("alpha and beta must lie in [0, 1]")
        if not 0.0 <= self.drop_rate < 1.0:
            raise ValueError("drop_rate must lie in [0, 1)")


def run_architecture(
    g: Graph,
    x,
    config: ArchitectureConfig,
    kernels: KernelSet,
    spectrum: GraphSpectrum | None = None,
) -> Trajectory:
    """Dispatch one configured run; ``kernels`` must have at least ``config.depth`` layers."""
    x, sp = _prepare(g, x, spectrum)
    ks = KernelSet(kernels.layer_kernels[: config.depth], kernels.s_values[: config.depth],
                   max(kernels.s_values[: config.depth], default=0.0))
    v = config.variant
    if v == "gcn":
        traj = forward_gcn(g, x, ks, config.activation, sp)
    elif v == "sgc":
        theta = kernels[0] if kernels.depth else np.eye(x.shape[1])
        traj = sgc_trajectory(g, x, config.depth, theta, sp)
    elif v == "gcnii":
        traj = forward_gcnii(g, x, ks, config.alpha, config.beta, config.activation, sp)
    elif v == "dagnn":
        hops = config.depth if config.dagnn_hops is None else config.dagnn_hops
        traj = dagnn_trajectory(g, x, hops, config.seed, spectrum=sp)
    elif v == "dropedge":
        traj = forward_dropedge(g, x, ks, config.drop_rate, config.activation, config.seed, sp)
    else:
        traj = forward_residual(g, x, ks, config.activation, sp)
    traj.metadata.update({"seed": config.seed, "s_sup": ks.s_sup})
    return traj


# ----------------------------------------------------------------------------
# per-node convergence
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class NodeProfile:
    degrees: np.ndarray
    residuals: np.ndarray
    rank_correlation: float

    def rows(self) -> list[tuple[int, int, float]]:
        return [(i, int(d), float(r)) for i, (d, r) in enumerate(zip(self.degrees, self.residuals))]


def node_convergence_profile(
    g: Graph, x, k: int, spectrum: GraphSpectrum | None = None
) -> NodeProfile:
    """Distance of each node's ``k``-step feature from its limit, ``||(S^k X)_i - (Pi X)_i||``,
    paired with the node degree, plus the Spearman correlation of the two
    (NaN when either is constant)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    x, sp = _prepare(g, x, spectrum)
    if sp.m != 1:
        raise GraphError("convergence profile needs a connected graph")
    h = x
    for _ in range(k):
        h = sp.s @ h
    res = np.linalg.norm(h - sp.projector.pi @ x, axis=1)
    deg = g.degrees.astype(np.int64)
    if np.ptp(deg) == 0 or np.ptp(res) == 0:
        rho = float("nan")
    else:
        rho = float(spearmanr(deg, res).statistic)
    return NodeProfile(deg, res, rho)
