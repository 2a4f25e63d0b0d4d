"""Depth and spectral bounds for exponential over-smoothing, and an audit that
compares each bound with the exact quantities of a concrete graph."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from oversmooth.graph import Graph, GraphError, degree_stats, diameter
from oversmooth.spectral import GraphSpectrum, fiedler_value, graph_spectrum

__all__ = [
    "BoundReport",
    "epsilon_smoothing_depth",
    "mohar_lower_bound",
    "cavers_upper_bound",
    "theorem3_kernel_bound",
    "audit_bounds",
    "LINK_TOL",
]

LINK_TOL = 1e-12


def epsilon_smoothing_depth(epsilon: float, d0: float, s: float, lam: float) -> int | None:
    """Smallest depth guaranteed to put the features within ``epsilon`` of the limit subspace.

    Returns ``ceil(log(epsilon / d0) / log(s * lam))``, 0 when ``d0 <= epsilon``,
    1 when ``s * lam == 0``, and ``None`` (unbounded) when ``s * lam >= 1``.

    >>> epsilon_smoothing_depth(0.1, 10.0, 1.0, 0.5)
    7
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if d0 < 0 or s < 0:
        raise ValueError("d0 and s must be non-negative")
    if not 0 <= lam < 1:
        raise ValueError("lambda must lie in [0, 1)")
    if d0 <= epsilon:
        return 0
    rate = s * lam
    if rate == 0:
        return 1
    if rate >= 1:
        return None
    return max(1, math.ceil(math.log(epsilon / d0) / math.log(rate)))


def mohar_lower_bound(n: int, diameter_d: int) -> float:
    """Lower bound ``4 / (N D)`` on the algebraic connectivity of a connected graph."""
    if n < 1 or diameter_d < 1:
        raise ValueError("need n >= 1 and diameter >= 1")
    return 4.0 / (n * diameter_d)


def cavers_upper_bound(fiedler: float, d_max: int, augmented: bool = False) -> float:
    """``1 - fiedler / d_max``, or ``1 - fiedler / (d_max + 1)`` with ``augmented``."""
    if fiedler < 0 or d_max < 1:
        raise ValueError("need fiedler >= 0 and d_max >= 1")
    return 1.0 - fiedler / (d_max + 1 if augmented else d_max)


def theorem3_kernel_bound(n: int, diameter_d: int, d_max: int) -> float:
    """Largest kernel norm ``(1 - 4 / (N D d_max))^-1`` that still forces ``s * lam < 1``.

    Evaluated as ``P / (P - 4)`` with the integer ``P = N D d_max`` so that a
    rational bound comes out correctly rounded. Raises ``ValueError`` when
    ``P <= 4``: the bound is vacuous there.
    """
    prod = int(n) * int(diameter_d) * int(d_max)
    if prod <= 4:
        raise ValueError(f"bound vacuous: N*D*d_max = {prod} <= 4")
    return prod / (prod - 4)


def _sig(x: float | None, digits: int = 12) -> float | None:
    if x is None:
        return None
    return float(f"{x:.{digits}g}")


@dataclass(frozen=True)
class BoundReport:
    """Exact spectral quantities of one graph next to each bound, with per-link outcomes.

    Links:
      ``mohar``            fiedler >= 4 / (N D)
      ``cavers_paper``     top non-unit eigenvalue of S <= 1 - fiedler / d_max
      ``cavers_augmented`` same with d_max + 1
      ``abs_lambda``       lam (a magnitude) <= 1 - 4 / (N D d_max); recorded, never asserted
      ``kernel``           s < kernel bound implies s * lam < 1
    """

    n: int
    diameter_d: int
    d_max: int
    lam: float
    top_nonunit: float
    fiedler: float
    mohar_lb: float
    cavers_ub_paper: float
    cavers_ub_aug: float
    lambda_ub: float | None
    thm3_s_bound: float | None
    epsilon: float
    d0: float
    s: float
    s_lambda: float
    l_hat: int | None
    chain_holds: dict
    slack: dict

    def failed_links(self, reading: str = "paper") -> list[str]:
        """Links that count as failures: everything except ``abs_lambda``, with the
        Cavers link taken under the chosen degree ``reading``."""
        names = ["mohar", "cavers_augmented" if reading == "augmented" else "cavers_paper", "kernel"]
        return [k for k in names if not self.chain_holds[k]]

    def to_dict(self) -> dict:
        out = asdict(self)
        for key, val in out.items():
            if isinstance(val, float):
                out[key] = _sig(val)
        out["slack"] = {k: _sig(v) for k, v in self.slack.items()}
        out["l_hat"] = "unbounded" if self.l_hat is None else self.l_hat
        out["thm3_s_bound"] = "vacuous" if self.thm3_s_bound is None else _sig(self.thm3_s_bound)
        return out


def audit_bounds(
    g: Graph,
    epsilon: float,
    s: float,
    d0: float,
    spectrum: GraphSpectrum | None = None,
) -> BoundReport:
    """Evaluate every link of the chain ``fiedler -> lam -> s * lam < 1`` on ``g``.

    Raises :class:`GraphError` for disconnected graphs or a single node.
    """
    if g.n < 2:
        raise GraphError("bound audit needs at least two nodes")
    sp = spectrum if spectrum is not None else graph_spectrum(g)
    if sp.m != 1:
        raise GraphError("bound audit needs a connected graph")
    diam = diameter(g)
    d_max, _ = degree_stats(g)
    fied = fiedler_value(g)
    lam = sp.lam
    top = sp.top_nonunit_eigenvalue()

    mohar = mohar_lower_bound(g.n, diam)
    ub_paper = cavers_upper_bound(fied, d_max)
    ub_aug = cavers_upper_bound(fied, d_max, augmented=True)
    try:
        kbound = theorem3_kernel_bound(g.n, diam, d_max)
        lambda_ub = 1.0 - 4.0 / (g.n * diam * d_max)
    except ValueError:
        kbound = None
        lambda_ub = None

    if kbound is not None and s < kbound:
        kernel_ok = s * lam < 1.0
        kernel_slack = 1.0 - s * lam
    else:
        kernel_ok, kernel_slack = True, None  # premise false: nothing to check

    holds = {
        "mohar": fied >= mohar - LINK_TOL,
        "cavers_paper": top <= ub_paper + LINK_TOL,
        "cavers_augmented": top <= ub_aug + LINK_TOL,
        "abs_lambda": None if lambda_ub is None else lam <= lambda_ub + LINK_TOL,
        "kernel": kernel_ok,
    }
    slack = {
        "mohar": fied - mohar,
        "cavers_paper": ub_paper - top,
        "cavers_augmented": ub_aug - top,
        "abs_lambda": None if lambda_ub is None else lambda_ub - lam,
        "kernel": kernel_slack,
    }
    return BoundReport(
        n=g.n, diameter_d=diam, d_max=d_max, lam=lam, top_nonunit=top, fiedler=fied,
        mohar_lb=mohar, cavers_ub_paper=ub_paper, cavers_ub_aug=ub_aug,
        lambda_ub=lambda_ub, thm3_s_bound=kbound, epsilon=epsilon, d0=d0, s=s,
        s_lambda=s * lam, l_hat=epsilon_smoothing_depth(epsilon, d0, s, lam),
        chain_holds=holds, slack=slack,
    )
