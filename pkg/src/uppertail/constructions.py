"""Planted-clique and hub constructions, discrete and graphon forms.

Both are calibrated against finite-``n`` lower bounds on the clique
density (only maps landing entirely inside the planted clique, or with
at most one vertex in the hub, are counted).  The reported
``constraint_value`` is the exact density of the emitted graph, which
dominates the calibration bound, so every report is feasible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InfeasibleError
from .graphs import StepGraphon, WeightedGraph, graphon_entropy_mean, graphon_hom_density
from .patterns import pattern_catalog

# Graphs up to this size are materialised in reports; larger ones keep the block quotient only.
MAX_MATERIALISED_N = 2000


@dataclass(frozen=True)
class ConstructionReport:
    kind: str
    size_parameter: float
    n: int | None
    p: float
    delta: float
    k: int
    objective: float
    constraint_value: float
    threshold: float
    normalized_rate: float
    quotient: StepGraphon
    calibration_bound: float
    graph: WeightedGraph | None = field(default=None, repr=False)

    def to_dict(self):
        out = {
            "kind": self.kind,
            "size_parameter": self.size_parameter,
            "n": self.n,
            "p": self.p,
            "delta": self.delta,
            "k": self.k,
            "objective": self.objective,
            "constraint_value": self.constraint_value,
            "threshold": self.threshold,
            "calibration_bound": self.calibration_bound,
            "normalized_rate": self.normalized_rate,
            "quotient": self.quotient.to_dict(),
        }
        if self.graph is not None:
            out["graph"] = self.graph.to_dict()
        return out


def _check_args(n, p, delta, k):
    if n is not None and (int(n) != n or n < 3):
        raise DomainError(f"n must be an integer >= 3, got {n!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    if not delta > 0.0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    if int(k) != k or k < 3:
        raise DomainError(f"k must be an integer >= 3, got {k!r}")


def _falling(x, j):
    """Falling factorial ``x (x-1) ... (x-j+1)`` (vectorised, real ``x`` allowed)."""
    out = np.ones_like(np.asarray(x, dtype=float))
    for i in range(j):
        out = out * (x - i)
    return out


def _edges(k):
    return k * (k - 1) // 2


def _clique_bound(a, n, p, k):
    """Calibration bound ``n^-k [(a)_k + ((n)_k - (a)_k) p^C(k,2)]``."""
    inside = _falling(a, k)
    total = float(_falling(float(n), k))
    return (inside + (total - inside) * p ** _edges(k)) / float(n) ** k


def _hub_bound(a, n, p, k):
    """Calibration bound ``n^-k [k a (n-a)_{k-1} p^C(k-1,2) + (n-a)_k p^C(k,2)]``."""
    rest = n - np.asarray(a, dtype=float)
    one = k * np.asarray(a, dtype=float) * _falling(rest, k - 1) * p ** _edges(k - 1)
    zero = _falling(rest, k) * p ** _edges(k)
    return (one + zero) / float(n) ** k


def _exact_density(kind, a, n, p, k):
    """Exact labeled ``t(K_k, G)``: sum over injective maps by the number ``j`` of vertices in the set."""
    total = 0.0
    for j in range(k + 1):
        ways = math.comb(k, j) * float(_falling(float(a), j)) * float(_falling(float(n - a), k - j))
        if ways == 0.0:
            continue
        if kind == "clique":
            weight = p ** (_edges(k) - _edges(j))
        else:
            weight = p ** _edges(k - j)
        total += ways * weight
    return total / float(n) ** k


def _quotient(kind, a_frac, p):
    if a_frac <= 0.0:
        return StepGraphon.constant(p)
    if a_frac >= 1.0:
        return StepGraphon.constant(1.0)
    inner = [[1.0, p], [p, p]] if kind == "clique" else [[1.0, 1.0], [1.0, p]]
    return StepGraphon([a_frac, 1.0 - a_frac], inner)


def _materialise(kind, a, n, p):
    w = np.full((n, n), p)
    if kind == "clique":
        w[:a, :a] = 1.0
    else:
        w[:a, :] = 1.0
        w[:, :a] = 1.0
    np.fill_diagonal(w, 0.0)
    return WeightedGraph(w)


def _smallest_integer(bound, n, threshold):
    sizes = np.arange(n + 1, dtype=float)
    ok = np.nonzero(bound(sizes) >= threshold)[0]
    if ok.size == 0:
        return None
    return int(ok[0])


def _discrete_report(kind, a, n, p, delta, k, bound_value):
    log_inv_p = math.log(1.0 / p)
    if kind == "clique":
        objective = math.comb(a, 2) * log_inv_p
    else:
        objective = a * (n - (a + 1) / 2.0) * log_inv_p
    graph = _materialise(kind, a, n, p) if n <= MAX_MATERIALISED_N else None
    return ConstructionReport(
        kind=kind,
        size_parameter=a,
        n=n,
        p=p,
        delta=delta,
        k=k,
        objective=objective,
        constraint_value=_exact_density(kind, a, n, p, k),
        threshold=(1.0 + delta) * p ** _edges(k),
        normalized_rate=objective / (n * n * p ** (k - 1) * log_inv_p),
        quotient=_quotient(kind, a / n, p),
        calibration_bound=bound_value,
        graph=graph,
    )


def clique_construction(n, p, delta, k=3):
    """Weights 1 inside a planted ``a``-set, ``p`` elsewhere; ``a`` is the smallest
    integer whose calibration bound reaches ``(1 + delta) p^C(k,2)``."""
    _check_args(n, p, delta, k)
    n = int(n)
    threshold = (1.0 + delta) * p ** _edges(k)
    a = _smallest_integer(lambda s: _clique_bound(s, n, p, k), n, threshold)
    if a is None:
        raise InfeasibleError("even a clique on all n vertices misses the density threshold")
    return _discrete_report("clique", a, n, p, delta, k, float(_clique_bound(float(a), n, p, k)))


def hub_real_size(n, p, delta, k=3):
    """Minimal real hub size solving the calibration bound (``None`` if none exists)."""
    _check_args(n, p, delta, k)
    n = int(n)
    threshold = (1.0 + delta) * p ** _edges(k)
    a = _smallest_integer(lambda s: _hub_bound(s, n, p, k), n, threshold)
    if a is None:
        return None
    if a == 0:
        return 0.0
    f = lambda x: float(_hub_bound(x, n, p, k)) - threshold
    if f(a - 1.0) >= 0.0:
        return float(a - 1)
    return brentq(f, a - 1.0, float(a), xtol=1e-14, rtol=4 * np.finfo(float).eps)


def hub_viable(n, p, k=3):
    """Whether ``n p^{k-1} >= 1``: below that the calibrated hub has fewer than
    ``delta/k`` vertices and the construction stops tracking the rate."""
    return n * p ** (k - 1) >= 1.0


def hub_construction(n, p, delta, k=3):
    """First ``a`` vertices joined to everything with weight 1, ``p`` elsewhere.

    Raises :class:`InfeasibleError` when no ``a`` works, or when ``n p^{k-1} < 1``
    (the hub then needs a fraction of a vertex, so any integer hub overshoots
    the constraint by a diverging factor and is not a viable construction).
    """
    _check_args(n, p, delta, k)
    n = int(n)
    if not hub_viable(n, p, k):
        raise InfeasibleError(
            f"n p^(k-1) = {n * p ** (k - 1):.3g} < 1: hub construction not viable at this (n, p)"
        )
    threshold = (1.0 + delta) * p ** _edges(k)
    a = _smallest_integer(lambda s: _hub_bound(s, n, p, k), n, threshold)
    if a is None:
        raise InfeasibleError("no hub size satisfies the density threshold")
    return _discrete_report("hub", a, n, p, delta, k, float(_hub_bound(float(a), n, p, k)))


def _graphon_bounds(kind, p):
    if kind == "clique":
        return lambda a: a ** 3 + (1.0 - a) ** 3 * p ** 3
    if kind == "hub":
        return lambda a: 3.0 * a * (1.0 - a) ** 2 * p + (1.0 - a) ** 3 * p ** 3
    raise DomainError(f"unknown construction kind {kind!r}")


def graphon_construction(kind, p, delta):
    """Two-block graphon version of the clique or hub construction (triangles).

    ``a`` is the minimal real root of the calibration bound, found by
    bracketing and root refinement, then nudged up until the bound holds.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    if delta < 0.0:
        raise DomainError(f"delta must be nonnegative, got {delta!r}")
    bound = _graphon_bounds(kind, p)
    threshold = (1.0 + delta) * p ** 3
    if delta == 0.0:
        a = 0.0
    else:
        # clique bound dips then rises; hub bound rises to its peak at a = 1/3
        hi = 1.0 if kind == "clique" else 1.0 / 3.0
        if bound(hi) < threshold:
            raise InfeasibleError(f"{kind} graphon cannot reach (1+delta)p^3 for delta={delta}")
        lo = 0.0
        if kind == "clique":
            # move past the dip where the bound is below p^3
            lo = min(p ** 1.5, hi / 2)
            while bound(lo) >= threshold:
                lo /= 2.0
        a = brentq(lambda x: bound(x) - threshold, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps)
        while bound(a) < threshold:
            a = np.nextafter(a, 2.0)
        a = float(a)
    W = _quotient(kind, a, p)
    log_inv_p = math.log(1.0 / p)
    if kind == "clique":
        objective = 0.5 * a * a * log_inv_p
    else:
        objective = a * (1.0 - a / 2.0) * log_inv_p
    return ConstructionReport(
        kind=kind,
        size_parameter=a,
        n=None,
        p=p,
        delta=delta,
        k=3,
        objective=objective,
        constraint_value=graphon_hom_density(pattern_catalog("clique", 3), W),
        threshold=threshold,
        normalized_rate=objective / (p * p * log_inv_p),
        quotient=W,
        calibration_bound=float(bound(a)),
    )


def graphon_objective(report):
    """``(1/2) E[I_p(W)]`` recomputed from the block quotient."""
    return 0.5 * graphon_entropy_mean(report.quotient, report.p)


def best_construction(n, p, delta, k=3):
    """The feasible construction with smaller entropy (clique on ties)."""
    _check_args(n, p, delta, k)
    reports = []
    for build in (clique_construction, hub_construction):
        try:
            reports.append(build(n, p, delta, k))
        except InfeasibleError:
            continue
    if not reports:
        raise InfeasibleError("neither construction is feasible")
    return min(reports, key=lambda r: (r.objective, r.kind != "clique"))
