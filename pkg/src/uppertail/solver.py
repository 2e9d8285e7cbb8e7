"""Numerical upper bounds on ``phi_H(n, p, delta)`` and a brute-force grid oracle.

``solve_phi`` minimises ``I_p(G)`` over weighted graphs subject to
``t(H, G) >= (1 + delta) p^{e(H)}`` by projected gradient descent on the
box ``[p, 1]^{C(n,2)}`` (weights below ``p`` never help: ``I_p`` decreases
on ``[0, p]`` and densities are monotone).  The constraint enters through a
penalty merit with geometric continuation; a final one-dimensional repair
step makes the returned point exactly feasible.  The result is a feasible
point, hence an upper bound on the infimum, never a certificate of it.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import graphs
from .constructions import clique_construction, hub_construction
from .entropy import relative_entropy
from .errors import DomainError, InfeasibleError, ResourceError
from .patterns import TRIANGLE, SubgraphPattern

GRID_BUDGET = 2e8


@dataclass(frozen=True)
class VariationalInstance:
    """One instance of ``phi_H(n, p, delta)``.

    ``injective=True`` rescales the density by ``n^k / (n)_k`` so the
    constant-``p`` graph sits exactly at ``p^{e(H)}``; the labeled form is
    the default.
    """

    n: int
    p: float
    delta: float
    pattern: SubgraphPattern = TRIANGLE
    injective: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n!r}")
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p!r}")
        if self.delta < 0.0:
            raise DomainError(f"delta must be nonnegative, got {self.delta!r}")
        if self.threshold > 1.0:
            raise InfeasibleError(f"threshold {self.threshold!r} exceeds 1")
        if self.n < self.pattern.k:
            raise InfeasibleError(
                f"n={self.n} < {self.pattern.k} pattern vertices: no injective copies exist"
            )

    @property
    def threshold(self):
        return (1.0 + self.delta) * self.p ** self.pattern.num_edges

    @property
    def scale(self):
        """``n^2 p^{Delta} log(1/p)``, the normaliser of reported rates."""
        return self.n * self.n * self.p ** self.pattern.max_degree * math.log(1.0 / self.p)

    @property
    def _injective_factor(self):
        if not self.injective:
            return 1.0
        n, k = self.n, self.pattern.k
        return n ** k / math.prod(range(n - k + 1, n + 1))

    def density(self, G):
        if self.pattern == TRIANGLE:
            value = graphs.triangle_density(G)
        else:
            value = graphs.hom_density(self.pattern, G)
        return value * self._injective_factor

    def density_gradient(self, G):
        if self.pattern == TRIANGLE:
            grad = graphs.triangle_density_gradient(G)
        else:
            grad = graphs.hom_density_gradient(self.pattern, G)
        return grad * self._injective_factor

    def to_dict(self):
        return {
            "n": self.n,
            "p": self.p,
            "delta": self.delta,
            "pattern": self.pattern.to_dict(),
            "injective": self.injective,
        }


@dataclass(frozen=True)
class SolverOptions:
    """Settings for :func:`solve_phi`.

    ``mu0`` multiplies the squared relative violation
    ``max(0, 1 - t/threshold)^2``; it grows by ``mu_factor`` over ``stages``.
    """

    random_starts: int = 8
    max_iter: int = 3000
    stages: int = 6
    mu0: float = 10.0
    mu_factor: float = 10.0
    tol: float = 1e-9
    gtol: float = 1e-7
    ftol: float = 1e-12
    armijo: float = 1e-4
    derivative_floor: float = 1e-12
    perturbation: float = 0.1
    seed: int = 0
    use_constructions: bool = True
    keep_trace: bool = True

    def to_dict(self):
        return asdict(self)


@dataclass
class StartSummary:
    name: str
    start_objective: float
    start_feasible: bool
    objective: float
    iterations: int
    converged: bool


@dataclass
class SolveReport:
    minimizer: graphs.WeightedGraph
    objective: float
    constraint_value: float
    threshold: float
    normalized_rate: float
    cherry_ratio: float
    starts: int
    converged: bool
    best_start: str
    start_summaries: list = field(default_factory=list)
    trace: list = field(default_factory=list, repr=False)

    @property
    def violation(self):
        return self.threshold - self.constraint_value

    def to_dict(self, include_graph=True, include_trace=False):
        out = {
            "objective": self.objective,
            "constraint_value": self.constraint_value,
            "threshold": self.threshold,
            "normalized_rate": self.normalized_rate,
            "cherry_ratio": self.cherry_ratio,
            "starts": self.starts,
            "converged": self.converged,
            "best_start": self.best_start,
            "upper_bound_only": True,
            "start_summaries": [asdict(s) for s in self.start_summaries],
        }
        if include_graph:
            out["minimizer"] = self.minimizer.to_dict()
        if include_trace:
            out["trace"] = [list(row) for row in self.trace]
        return out


def write_trace_csv(report, stream):
    """Stream the best start's trace as CSV rows (stage, iteration, objective, violation, mu)."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["stage", "iteration", "objective", "violation", "mu"])
    for row in report.trace:
        writer.writerow([row[0], row[1], repr(row[2]), repr(row[3]), repr(row[4])])


class _Problem:
    """Merit function ``I_p(x) + mu * max(0, 1 - t(x)/threshold)^2`` on upper-triangle vectors."""

    def __init__(self, instance, options):
        self.inst = instance
        self.n = instance.n
        self.p = instance.p
        self.thr = instance.threshold
        self.iu = np.triu_indices(self.n, 1)
        self.cap = math.log(1.0 / options.derivative_floor)
        self.logit_p = math.log(self.p) - math.log1p(-self.p)
        self.fast = instance.pattern == TRIANGLE and not instance.injective

    def graph(self, x):
        w = np.zeros((self.n, self.n))
        w[self.iu] = x
        w[(self.iu[1], self.iu[0])] = x
        return w

    def entropy(self, x):
        return float(np.sum(relative_entropy(x, self.p)))

    def entropy_grad(self, x):
        with np.errstate(divide="ignore"):
            g = np.log(x) - np.log1p(-x) - self.logit_p
        return np.clip(g, -self.cap, self.cap)

    def density(self, x):
        w = self.graph(x)
        if self.fast:
            sq = w @ w
            return float(np.sum(w * sq)) / self.n ** 3, sq
        return self.inst.density(graphs.WeightedGraph(w)), None

    def reported_density(self, x):
        # the value callers will recompute; feasibility decisions use this one
        return self.inst.density(graphs.WeightedGraph(self.graph(x)))

    def density_grad(self, x, cache):
        if self.fast:
            sq = cache if cache is not None else self.graph(x) @ self.graph(x)
            return 6.0 * sq[self.iu] / self.n ** 3
        return self.inst.density_gradient(graphs.WeightedGraph(self.graph(x)))[self.iu]

    def merit(self, x, mu):
        t, cache = self.density(x)
        c = max(0.0, 1.0 - t / self.thr)
        return self.entropy(x) + mu * c * c, t, cache

    def merit_grad(self, x, mu, t, cache):
        c = max(0.0, 1.0 - t / self.thr)
        g = self.entropy_grad(x)
        if c > 0.0:
            g = g - (2.0 * mu * c / self.thr) * self.density_grad(x, cache)
        return g


def _descend(prob, x, mu, opts, stage, trace):
    """Projected gradient with Armijo backtracking; returns (x, iterations, converged)."""
    lo = prob.p
    f, t, cache = prob.merit(x, mu)
    alpha = 1.0
    for it in range(opts.max_iter):
        g = prob.merit_grad(x, mu, t, cache)
        pg = np.clip(x - g, lo, 1.0) - x
        if np.max(np.abs(pg)) <= opts.gtol:
            return x, it, True
        # backtracking halving; the trial step restarts from at most 1.0
        alpha = min(1.0, 2.0 * alpha)
        while True:
            x_new = np.clip(x - alpha * g, lo, 1.0)
            d = x_new - x
            f_new, t_new, cache_new = prob.merit(x_new, mu)
            if f_new <= f + opts.armijo * float(g @ d):
                break
            alpha *= 0.5
            if alpha < 1e-16:
                return x, it, True
        decrease = f - f_new
        x, f, t, cache = x_new, f_new, t_new, cache_new
        if trace is not None:
            trace.append((stage, it, prob.entropy(x), prob.thr - t, mu))
        if decrease <= opts.ftol * max(1.0, abs(f)):
            return x, it + 1, True
    return x, opts.max_iter, False


def _repair(prob, x):
    """Smallest move toward the all-ones graph restoring ``t >= threshold``."""
    if prob.reported_density(x) >= prob.thr:
        return x
    d = 1.0 - x
    lo, hi = 0.0, 1.0
    if prob.reported_density(x + d) < prob.thr:
        raise InfeasibleError("complete graph misses the density threshold")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if prob.reported_density(np.minimum(x + mid * d, 1.0)) >= prob.thr:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-17:
            break
    return np.minimum(x + hi * d, 1.0)


def _starts(instance, opts, prob):
    n, p = instance.n, instance.p
    m = n * (n - 1) // 2
    out = []
    pat = instance.pattern
    is_clique = pat.is_complete() and pat.k >= 3
    if opts.use_constructions and is_clique and instance.delta > 0 and not instance.injective:
        for name, build in (("clique", clique_construction), ("hub", hub_construction)):
            try:
                rep = build(n, p, instance.delta, pat.k)
            except InfeasibleError:
                continue
            if rep.graph is not None:
                out.append((name, rep.graph.upper()))
    out.append(("constant", np.full(m, p)))
    for i in range(opts.random_starts):
        rng = np.random.default_rng([opts.seed, i])
        bump = rng.exponential(opts.perturbation * (1.0 - p), size=m)
        out.append((f"random{i}", np.minimum(p + bump, 1.0)))
    return out


def solve_phi(instance, options=None):
    """Best feasible graph found from a fixed multi-start portfolio.

    Starts: both constructions when feasible (clique patterns only), the
    constant-``p`` graph, and ``random_starts`` seeded perturbations of it.
    Each start runs ``stages`` rounds of projected gradient descent with the
    penalty weight growing geometrically, then a feasibility repair.
    The returned objective is never above any feasible start's objective.
    """
    opts = options or SolverOptions()
    prob = _Problem(instance, opts)
    m = instance.n * (instance.n - 1) // 2
    if prob.reported_density(np.ones(m)) < prob.thr:
        raise InfeasibleError("even the complete graph misses the density threshold")

    best = None
    summaries = []
    for name, x0 in _starts(instance, opts, prob):
        trace = [] if opts.keep_trace else None
        start_obj = prob.entropy(x0)
        start_feasible = prob.reported_density(x0) >= prob.thr
        x = x0.copy()
        mu = opts.mu0
        total_iter, converged = 0, False
        for stage in range(opts.stages):
            x, iters, converged = _descend(prob, x, mu, opts, stage, trace)
            total_iter += iters
            t, _ = prob.density(x)
            if 1.0 - t / prob.thr <= opts.tol:
                break
            mu *= opts.mu_factor
        x = _repair(prob, x)
        obj = prob.entropy(x)
        candidates = [(obj, x, trace)]
        if start_feasible:
            candidates.append((start_obj, x0, []))
        cand = min(candidates, key=lambda c: c[0])
        summaries.append(StartSummary(name, start_obj, bool(start_feasible), obj, total_iter, bool(converged)))
        if best is None or cand[0] < best[0]:
            best = (cand[0], cand[1], cand[2], name, converged)

    obj, x, trace, name, converged = best
    G = graphs.WeightedGraph(prob.graph(x))
    t = instance.density(G)
    return SolveReport(
        minimizer=G,
        objective=graphs.total_relative_entropy(G, instance.p),
        constraint_value=t,
        threshold=instance.threshold,
        normalized_rate=obj / instance.scale,
        cherry_ratio=graphs.cherry_density(G) / instance.p ** 2,
        starts=len(summaries),
        converged=converged,
        best_start=name,
        start_summaries=summaries,
        trace=trace or [],
    )


def merit_function(instance, mu, options=None):
    """``(f, grad)`` callables of the penalty merit on upper-triangle vectors (for checks)."""
    prob = _Problem(instance, options or SolverOptions())

    def f(x):
        return prob.merit(np.asarray(x, dtype=float), mu)[0]

    def grad(x):
        x = np.asarray(x, dtype=float)
        _, t, cache = prob.merit(x, mu)
        return prob.merit_grad(x, mu, t, cache)

    return f, grad


def verify_feasibility(G, instance, tol=0.0):
    """``(passes, violation)`` with ``violation = threshold - t(H, G)``."""
    if G.n != instance.n:
        raise DomainError(f"graph has {G.n} vertices, instance expects {instance.n}")
    violation = instance.threshold - instance.density(G)
    return violation <= tol, violation


def cherry_diagnostic(report, instance):
    """``s(G)/p^2`` of the reported minimiser."""
    return graphs.cherry_density(report.minimizer) / instance.p ** 2


@dataclass(frozen=True)
class OracleResult:
    """Grid minimum; the true infimum lies in ``[value - error_band, value]``."""

    value: float
    error_band: float
    resolution: float
    points: int
    argmin: tuple


def grid_oracle(instance, resolution=0.01):
    """Exhaustive minimisation of ``I_p`` over feasible points of a grid on ``[p, 1]``.

    The grid is ``p, p + h, ..., `` plus the endpoint 1.  Every grid point
    is a genuine point of the domain, so the value is an upper bound on
    the infimum; rounding a true minimiser up to the grid keeps it feasible
    and costs at most ``C(n,2)`` times the largest one-step increase of
    ``I_p`` on the grid, which is reported as ``error_band``.
    """
    n = instance.n
    m = n * (n - 1) // 2
    if m > 6:
        raise DomainError("grid oracle is limited to n <= 4")
    if not 0.0 < resolution <= 0.1:
        raise DomainError("resolution must lie in (0, 0.1]")
    p = instance.p
    levels = np.arange(p, 1.0, resolution)
    # arange can overshoot 1 by an ulp
    levels = np.unique(np.append(levels[levels < 1.0], 1.0))
    size = float(levels.size) ** m
    if size > GRID_BUDGET:
        raise ResourceError(f"grid of {size:.3g} points exceeds budget {GRID_BUDGET:.3g}")
    ent = relative_entropy(levels, p)
    band = m * float(np.max(np.diff(ent))) if levels.size > 1 else 0.0

    pairs = list(itertools.combinations(range(n), 2))
    best_val, best_arg = math.inf, None
    # sweep the first coordinate in Python, the rest vectorised
    rest = np.stack(np.meshgrid(*[np.arange(levels.size)] * (m - 1), indexing="ij"), -1).reshape(-1, m - 1) \
        if m > 1 else np.zeros((1, 0), dtype=int)
    thr = instance.threshold
    for i0 in range(levels.size):
        idx = np.concatenate([np.full((rest.shape[0], 1), i0), rest], axis=1)
        vals = levels[idx]
        t = _batch_density(instance, vals, pairs)
        feas = t >= thr
        if not feas.any():
            continue
        obj = ent[idx].sum(axis=1)
        obj = np.where(feas, obj, np.inf)
        j = int(np.argmin(obj))
        if obj[j] < best_val:
            best_val, best_arg = float(obj[j]), tuple(float(v) for v in vals[j])
    if best_arg is None:
        raise InfeasibleError("no feasible grid point")
    return OracleResult(best_val, band, resolution, int(size), best_arg)


def _batch_density(instance, vals, pairs):
    """Density of many small graphs at once, by summing over all ordered maps."""
    n, H = instance.n, instance.pattern
    w = np.zeros((vals.shape[0], n, n))
    for col, (i, j) in enumerate(pairs):
        w[:, i, j] = vals[:, col]
        w[:, j, i] = vals[:, col]
    total = np.zeros(vals.shape[0])
    for phi in itertools.product(range(n), repeat=H.k):
        term = np.ones(vals.shape[0])
        for u, v in H.edges:
            term = term * w[:, phi[u], phi[v]]
        total += term
    return total / n ** H.k * instance._injective_factor
