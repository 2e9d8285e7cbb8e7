"""Sampling ``G(n, p)`` and estimating upper-tail probabilities, plainly or with tilted edge laws.

Random streams come from a counter-based generator (Philox) keyed by
``(seed, stream)``, so any batch can be regenerated on its own.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError
from .graphs import WeightedGraph
from .patterns import TRIANGLE

BATCH = 4096


def _rng(seed, stream=0):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def _check(n, p):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")


def _symmetric(n, upper):
    iu = np.triu_indices(n, 1)
    w = np.zeros(upper.shape[:-1] + (n, n))
    w[..., iu[0], iu[1]] = upper
    w[..., iu[1], iu[0]] = upper
    return w


def sample_gnp(n, p, seed=0):
    """One ``G(n, p)`` sample as a 0/1 weighted graph."""
    _check(n, p)
    m = n * (n - 1) // 2
    x = (_rng(seed).random(m) < p).astype(float)
    return WeightedGraph(_symmetric(n, x))


def _batch_density(pattern, w):
    """``t(H, G)`` for a stack of adjacency matrices."""
    n = w.shape[-1]
    if pattern == TRIANGLE:
        return np.einsum("bij,bjk,bki->b", w, w, w, optimize=True) / n ** 3
    letters = "abcdefghijklmnopqrstuvwxyz"
    terms = [f"z{letters[u]}{letters[v]}" for u, v in pattern.edges]
    spec = ",".join(terms) + "->z"
    total = np.einsum(spec, *([w] * pattern.num_edges), optimize=True)
    return total / n ** pattern.k


def _threshold(p, delta, pattern):
    return (1.0 + delta) * p ** pattern.num_edges


@dataclass(frozen=True)
class TailEstimate:
    """Estimate of ``P(t(H, G(n,p)) >= (1 + delta) p^{e(H)})`` with a 95% interval."""

    estimate: float
    ci_low: float
    ci_high: float
    trials: int
    hits: int
    standard_error: float
    certain: bool = False
    impossible: bool = False
    log_estimate: float = -math.inf

    def to_dict(self):
        return dict(self.__dict__)

    def csv_row(self, n, p, delta, seed):
        return [n, repr(p), repr(delta), self.trials, repr(self.estimate), repr(self.ci_low), repr(self.ci_high), seed]


CSV_HEADER = ["n", "p", "delta", "trials", "estimate", "ci_lo", "ci_hi", "seed"]


def naive_tail_estimate(n, p, delta, pattern=TRIANGLE, trials=10000, seed=0):
    """Hit frequency with a Clopper-Pearson interval (rule of three when nothing hits)."""
    _check(n, p)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    thr = _threshold(p, delta, pattern)
    if thr <= 0.0:
        return TailEstimate(1.0, 1.0, 1.0, trials, trials, 0.0, certain=True, log_estimate=0.0)
    if thr > 1.0:
        return TailEstimate(0.0, 0.0, 0.0, trials, 0, 0.0, impossible=True)
    m = n * (n - 1) // 2
    hits = 0
    for b, start in enumerate(range(0, trials, BATCH)):
        size = min(BATCH, trials - start)
        x = (_rng(seed, b).random((size, m)) < p).astype(float)
        t = _batch_density(pattern, _symmetric(n, x))
        hits += int(np.count_nonzero(t >= thr))
    est = hits / trials
    if hits == 0:
        lo, hi = 0.0, min(1.0, 3.0 / trials)
    else:
        ci = stats.binomtest(hits, trials).proportion_ci(0.95, method="exact")
        lo, hi = float(ci.low), float(ci.high)
    se = math.sqrt(est * (1.0 - est) / trials)
    return TailEstimate(est, lo, hi, trials, hits, se, log_estimate=math.log(est) if est > 0 else -math.inf)


@dataclass(frozen=True)
class TiltSpec:
    """Per-pair sampling probabilities ``q_ij`` (symmetric, zero diagonal)."""

    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise DomainError("tilt must be a square matrix")
        if not np.array_equal(q, q.T):
            raise DomainError("tilt must be symmetric")
        off = q[~np.eye(q.shape[0], dtype=bool)]
        if np.any(off < 0.0) or np.any(off > 1.0):
            raise DomainError("tilt probabilities must lie in [0, 1]")
        np.fill_diagonal(q, 0.0)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def n(self):
        return self.q.shape[0]

    @classmethod
    def no_op(cls, n, p):
        q = np.full((n, n), float(p))
        np.fill_diagonal(q, 0.0)
        return cls(q)

    @classmethod
    def uniform(cls, n, q):
        return cls.no_op(n, q)

    @classmethod
    def planted_clique(cls, n, p, a):
        """Probability 1 inside the first ``a`` vertices, ``p`` elsewhere."""
        q = np.full((n, n), float(p))
        q[:a, :a] = 1.0
        np.fill_diagonal(q, 0.0)
        return cls(q)

    @classmethod
    def planted_hub(cls, n, p, a):
        q = np.full((n, n), float(p))
        q[:a, :] = 1.0
        q[:, :a] = 1.0
        np.fill_diagonal(q, 0.0)
        return cls(q)

    @classmethod
    def from_graph(cls, G, floor=None):
        """Use a weighted graph (e.g. a solver minimiser) as the edge law, optionally floored."""
        q = np.array(G.weights, dtype=float)
        if floor is not None:
            q = np.maximum(q, floor)
            np.fill_diagonal(q, 0.0)
        return cls(q)

    def to_dict(self):
        return {"q": self.q.tolist()}


def _log_weight_tables(p, q):
    """Per-pair log likelihood ratios for presence and absence (``-inf`` where ``p`` gives no mass)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        present = np.where(q > 0.0, np.log(p) - np.log(q), 0.0) if p > 0 else np.where(q > 0.0, -np.inf, 0.0)
        absent = np.where(q < 1.0, math.log1p(-p) - np.log1p(-q), 0.0) if p < 1 else np.where(q < 1.0, -np.inf, 0.0)
    return present, absent


def tilted_tail_estimate(n, p, delta, pattern=TRIANGLE, tilt=None, trials=10000, seed=0):
    """Importance-sampling estimate: sample from ``q``, average ``w(x) 1{t >= thr}``.

    ``log w(x) = sum x log(p/q) + (1-x) log((1-p)/(1-q))``.  Weights are
    combined in log space: the mean is ``exp(L) * fsum(exp(log w - L))``
    with ``L`` the largest log weight among hits.
    """
    _check(n, p)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if tilt is None:
        tilt = TiltSpec.no_op(n, p)
    if tilt.n != n:
        raise DomainError(f"tilt is for n={tilt.n}, not n={n}")
    iu = np.triu_indices(n, 1)
    q = tilt.q[iu]
    if p > 0 and np.any(q <= 0.0):
        raise DomainError("tilt must give positive probability wherever p does")
    thr = _threshold(p, delta, pattern)
    if thr <= 0.0:
        return TailEstimate(1.0, 1.0, 1.0, trials, trials, 0.0, certain=True, log_estimate=0.0)
    if thr > 1.0:
        return TailEstimate(0.0, 0.0, 0.0, trials, 0, 0.0, impossible=True)
    present, absent = _log_weight_tables(p, q)
    m = q.size
    log_w = []
    hits = 0
    for b, start in enumerate(range(0, trials, BATCH)):
        size = min(BATCH, trials - start)
        x = _rng(seed, b).random((size, m)) < q
        t = _batch_density(pattern, _symmetric(n, x.astype(float)))
        hit = t >= thr
        hits += int(np.count_nonzero(hit))
        xs = x[hit]
        if xs.size:
            lw = np.where(xs, present, absent).sum(axis=1)
            log_w.append(lw)
    if hits == 0:
        return TailEstimate(0.0, 0.0, 0.0, trials, 0, 0.0)
    lw = np.concatenate(log_w)
    top = float(np.max(lw))
    if not np.isfinite(top):
        return TailEstimate(0.0, 0.0, 0.0, trials, hits, 0.0)
    scaled = np.exp(lw - top)
    s1 = math.fsum(scaled.tolist())
    s2 = math.fsum((scaled * scaled).tolist())
    mean_scaled = s1 / trials
    var_scaled = max(s2 / trials - mean_scaled * mean_scaled, 0.0) * trials / max(trials - 1, 1)
    scale = math.exp(top) if top < 709 else math.inf
    est = mean_scaled * scale
    se = math.sqrt(var_scaled / trials) * scale
    z = stats.norm.ppf(0.975)
    return TailEstimate(
        estimate=est,
        ci_low=float(max(0.0, est - z * se)),
        ci_high=float(est + z * se),
        trials=trials,
        hits=hits,
        standard_error=se,
        log_estimate=top + math.log(mean_scaled),
    )


def variance_reduction(naive, tilted):
    """``Var(naive indicator) / Var(tilted weight)`` per sample (``inf`` if the tilted variance is 0)."""
    var_naive = naive.estimate * (1.0 - naive.estimate)
    var_tilted = tilted.standard_error ** 2 * tilted.trials
    if var_tilted == 0.0:
        return math.inf
    return var_naive / var_tilted


def exact_tail_probability(n, p, delta, pattern=TRIANGLE):
    """``P(t(H, G(n,p)) >= threshold)`` by enumerating all ``2^C(n,2)`` graphs (``n <= 5``)."""
    _check(n, p)
    if n > 5:
        raise DomainError("exact enumeration is limited to n <= 5")
    m = n * (n - 1) // 2
    thr = _threshold(p, delta, pattern)
    x = np.array(list(itertools.product((0.0, 1.0), repeat=m))).reshape(-1, m)
    t = _batch_density(pattern, _symmetric(n, x))
    k = x.sum(axis=1)
    prob = p ** k * (1.0 - p) ** (m - k)
    return math.fsum(prob[t >= thr].tolist())


@dataclass(frozen=True)
class RateComparison:
    ratio_to_phi: float
    normalized_log: float
    degenerate: bool

    def to_dict(self):
        return dict(self.__dict__)


def rate_comparison(n, p, delta, estimate, phi_estimate, log_estimate=None):
    """``-log(estimate) / phi`` and ``-log(estimate) / (n^2 p^2 log(1/p))``, side by side."""
    if log_estimate is None:
        if not estimate > 0.0:
            raise DomainError("estimate must be positive")
        log_estimate = math.log(estimate)
    if not phi_estimate > 0.0:
        raise DomainError("phi_estimate must be positive")
    neg = -log_estimate
    scale = n * n * p * p * math.log(1.0 / p)
    degenerate = neg == 0.0
    return RateComparison(ratio_to_phi=neg / phi_estimate + 0.0, normalized_log=neg / scale + 0.0, degenerate=degenerate)
