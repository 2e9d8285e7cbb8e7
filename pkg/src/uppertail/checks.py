"""Randomised and exhaustive numerical suites for the exact identities and inequalities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import graphs
from .entropy import (
    binomial_tail_bound,
    chord_lower_bound,
    chord_upper_limit,
    quadratic_lower_bound,
    relative_entropy,
)
from .patterns import cauchy_schwarz_slack, holder_slack, pattern_catalog


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: int
    total: int
    worst: float

    @property
    def ok(self):
        return self.passed == self.total

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "total": self.total, "worst": self.worst, "ok": self.ok}


def random_weighted_graph(rng, n, low=0.0, high=1.0):
    w = rng.uniform(low, high, size=(n, n))
    w = np.triu(w, 1)
    return graphs.WeightedGraph(w + w.T)


def random_step_graphon(rng, max_blocks=6, low=0.0, high=1.0):
    m = int(rng.integers(1, max_blocks + 1))
    measures = rng.dirichlet(np.ones(m))
    measures[-1] = 1.0 - measures[:-1].sum()
    if measures[-1] <= 0.0:
        measures = np.full(m, 1.0 / m)
    v = rng.uniform(low, high, size=(m, m))
    v = np.triu(v) + np.triu(v, 1).T
    return graphs.StepGraphon(measures, v)


def entropy_bound_suite(ps=(1e-2, 1e-3, 1e-4), points=2001):
    """Chord and quadratic lower bounds never exceed ``I_p(p + x)`` on dense grids."""
    passed = total = 0
    worst = -math.inf
    for p in ps:
        xs = np.linspace(0.0, 1.0 - p, points)
        exact = relative_entropy(np.minimum(p + xs, 1.0), p)
        quad = np.array([quadratic_lower_bound(x, p) for x in xs])
        excess = quad - exact
        worst = max(worst, float(excess.max()))
        passed += int(np.count_nonzero(excess <= 1e-12 * np.maximum(1.0, exact)))
        total += xs.size
        limit = chord_upper_limit(p)
        for b in np.linspace(0.0, limit, 41)[1:]:
            xb = np.linspace(0.0, b, 101)
            ex = relative_entropy(p + xb, p)
            ch = np.array([chord_lower_bound(x, b, p) for x in xb])
            excess = ch - ex
            worst = max(worst, float(excess.max()))
            passed += int(np.count_nonzero(excess <= 1e-12 * np.maximum(1.0, ex)))
            total += xb.size
    return SuiteResult("entropy_bounds", passed, total, worst)


def cauchy_schwarz_suite(samples=200, seed=0):
    rng = np.random.default_rng(seed)
    slacks = [cauchy_schwarz_slack(random_step_graphon(rng)) for _ in range(samples)]
    return SuiteResult("cauchy_schwarz", sum(s >= -1e-12 for s in slacks), samples, float(min(slacks)))


def holder_suite(samples=200, seed=0):
    """Generalised Hoelder slack for random patterns of max degree at most ``d``."""
    rng = np.random.default_rng(seed)
    family = [
        (pattern_catalog("clique", 3), 2),
        (pattern_catalog("cycle", 4), 2),
        (pattern_catalog("path", 4), 2),
        (pattern_catalog("clique", 4), 3),
        (pattern_catalog("star", 4), 3),
        (pattern_catalog("cycle", 5), 3),
    ]
    slacks = []
    for i in range(samples):
        F, d = family[i % len(family)]
        slacks.append(holder_slack(F, random_step_graphon(rng), d))
    return SuiteResult("holder", sum(s >= -1e-12 for s in slacks), samples, float(min(slacks)))


def chernoff_suite(max_N=25, ps=(0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9)):
    """``P(Bin(N, p) >= j) <= exp(-N I_p^>(j/N))`` for every ``N <= max_N`` and ``j``."""
    passed = total = 0
    worst = -math.inf
    for N in range(1, max_N + 1):
        for p in ps:
            for j in range(N + 1):
                exact = float(stats.binom.sf(j - 1, N, p))
                bound = math.exp(binomial_tail_bound(N, p, j / N))
                gap = exact - bound
                worst = max(worst, gap)
                passed += gap <= 1e-12 * max(bound, 1e-300)
                total += 1
    return SuiteResult("chernoff", passed, total, worst)


def embedding_suite(samples=50, max_n=20, seed=0, p=0.1):
    """``t(W^G) = t(G)`` and ``E[I_p(W^G)]/2 = I_p(G)/n^2 + I_p(0)/(2n)``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    passed = 0
    i0 = relative_entropy(0.0, p)
    for _ in range(samples):
        n = int(rng.integers(1, max_n + 1))
        G = random_weighted_graph(rng, n)
        W = graphs.embed_step_graphon(G)
        e1 = abs(graphs.graphon_triangle_density(W) - graphs.triangle_density(G))
        lhs = 0.5 * graphs.graphon_entropy_mean(W, p)
        rhs = graphs.total_relative_entropy(G, p) / n ** 2 + i0 / (2 * n)
        e2 = abs(lhs - rhs)
        worst = max(worst, e1, e2)
        passed += e1 <= 1e-12 and e2 <= 1e-12
    return SuiteResult("embedding", passed, samples, worst)


def decomposition_suite(samples=200, seed=0):
    """``t(p + U) - p^3 = t(U) + 3p s(U) + 3p^2 E U`` on random step graphons."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    passed = 0
    for _ in range(samples):
        p = float(rng.uniform(0.01, 0.9))
        W = random_step_graphon(rng, low=p, high=1.0)
        dec = graphs.decompose_excess(W, p)
        lhs = graphs.graphon_triangle_density(W) - p ** 3
        rhs = p ** 3 * dec.total
        err = abs(lhs - rhs)
        worst = max(worst, err)
        passed += err <= 1e-12
    return SuiteResult("decomposition", passed, samples, worst)


SUITES = {
    "entropy_bounds": entropy_bound_suite,
    "cauchy_schwarz": cauchy_schwarz_suite,
    "holder": holder_suite,
    "chernoff": chernoff_suite,
    "embedding": embedding_suite,
    "decomposition": decomposition_suite,
}


def run_all(seed=0):
    out = []
    for name, fn in SUITES.items():
        if "seed" in fn.__code__.co_varnames:
            out.append(fn(seed=seed))
        else:
            out.append(fn())
    return out
