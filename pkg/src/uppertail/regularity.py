"""Weak regularity partitions, the reduced triangle sum, and partition event bounds.

The refinement follows the usual energy-increment argument: if some pair
``(S, T)`` has ``|sum_{S x T} (G - G_P)| > eps n^2`` then splitting every
part by membership in ``S`` and ``T`` raises the mean square of ``G_P`` by
more than ``eps^2``, so at most ``1/eps^2`` rounds happen and at most
``4^{1/eps^2}`` parts appear.  Finding the worst pair is NP-hard in
general; it is done exactly for ``n <= 20`` and heuristically above that,
in which case the counting error of the output is checked after the fact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .entropy import clipped_entropy
from .errors import DomainError, ResourceError
from .graphs import WeightedGraph, total_relative_entropy, triangle_density
from .theory import tail_certificate  # noqa: F401  (certificate lives with the other union-bound arithmetic)

EXACT_CUT_MAX_N = 20
MIN_EPSILON = 0.25


@dataclass(frozen=True)
class VertexPartition:
    """Parts (tuples of vertices, ordered by smallest member) and their relative densities."""

    n: int
    parts: tuple
    densities: np.ndarray

    def __post_init__(self):
        seen = sorted(v for part in self.parts for v in part)
        if seen != list(range(self.n)):
            raise DomainError("parts must be disjoint and cover 0..n-1")
        if any(len(part) == 0 for part in self.parts):
            raise DomainError("parts must be nonempty")
        d = np.asarray(self.densities, dtype=float)
        m = len(self.parts)
        if d.shape != (m, m):
            raise DomainError(f"density matrix must be {m}x{m}, got {d.shape}")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "densities", d)

    @property
    def sizes(self):
        return np.array([len(part) for part in self.parts], dtype=float)

    def membership(self):
        out = np.empty(self.n, dtype=int)
        for i, part in enumerate(self.parts):
            out[list(part)] = i
        return out

    def rounded_densities(self, eps):
        """``d'``: every density floored to the grid ``{0, eps, 2 eps, ...}``.

        Quotients within 1e-9 of an integer count as on the grid, so a value
        that is a multiple of ``eps`` up to float error is kept.
        """
        q = self.densities / eps
        r = np.round(q)
        steps = np.where(np.abs(q - r) <= 1e-9, r, np.floor(q))
        return steps * eps

    def to_dict(self):
        return {"membership": self.membership().tolist(), "densities": self.densities.tolist()}

    @classmethod
    def from_dict(cls, data):
        membership = list(data["membership"])
        m = max(membership) + 1 if membership else 0
        parts = [[] for _ in range(m)]
        for v, i in enumerate(membership):
            parts[i].append(v)
        return cls(len(membership), tuple(tuple(p) for p in parts), np.asarray(data["densities"], dtype=float))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _as_matrix(G):
    if isinstance(G, WeightedGraph):
        return G.weights
    return WeightedGraph(np.asarray(G, dtype=float)).weights


def _canonical(parts):
    parts = [tuple(sorted(p)) for p in parts if len(p)]
    parts.sort(key=lambda p: p[0])
    return tuple(parts)


def _densities(w, parts):
    """``d(A, B) = sum_{a in A, b in B} g_ab / (|A| |B|)`` over ordered pairs."""
    m = len(parts)
    member = np.zeros((m, w.shape[0]))
    for i, part in enumerate(parts):
        member[i, list(part)] = 1.0
    sizes = member.sum(axis=1)
    sums = member @ w @ member.T
    d = sums / np.outer(sizes, sizes)
    d = 0.5 * (d + d.T)
    return np.clip(d, 0.0, 1.0)


def partition_of(G, parts):
    """Build a :class:`VertexPartition` of ``G`` with its relative densities."""
    w = _as_matrix(G)
    parts = _canonical(parts)
    return VertexPartition(w.shape[0], parts, _densities(w, parts))


def _average(w, parts, d):
    member = np.empty(w.shape[0], dtype=int)
    for i, part in enumerate(parts):
        member[list(part)] = i
    return d[np.ix_(member, member)]


def _best_given_rows(D, s):
    cols = s @ D
    pos, neg = cols > 0, cols < 0
    vp, vn = cols[pos].sum(), -cols[neg].sum()
    return (vp, pos.astype(float)) if vp >= vn else (vn, neg.astype(float))


def _exact_cut(D):
    """Exact ``max_{S,T} |sum_{S x T} D|`` by enumerating ``S`` (``T`` is then optimal greedily)."""
    n = D.shape[0]
    best, best_pair = 0.0, (np.zeros(n), np.zeros(n))
    bits = np.arange(n)
    chunk = 1 << min(n, 16)
    for start in range(0, 1 << n, chunk):
        masks = np.arange(start, min(start + chunk, 1 << n))
        S = ((masks[:, None] >> bits) & 1).astype(float)
        cols = S @ D
        vp = np.where(cols > 0, cols, 0.0).sum(axis=1)
        vn = -np.where(cols < 0, cols, 0.0).sum(axis=1)
        val = np.maximum(vp, vn)
        i = int(np.argmax(val))
        if val[i] > best:
            best = float(val[i])
            s = S[i]
            _, t = _best_given_rows(D, s)
            best_pair = (s, t)
    return best, best_pair


def _heuristic_cut(D, rng):
    """Sign vectors of the top singular pair and random starts, polished by alternating updates."""
    n = D.shape[0]
    starts = []
    u, _, vt = np.linalg.svd(D)
    for vec in (u[:, 0], vt[0]):
        starts.append((vec > 0).astype(float))
        starts.append((vec < 0).astype(float))
    for _ in range(4):
        starts.append((rng.random(n) < 0.5).astype(float))
    best, best_pair = 0.0, (np.zeros(n), np.zeros(n))
    for s in starts:
        value = -1.0
        for _ in range(50):
            v1, t = _best_given_rows(D, s)
            v2, s = _best_given_rows(D.T, t)
            if v2 <= value + 1e-12:
                break
            value = v2
        _, t = _best_given_rows(D, s)
        val = abs(float(s @ D @ t))
        if val > best:
            best, best_pair = val, (s, t)
    return best, best_pair


def max_cut_deviation(G, P, exact=None, seed=0):
    """``max_{S,T} |sum_{S x T} (G - G_P)|`` (exact for ``n <= 20`` unless told otherwise) and the witness."""
    w = _as_matrix(G)
    D = w - _average(w, P.parts, P.densities)
    if exact is None:
        exact = w.shape[0] <= EXACT_CUT_MAX_N
    if exact:
        if w.shape[0] > 24:
            raise ResourceError("exact cut search is limited to n <= 24")
        return _exact_cut(D)
    return _heuristic_cut(D, np.random.default_rng(seed))


def part_bound(eps):
    """``4^{1/eps^2}`` (as a float; may be astronomically large)."""
    return 4.0 ** (1.0 / (eps * eps))


def weak_regular_partition(G, eps, min_epsilon=MIN_EPSILON, seed=0):
    """Frieze-Kannan refinement until no pair deviates by more than ``eps n^2``."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    if eps < min_epsilon:
        raise DomainError(f"eps={eps} below the budgeted minimum {min_epsilon}")
    w = _as_matrix(G)
    n = w.shape[0]
    cap = part_bound(eps)
    rounds = math.ceil(1.0 / (eps * eps))
    parts = (tuple(range(n)),)
    P = VertexPartition(n, parts, _densities(w, parts))
    for _ in range(rounds + 1):
        value, (s, t) = max_cut_deviation(w, P, seed=seed)
        if value <= eps * n * n:
            return P
        new_parts = []
        for part in P.parts:
            for a in (True, False):
                for b in (True, False):
                    piece = [v for v in part if (s[v] > 0) == a and (t[v] > 0) == b]
                    if piece:
                        new_parts.append(piece)
        if len(new_parts) > cap:
            raise ResourceError(f"part count {len(new_parts)} would exceed 4^(1/eps^2) = {cap:.3g}")
        parts = _canonical(new_parts)
        P = VertexPartition(n, parts, _densities(w, parts))
    raise ResourceError(f"no convergence within {rounds} refinement rounds")


def reduced_triangle_sum(P, densities=None):
    """``n^-3 sum_{i,j,k} |A_i||A_j||A_k| d_ij d_ik d_jk``."""
    d = P.densities if densities is None else np.asarray(densities, dtype=float)
    b = d * P.sizes[None, :]
    return float(np.trace(b @ b @ b)) / P.n ** 3


def reduced_density_error(G, P):
    """``|t(G) - reduced triangle sum|``; exactly 0 for the discrete partition."""
    if isinstance(G, WeightedGraph):
        graph = G
    else:
        graph = WeightedGraph(np.asarray(G, dtype=float))
    if graph.n != P.n:
        raise DomainError("partition and graph sizes differ")
    return abs(triangle_density(graph) - reduced_triangle_sum(P))


@dataclass(frozen=True)
class EventBound:
    """Log-probability bound ``-I_p^>(A, d)`` and the blow-up graph it equals."""

    exponent: float
    blowup_entropy: float
    blowup_triangle_density: float
    consistent: bool

    def to_dict(self):
        return dict(self.__dict__)


def blowup_graph(P, d_target, p):
    """Weighted graph with ``g_uv = max(d_ij, p)`` for ``u in A_i, v in A_j``."""
    d = np.maximum(np.asarray(d_target, dtype=float), p)
    member = P.membership()
    w = d[np.ix_(member, member)]
    np.fill_diagonal(w, 0.0)
    return WeightedGraph(w)


def partition_event_bound(P, d_target, p, n=None):
    """Exponent ``-(sum_{i<j} |A_i||A_j| I^>(d_ij) + sum_i C(|A_i|, 2) I^>(d_ii))``."""
    d = np.asarray(d_target, dtype=float)
    m = len(P.parts)
    if d.shape != (m, m):
        raise DomainError(f"target matrix must be {m}x{m}, got {d.shape}")
    if n is not None and n != P.n:
        raise DomainError(f"n={n} does not match partition size {P.n}")
    if np.any(d < 0.0) or np.any(d > 1.0) or not np.array_equal(d, d.T):
        raise DomainError("targets must be a symmetric matrix with entries in [0, 1]")
    sizes = P.sizes
    ent = clipped_entropy(d, p)
    pairs = np.outer(sizes, sizes)
    iu = np.triu_indices(m, 1)
    total = float(np.sum(pairs[iu] * ent[iu]) + np.sum(sizes * (sizes - 1) / 2.0 * np.diag(ent)))
    G = blowup_graph(P, d, p)
    blow = total_relative_entropy(G, p)
    return EventBound(
        exponent=-total,
        blowup_entropy=blow,
        blowup_triangle_density=triangle_density(G),
        consistent=abs(blow - total) <= 1e-9 * max(1.0, total),
    )
