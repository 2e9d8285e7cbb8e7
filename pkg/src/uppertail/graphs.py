"""Weighted graphs, step graphons, and the densities evaluated on them.

Densities are labeled (ordered-map) densities: ``t(H, G)`` averages the
edge-weight product over all ``n**k`` maps ``V(H) -> V(G)``.  The zero
diagonal of a weighted graph kills every non-injective map, so only the
normalisation differs from an injective count.
"""

from __future__ import annotations

import json
import math
import string
from dataclasses import dataclass, field

import numpy as np

from .entropy import relative_entropy
from .errors import DomainError, ResourceError

MAX_PATTERN_VERTICES = 8
CONTRACTION_BUDGET = 1e9
MEASURE_TOL = 1e-12


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Symmetric ``n x n`` edge-weight matrix with entries in [0, 1], zero diagonal."""

    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DomainError(f"weights must be a square matrix, got shape {w.shape}")
        if np.any(np.isnan(w)) or np.any(w < 0.0) or np.any(w > 1.0):
            raise DomainError("edge weights must lie in [0, 1]")
        if not np.array_equal(w, w.T):
            raise DomainError("weight matrix must be symmetric")
        if np.any(np.diag(w) != 0.0):
            raise DomainError("weight matrix must have zero diagonal")
        object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.weights.shape[0]

    @classmethod
    def from_upper(cls, n, values):
        """Build from the row-major upper triangle (``i < j``)."""
        values = np.asarray(values, dtype=float)
        if values.shape != (n * (n - 1) // 2,):
            raise DomainError(f"expected {n * (n - 1) // 2} upper-triangle weights, got {values.shape}")
        w = np.zeros((n, n))
        iu = np.triu_indices(n, 1)
        w[iu] = values
        w[(iu[1], iu[0])] = values
        return cls(w)

    @classmethod
    def constant(cls, n, value):
        w = np.full((n, n), float(value))
        np.fill_diagonal(w, 0.0)
        return cls(w)

    def upper(self):
        return self.weights[np.triu_indices(self.n, 1)].copy()

    def to_dict(self):
        return {"n": self.n, "upper": [float(v) for v in self.upper()]}

    @classmethod
    def from_dict(cls, data):
        return cls.from_upper(int(data["n"]), data["upper"])

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        return isinstance(other, WeightedGraph) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())


@dataclass(frozen=True, eq=False)
class StepGraphon:
    """Graphon constant on the blocks of a finite partition of [0, 1]."""

    measures: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        m = _frozen(self.measures)
        v = _frozen(self.values)
        if m.ndim != 1 or m.size == 0:
            raise DomainError("block measures must be a nonempty vector")
        if np.any(m <= 0.0):
            raise DomainError("block measures must be positive")
        if abs(m.sum() - 1.0) > MEASURE_TOL:
            raise DomainError(f"block measures must sum to 1, got {m.sum()!r}")
        if v.shape != (m.size, m.size):
            raise DomainError(f"value matrix must be {m.size}x{m.size}, got {v.shape}")
        if np.any(np.isnan(v)) or np.any(v < 0.0) or np.any(v > 1.0):
            raise DomainError("block values must lie in [0, 1]")
        if not np.array_equal(v, v.T):
            raise DomainError("block value matrix must be symmetric")
        object.__setattr__(self, "measures", m)
        object.__setattr__(self, "values", v)

    @property
    def blocks(self):
        return self.measures.size

    @classmethod
    def constant(cls, value):
        return cls([1.0], [[float(value)]])

    def shifted(self, p):
        """Return ``U = W - p`` (requires ``W >= p`` blockwise)."""
        if np.any(self.values < p):
            raise DomainError("W - p is negative on some block")
        return StepGraphon(self.measures, self.values - p)

    def to_dict(self):
        return {
            "measures": [float(x) for x in self.measures],
            "values": [[float(x) for x in row] for row in self.values],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["measures"], data["values"])

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        return (
            isinstance(other, StepGraphon)
            and np.array_equal(self.measures, other.measures)
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.measures.tobytes(), self.values.tobytes()))


@dataclass(frozen=True)
class DensityReport:
    triangle: float
    cherry: float
    mean: float
    entropy_mean: float


@dataclass(frozen=True)
class ExcessDecomposition:
    """Normalised pieces of ``t(p + U) - p^3 = t(U) + 3p s(U) + 3p^2 E U``."""

    delta1: float
    delta2: float
    delta3: float

    @property
    def total(self):
        return self.delta1 + 3.0 * self.delta2 + 3.0 * self.delta3


# ---------------------------------------------------------------------------
# Homomorphism densities by variable elimination


@dataclass
class _Factor:
    scope: tuple
    table: np.ndarray = field(repr=False)


def _elimination_plan(k, edges, keep):
    """Greedy min-scope elimination order; returns (order, max scope size)."""
    adj = {v: set() for v in range(k)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    remaining = [v for v in range(k) if v not in keep]
    order, width = [], 0
    while remaining:
        v = min(remaining, key=lambda x: (len(adj[x]), x))
        nbrs = adj.pop(v)
        width = max(width, len(nbrs) + 1)
        for a in nbrs:
            adj[a].discard(v)
            adj[a] |= nbrs - {a}
        remaining.remove(v)
        order.append(v)
    return order, width


def _contract(k, edges, matrix, vertex_weights, keep=(), budget=CONTRACTION_BUDGET):
    """Sum over maps of the vertex-weighted edge product, keeping ``keep`` open.

    Computes ``sum_x prod_v w[x_v] prod_{uv} M[x_u, x_v]`` with the variables in
    ``keep`` left free (and their vertex weights included).
    """
    if k > MAX_PATTERN_VERTICES:
        raise ResourceError(f"patterns are capped at {MAX_PATTERN_VERTICES} vertices, got {k}")
    n = matrix.shape[0]
    order, width = _elimination_plan(k, edges, set(keep))
    cost = float(n) ** (width + 1) if order else 1.0
    if cost * max(1, len(order)) > budget:
        raise ResourceError(f"contraction cost ~{cost:.3g} exceeds budget {budget:.3g}")

    factors = [_Factor((u, v), matrix) for u, v in edges]
    factors += [_Factor((v,), vertex_weights) for v in range(k)]
    letters = string.ascii_letters

    def multiply(group, out_scope):
        subs = ",".join("".join(letters[v] for v in f.scope) for f in group)
        out = "".join(letters[v] for v in out_scope)
        return np.einsum(f"{subs}->{out}", *[f.table for f in group], optimize=len(group) > 2)

    for v in order:
        group = [f for f in factors if v in f.scope]
        factors = [f for f in factors if v not in f.scope]
        scope = tuple(sorted({u for f in group for u in f.scope} - {v}))
        factors.append(_Factor(scope, multiply(group, scope)))

    keep = tuple(keep)
    scalars = [f for f in factors if not f.scope]
    rest = [f for f in factors if f.scope]
    value = math.prod(float(f.table) for f in scalars) if scalars else 1.0
    if not keep:
        return value
    return value * multiply(rest, keep)


def _direct(k, edges, matrix, vertex_weights):
    letters = string.ascii_letters
    terms = [letters[u] + letters[v] for u, v in edges] + [letters[v] for v in range(k)]
    ops = [matrix] * len(edges) + [vertex_weights] * k
    return float(np.einsum(",".join(terms) + "->", *ops, optimize=False))


def hom_density(H, G, method="auto", budget=CONTRACTION_BUDGET):
    """Labeled homomorphism density ``t(H, G)``.

    Parameters
    ----------
    H : SubgraphPattern
        Pattern with ``k <= 8`` vertices.
    G : WeightedGraph
    method : {"auto", "eliminate", "direct"}
        ``"direct"`` is a plain nested loop over all ``n**k`` maps, allowed
        for ``k <= 5``.  ``"auto"`` contracts along a greedy elimination order.
    """
    weights = np.full(G.n, 1.0 / G.n)
    return _hom(H, G.weights, weights, method, budget)


def _hom(H, matrix, vertex_weights, method, budget):
    k, edges = H.k, list(H.edges)
    if k > MAX_PATTERN_VERTICES:
        raise ResourceError(f"patterns are capped at {MAX_PATTERN_VERTICES} vertices, got {k}")
    if method == "direct":
        if k > 5:
            raise ResourceError("direct enumeration only supported for k <= 5")
        n = matrix.shape[0]
        if float(n) ** k > budget:
            raise ResourceError(f"direct enumeration of {n}^{k} maps exceeds budget")
        return _direct(k, edges, matrix, vertex_weights)
    if method not in ("auto", "eliminate"):
        raise DomainError(f"unknown method {method!r}")
    return float(_contract(k, edges, matrix, vertex_weights, budget=budget))


def hom_density_gradient(H, G, budget=CONTRACTION_BUDGET):
    """Matrix of ``d t(H, G) / d g_ij`` for the symmetric pair variable ``g_ij = g_ji``.

    Each edge ``uv`` of ``H`` contributes the density of ``H - uv`` with
    ``u, v`` pinned to ``(i, j)`` and to ``(j, i)``.  Diagonal is zero.
    """
    n = G.n
    weights = np.full(n, 1.0 / n)
    grad = np.zeros((n, n))
    edges = list(H.edges)
    for idx, (u, v) in enumerate(edges):
        rest = edges[:idx] + edges[idx + 1:]
        pinned = _contract(H.k, rest, G.weights, weights, keep=(u, v), budget=budget)
        grad += pinned + pinned.T
    np.fill_diagonal(grad, 0.0)
    return grad


def triangle_density(G):
    """``t(G) = n^-3 sum_{i,j,k} g_ij g_jk g_ik = trace(G^3) / n^3``."""
    w = G.weights
    return float(np.trace(w @ w @ w)) / G.n ** 3


def injective_triangle_density(G):
    """Triangle density normalised by the ``n(n-1)(n-2)`` injective triples."""
    n = G.n
    if n < 3:
        return 0.0
    return triangle_density(G) * n ** 3 / (n * (n - 1) * (n - 2))


def triangle_density_gradient(G):
    """``d t / d g_ij = 6 n^-3 sum_k g_ik g_jk`` for the pair variable."""
    w = G.weights
    grad = 6.0 * (w @ w) / G.n ** 3
    np.fill_diagonal(grad, 0.0)
    return grad


def cherry_density(G):
    """``s(G) = n^-3 sum_i (sum_j g_ij)^2``."""
    rows = G.weights.sum(axis=1)
    return float(rows @ rows) / G.n ** 3


def total_relative_entropy(G, p):
    """``I_p(G)``: sum of ``I_p(g_ij)`` over unordered pairs ``i < j``."""
    return float(np.sum(relative_entropy(G.upper(), p)))


def embed_step_graphon(G):
    """The ``n``-block step graphon with equal blocks and values ``g_ij``."""
    return StepGraphon(np.full(G.n, 1.0 / G.n), G.weights)


# ---------------------------------------------------------------------------
# Step-graphon functionals (exact block sums)


def graphon_triangle_density(W):
    a = W.values * W.measures[None, :]
    return float(np.trace(a @ a @ a))


def graphon_cherry_density(W):
    degrees = W.values @ W.measures
    return float(W.measures @ (degrees * degrees))


def graphon_mean(W):
    return float(W.measures @ W.values @ W.measures)


def graphon_moment(W, d):
    """``E[W^d]``."""
    return float(W.measures @ (W.values ** d) @ W.measures)


def graphon_entropy_mean(W, p):
    """``E[I_p(W)]``."""
    return float(W.measures @ relative_entropy(W.values, p) @ W.measures)


def graphon_hom_density(H, W, method="auto", budget=CONTRACTION_BUDGET):
    """``t(H, W)`` for a step graphon by block contraction."""
    return _hom(H, W.values, W.measures, method, budget)


def step_graphon_stats(W, p):
    return DensityReport(
        triangle=graphon_triangle_density(W),
        cherry=graphon_cherry_density(W),
        mean=graphon_mean(W),
        entropy_mean=graphon_entropy_mean(W, p),
    )


def decompose_excess(W, p):
    """Split the triangle excess of ``W >= p`` into ``(t(U)/p^3, s(U)/p^2, E U/p)``."""
    U = W.shifted(p)
    return ExcessDecomposition(
        delta1=graphon_triangle_density(U) / p ** 3,
        delta2=graphon_cherry_density(U) / p ** 2,
        delta3=graphon_mean(U) / p,
    )
