"""Subgraph patterns, bounded-degree spanning subgraphs, and density slacks."""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from functools import lru_cache

from .errors import DomainError, PreconditionError, ResourceError
from .graphs import graphon_hom_density, graphon_moment, graphon_triangle_density

EXHAUSTIVE_MAX_K = 8


@dataclass(frozen=True)
class SubgraphPattern:
    """Simple graph on vertices ``0..k-1`` with a sorted tuple of edges ``(u, v)``, ``u < v``."""

    k: int
    edges: tuple

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"vertex count must be a positive integer, got {self.k!r}")
        norm = set()
        for e in self.edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise DomainError(f"loop at vertex {u}")
            if not (0 <= u < self.k and 0 <= v < self.k):
                raise DomainError(f"edge {e} outside vertex range 0..{self.k - 1}")
            pair = (min(u, v), max(u, v))
            if pair in norm:
                raise DomainError(f"duplicate edge {pair}")
            norm.add(pair)
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @property
    def num_edges(self):
        return len(self.edges)

    def degrees(self):
        deg = [0] * self.k
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    @property
    def max_degree(self):
        return max(self.degrees(), default=0)

    def is_subgraph_of(self, other):
        return self.k == other.k and set(self.edges) <= set(other.edges)

    def is_complete(self):
        return self.num_edges == self.k * (self.k - 1) // 2

    def is_spanning_star(self):
        return self.k >= 2 and self.num_edges == self.k - 1 and self.max_degree == self.k - 1

    def to_dict(self):
        return {"k": self.k, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["k"]), tuple(tuple(e) for e in data["edges"]))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def pattern_catalog(name, size):
    """Named patterns: ``clique`` K_size, ``star`` K_{1,size-1} centred at 0,
    ``cycle`` C_size, ``path`` on ``size`` vertices."""
    size = int(size)
    if name == "clique":
        if size < 2:
            raise DomainError("clique needs at least 2 vertices")
        return SubgraphPattern(size, tuple(itertools.combinations(range(size), 2)))
    if name == "star":
        if size < 2:
            raise DomainError("star needs at least 2 vertices")
        return SubgraphPattern(size, tuple((0, v) for v in range(1, size)))
    if name == "cycle":
        if size < 3:
            raise DomainError("cycle needs at least 3 vertices")
        return SubgraphPattern(size, tuple((v, (v + 1) % size) for v in range(size)))
    if name == "path":
        if size < 2:
            raise DomainError("path needs at least 2 vertices")
        return SubgraphPattern(size, tuple((v, v + 1) for v in range(size - 1)))
    raise DomainError(f"unknown pattern family {name!r}")


TRIANGLE = pattern_catalog("clique", 3)

_SHORT = {"K": "clique", "S": "star", "C": "cycle", "P": "path"}


def parse_pattern(text):
    """Parse ``triangle``, ``edge``, ``K4``, ``C5``, ``P4``, ``S4`` or ``clique:4``."""
    text = text.strip()
    if text == "triangle":
        return TRIANGLE
    if text == "edge":
        return pattern_catalog("clique", 2)
    m = re.fullmatch(r"([KSCP])(\d+)", text)
    if m:
        return pattern_catalog(_SHORT[m.group(1)], int(m.group(2)))
    m = re.fullmatch(r"(clique|star|cycle|path):(\d+)", text)
    if m:
        return pattern_catalog(m.group(1), int(m.group(2)))
    raise DomainError(f"cannot parse pattern {text!r}")


# ---------------------------------------------------------------------------
# Bounded-degree spanning subgraphs (edge sets encoded as bitmasks)


class _Tables:
    """Per-``k`` lookup tables for bitmask edge sets."""

    def __init__(self, k):
        self.k = k
        self.pairs = list(itertools.combinations(range(k), 2))
        self.index = {e: i for i, e in enumerate(self.pairs)}
        self.incident = [0] * k
        for i, (u, v) in enumerate(self.pairs):
            self.incident[u] |= 1 << i
            self.incident[v] |= 1 << i
        self._cycles = None

    def mask(self, edges):
        m = 0
        for e in edges:
            m |= 1 << self.index[e]
        return m

    def edges(self, mask):
        return tuple(e for i, e in enumerate(self.pairs) if mask >> i & 1)

    def degrees(self, mask):
        return [(mask & inc).bit_count() for inc in self.incident]

    def touching(self, vertices):
        m = 0
        for v in vertices:
            m |= self.incident[v]
        return m

    @property
    def cycles(self):
        """All cycles of K_k as ``(length, mask, vertices)``, longest first."""
        if self._cycles is None:
            out = []
            for length in range(self.k, 2, -1):
                for combo in itertools.combinations(range(self.k), length):
                    first, rest = combo[0], combo[1:]
                    for perm in itertools.permutations(rest):
                        if perm[0] > perm[-1]:
                            continue
                        cyc = (first,) + perm
                        m = 0
                        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                            m |= 1 << self.index[(min(a, b), max(a, b))]
                        out.append((length, m, cyc))
            out.sort(key=lambda c: (-c[0], self.edges(c[1])))
            self._cycles = out
        return self._cycles


@lru_cache(maxsize=None)
def _tables(k):
    return _Tables(k)


def _is_acyclic(k, edges):
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def _longest_cycle_dfs(k, adj):
    """Longest cycle by DFS from each start (smallest vertex on the cycle)."""
    best = ()

    def extend(path, on_path):
        nonlocal best
        last = path[-1]
        for w in adj[last]:
            if w == path[0] and len(path) >= 3 and len(path) > len(best):
                best = tuple(path)
            if w > path[0] and w not in on_path:
                path.append(w)
                on_path.add(w)
                extend(path, on_path)
                on_path.discard(w)
                path.pop()

    for s in range(k):
        extend([s], {s})
        if len(best) == k:
            break
    return best


def _longest_cycle(tab, mask):
    if tab.k <= EXHAUSTIVE_MAX_K:
        for length, cmask, verts in tab.cycles:
            if cmask & ~mask == 0:
                return cmask, verts
        return 0, ()
    adj = {v: set() for v in range(tab.k)}
    for u, v in tab.edges(mask):
        adj[u].add(v)
        adj[v].add(u)
    adj = {v: sorted(ws) for v, ws in adj.items()}
    verts = _longest_cycle_dfs(tab.k, adj)
    cmask = 0
    for a, b in zip(verts, verts[1:] + verts[:1]):
        cmask |= 1 << tab.index[(min(a, b), max(a, b))]
    return cmask, verts


def _construct(tab, mask):
    """Longest-cycle recipe; returns a Delta <= 2 submask (may be suboptimal)."""
    k = tab.k
    e = mask.bit_count()
    if e == 0:
        return 0
    deg = tab.degrees(mask)
    if max(deg) <= 2:
        return mask
    edges = tab.edges(mask)
    if _is_acyclic(k, edges):
        v = deg.index(max(deg))
        at_v = [i for i in range(len(tab.pairs)) if mask >> i & 1 and tab.incident[v] >> i & 1]
        sub = (1 << at_v[0]) | (1 << at_v[1])
        if 2 * (k - 1) > 2 * e:
            return sub
        away = mask & ~tab.incident[v]
        if away == 0:
            return sub
        return sub | (away & -away)
    cmask, verts = _longest_cycle(tab, mask)
    if len(verts) == k:
        return cmask
    boundary = mask & tab.touching(verts)
    if e <= boundary.bit_count():
        return cmask
    return cmask | _construct(tab, mask & ~boundary)


@lru_cache(maxsize=None)
def _bounded_degree_masks(k):
    """Every Delta <= 2 edge set of K_k, ordered by (-edges, lexicographic edge list)."""
    tab = _tables(k)
    m_total = len(tab.pairs)
    found = []

    def rec(i, mask, deg):
        if i == m_total:
            found.append(mask)
            return
        rec(i + 1, mask, deg)
        u, v = tab.pairs[i]
        if deg[u] < 2 and deg[v] < 2:
            deg[u] += 1
            deg[v] += 1
            rec(i + 1, mask | (1 << i), deg)
            deg[u] -= 1
            deg[v] -= 1

    rec(0, 0, [0] * k)
    found.sort(key=lambda m: (-m.bit_count(), tab.edges(m)))
    return found


def _exhaustive(tab, mask):
    for cand in _bounded_degree_masks(tab.k):
        if cand & ~mask == 0:
            return cand
    return 0


def _qualifies(tab, mask, sub):
    k = tab.k
    return (
        sub & ~mask == 0
        and max(tab.degrees(sub)) <= 2
        and sub.bit_count() * (k - 1) > 2 * mask.bit_count()
    )


def spanning_bounded_degree(H, method="auto"):
    """Spanning subgraph ``H'`` of ``H`` with max degree <= 2 and ``e(H') > 2 e(H)/(k-1)``.

    Requires ``k >= 4``, at least one edge, and ``H`` neither complete nor a
    spanning star (the bound fails for exactly those).  The longest-cycle
    recipe runs first; if its output does not qualify, an exhaustive search
    (``k <= 8``) returns the largest qualifying edge set, ties broken by
    lexicographic edge list.  ``method="exhaustive"`` skips the recipe.
    """
    k = H.k
    if k < 4:
        raise PreconditionError("bounded-degree spanning subgraph needs k >= 4")
    if H.num_edges == 0:
        raise PreconditionError("pattern has no edges")
    if H.is_complete():
        raise PreconditionError("complete graphs admit no such subgraph")
    if H.is_spanning_star():
        raise PreconditionError("spanning stars admit no such subgraph")
    tab = _tables(k)
    mask = tab.mask(H.edges)
    if method not in ("auto", "exhaustive"):
        raise DomainError(f"unknown method {method!r}")
    if method == "auto":
        sub = _construct(tab, mask)
        if _qualifies(tab, mask, sub):
            return SubgraphPattern(k, tab.edges(sub))
    if k > EXHAUSTIVE_MAX_K:
        raise ResourceError("constructive search exhausted and k is too large for exhaustive search")
    sub = _exhaustive(tab, mask)
    if not _qualifies(tab, mask, sub):
        raise ResourceError("no qualifying bounded-degree spanning subgraph found")
    return SubgraphPattern(k, tab.edges(sub))


# ---------------------------------------------------------------------------
# Inequality slacks on step graphons


def cauchy_schwarz_slack(U):
    """``(E U^2)^{3/2} - t(U)``; nonnegative for every graphon."""
    return graphon_moment(U, 2) ** 1.5 - graphon_triangle_density(U)


def holder_slack(F, U, d):
    """``E[U^d]^{e(F)/d} - t(F, U)``; nonnegative whenever ``Delta(F) <= d``."""
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d!r}")
    if F.max_degree > d:
        raise PreconditionError(f"max degree {F.max_degree} exceeds d={d}")
    return graphon_moment(U, d) ** (F.num_edges / d) - graphon_hom_density(F, U)
