"""Closed-form limits, regime classification and union-bound bookkeeping.

Asymptotic "p much smaller than q" statements are turned into finite-n
labels with a margin constant (default 3); anything within the margin of a
threshold is reported as ``boundary`` rather than forced into a side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import quadratic_constant
from .errors import DomainError

DENSE = "dense_side"
SPARSE = "sparse_side"
BOUNDARY = "boundary"
BELOW = "below_validity"
REGIMES = (DENSE, SPARSE, BOUNDARY, BELOW)
DEFAULT_MARGIN = 3.0

_ALIASES = {"dense": DENSE, "sparse": SPARSE}


@dataclass(frozen=True)
class RegimeLabel:
    label: str
    upper_exponent: float
    lower_exponent: float
    margin: float
    upper_threshold: float
    lower_threshold: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class OrderEstimate:
    """``phi_F(n, p, delta)`` is between ``lower`` and ``upper`` times ``n^2 p^Delta log(1/p)``."""

    lower: float
    upper: float
    n_exponent: int
    p_exponent: int
    scale: float
    log_factor: float

    def to_dict(self):
        return dict(self.__dict__)


def _regime_name(regime):
    if isinstance(regime, RegimeLabel):
        return regime.label
    name = _ALIASES.get(regime, regime)
    if name not in REGIMES:
        raise DomainError(f"unknown regime {regime!r}")
    return name


def _check_k(k):
    if int(k) != k or k < 3:
        raise DomainError(f"k must be an integer >= 3, got {k!r}")


def clique_rate(k, delta):
    """``delta^{2/k} / 2``: normalised entropy of the planted clique."""
    return delta ** (2.0 / k) / 2.0


def hub_rate(k, delta):
    """``delta / k``: normalised entropy of the hub."""
    return delta / k


def limit_rate(k, delta, regime):
    """Limit of ``phi_{K_k}(n, p, delta) / (n^2 p^{k-1} log(1/p))``."""
    _check_k(k)
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    name = _regime_name(regime)
    if name == DENSE:
        return min(clique_rate(k, delta), hub_rate(k, delta))
    if name == SPARSE:
        return clique_rate(k, delta)
    raise DomainError(f"no limit is available in regime {name!r}")


def crossover_delta(k):
    """The ``delta`` where ``delta^{2/k}/2 == delta/k``, namely ``(k/2)^{k/(k-2)}``."""
    _check_k(k)
    num, den = k, k - 2
    if num % den == 0:
        return (k / 2.0) ** (num // den)
    return (k / 2.0) ** (num / den)


def regime_classify(n, p, k, margin=DEFAULT_MARGIN):
    """Label ``(n, p)`` relative to ``n^{-1/(k-1)}`` and ``n^{-2/(k-1)}``."""
    _check_k(k)
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    if margin < 1.0:
        raise DomainError("margin must be >= 1")
    upper_exp = 1.0 / (k - 1)
    lower_exp = 2.0 / (k - 1)
    upper = math.exp(-upper_exp * math.log(n))
    lower = math.exp(-lower_exp * math.log(n))
    if p >= margin * upper:
        label = DENSE
    elif p < lower / margin:
        label = BELOW
    elif p < upper / margin:
        label = SPARSE
    else:
        label = BOUNDARY
    return RegimeLabel(label, upper_exp, lower_exp, margin, upper, lower)


def optimal_split(delta):
    """Minimiser of ``d1^{2/3}/2 + d2`` over ``{(delta, 0), (0, delta/3)}``; clique split on ties."""
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    if delta >= crossover_delta(3):
        return (float(delta), 0.0)
    return (0.0, delta / 3.0)


def phi_prime_limit(delta1, delta2):
    """Normalised limit ``delta1^{2/3}/2 + delta2`` of the two-constraint problem."""
    if delta1 < 0 or delta2 < 0:
        raise DomainError("delta1 and delta2 must be nonnegative")
    return delta1 ** (2.0 / 3.0) / 2.0 + delta2


def cherry_diagnostic_limit(delta, regime):
    """Limiting ``s(G_n)/p^2`` of near-minimisers: ``1 + delta/3`` on the dense
    side below the crossover, 1 otherwise."""
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    name = _regime_name(regime)
    if name not in (DENSE, SPARSE):
        raise DomainError(f"no cherry limit in regime {name!r}")
    if delta == crossover_delta(3):
        raise DomainError("cherry limit is undefined exactly at the crossover 27/8")
    if name == DENSE and delta < crossover_delta(3):
        return 1.0 + delta / 3.0
    return 1.0


def quadratic_moment_floor(p, delta, num_edges, max_degree):
    """Least ``E[U^2]`` compatible with ``t(F, p + U) >= (1 + delta) p^{e(F)}``.

    Expanding ``t(F, p + U)`` over spanning subgraphs and bounding each term
    by the generalised Hoelder inequality gives
    ``delta <= (1 + E[U^2]^{1/D} / p)^{e(F)} - 1`` with ``D = max(Delta, 2)``.
    """
    d = max(int(max_degree), 2)
    root = (1.0 + delta) ** (1.0 / num_edges) - 1.0
    return (p * root) ** d


def entropy_lower_bound(n, p, delta, num_edges=3, max_degree=2):
    """Certified lower bound on ``phi_F(n, p, delta)`` (``F`` given by its edge
    count and max degree; defaults describe the triangle).

    Any feasible ``G`` embeds into a graphon ``W' = max(W^G, p)`` with
    ``I_p(G) = n^2 E[I_p(W')] / 2``; then ``I_p(p + x) >= c(p) x^2`` and the
    moment floor above give ``phi >= n^2 c(p) E[U^2]_min / 2``.
    """
    return 0.5 * n * n * quadratic_constant(p) * quadratic_moment_floor(p, delta, num_edges, max_degree)


def general_H_order(F, n, p, delta=1.0):
    """Order ``n^2 p^Delta log(1/p)`` of ``phi_F`` with a numeric coefficient bracket.

    ``upper`` is the hub entropy with ``r = delta n p^Delta`` (normalised);
    ``lower`` comes from :func:`entropy_lower_bound`.
    """
    D = F.max_degree
    if D < 1:
        raise DomainError("pattern needs at least one edge")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    if p < n ** (-1.0 / D):
        raise DomainError(f"p={p!r} is below the validity range n^(-1/Delta)={n ** (-1.0 / D)!r}")
    log_inv_p = math.log(1.0 / p)
    scale = n * n * p ** D * log_inv_p
    r = delta * n * p ** D
    upper = r * (n - (r + 1) / 2.0) * log_inv_p / scale
    lower = entropy_lower_bound(n, p, delta, F.num_edges, D) / scale
    return OrderEstimate(lower=lower, upper=upper, n_exponent=2, p_exponent=D, scale=scale, log_factor=log_inv_p)


# ---------------------------------------------------------------------------
# Union-bound bookkeeping, all in (nested) log space


@dataclass(frozen=True)
class UnionBound:
    """``R = M^n eps^{-M^2}`` with ``eps = eta p^3 / 6`` and ``M = 4^{1/eps^2}``.

    ``log_R`` is ``inf`` when it overflows; ``log_log_R`` is always finite.
    """

    epsilon: float
    log_M: float
    log_log_R: float
    log_R: float

    def to_dict(self):
        return dict(self.__dict__)


def _log_n(n, log_n):
    if log_n is not None:
        return float(log_n)
    if n < 1:
        raise DomainError("n must be positive")
    return math.log(n)


def union_bound_log_R(n=None, p=None, eta=None, log_n=None):
    """``log R = n log M + M^2 log(1/eps)`` evaluated through ``log log R``.

    ``n`` may be an arbitrarily large int; pass ``log_n`` instead for sizes
    beyond integer reach.
    """
    if p is None or eta is None:
        raise DomainError("p and eta are required")
    if not 0.0 < p < 1.0 or not eta > 0.0:
        raise DomainError("need 0 < p < 1 and eta > 0")
    ln = _log_n(n, log_n)
    eps = eta * p ** 3 / 6.0
    if eps >= 1.0:
        raise DomainError(f"eps = eta p^3 / 6 = {eps!r} must be < 1")
    log_M = math.log(4.0) / eps ** 2
    log_terms = [ln + math.log(log_M), 2.0 * log_M + math.log(math.log(1.0 / eps))]
    log_log_R = float(np.logaddexp(*log_terms))
    log_R = math.exp(log_log_R) if log_log_R < 709.0 else math.inf
    return UnionBound(epsilon=eps, log_M=log_M, log_log_R=log_log_R, log_R=log_R)


def union_bound_log_ratio(p, eta, n=None, log_n=None):
    """Natural log of ``log R / (n^2 p^2 log(1/p))``; very negative means negligible."""
    ub = union_bound_log_R(n=n, p=p, eta=eta, log_n=log_n)
    ln = _log_n(n, log_n)
    log_scale = 2.0 * ln + 2.0 * math.log(p) + math.log(math.log(1.0 / p))
    return ub.log_log_R - log_scale


@dataclass(frozen=True)
class TailCertificate:
    """``log P(t >= (1+delta)p^3) <= log R - phi_lower``."""

    log_bound: float
    log_R: float
    phi_lower: float
    vacuous: bool

    def to_dict(self):
        return dict(self.__dict__)


def tail_certificate(n, p, delta, eta, phi_lower):
    if not 0.0 < eta < delta:
        raise DomainError("need 0 < eta < delta")
    if phi_lower < 0.0:
        raise DomainError("phi_lower must be nonnegative")
    ub = union_bound_log_R(n=n, p=p, eta=eta)
    value = ub.log_R - phi_lower
    return TailCertificate(log_bound=value, log_R=ub.log_R, phi_lower=phi_lower, vacuous=value >= 0.0)


def certificate_relative_exponent(log_n, p, delta, eta):
    """``(log R - phi_lower) / phi_lower`` for the certified triangle lower bound
    at ``delta - eta``, evaluated in log-log space; tends to ``-1`` when the
    union-bound cost is negligible."""
    ub = union_bound_log_R(p=p, eta=eta, log_n=log_n)
    phi_floor = quadratic_moment_floor(p, delta - eta, 3, 2)
    log_phi = math.log(0.5) + 2.0 * log_n + math.log(quadratic_constant(p)) + math.log(phi_floor)
    log_ratio = ub.log_log_R - log_phi
    if log_ratio > 700:
        return math.inf
    return -1.0 + math.exp(log_ratio)

