"""Bernoulli relative entropy ``I_p`` and the bounds used on it.

All functions accept scalars; ``relative_entropy`` and ``clipped_entropy``
also broadcast over numpy arrays.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import rel_entr

from .errors import DomainError

# Small-p threshold below which the chord/quadratic lower bounds are valid.
# Verified offline: the concavity certificate g(x_p) <= -1.33 for all p <= 1e-2.
P0 = 1e-2


def _check_p(p):
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")


def _check_unit(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]")
    return arr


def relative_entropy(x, p):
    """Return ``I_p(x) = x log(x/p) + (1-x) log((1-x)/(1-p))``.

    Uses ``0 log 0 = 0`` so both endpoints are finite:
    ``I_p(1) = log(1/p)`` and ``I_p(0) = log(1/(1-p))``.
    """
    _check_p(p)
    arr = _check_unit(x)
    val = rel_entr(arr, p) + rel_entr(1.0 - arr, 1.0 - p)
    # rounding can leave -1e-17 near x == p
    val = np.maximum(val, 0.0)
    if np.ndim(val) == 0:
        return float(val)
    return val


def entropy_derivative(x, p):
    """Derivative ``log(x(1-p) / (p(1-x)))`` of ``I_p`` on the open interval."""
    _check_p(p)
    if not 0.0 < x < 1.0:
        raise DomainError(f"derivative of I_p diverges at x={x!r}; clamp before calling")
    return math.log(x) - math.log1p(-x) - math.log(p) + math.log1p(-p)


def clipped_entropy(x, p):
    """``I_p(max(x, p))``: zero below ``p``, nondecreasing above."""
    _check_p(p)
    arr = _check_unit(x)
    return relative_entropy(np.maximum(arr, p) if np.ndim(arr) else max(float(arr), p), p)


def chord_upper_limit(p):
    """Largest admissible chord endpoint ``1 - p - 1/log(1/p)``."""
    return 1.0 - p - 1.0 / math.log(1.0 / p)


def _check_small_p(p, p0):
    _check_p(p)
    if p > p0:
        raise DomainError(f"bound only certified for p <= {p0}, got p={p!r}")


def chord_lower_bound(x, b, p, p0=P0):
    """Lower bound ``(x/b)^2 I_p(p+b) <= I_p(p+x)`` for ``0 <= x <= b``.

    Valid for ``p <= p0`` and ``b <= 1 - p - 1/log(1/p)``.
    """
    _check_small_p(p, p0)
    limit = chord_upper_limit(p)
    if b > limit:
        raise DomainError(f"b={b!r} exceeds 1 - p - 1/log(1/p) = {limit!r}")
    if not 0.0 <= x <= b:
        raise DomainError(f"need 0 <= x <= b, got x={x!r}, b={b!r}")
    if b == 0.0:
        return 0.0
    return (x / b) ** 2 * relative_entropy(p + b, p)


def quadratic_constant(p, p0=P0):
    """Constant ``c`` with ``I_p(p+x) >= c x^2`` on ``[0, 1-p]``.

    For ``p <= p0`` this is the small-p constant ``I_p(1 - 1/log(1/p))``
    (never below Pinsker's 2); otherwise Pinsker's constant 2.
    """
    _check_p(p)
    pinsker = 2.0
    if p <= p0:
        return max(pinsker, relative_entropy(1.0 - 1.0 / math.log(1.0 / p), p))
    return pinsker


def quadratic_lower_bound(x, p, p0=P0):
    """Lower bound ``x^2 I_p(1 - 1/log(1/p)) <= I_p(p+x)`` for ``p <= p0``."""
    _check_small_p(p, p0)
    if not 0.0 <= x <= 1.0 - p:
        raise DomainError(f"need 0 <= x <= 1-p, got x={x!r}")
    return x * x * relative_entropy(1.0 - 1.0 / math.log(1.0 / p), p)


def asymptotic_ratio(x, p):
    """Compare ``I_p(p+x)`` with its small- or large-deviation asymptote.

    Returns ``(regime, ratio)``: ``"quadratic"`` divides by ``x^2/(2p)``
    when ``x < p``; ``"linearithmic"`` divides by ``x log(x/p)`` when ``x > p``.
    """
    _check_p(p)
    if not 0.0 < x <= 1.0 - p:
        raise DomainError(f"need 0 < x <= 1-p, got x={x!r}")
    if x == p:
        raise DomainError("x == p sits between both asymptotic regimes")
    value = relative_entropy(min(p + x, 1.0), p)
    if x < p:
        return "quadratic", value / (x * x / (2.0 * p))
    return "linearithmic", value / (x * math.log(x / p))


def binomial_tail_bound(N, p, threshold):
    """Chernoff exponent ``-N I_p^>(threshold)``.

    ``exp`` of the result upper-bounds ``P(Bin(N, p) >= threshold * N)``.
    Returned in log space since the bound routinely underflows.
    """
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    _check_p(p)
    if not 0.0 <= threshold <= 1.0:
        raise DomainError(f"threshold must lie in [0, 1], got {threshold!r}")
    return -N * clipped_entropy(threshold, p)
