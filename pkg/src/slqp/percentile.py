"""Sum-least and sum-greatest percentile utilities.

For a vector ``x`` of per-user utilities and a percentile number ``Kq``,
``slqp(x, Kq)`` is the sum of the ``Kq`` smallest entries (concave,
nondecreasing, nonsmooth) and ``sgqp(x, Kq)`` the sum of the ``Kq`` largest
entries (convex). ``Kq = K`` recovers the sum and ``Kq = 1`` the minimum
(resp. maximum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PercentileSpec",
    "percentile_number",
    "slqp",
    "sgqp",
    "slqp_supergradient",
]


def percentile_number(K: int, q: float) -> int:
    """Smallest ``k >= 1`` with ``100 k / K >= q``.

    Parameters
    ----------
    K : int
        Number of users, ``K >= 1``.
    q : float
        Percentile in ``(0, 100]``.

    Examples
    --------
    >>> percentile_number(6, 50)
    3
    >>> percentile_number(70, 10)
    7
    """
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K!r}")
    if not (0 < q <= 100) or math.isnan(q):
        raise ValueError(f"q must lie in (0, 100], got {q!r}")
    K = int(K)
    k = max(1, min(K, math.ceil(q * K / 100.0)))
    # ceil() can be off by one in floating point; settle on the defining inequality.
    while k > 1 and 100.0 * (k - 1) / K >= q:
        k -= 1
    while k < K and 100.0 * k / K < q:
        k += 1
    return k


@dataclass(frozen=True)
class PercentileSpec:
    """The triple ``(K, q, Kq)`` selecting which percentile is optimized."""

    K: int
    q: float
    Kq: int

    def __post_init__(self):
        expected = percentile_number(self.K, self.q)
        if self.Kq != expected:
            raise ValueError(
                f"Kq={self.Kq} inconsistent with K={self.K}, q={self.q} (expected {expected})"
            )

    @classmethod
    def from_q(cls, K: int, q: float) -> "PercentileSpec":
        return cls(int(K), float(q), percentile_number(K, q))


def _check(x, Kq) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("utility vector must be one-dimensional")
    if int(Kq) != Kq or not (1 <= Kq <= x.size):
        raise ValueError(f"Kq must be an integer in [1, {x.size}], got {Kq!r}")
    return x


def slqp(x, Kq: int) -> float:
    """Sum of the ``Kq`` smallest entries of ``x``.

    The selected entries are summed in sorted order, so the result does not
    depend on the order of ``x`` and ``sgqp(x, Kq) == -slqp(-x, Kq)`` exactly.
    """
    x = _check(x, Kq)
    Kq = int(Kq)
    sel = x if Kq == x.size else np.partition(x, Kq - 1)[:Kq]
    return float(np.sort(sel).sum())


def sgqp(x, Kq: int) -> float:
    """Sum of the ``Kq`` largest entries of ``x``."""
    x = _check(x, Kq)
    return -slqp(-x, Kq)


def slqp_supergradient(x, Kq: int) -> np.ndarray:
    """Binary mask selecting the ``Kq`` smallest entries of ``x``.

    Ties are broken toward the lowest index. The mask ``a`` satisfies
    ``a @ x == slqp(x, Kq)`` and is a supergradient of ``slqp(., Kq)`` at ``x``:
    ``slqp(y, Kq) <= slqp(x, Kq) + a @ (y - x)`` for every ``y``.
    """
    x = _check(x, Kq)
    order = np.argsort(x, kind="stable")
    a = np.zeros(x.size, dtype=np.int64)
    a[order[: int(Kq)]] = 1
    return a
