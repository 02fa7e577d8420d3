"""Finite-difference checks of MM convergence conditions.

``stationarity_check`` estimates the largest one-sided directional derivative
of the SLqP rate over sampled feasible directions; at a directional stationary
point it is (numerically) nonpositive. ``minorant_tangency_check`` confirms
that the auxiliary objective built at ``p`` lower-bounds the true objective,
touches it at ``p``, and shares its directional derivatives there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fractional import aux_rates, lft_x_update, qft_x_update
from .network import NetworkInstance, rates
from .percentile import slqp
from .solver import FeasibleSet, project

__all__ = [
    "sample_directions",
    "directional_derivative",
    "max_directional_derivative",
    "stationarity_check",
    "TangencyReport",
    "minorant_tangency_check",
]


def sample_directions(feasible: FeasibleSet, p, num: int, rng) -> np.ndarray:
    """Unit directions drawn uniformly on the sphere, then projected onto the
    tangent cone of ``feasible`` at ``p`` and renormalized.

    Directions whose projection vanishes are dropped.
    """
    p = np.asarray(p, dtype=float)
    d = rng.standard_normal((num, p.size))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    # Small probe: P(p + eps d) - p lies in the tangent cone for polyhedral sets.
    eps = 1e-6 * max(feasible.scale, 1e-300)
    cone = np.array([project(feasible, p + eps * di) - p for di in d])
    n = np.linalg.norm(cone, axis=1)
    keep = n > 1e-3 * eps
    return cone[keep] / n[keep, None]


def directional_derivative(f, feasible: FeasibleSet, p, d, h: float, f0=None) -> float:
    """One-sided derivative estimate ``(f(P(p + h d)) - f(p)) / h``."""
    f0 = f(p) if f0 is None else f0
    return (f(project(feasible, p + h * d)) - f0) / h


def max_directional_derivative(f, feasible: FeasibleSet, p, num_directions: int = 200, h: float = 1e-4,
                               seed=0) -> float:
    """Largest one-sided difference quotient of ``f`` over sampled feasible directions."""
    rng = np.random.default_rng(seed)
    p = np.asarray(p, dtype=float)
    f0 = f(p)
    dirs = sample_directions(feasible, p, num_directions, rng)
    if len(dirs) == 0:
        return 0.0
    return max(directional_derivative(f, feasible, p, d, h, f0) for d in dirs)


def stationarity_check(instance: NetworkInstance, Kq: int, p, num_directions: int = 200, h: float = 1e-4,
                       seed=0) -> float:
    """Max estimated directional derivative of ``slqp(rates(p), Kq)`` over the power box."""
    box = FeasibleSet.box(np.zeros(instance.K), np.full(instance.K, instance.pmax))
    return max_directional_derivative(lambda y: slqp(rates(instance, y), Kq), box, p, num_directions, h, seed)


@dataclass(frozen=True)
class TangencyReport:
    value_gap: float
    """``|aux(p) - orig(p)|`` at the expansion point."""
    minorization_violation: float
    """Largest ``aux(y) - orig(y)`` over sampled feasible ``y`` (<= 0 when minorizing)."""
    tangency_residual: float
    """Largest ``|aux'(p; d) - orig'(p; d)|`` over sampled directions."""

    @property
    def residual(self) -> float:
        return self.tangency_residual


def minorant_tangency_check(instance: NetworkInstance, Kq: int, p, num_directions: int = 200, h: float = 1e-4,
                            transform: str = "QFT", seed=0, num_points: int = 200) -> TangencyReport:
    """Check that the auxiliary objective with ``x`` refreshed at ``p`` is a tangent minorant.

    Derivatives along each direction use the second-order one-sided formula
    ``(4 f(p + h d) - f(p + 2h d) - 3 f(p)) / (2h)`` on both functions.
    Points where a QFT surrogate leaves its domain count as ``-inf``.
    """
    transform = transform.upper()
    update = {"QFT": qft_x_update, "LFT": lft_x_update}[transform]
    p = np.asarray(p, dtype=float)
    x = update(instance, p)
    box = FeasibleSet.box(np.zeros(instance.K), np.full(instance.K, instance.pmax))

    def orig(y):
        return slqp(rates(instance, y), Kq)

    def aux(y):
        try:
            return slqp(aux_rates(instance, y, x, transform), Kq)
        except ValueError:
            return -np.inf

    rng = np.random.default_rng(seed)
    gap = abs(aux(p) - orig(p))

    ys = rng.uniform(0.0, instance.pmax, size=(num_points, instance.K))
    dirs = sample_directions(box, p, num_directions, rng)
    near = [project(box, p + s * d) for d in dirs[: num_points // 2] for s in (1e-3, 1e-1)]
    viol = max(aux(y) - orig(y) for y in list(ys) + near)

    def slope(f, d):
        f0, f1, f2 = f(p), f(project(box, p + h * d)), f(project(box, p + 2 * h * d))
        return (4.0 * f1 - f2 - 3.0 * f0) / (2.0 * h)

    resid = max((abs(slope(aux, d) - slope(orig, d)) for d in dirs), default=0.0)
    return TangencyReport(float(gap), float(viol), float(resid))
