"""Projected supergradient ascent for concave, possibly nonsmooth objectives.

The feasible sets are a box ``lo <= p <= hi`` and the capped simplex
``{p >= 0, sum(p) <= p_total}``. The ascent loop is written so that it runs
unchanged under the Python interpreter (arbitrary Python oracles) and under
numba (jitted oracles, used by the fractional-programming inner problems).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import warnings

import numpy as np
from numba import njit

__all__ = [
    "FeasibleSet",
    "SolverOptions",
    "SolveResult",
    "NonConvergenceWarning",
    "project",
    "maximize_concave",
    "water_fill",
]

BOX = 0
SIMPLEX_CAP = 1


class NonConvergenceWarning(RuntimeWarning):
    """The iteration cap was hit before the stopping rule fired."""


@dataclass(frozen=True, eq=False)
class FeasibleSet:
    """Either ``Box(lo, hi)`` or ``SimplexCap(p_total)``; build with the classmethods."""

    kind: int
    lo: np.ndarray
    hi: np.ndarray
    p_total: float = np.inf

    @classmethod
    def box(cls, lo, hi) -> "FeasibleSet":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        lo, hi = np.broadcast_arrays(lo, hi)
        if lo.ndim != 1 or np.any(lo > hi):
            raise ValueError("box bounds must be vectors with lo <= hi")
        return cls(BOX, lo.copy(), hi.copy())

    @classmethod
    def simplex_cap(cls, p_total: float, K: int) -> "FeasibleSet":
        if not p_total > 0:
            raise ValueError("p_total must be positive")
        return cls(SIMPLEX_CAP, np.zeros(K), np.full(K, float(p_total)), float(p_total))

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def scale(self) -> float:
        """Characteristic length used for the default initial step."""
        if self.kind == SIMPLEX_CAP:
            return self.p_total
        return float(np.max(self.hi - self.lo))


@dataclass(frozen=True)
class SolverOptions:
    """Stopping and step-size settings.

    ``a0=None`` means a tenth of the feasible set's scale. Steps follow
    ``a / sqrt(t)``; every ``epoch`` iterations (0 disables) and on each
    stall the run restarts from its best point with ``a`` halved, at most
    ``restarts`` times. A stall is a relative improvement of the best value
    below ``tol`` over ``window`` iterations; a stall with no restarts left
    ends the run, as does ``max_iters``.
    """

    max_iters: int = 20000
    tol: float = 1e-8
    a0: float | None = None
    window: int = 50
    restarts: int = 30
    epoch: int = 1000

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.a0 is not None and not self.a0 > 0:
            raise ValueError("a0 must be positive")
        if self.window < 1 or self.restarts < 0 or self.epoch < 0:
            raise ValueError("window must be >= 1; restarts and epoch must be >= 0")


@dataclass(eq=False)
class SolveResult:
    p_star: np.ndarray
    value: float
    iterations: int
    trace: np.ndarray = field(repr=False)
    converged: bool = True


@njit(cache=True)
def _project_simplex(v, total):
    # Euclidean projection onto {p >= 0, sum(p) = total} by the sorted-threshold rule.
    u = np.sort(v)[::-1]
    css = 0.0
    theta = 0.0
    for i in range(u.size):
        css += u[i]
        t = (css - total) / (i + 1)
        if u[i] - t > 0:
            theta = t
    return np.maximum(v - theta, 0.0)


@njit(cache=True)
def _project(kind, lo, hi, cap, p):
    if kind == BOX:
        return np.minimum(np.maximum(p, lo), hi)
    out = np.maximum(p, 0.0)
    if out.sum() <= cap:
        return out
    return _project_simplex(p, cap)


def project(feasible: FeasibleSet, p) -> np.ndarray:
    """Euclidean projection of ``p`` onto the feasible set."""
    p = np.asarray(p, dtype=float)
    if p.shape != (feasible.dim,):
        raise ValueError(f"expected shape ({feasible.dim},), got {p.shape}")
    return _project(feasible.kind, feasible.lo, feasible.hi, feasible.p_total, p)


def _ascent(oracle, params, kind, lo, hi, cap, p0, a0, max_iters, tol, window, restarts, epoch):
    """Projected supergradient ascent with best-iterate tracking.

    Steps are ``a / sqrt(t)`` along the normalized supergradient (box
    components pushing outward are dropped before normalizing). Trial points
    where the oracle value is not finite are backtracked by halving.

    Returns ``(best_p, best_value, iterations, trace, converged)``.
    """
    n = p0.size
    p = _project(kind, lo, hi, cap, p0.copy())
    val, g = oracle(p, params)
    best_p = p.copy()
    best = val
    trace = np.empty(max_iters + 1)
    trace[0] = best
    a = a0
    t = 0
    it = 0
    mark = best
    converged = False
    stalls = 0
    while it < max_iters:
        it += 1
        t += 1
        d = g.copy()
        if kind == BOX:
            for i in range(n):
                if (p[i] >= hi[i] and d[i] > 0.0) or (p[i] <= lo[i] and d[i] < 0.0):
                    d[i] = 0.0
        nrm = np.sqrt(np.sum(d * d))
        moved = False
        if nrm > 0.0 and np.isfinite(nrm):
            step = a / np.sqrt(t) / nrm
            for _ in range(60):
                q = _project(kind, lo, hi, cap, p + step * d)
                qv, qg = oracle(q, params)
                if np.isfinite(qv):
                    p = q
                    val = qv
                    g = qg
                    moved = True
                    break
                step *= 0.5
        if moved and val > best:
            best = val
            best_p[:] = p
        trace[it] = best
        stalled = not moved
        if not stalled and it % window == 0:
            stalled = best - mark <= tol * max(abs(best), 1e-300)
            mark = best
        if stalled and stalls >= restarts:
            converged = True
            break
        if stalled or (stalls < restarts and epoch > 0 and t >= epoch):
            stalls += 1
            a *= 0.5
            t = 0
            p = best_p.copy()
            val, g = oracle(p, params)
            mark = best
    return best_p, best, it, trace[: it + 1], converged


_ascent_jit = njit(cache=True)(_ascent)


def _python_oracle(p, params):
    f = params[0]
    val, g = f(p)
    return float(val), np.asarray(g, dtype=float)


def maximize_concave(oracle, feasible: FeasibleSet, opts: SolverOptions | None = None, init=None) -> SolveResult:
    """Maximize a concave function over ``feasible``.

    Parameters
    ----------
    oracle : callable
        ``oracle(p) -> (value, supergradient)``. A non-finite value marks a
        point outside the objective's domain.
    feasible : FeasibleSet
    opts : SolverOptions, optional
    init : array_like, optional
        Starting point; projected first. Defaults to the centre of the set.

    Returns
    -------
    SolveResult
        Best iterate found. ``trace[t]`` is the best value after ``t`` steps.
        A :class:`NonConvergenceWarning` is emitted and ``converged`` is False
        when ``max_iters`` runs out first.
    """
    opts = opts or SolverOptions()
    if init is None:
        if feasible.kind == SIMPLEX_CAP:
            init = np.full(feasible.dim, feasible.p_total / (2 * feasible.dim))
        else:
            init = 0.5 * (feasible.lo + feasible.hi)
    init = np.asarray(init, dtype=float)
    if init.shape != (feasible.dim,) or not np.all(np.isfinite(init)):
        raise ValueError("init must be a finite vector matching the feasible set")
    a0 = opts.a0 if opts.a0 is not None else feasible.scale / 10.0
    p, val, it, trace, ok = _ascent(
        _python_oracle, (oracle,), feasible.kind, feasible.lo, feasible.hi, feasible.p_total,
        init, a0, opts.max_iters, opts.tol, opts.window, opts.restarts, opts.epoch,
    )
    if not ok:
        warnings.warn(f"stopping rule not met within {opts.max_iters} iterations", NonConvergenceWarning)
    return SolveResult(p, float(val), it, trace, ok)


def water_fill(z, p_total: float) -> np.ndarray:
    """Sum-rate optimal powers ``max(0, mu - z_k)`` with ``sum = p_total``.

    Examples
    --------
    >>> water_fill([0.5, 1.5], 1.0)
    array([1., 0.])
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or np.any(z <= 0) or not p_total > 0:
        raise ValueError("need z > 0 and p_total > 0")
    zs = np.sort(z)
    # Water level if the m quietest channels are active.
    levels = (p_total + np.cumsum(zs)) / np.arange(1, z.size + 1)
    m = np.nonzero(levels > zs)[0][-1]
    return np.maximum(levels[m] - z, 0.0)
