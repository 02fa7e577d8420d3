"""Fractional-transform MM algorithms for SLqP rate maximization.

Both algorithms alternate two steps on a :class:`~slqp.network.NetworkInstance`:

* fix the powers ``p`` and set the auxiliary variables ``x`` in closed form,
  which makes the auxiliary SLqP objective equal the true one at ``p``;
* fix ``x`` and maximize the auxiliary SLqP objective over the power box.
  For fixed ``x`` that objective is concave in ``p``, so the inner step is a
  convex problem solved by projected supergradient ascent.

QFT replaces each SINR ``A/B`` with ``2 x sqrt(A) - x^2 B``; LFT replaces the
rate ``ln(1 + A/B)`` with ``-x B + ln(x (A + B)) + 1``.
"""

from __future__ import annotations

import csv
import enum
import io
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .network import NetworkInstance, ParallelChannelInstance, parallel_rates, rates, signal_interference
from .percentile import slqp
from .solver import BOX, SIMPLEX_CAP, SolveResult, SolverOptions, _ascent_jit

__all__ = [
    "AlgorithmKind",
    "OuterRecord",
    "OuterTrace",
    "qft_aux_rate",
    "lft_aux_rate",
    "qft_x_update",
    "lft_x_update",
    "aux_rates",
    "aux_objective",
    "random_init",
    "run_qft",
    "run_lft",
    "run_sumrate",
    "run_sga_baseline",
    "run_cwsr_baseline",
    "run_random_baseline",
    "run_algorithm",
    "solve_parallel_slqp",
    "solve_parallel_lqp",
]

QFT, LFT, TRUE = 0, 1, 2

# Outer stopping rule: relative improvement below OUTER_TOL, at most MAX_OUTER rounds.
OUTER_TOL = 1e-6
MAX_OUTER = 100

INNER_OPTS = SolverOptions()
# One-shot convex solves get a longer stall window: ridges where several rates tie
# otherwise trigger step halvings before the iterate has crossed them.
PARALLEL_OPTS = SolverOptions(window=200)


class AlgorithmKind(str, enum.Enum):
    QFT = "QFT"
    LFT = "LFT"
    SGA = "SGA"
    CWSR = "CWSR"
    RANDOM = "RANDOM"
    SUMRATE = "SUMRATE"


def qft_aux_rate(x, A, B):
    """``ln(1 + 2 x sqrt(A) - x^2 B)``; raises if the argument is not positive."""
    x, A, B = (np.asarray(v, dtype=float) for v in (x, A, B))
    if np.any(B <= 0) or np.any(A < 0):
        raise ValueError("need A >= 0 and B > 0")
    arg = 1.0 + 2.0 * x * np.sqrt(A) - x * x * B
    if np.any(arg <= 0):
        raise ValueError("quadratic-transform rate outside its domain (log argument <= 0)")
    out = np.log(arg)
    return float(out) if out.ndim == 0 else out


def lft_aux_rate(x, A, B):
    """``-x B + ln(x (A + B)) + 1``; requires ``x > 0``."""
    x, A, B = (np.asarray(v, dtype=float) for v in (x, A, B))
    if np.any(B <= 0) or np.any(A < 0):
        raise ValueError("need A >= 0 and B > 0")
    if np.any(x <= 0):
        raise ValueError("logarithmic-transform rate needs x > 0")
    out = -x * B + np.log(x * (A + B)) + 1.0
    return float(out) if out.ndim == 0 else out


def qft_x_update(instance: NetworkInstance, p) -> np.ndarray:
    """``x_k = sqrt(A_k) / B_k``."""
    A, B = signal_interference(instance, p)
    return np.sqrt(A) / B


def lft_x_update(instance: NetworkInstance, p) -> np.ndarray:
    """``x_k = 1 / B_k``."""
    _, B = signal_interference(instance, p)
    return 1.0 / B


_X_UPDATE = {QFT: qft_x_update, LFT: lft_x_update}


def aux_rates(instance: NetworkInstance, p, x, transform: str) -> np.ndarray:
    """Auxiliary per-user rates for ``transform`` in ``{"QFT", "LFT"}``."""
    A, B = signal_interference(instance, p)
    if transform.upper() == "QFT":
        return np.atleast_1d(qft_aux_rate(x, A, B))
    if transform.upper() == "LFT":
        return np.atleast_1d(lft_aux_rate(x, A, B))
    raise ValueError(f"unknown transform {transform!r}")


def aux_objective(instance: NetworkInstance, p, x, Kq: int, transform: str) -> float:
    return slqp(aux_rates(instance, p, x, transform), Kq)


@njit(cache=True)
def _rate_oracle(p, params):
    """Value and supergradient of the inner objective at ``p``.

    ``mode`` selects the per-user rate: QFT or LFT auxiliary rates with fixed
    ``x``, or the true rates (``TRUE``, nonconcave). With ``Kq > 0`` the
    utility is the sum of the ``Kq`` smallest rates; with ``Kq == 0`` it is
    ``w @ rates``.
    """
    cross, direct, sigma2, x, mode, Kq, w, floor = params
    K = p.size
    A = p * direct
    B = cross.T @ p + sigma2
    if mode == QFT:
        arg = 1.0 + 2.0 * x * np.sqrt(A) - x * x * B
        for k in range(K):
            if arg[k] <= 0.0:
                return -np.inf, np.zeros(K)
        r = np.log(arg)
    elif mode == LFT:
        r = -x * B + np.log(x * (A + B)) + 1.0
    else:
        r = np.log1p(A / B)
    if Kq > 0:
        c = np.zeros(K)
        order = np.argsort(r, kind="mergesort")
        for i in range(Kq):
            c[order[i]] = 1.0
    else:
        c = w
    val = np.sum(c * r)
    if mode == QFT:
        sp = np.sqrt(np.maximum(p, floor))
        grad = c * x * np.sqrt(direct) / (sp * arg) - cross @ (c * x * x / arg)
    elif mode == LFT:
        T = A + B
        grad = direct * c / T + cross @ (c / T - c * x)
    else:
        T = A + B
        grad = direct * c / T - cross @ (c * A / (B * T))
    return val, grad


def _params(instance: NetworkInstance, x, mode: int, Kq: int, w=None):
    K = instance.K
    return (
        np.ascontiguousarray(instance.cross),
        np.ascontiguousarray(instance.direct),
        float(instance.sigma2),
        np.zeros(K) if x is None else np.asarray(x, dtype=float),
        int(mode),
        int(Kq),
        np.zeros(K) if w is None else np.asarray(w, dtype=float),
        1e-12 * instance.pmax,
    )


def _inner_solve(instance, params, p0, opts: SolverOptions):
    K = instance.K
    lo = np.zeros(K)
    hi = np.full(K, instance.pmax)
    a0 = opts.a0 if opts.a0 is not None else instance.pmax / 10.0
    return _ascent_jit(
        _rate_oracle, params, BOX, lo, hi, np.inf, np.asarray(p0, dtype=float),
        a0, opts.max_iters, opts.tol, opts.window, opts.restarts, opts.epoch,
    )


@dataclass
class OuterRecord:
    iter: int
    objective_nats: float
    aux_objective_nats: float
    inner_iters: int
    time_ms: float
    inner_converged: bool = True


@dataclass
class OuterTrace:
    """Per-outer-iteration log of an MM run.

    Row 0 describes the starting point. Row ``i >= 1`` is taken after the
    ``i``-th power update: the true SLqP objective at the new powers and the
    auxiliary objective right after refreshing ``x`` there (the two agree).
    """

    records: list = field(default_factory=list)

    COLUMNS = ("iter", "objective_nats", "aux_objective_nats", "inner_iters", "time_ms")

    def append(self, rec: OuterRecord):
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    @property
    def objective(self) -> np.ndarray:
        return np.array([r.objective_nats for r in self.records])

    @property
    def aux_objective(self) -> np.ndarray:
        return np.array([r.aux_objective_nats for r in self.records])

    @property
    def inner_nonconverged(self) -> int:
        """Number of inner solves that ran out of iterations."""
        return sum(not r.inner_converged for r in self.records)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for r in self.records:
            w.writerow([r.iter, repr(r.objective_nats), repr(r.aux_objective_nats), r.inner_iters, f"{r.time_ms:.3f}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "OuterTrace":
        text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
        rows = list(csv.DictReader(io.StringIO(text)))
        missing = set(cls.COLUMNS) - set(rows[0] if rows else cls.COLUMNS)
        if missing:
            raise ValueError(f"trace CSV lacks columns: {sorted(missing)}")
        return cls([
            OuterRecord(int(r["iter"]), float(r["objective_nats"]), float(r["aux_objective_nats"]),
                        int(r["inner_iters"]), float(r["time_ms"]))
            for r in rows
        ])


def random_init(instance: NetworkInstance, seed=None) -> np.ndarray:
    """Powers drawn uniformly from ``[0, pmax]``."""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, instance.pmax, size=instance.K)


def _resolve_init(instance, init, seed):
    if init is None:
        return random_init(instance, seed)
    if isinstance(init, str):
        if init != "pmax":
            raise ValueError(f"unknown init {init!r}")
        return np.full(instance.K, instance.pmax)
    p = np.asarray(init, dtype=float)
    if p.shape != (instance.K,) or np.any(p < 0) or np.any(p > instance.pmax * (1 + 1e-12)):
        raise ValueError("init must be feasible")
    return np.clip(p, 0.0, instance.pmax)


def _check_Kq(instance, Kq):
    if int(Kq) != Kq or not 1 <= Kq <= instance.K:
        raise ValueError(f"Kq must be an integer in [1, {instance.K}]")
    return int(Kq)


def _run_mm(instance, Kq, mode, opts, init, seed, max_outer, outer_tol, weights=None, eval_Kq=None):
    Kq = _check_Kq(instance, Kq if weights is None else (eval_Kq or instance.K))
    opts = opts or INNER_OPTS
    p = _resolve_init(instance, init, seed)
    update = _X_UPDATE[mode]
    tname = "QFT" if mode == QFT else "LFT"
    inner_Kq = 0 if weights is not None else Kq

    def own_objective(p, x):
        r = aux_rates(instance, p, x, tname)
        return float(weights @ r) if weights is not None else slqp(r, Kq)

    trace = OuterTrace()
    x = update(instance, p)
    f = slqp(rates(instance, p), Kq)
    g = own_objective(p, x)
    trace.append(OuterRecord(0, f, slqp(aux_rates(instance, p, x, tname), Kq), 0, 0.0))
    total_inner = 0
    converged = False
    for i in range(1, max_outer + 1):
        t0 = time.perf_counter()
        params = _params(instance, x, mode, inner_Kq, weights)
        p, _, inner_it, _, ok = _inner_solve(instance, params, p, opts)
        total_inner += inner_it
        x = update(instance, p)
        f_new = slqp(rates(instance, p), Kq)
        g_new = own_objective(p, x)
        aux = slqp(aux_rates(instance, p, x, tname), Kq)
        dt = 1e3 * (time.perf_counter() - t0)
        trace.append(OuterRecord(i, f_new, aux, inner_it, dt, bool(ok)))
        # CWSR stops on its own weighted-sum surrogate; the others on the SLqP objective.
        gain = (g_new - g) if weights is not None else (f_new - f)
        ref = abs(g) if weights is not None else abs(f)
        f, g = f_new, g_new
        if gain <= outer_tol * max(ref, 1e-300):
            converged = True
            break
    result = SolveResult(p, f, len(trace) - 1, trace.objective, converged)
    return result, trace


def run_qft(instance: NetworkInstance, Kq: int, opts: SolverOptions | None = None, init=None, *,
            seed=None, max_outer: int = MAX_OUTER, outer_tol: float = OUTER_TOL):
    """Quadratic-transform MM algorithm.

    Parameters
    ----------
    instance : NetworkInstance
    Kq : int
        Percentile number; the objective is the sum of the ``Kq`` smallest rates.
    opts : SolverOptions, optional
        Inner solver settings.
    init : array_like or "pmax", optional
        Starting powers. Default: uniform in ``[0, pmax]`` drawn with ``seed``.

    Returns
    -------
    (SolveResult, OuterTrace)
        ``result.iterations`` counts outer iterations and ``result.trace``
        holds the true objective after each of them (index 0 = start).
    """
    return _run_mm(instance, Kq, QFT, opts, init, seed, max_outer, outer_tol)


def run_lft(instance: NetworkInstance, Kq: int, opts: SolverOptions | None = None, init=None, *,
            seed=None, max_outer: int = MAX_OUTER, outer_tol: float = OUTER_TOL):
    """Logarithmic-transform MM algorithm; same interface as :func:`run_qft`."""
    return _run_mm(instance, Kq, LFT, opts, init, seed, max_outer, outer_tol)


def run_sumrate(instance: NetworkInstance, opts=None, init=None, **kw):
    """QFT with ``Kq = K``, i.e. plain sum-rate maximization."""
    return run_qft(instance, instance.K, opts, init, **kw)


def run_cwsr_baseline(instance: NetworkInstance, opts=None, init=None, *, Kq=None, seed=None,
                      max_outer: int = MAX_OUTER, outer_tol: float = OUTER_TOL):
    """Weighted sum-rate with weights ``1 / G[k, k]`` via the quadratic transform.

    The returned value and trace report the SLqP objective with ``Kq``
    (default ``K``) at each iterate; that sequence need not be monotone.
    """
    w = 1.0 / instance.direct
    w = w / w.max()
    return _run_mm(instance, None, QFT, opts, init, seed, max_outer, outer_tol, weights=w, eval_Kq=Kq)


def run_sga_baseline(instance: NetworkInstance, Kq: int, opts: SolverOptions | None = None, init=None, *,
                     seed=None) -> SolveResult:
    """Projected supergradient steps directly on the nonconcave SLqP rate.

    The chain rule combines the lowest-``Kq`` selection mask with the rate
    gradients. The best iterate is returned; there is no ascent guarantee.
    """
    Kq = _check_Kq(instance, Kq)
    opts = opts or INNER_OPTS
    p0 = _resolve_init(instance, init, seed)
    params = _params(instance, None, TRUE, Kq)
    p, val, it, trace, ok = _inner_solve(instance, params, p0, opts)
    return SolveResult(p, slqp(rates(instance, p), Kq), it, trace, bool(ok))


def run_random_baseline(instance: NetworkInstance, Kq: int, *, seed=None) -> SolveResult:
    """Uniform random powers in ``[0, pmax]``."""
    Kq = _check_Kq(instance, Kq)
    p = random_init(instance, seed)
    val = slqp(rates(instance, p), Kq)
    return SolveResult(p, val, 0, np.array([val]), True)


def run_algorithm(kind, instance: NetworkInstance, Kq: int, opts=None, init=None, *, seed=None,
                  max_outer: int = MAX_OUTER, outer_tol: float = OUTER_TOL):
    """Dispatch on :class:`AlgorithmKind`; returns ``(SolveResult, OuterTrace | None)``.

    Every algorithm reports the SLqP objective with ``Kq`` at its output.
    """
    kind = AlgorithmKind(kind)
    mm = dict(seed=seed, max_outer=max_outer, outer_tol=outer_tol)
    if kind is AlgorithmKind.QFT:
        return run_qft(instance, Kq, opts, init, **mm)
    if kind is AlgorithmKind.LFT:
        return run_lft(instance, Kq, opts, init, **mm)
    if kind is AlgorithmKind.CWSR:
        return run_cwsr_baseline(instance, opts, init, Kq=Kq, **mm)
    if kind is AlgorithmKind.SUMRATE:
        res, tr = run_sumrate(instance, opts, init, **mm)
        res.value = slqp(rates(instance, res.p_star), Kq)
        return res, tr
    if kind is AlgorithmKind.SGA:
        return run_sga_baseline(instance, Kq, opts, init, seed=seed), None
    return run_random_baseline(instance, Kq, seed=seed), None


# -- parallel Gaussian channels ------------------------------------------------


@njit(cache=True)
def _parallel_oracle(p, params):
    z, Kq = params
    r = np.log1p(p / z)
    order = np.argsort(r, kind="mergesort")
    c = np.zeros(p.size)
    for i in range(Kq):
        c[order[i]] = 1.0
    return np.sum(c * r), c / (z + p)


def solve_parallel_slqp(instance: ParallelChannelInstance, Kq: int, opts: SolverOptions | None = None) -> SolveResult:
    """Globally optimal powers for the parallel-channel SLqP problem.

    The objective is concave, so projected supergradient ascent over
    ``{p >= 0, sum(p) <= p_total}`` converges to the optimum. Powers are in
    the instance's stored (descending-noise) order.
    """
    K = instance.K
    if int(Kq) != Kq or not 1 <= Kq <= K:
        raise ValueError(f"Kq must be an integer in [1, {K}]")
    opts = opts or PARALLEL_OPTS
    a0 = opts.a0 if opts.a0 is not None else instance.p_total / 10.0
    p0 = np.full(K, instance.p_total / K)
    lo = np.zeros(K)
    hi = np.full(K, instance.p_total)
    p, val, it, trace, ok = _ascent_jit(
        _parallel_oracle, (instance.z, int(Kq)), SIMPLEX_CAP, lo, hi, instance.p_total,
        p0, a0, opts.max_iters, opts.tol, opts.window, opts.restarts, opts.epoch,
    )
    return SolveResult(p, slqp(parallel_rates(instance, p), Kq), it, trace, bool(ok))


def solve_parallel_lqp(instance: ParallelChannelInstance, Kq: int) -> SolveResult:
    """Closed-form optimum of the ``Kq``-th smallest rate on parallel channels.

    The ``Kq - 1`` noisiest users get no power; the rest share the budget so
    that their rates are all equal to ``ln(1 + p_total / sum(z[Kq-1:]))``.
    """
    K = instance.K
    if int(Kq) != Kq or not 1 <= Kq <= K:
        raise ValueError(f"Kq must be an integer in [1, {K}]")
    z = instance.z
    r = np.log1p(instance.p_total / z[Kq - 1:].sum())
    p = np.zeros(K)
    p[Kq - 1:] = z[Kq - 1:] * np.expm1(r)
    return SolveResult(p, float(r), 0, np.array([r]), True)
