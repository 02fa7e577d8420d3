"""Invariant suites with fixed seeds, each reporting a measured residual per check."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import minorant_tangency_check, stationarity_check
from .fractional import run_lft, run_qft, solve_parallel_lqp, solve_parallel_slqp
from .hardness import (
    achieving_assignment,
    brute_force_binary_optimum,
    build_instance,
    canonical_graphs,
    coordinate_convexity_margin,
    expected_optimum,
)
from .network import NetworkConfig, ParallelChannelInstance, generate_cellular, parallel_rates
from .percentile import sgqp, slqp, slqp_supergradient
from .solver import water_fill

__all__ = ["Check", "SUITES", "run_suite", "format_report",
           "properties_suite", "oracles_suite", "hardness_suite", "diagnostics_suite"]


@dataclass(frozen=True)
class Check:
    """``residual <= bound`` means the invariant holds."""

    name: str
    residual: float
    bound: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.bound)


def _pos(v) -> float:
    return float(max(v, 0.0))


def properties_suite(n: int = 10_000, k_range=(2, 16), seed: int = 0, tol: float = 1e-9) -> list:
    """Percentile-algebra invariants on ``n`` random vectors per check."""
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(
        ["decomposition", "slqp concavity", "sgqp convexity", "monotonicity", "symmetry",
         "ordering", "permutation invariance", "supergradient inequality"], 0.0)
    for _ in range(n):
        K = int(rng.integers(k_range[0], k_range[1] + 1))
        Kq = int(rng.integers(1, K + 1))
        x = rng.normal(size=K) * rng.choice([1e-2, 1.0, 1e2])
        y = rng.normal(size=K)
        lam = rng.uniform()
        scale = 1.0 + np.abs(x).sum() + np.abs(y).sum()
        if Kq < K:
            worst["decomposition"] = max(worst["decomposition"],
                                         abs(slqp(x, Kq) + sgqp(x, K - Kq) - x.sum()) / scale)
        z = lam * x + (1 - lam) * y
        worst["slqp concavity"] = max(worst["slqp concavity"],
                                      _pos(lam * slqp(x, Kq) + (1 - lam) * slqp(y, Kq) - slqp(z, Kq)) / scale)
        worst["sgqp convexity"] = max(worst["sgqp convexity"],
                                      _pos(sgqp(z, Kq) - lam * sgqp(x, Kq) - (1 - lam) * sgqp(y, Kq)) / scale)
        bump = x.copy()
        bump[rng.integers(K)] += rng.exponential()
        worst["monotonicity"] = max(worst["monotonicity"],
                                    _pos(slqp(x, Kq) - slqp(bump, Kq)) / scale,
                                    _pos(sgqp(x, Kq) - sgqp(bump, Kq)) / scale)
        worst["symmetry"] = max(worst["symmetry"], abs(sgqp(x, Kq) + slqp(-x, Kq)))
        xp = np.abs(x)
        K2 = int(rng.integers(Kq, K + 1))
        worst["ordering"] = max(worst["ordering"],
                                _pos(slqp(xp, Kq) - slqp(xp, K2)) / scale,
                                _pos(sgqp(xp, Kq) - sgqp(xp, K2)) / scale)
        perm = rng.permutation(K)
        worst["permutation invariance"] = max(worst["permutation invariance"],
                                              abs(slqp(x[perm], Kq) - slqp(x, Kq)) / scale,
                                              abs(sgqp(x[perm], Kq) - sgqp(x, Kq)) / scale)
        a = slqp_supergradient(x, Kq)
        worst["supergradient inequality"] = max(worst["supergradient inequality"],
                                                _pos(slqp(y, Kq) - slqp(x, Kq) - a @ (y - x)) / scale)
    return [Check(k, v, tol) for k, v in worst.items()]


def _random_parallel(rng, k_max=10) -> ParallelChannelInstance:
    K = int(rng.integers(2, k_max + 1))
    return ParallelChannelInstance(rng.uniform(0.1, 5.0, K), float(rng.uniform(0.5, 20.0)))


def oracles_suite(n: int = 20, seed: int = 0, rel_tol: float = 1e-3) -> list:
    """Parallel-channel solver against closed forms, plus the subset-enumeration form of SLqP."""
    rng = np.random.default_rng(seed)
    wf = mm = lqp = 0.0
    for _ in range(n):
        inst = _random_parallel(rng)
        ref = parallel_rates(inst, water_fill(inst.z, inst.p_total)).sum()
        got = solve_parallel_slqp(inst, inst.K).value
        wf = max(wf, abs(got - ref) / ref)
        ref1 = math.log1p(inst.p_total / inst.z.sum())
        mm = max(mm, abs(solve_parallel_slqp(inst, 1).value - ref1) / ref1)
        Kq = int(rng.integers(1, inst.K + 1))
        res = solve_parallel_lqp(inst, Kq)
        r = parallel_rates(inst, res.p_star)
        lqp = max(lqp, abs(np.sort(r)[Kq - 1] - res.value) / res.value,
                  _pos(res.p_star.sum() - inst.p_total) / inst.p_total)
    subset = 0.0
    for _ in range(200):
        K = int(rng.integers(1, 9))
        Kq = int(rng.integers(1, K + 1))
        x = rng.normal(size=K)
        ref = min(x[list(c)].sum() for c in itertools.combinations(range(K), Kq))
        subset = max(subset, abs(slqp(x, Kq) - ref))
    return [
        Check("parallel Kq=K vs water-filling (rel)", wf, rel_tol),
        Check("parallel Kq=1 vs max-min closed form (rel)", mm, rel_tol),
        Check("parallel Kq-th smallest rate closed form (rel)", lqp, 1e-12),
        Check("slqp vs minimum over Kq-subsets", subset, 1e-12),
    ]


def hardness_suite(tol: float = 1e-9) -> list:
    """Brute force on the canonical reduction graphs against ``|I| ln(1 + 1/L)``."""
    gap = assign = 0.0
    margin = np.inf
    for g in canonical_graphs():
        inst = build_instance(g)
        p, v = brute_force_binary_optimum(inst, g.Kq)
        exp = expected_optimum(g)
        gap = max(gap, abs(v - exp))
        ref = achieving_assignment(g)
        assign = max(assign, abs(slqp(np.log1p(ref / (ref @ inst.cross + inst.sigma2)), g.Kq) - exp))
        margin = min(margin, coordinate_convexity_margin(g, samples=5, grid=5))
    return [
        Check("brute force vs expected optimum", gap, tol),
        Check("isolated users + MIS achieves the optimum", assign, tol),
        Check("per-coordinate convexity (negated margin)", -margin, 1e-12),
    ]


def diagnostics_suite(n: int = 3, h: float = 1e-4, num_directions: int = 200, seed: int = 0) -> list:
    """MM outputs on small drops: stationarity, monotone traces and tangent-minorant checks."""
    stat = mono = ident = tang = minor = gap = 0.0
    for r in range(n):
        inst = generate_cellular(NetworkConfig(users_per_cell=2, seed=seed + r))
        Kq = inst.K // 2
        for run, name in ((run_qft, "QFT"), (run_lft, "LFT")):
            res, tr = run(inst, Kq, seed=seed + r)
            obj = tr.objective
            mono = max(mono, _pos(-np.min(np.diff(obj)) if len(obj) > 1 else 0.0))
            ident = max(ident, float(np.max(np.abs(tr.aux_objective - obj) / np.maximum(np.abs(obj), 1e-300))))
            stat = max(stat, _pos(stationarity_check(inst, Kq, res.p_star, num_directions, h, seed=r)))
            rep = minorant_tangency_check(inst, Kq, res.p_star, num_directions, h, transform=name, seed=r)
            tang = max(tang, rep.tangency_residual)
            minor = max(minor, _pos(rep.minorization_violation))
            gap = max(gap, rep.value_gap)
    return [
        Check("outer trace decrease", mono, 1e-6),
        Check("aux/original identity after x update (rel)", ident, 1e-12),
        Check("max directional derivative at output", stat, 1e-2),
        Check("tangent slope mismatch", tang, 10 * h),
        Check("minorization violation", minor, 1e-12),
        Check("value gap at expansion point", gap, 1e-12),
    ]


SUITES = {
    "properties": properties_suite,
    "oracles": oracles_suite,
    "hardness": hardness_suite,
    "diagnostics": diagnostics_suite,
}


def run_suite(name: str) -> list:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name]()


def format_report(suite: str, checks) -> str:
    lines = [f"[{suite}]"]
    for c in checks:
        lines.append(f"  {'PASS' if c.passed else 'FAIL'}  {c.name}: residual={c.residual:.3e} bound={c.bound:.1e}")
    return "\n".join(lines)
