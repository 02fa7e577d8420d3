import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from slqp.solver import FeasibleSet, NonConvergenceWarning, SolverOptions, maximize_concave, project, water_fill


def simplex_cap_oracle(v, cap):
    """Projection onto {p >= 0, sum p <= cap} by bisection on the shift."""
    w = np.maximum(v, 0)
    if w.sum() <= cap:
        return w
    lo, hi = 0.0, float(np.max(v))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.maximum(v - mid, 0).sum() > cap:
            lo = mid
        else:
            hi = mid
    return np.maximum(v - hi, 0)


def water_fill_oracle(z, P):
    lo, hi = 0.0, P + max(z)
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        if np.maximum(mu - np.asarray(z), 0).sum() > P:
            hi = mu
        else:
            lo = mu
    return np.maximum(lo - np.asarray(z), 0)


class TestProjection:
    def test_box(self):
        fs = FeasibleSet.box([0, 0], [1, 2])
        np.testing.assert_array_equal(project(fs, [-1.0, 3.0]), [0.0, 2.0])

    @given(arrays(np.float64, st.integers(1, 12), elements=st.floats(-50, 50)), st.floats(0.1, 20))
    def test_simplex_cap(self, v, cap):
        fs = FeasibleSet.simplex_cap(cap, v.size)
        got = project(fs, v)
        assert np.all(got >= 0)
        assert got.sum() <= cap * (1 + 1e-12)
        np.testing.assert_allclose(got, simplex_cap_oracle(v, cap), atol=1e-9)

    def test_idempotent(self, rng):
        fs = FeasibleSet.simplex_cap(3.0, 5)
        p = project(fs, rng.normal(size=5) * 4)
        np.testing.assert_allclose(project(fs, p), p)

    def test_bad_sets(self):
        with pytest.raises(ValueError):
            FeasibleSet.box([1.0], [0.0])
        with pytest.raises(ValueError):
            FeasibleSet.simplex_cap(0.0, 3)
        with pytest.raises(ValueError):
            project(FeasibleSet.box([0.0], [1.0]), [0.0, 1.0])


class TestOptions:
    @pytest.mark.parametrize("kw", [dict(max_iters=0), dict(tol=0.0), dict(a0=-1.0), dict(window=0),
                                    dict(restarts=-1), dict(epoch=-5)])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            SolverOptions(**kw)


class TestMaximizeConcave:
    def test_quadratic_interior(self):
        c = np.array([0.3, 0.7, 0.1])
        res = maximize_concave(lambda p: (-np.sum((p - c) ** 2), -2 * (p - c)), FeasibleSet.box(np.zeros(3), np.ones(3)))
        np.testing.assert_allclose(res.p_star, c, atol=1e-3)
        assert res.converged

    def test_nonsmooth_min_on_simplex(self):
        # max min_k p_k / w_k over sum p <= 1: p proportional to w.
        w = np.array([1.0, 2.0, 3.0])

        def f(p):
            r = p / w
            k = int(np.argmin(r))
            g = np.zeros(3)
            g[k] = 1 / w[k]
            return r[k], g

        res = maximize_concave(f, FeasibleSet.simplex_cap(1.0, 3))
        np.testing.assert_allclose(res.p_star, w / w.sum(), atol=1e-3)
        np.testing.assert_allclose(res.value, 1 / w.sum(), rtol=1e-3)

    def test_trace_monotone(self, rng):
        A = rng.normal(size=(6, 4))

        def f(p):
            v = A @ p
            k = int(np.argmin(v))
            return v[k], A[k]

        res = maximize_concave(f, FeasibleSet.box(-np.ones(4), np.ones(4)))
        assert np.all(np.diff(res.trace) >= 0)
        assert res.trace[-1] == res.value

    def test_domain_backtracking(self):
        # log(1 - p) with the box exceeding the domain; the optimum is at the far feasible corner of log.
        res = maximize_concave(lambda p: (np.log(p[0]) + np.log(2 - p[0]) if 0 < p[0] < 2 else -np.inf,
                                          np.array([1 / p[0] - 1 / (2 - p[0])])),
                               FeasibleSet.box([0.0], [5.0]), init=[0.5])
        np.testing.assert_allclose(res.p_star, [1.0], atol=1e-3)

    def test_nonconvergence_warning(self):
        with pytest.warns(NonConvergenceWarning):
            res = maximize_concave(lambda p: (-np.sum(p**2), -2 * p), FeasibleSet.box(-np.ones(2), np.ones(2)),
                                   SolverOptions(max_iters=3), init=[0.9, 0.9])
        assert not res.converged
        assert res.iterations == 3

    def test_bad_init(self):
        with pytest.raises(ValueError):
            maximize_concave(lambda p: (0.0, 0 * p), FeasibleSet.box([0.0], [1.0]), init=[np.nan])


class TestWaterFill:
    def test_example(self):
        np.testing.assert_allclose(water_fill([0.5, 1.5], 1.0), [1.0, 0.0])

    @given(arrays(np.float64, st.integers(1, 10), elements=st.floats(0.01, 10)), st.floats(0.01, 50))
    def test_matches_bisection(self, z, P):
        p = water_fill(z, P)
        np.testing.assert_allclose(p.sum(), P, rtol=1e-10)
        np.testing.assert_allclose(p, water_fill_oracle(z, P), atol=1e-8 * (1 + P))

    def test_validation(self):
        with pytest.raises(ValueError):
            water_fill([1.0, 0.0], 1.0)
        with pytest.raises(ValueError):
            water_fill([1.0], 0.0)
