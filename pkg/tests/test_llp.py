import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from drcp.llp import LocallyFeasible, LlpResult, Violated, feasibility_verdict, solve_llp
from drcp.problem import SECTION5_P, RobustConstraint


def scalar_constraint(fn, lo, hi, L=None):
    return RobustConstraint(lambda x, y: fn(y) + 0.0 * x[0], lambda x, y: np.zeros(1), lo, hi,
                            lipschitz_y=L)


def test_interior_maximum_at_optimum(sec5):
    x = np.array([0.0, math.sqrt(7) / 4])
    r = solve_llp(sec5.constraints[0], x)
    assert r.y_max == pytest.approx(math.sqrt(7) / 4, abs=1e-9)
    assert r.g_max == pytest.approx(0.0, abs=1e-12)


def test_boundary_maximum_clipped(sec5):
    r = solve_llp(sec5.constraints[0], np.array([0.0, 2.0]))
    assert r.y_max == 1.0
    assert r.g_max == pytest.approx(2.5625, abs=1e-12)


def test_constant_in_y_picks_lower_end():
    r = solve_llp(scalar_constraint(lambda y: 0.0 * y + 3.0, -1.0, 1.0), np.zeros(1))
    assert (r.y_max, r.g_max) == (-1.0, 3.0)


def test_ties_go_to_smallest_y():
    r = solve_llp(scalar_constraint(lambda y: y * y, -1.0, 1.0), np.zeros(1))
    assert r.y_max == -1.0


def test_multimodal_global_peak():
    # peaks of sin(20 y) + 0.1 y on [0, 2]; the last full peak wins
    fn = lambda y: np.sin(20 * y) + 0.1 * y
    r = solve_llp(scalar_constraint(fn, 0.0, 2.0), np.zeros(1))
    ys = np.linspace(0, 2, 2_000_001)
    assert r.g_max == pytest.approx(fn(ys).max(), abs=1e-10)
    assert r.y_max == pytest.approx(ys[np.argmax(fn(ys))], abs=1e-5)


def test_degenerate_interval():
    r = solve_llp(scalar_constraint(lambda y: 2.0 * y, 0.5, 0.5), np.zeros(1))
    assert (r.y_max, r.g_max) == (0.5, 1.0)


def test_grid_size_guard(sec5):
    with pytest.raises(ValueError):
        solve_llp(sec5.constraints[0], np.zeros(2), grid_n=2)


def test_certified_gap(sec5, fig9):
    assert solve_llp(sec5.constraints[0], np.zeros(2)).certified_gap == pytest.approx(4.0 * 0.001 / 2)
    r = solve_llp(fig9.constraints[0], np.array([1.0, 0.5]))
    assert r.certified_gap == -1.0 and not r.certified


def test_scalar_only_callable():
    # constraint that cannot broadcast over y arrays
    g = RobustConstraint(lambda x, y: float(-(y - 0.3) ** 2), lambda x, y: np.zeros(1), 0.0, 1.0)
    assert solve_llp(g, np.zeros(1), grid_n=101).y_max == pytest.approx(0.3, abs=1e-8)


@given(st.floats(-2, 2), st.floats(-1, 1), st.integers(0, 5))
def test_analytic_worst_case(sec5, x1, x2, i):
    r = solve_llp(sec5.constraints[i], np.array([x1, x2]))
    y = min(max(x2, -1.0), 1.0)
    assert r.y_max == pytest.approx(y, abs=1e-8)
    assert r.g_max == pytest.approx((x1 - SECTION5_P[i]) ** 2 + 2 * y * x2 - y * y - 1, abs=1e-8)


@given(st.floats(0, 2), st.floats(0, 1))
def test_nonconvex_matches_dense_grid(fig9, x1, x2):
    g = fig9.constraints[0]
    x = np.array([x1, x2])
    r = solve_llp(g, x)
    brute = g(x, np.linspace(0, 2, 200_001)).max()
    assert r.g_max >= brute - 1e-9
    assert r.g_max == pytest.approx(g(x, r.y_max), abs=0)
    assert 0.0 <= r.y_max <= 2.0


@given(st.floats(-2, 2), st.floats(-1, 1), st.integers(0, 5), st.floats(1e-6, 10))
def test_cut_separates_point(sec5, x1, x2, i, eps):
    g = sec5.constraints[i]
    x = np.array([x1, x2])
    v = feasibility_verdict(solve_llp(g, x))
    if isinstance(v, Violated):
        assert g(x, v.y_max) > -eps


def test_verdicts():
    assert isinstance(feasibility_verdict(LlpResult(0.0, 0.2, 1.0)), LocallyFeasible)
    assert feasibility_verdict(LlpResult(2.5625, 1.0, 1.0)) == Violated(1.0, 2.5625)
    assert isinstance(feasibility_verdict(LlpResult(-0.4375, 0.0, 1.0)), LocallyFeasible)


def test_origin_worst_case(sec5):
    # at x = 0 the worst case is y = 0 with value p^2 - 1
    r = solve_llp(sec5.constraints[0], np.zeros(2))
    assert r.g_max == pytest.approx(0.5625 - 1.0)
    assert r.y_max == pytest.approx(0.0, abs=1e-12)
