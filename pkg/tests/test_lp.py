import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from poakit import lp
from poakit.errors import NumericOverflow, ValidationError
from poakit.lp import EQ, GE, LE, LPProblem, Status, row_slack, solve

ROUTES = ("primal", "dual", "auto")


def problem(obj, rows, lower=None, upper=None):
    p = LPProblem(obj, lower=lower, upper=upper)
    for coeffs, rel, rhs in rows:
        p.add_row(coeffs, rel, rhs)
    return p


@pytest.mark.parametrize("route", ROUTES)
def test_single_binding_row(route):
    sol = solve(problem([1], [([1], LE, 1)]), route=route)
    assert sol.status is Status.OPTIMAL
    assert sol.primal == [1] and sol.dual == [1] and sol.objective == 1


@pytest.mark.parametrize("route", ROUTES)
def test_contradictory_rows_infeasible(route):
    sol = solve(problem([1], [([1], GE, 2), ([1], LE, 1)]), route=route)
    assert sol.status is Status.INFEASIBLE


@pytest.mark.parametrize("route", ROUTES)
def test_free_variable_without_rows_unbounded(route):
    assert solve(LPProblem([1]), route=route).status is Status.UNBOUNDED


def test_bounds_alone_can_make_it_bounded():
    sol = solve(LPProblem([1, -1], lower=[None, -3], upper=[5, None]))
    assert sol.optimal and sol.objective == 8 and sol.dual == []


@pytest.mark.parametrize("arithmetic", ["rational", "float"])
def test_textbook_lp_with_duals(arithmetic):
    # max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3, x, y >= 0
    p = problem([3, 2], [([1, 1], LE, 4), ([1, 3], LE, 6), ([1, 0], LE, 3)], lower=[0, 0])
    sol = solve(p, arithmetic)
    assert sol.objective == pytest.approx(11)
    assert sol.primal == pytest.approx([3, 1])
    assert sol.dual == pytest.approx([2, 0, 1])
    assert set(sol.binding_rows) == {0, 1, 2}   # degenerate vertex: x + 3y = 6 is tight too


def test_equality_and_ge_sign_conventions():
    # max x + y  s.t. x + y == 2, x >= 1 (as a row), y free
    p = problem([1, 2], [([1, 1], EQ, 2), ([1, 0], GE, 1)])
    sol = solve(p)
    assert sol.primal == [1, 1] and sol.objective == 3
    assert sol.dual[1] <= 0   # >= rows carry nonpositive duals in a maximization
    assert sol.dual == [2, -1]


def test_length_mismatch_rejected():
    p = LPProblem([1, 1])
    with pytest.raises(ValidationError):
        p.add_row([1], LE, 1)
        solve(p)


def test_degenerate_duplicated_rows_terminate():
    rows = []
    for _ in range(6):
        rows += [([1, 1, 0], LE, 1), ([1, 0, 1], LE, 1), ([0, 1, 1], LE, 1), ([1, 1, 1], LE, Fraction(3, 2))]
    for route in ROUTES:
        sol = solve(problem([1, 1, 1], rows, lower=[0, 0, 0]), route=route)
        assert sol.optimal and sol.objective == Fraction(3, 2)


def test_bit_limit_raises_overflow():
    rng = random.Random(3)
    rows = [([Fraction(rng.randint(1, 10**6), rng.randint(1, 10**6)) for _ in range(4)], LE,
             Fraction(rng.randint(1, 10**6), rng.randint(1, 10**6))) for _ in range(12)]
    p = problem([1, 1, 1, 1], rows, lower=[0] * 4)
    with pytest.raises(NumericOverflow):
        solve(p, max_bits=8)
    with lp.bit_limit(8), pytest.raises(NumericOverflow):
        solve(p)
    assert solve(p).optimal


def _check_certificate(p, sol):
    """Feasibility, complementary slackness and strong duality in exact arithmetic."""
    for i in range(len(p.rows)):
        slack = row_slack(p, sol, i)
        assert slack >= 0
        if sol.dual[i] != 0:
            assert slack == 0
    for j in range(p.n_vars):
        lo, hi = p.bounds(j)
        assert lo is None or sol.primal[j] >= lo
        assert hi is None or sol.primal[j] <= hi
    # dual objective: with only x >= 0 bounds, sum_i y_i b_i
    assert sum(y * r.rhs for y, r in zip(sol.dual, p.rows)) == sol.objective
    # reduced costs: c_j - sum_i y_i a_ij <= 0 for x_j >= 0, with equality when x_j > 0
    for j in range(p.n_vars):
        red = p.objective[j] - sum(y * r.coeffs[j] for y, r in zip(sol.dual, p.rows))
        assert red <= 0
        if sol.primal[j] > 0:
            assert red == 0


small = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_random_lps_certificates_and_routes_agree(data):
    nv = data.draw(st.integers(1, 3))
    m = data.draw(st.integers(1, 6))
    obj = data.draw(st.lists(small, min_size=nv, max_size=nv))
    rows = []
    for _ in range(m):
        coeffs = data.draw(st.lists(small, min_size=nv, max_size=nv))
        rows.append((coeffs, LE, data.draw(st.fractions(0, 5, max_denominator=6))))
    p = problem(obj, rows, lower=[0] * nv)
    results = {r: solve(p, route=r) for r in ROUTES}
    statuses = {s.status for s in results.values()}
    assert len(statuses) == 1
    if Status.OPTIMAL in statuses:
        values = {s.objective for s in results.values()}
        assert len(values) == 1
        for s in results.values():
            _check_certificate(p, s)
        fl = solve(p, "float")
        assert fl.optimal
        exact = results["auto"].objective
        assert abs(fl.objective - float(exact)) <= 1e-7 * max(1, abs(float(exact)))
