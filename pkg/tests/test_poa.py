import random
from fractions import Fraction

import pytest

from randgames import random_type, random_type_set
from poakit.errors import ValidationError
from poakit.poa import (IndexTuple, enumerate_index_set, fixed_rule_panel, gamma_value, in_index_set, optimal_rules,
                        poa_lp, poa_lp_problem)
from poakit.resource_types import basis_types, make_type, type_set

X2X = make_type("x^2,x", 3, [1, 4, 9], [1, 2, 3])
XX = make_type("x,x", 3, [1, 2, 3], [1, 2, 3])


def test_index_set_small_cases():
    want = [IndexTuple(0, 1, 0), IndexTuple(1, 0, 0), IndexTuple(1, 1, 1)]
    assert enumerate_index_set(1, True) == want == enumerate_index_set(1, False)
    assert len(enumerate_index_set(2, True)) == len(enumerate_index_set(2, False)) == 9
    t = IndexTuple(2, 2, 1)
    assert in_index_set(t, 4) and not in_index_set(t, 4, restricted=True)
    assert t in enumerate_index_set(4, False) and t not in enumerate_index_set(4, True)


def test_index_set_sizes_and_order():
    full, restricted = enumerate_index_set(25, False), enumerate_index_set(25, True)
    assert len(full) == 3275 and len(restricted) == 1251
    assert full == sorted(full) and set(restricted) <= set(full)


def test_affine_exact():
    res = poa_lp(basis_types("affine", 25))
    assert res.poa == Fraction(5, 2) and res.lam == Fraction(5, 3) and res.mu == Fraction(1, 3)
    assert res.attained and res.poa * res.rho == 1
    assert all(in_index_set(b.index, 25, restricted=True) for b in res.binding)


def test_mixed_type_examples():
    assert poa_lp(type_set(XX)).poa == 2
    mixed = poa_lp(type_set(X2X, XX))
    assert mixed.poa == Fraction(13, 5)
    assert mixed.poa > max(poa_lp(type_set(X2X)).poa, poa_lp(type_set(XX)).poa)


@pytest.mark.parametrize("n, want", [(1, 1), (2, 2), (3, Fraction(5, 2)), (4, Fraction(5, 2))])
def test_affine_small_n(n, want):
    assert poa_lp(basis_types("affine", n)).poa == want


def test_gamma_matches_lp():
    assert gamma_value(type_set(make_type("x", 1, [1], [1]))) == 1
    assert gamma_value(basis_types("affine", 25)) == Fraction(5, 2)
    rng = random.Random(31)
    for _ in range(40):
        T = random_type_set(rng, rng.randint(1, 4), rng.randint(1, 2))
        res = poa_lp(T)
        if res.bounded:
            assert gamma_value(T) == res.poa


def test_lambda_mu_satisfy_every_constraint():
    rng = random.Random(4)
    for _ in range(30):
        T = random_type_set(rng, rng.randint(1, 4), rng.randint(1, 2))
        res = poa_lp(T)
        if not res.attained:
            continue
        for t in T:
            for x, y, z in enumerate_index_set(T.n, False):
                lhs = (z - x) * t.f[x] + (y - z) * t.f[x + 1] + t.c[x]
                assert lhs <= res.lam * t.c[y] + res.mu * t.c[x]


def test_unbounded_reported_not_raised():
    res = poa_lp(type_set(make_type("free", 2, [1, 1], [0, 0])))
    assert res.poa is None and not res.bounded
    with pytest.raises(ValidationError):
        poa_lp(type_set(make_type("zero", 2, [0, 0], [1, 1])))


def test_float_mode_agrees():
    for family in ("affine", "quadratic", "sqrt"):
        T = basis_types(family, 6)
        exact, approx = poa_lp(T), poa_lp(T, arithmetic="float")
        assert approx.poa == pytest.approx(float(exact.poa), rel=1e-7)


def test_restriction_and_dominance_on_random_sets():
    rng = random.Random(17)
    for _ in range(25):
        n = rng.randint(2, 5)
        T = random_type_set(rng, n, 2)
        res = poa_lp(T)
        assert res.poa == poa_lp(T, restricted=False).poa
        singles = [poa_lp(type_set(t)).poa for t in T]
        if res.bounded and None not in singles:
            assert res.poa >= max(singles)


def test_scaling_and_monotonicity():
    rng = random.Random(23)
    for _ in range(20):
        t = random_type(rng, "t", 4)
        alpha = Fraction(rng.randint(1, 50), rng.randint(1, 7))
        assert poa_lp(type_set(t)).poa == poa_lp(type_set(t.scaled_rule(alpha))).poa
        smaller = make_type("t", 3, t.c[1:4], t.f[1:4])
        lo, hi = poa_lp(type_set(smaller)).poa, poa_lp(type_set(t)).poa
        if lo is not None and hi is not None:
            assert hi >= lo


def test_problem_shape():
    p = poa_lp_problem(basis_types("affine", 3))
    assert p.n_vars == 2 and len(p.rows) == 2 * len(enumerate_index_set(3))


def test_report_json():
    data = poa_lp(type_set(XX)).to_json()
    assert data["poa"] == "2" and data["types"] == ["x,x"]
    assert {"type", "x", "y", "z", "dual"} <= set(data["binding"][0])


# --------------------------------------------------------------------------
# rule design


def test_design_linear_single_player():
    rules = optimal_rules([[1]], 1)
    assert rules.rules[0].f_star == (1,) and rules.rules[0].rho == 1 and rules.poa == 1


def test_design_round_trip():
    rules = optimal_rules([[1, 4, 9], [1, 2, 3]], 3)
    assert rules.poa == max(1 / r.rho for r in rules.rules) == Fraction(21, 11)
    assert poa_lp(rules.type_set()).poa == rules.poa
    assert rules.rules[1].f_star == (1, 1, 1)


def test_design_dominates_fixed_rules():
    rng = random.Random(3)
    curves = [[1, 4, 9], [1, 8, 27]] + [sorted(Fraction(rng.randint(1, 90), 9) for _ in range(3)) for _ in range(8)]
    for c in curves:
        designed = optimal_rules([c], 3).poa
        for name, f in fixed_rule_panel(c).items():
            fixed = poa_lp(type_set(make_type(name, 3, c, f))).poa
            if fixed is not None:
                assert designed <= fixed


def test_nonneg_flag():
    free = optimal_rules([[1, 4, 9]], 3)
    constrained = optimal_rules([[1, 4, 9]], 3, nonneg=True)
    assert constrained.poa >= free.poa
    assert constrained.rules[0].nonnegative
    assert free.to_json()["rules"][0]["f"] == ["1", "31/21", "13/7"]


def test_panel():
    assert fixed_rule_panel([1, 4, 9]) == {"average": [1, 2, 3], "marginal": [1, 3, 5]}
