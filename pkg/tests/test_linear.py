"""Exact rational predicate algebra: boolean ops, elimination, budgets."""

import random
from fractions import Fraction
from math import gcd

import pytest

from regionmc.linear import (
    BudgetError,
    LinearPredicate,
    Space,
    make_constraint,
    parse_constraint,
    parse_predicate,
)

XY = Space(("x", "y"))
XYZ = Space(("x", "y", "z"))


def pred(text, space=XY):
    return parse_predicate(space, text)


def equal(a, b):
    return a.diff(b).is_empty() and b.diff(a).is_empty()


def grid(space, lo=Fraction(-5, 2), hi=Fraction(5, 2), step=Fraction(1, 4)):
    values = []
    v = lo
    while v <= hi:
        values.append(v)
        v += step
    points = [()]
    for _ in space.names:
        points = [p + (v,) for p in points for v in values]
    return points


def test_conflicting_bounds_are_empty():
    assert pred("x >= 0 & x <= -1").is_empty()
    assert not pred("x >= 0 & x <= 0").is_empty()


def test_diff_keeps_the_boundary():
    boundary = pred("x >= 0").diff(pred("x > 0"))
    assert equal(boundary, pred("x = 0"))
    assert boundary.evaluate((Fraction(0), Fraction(0)))
    assert not boundary.evaluate((Fraction(1, 2), Fraction(0)))


def test_constraint_coefficients_are_primitive():
    c = parse_constraint(XY, "2*x + 4*y <= 6")
    nums = [k for k in c.coeffs if k != 0]
    assert all(k.denominator == 1 for k in c.coeffs)
    assert gcd(*(abs(int(k)) for k in nums)) == 1


def _random_cells(rng, space, max_cells=3, max_constraints=3):
    cells = []
    for _ in range(rng.randint(1, max_cells)):
        cell = []
        for _ in range(rng.randint(1, max_constraints)):
            coeffs = [Fraction(rng.randint(-2, 2)) for _ in space.names]
            if all(k == 0 for k in coeffs):
                coeffs[rng.randrange(len(coeffs))] = Fraction(1)
            rel = rng.choice(["<", "<=", "=", ">=", ">"])
            cell.append(make_constraint(space, coeffs, rel, rng.randint(-2, 2)))
        cells.append(cell)
    return cells


def _raw_eval(cells, point):
    return any(all(c.evaluate(point) for c in cell) for cell in cells)


def test_membership_agrees_with_direct_substitution_on_grid():
    rng = random.Random(20)
    points = grid(XY)
    for _ in range(40):
        cells = _random_cells(rng, XY)
        p = LinearPredicate.from_cells(XY, cells)
        for pt in points:
            assert p.evaluate(pt) == _raw_eval(cells, pt)


def test_boolean_operations_are_pointwise():
    rng = random.Random(21)
    points = grid(XY)
    for _ in range(25):
        a_cells = _random_cells(rng, XY)
        b_cells = _random_cells(rng, XY)
        a = LinearPredicate.from_cells(XY, a_cells)
        b = LinearPredicate.from_cells(XY, b_cells)
        both = a.and_(b)
        either = a.or_(b)
        only = a.diff(b)
        for pt in points:
            va, vb = _raw_eval(a_cells, pt), _raw_eval(b_cells, pt)
            assert both.evaluate(pt) == (va and vb)
            assert either.evaluate(pt) == (va or vb)
            assert only.evaluate(pt) == (va and not vb)


def test_eliminate_drops_an_equated_variable():
    assert equal(pred("x = y").eliminate(["y"]), LinearPredicate.true(XY))


def test_eliminate_projects_a_bounded_variable():
    got = pred("0 <= y & y <= x").eliminate(["y"])
    assert equal(got, pred("x >= 0"))


def _exists_z(cells, x, y):
    """Independent one-variable feasibility: bound z from raw constraints."""
    for cell in cells:
        lo, lo_strict = None, False
        hi, hi_strict = None, False
        ok = True
        for c in cell.constraints if hasattr(cell, "constraints") else cell:
            kz = c.coeffs[2]
            rest = c.bound - c.coeffs[0] * x - c.coeffs[1] * y
            if kz == 0:
                if not c.evaluate((x, y, Fraction(0))):
                    ok = False
                    break
                continue
            val = rest / kz
            bounds = [(c.rel, kz > 0)]
            if c.rel == "=":
                bounds = [("<=", True), ("<=", False)]
            for rel, is_upper in bounds:
                strict = rel == "<"
                if is_upper:
                    if hi is None or val < hi or (val == hi and strict):
                        hi, hi_strict = val, strict
                else:
                    if lo is None or val > lo or (val == lo and strict):
                        lo, lo_strict = val, strict
        if not ok:
            continue
        if lo is None or hi is None or lo < hi:
            return True
        if lo == hi and not lo_strict and not hi_strict:
            return True
    return False


def test_eliminate_agrees_with_pointwise_feasibility_in_3d():
    rng = random.Random(22)
    points = grid(XY, step=Fraction(1, 2))
    for _ in range(30):
        cells = _random_cells(rng, XYZ, max_cells=2, max_constraints=4)
        p = LinearPredicate.from_cells(XYZ, cells)
        projected = p.eliminate(["z"])
        for x, y in points:
            want = _exists_z(cells, x, y)
            assert projected.evaluate((x, y, Fraction(0))) == want, (x, y)


def test_transfer_substitutes_terms_pointwise():
    from regionmc.linear import LinearTerm

    p = pred("x + y <= 2")
    shifted = p.transfer(XY, {"x": LinearTerm.var(XY, "y").scaled(2)})
    for x, y in grid(XY, step=Fraction(1, 2)):
        assert shifted.evaluate((x, y)) == p.evaluate((2 * y, y))


def test_rename_moves_support():
    q = pred("x >= 1").rename(XY, {"x": "y"})
    assert q.evaluate((Fraction(0), Fraction(1)))
    assert not q.evaluate((Fraction(1), Fraction(0)))


def test_integer_dictionaries_tighten_strict_gaps():
    ints = Space(("a", "b"), integer=frozenset(("a", "b")))
    gap = parse_predicate(ints, "a < b & b < a + 1")
    assert gap.is_empty()
    rationals = parse_predicate(Space(("a", "b")), "a < b & b < a + 1")
    assert not rationals.is_empty()


def test_cell_budget_raises():
    rng = random.Random(23)
    a = LinearPredicate.from_cells(XY, _random_cells(rng, XY, 4, 2))
    b = LinearPredicate.from_cells(XY, _random_cells(rng, XY, 4, 2))
    with pytest.raises(BudgetError) as err:
        for _ in range(6):
            a = a.diff(b, budget=2)
            b = b.or_(a.diff(pred("x = 0"), budget=2), budget=2)
    assert err.value.size > err.value.budget == 2


def test_subsumed_cells_are_absorbed():
    p = LinearPredicate.from_cells(
        XY,
        [[parse_constraint(XY, "x >= 0")],
         [parse_constraint(XY, "x >= 0"), parse_constraint(XY, "y >= 0")]])
    assert p.size() == 1
