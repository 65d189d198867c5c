import logging
import math
from fractions import Fraction

import numpy as np
import pytest

from lepoly.algebra import poly_parse as P
from lepoly.errors import PuiseuxError
from lepoly.puiseux import (
    branch_residual,
    newton_polygon,
    puiseux_branches,
    residual_slope,
    weierstrass_degree,
)


def test_newton_polygon_cusp():
    npg = newton_polygon(P("x^2+y^3"))
    assert npg.vertices == ((0, 3), (2, 0))
    assert [e.slope for e in npg.edges] == [Fraction(3, 2)]
    assert (npg.x_order, npg.y_order) == (0, 0)


def test_newton_polygon_flags_axes():
    npg = newton_polygon(P("2*x"))
    assert npg.edges == ()
    assert npg.x_order == 1 and npg.has_x_axis_branch
    npg = newton_polygon(P("x^2*y+y^4"))
    assert npg.y_order == 1
    assert npg.vertices == ((0, 4), (2, 1))


def test_newton_polygon_rejects_units_and_zero():
    with pytest.raises(ValueError):
        newton_polygon(P("1+x"))
    with pytest.raises(ValueError):
        newton_polygon(P("0"))


def test_branches_of_cusp_are_exact():
    (b,) = puiseux_branches(P("x^2-y^3"))
    assert b.n == 2 and b.exponents == (3,) and b.exact
    assert abs(b.coefficients[0] - 1) < 1e-15
    assert b.first_exponent == Fraction(3, 2)


def test_branches_of_line_and_node():
    (b,) = puiseux_branches(P("x"))
    assert b.is_x_axis and b.n == 1
    bs = puiseux_branches(P("x^2-y^2"))
    assert [(b.n, b.exponents) for b in bs] == [(1, (1,)), (1, (1,))]
    assert sorted(round(b.coefficients[0].real) for b in bs) == [-1, 1]


def test_x_axis_branch_comes_first():
    bs = puiseux_branches(P("x*(x-y^2)"))
    assert bs[0].is_x_axis
    assert bs[1].exponents == (2,)


def test_y_factor_is_dropped_with_warning(caplog):
    with caplog.at_level(logging.WARNING, logger="lepoly"):
        bs = puiseux_branches(P("x^2*y+y^4"))
    assert "y-axis factor" in caplog.text
    assert [b.n for b in bs] == [2]


def test_non_squarefree_raises():
    with pytest.raises(PuiseuxError):
        puiseux_branches(P("x^2*(x-y)"))
    with pytest.raises(ValueError):
        puiseux_branches(P("x^2+y^3"), order=0)


@pytest.mark.parametrize("text", ["x^2+y^3", "x^3-x*y^5+y^7", "x*(x-y^2)", "x^2-y^2-y^3", "(x^2-y^3)*(x-y)"])
def test_ramification_adds_up_to_weierstrass_degree(text):
    p = P(text)
    assert sum(b.n for b in puiseux_branches(p)) == weierstrass_degree(p)


def test_weierstrass_degree_requires_x_regularity():
    with pytest.raises(ValueError):
        weierstrass_degree(P("x*y+y^2"))


def test_truncated_branch_residual_decays_at_the_predicted_rate():
    p = P("x^3-x*y^5+y^7")
    bs = puiseux_branches(p, order=20)
    assert [b.n for b in bs] == [3]
    b = bs[0]
    assert not b.exact
    assert residual_slope(b, p) >= float(b.truncation) - 0.5
    assert branch_residual(b, p, (1e-2) ** (1 / 3)) <= 1e-8


def test_exact_branch_has_zero_residual():
    p = P("x^2-y^3")
    (b,) = puiseux_branches(p)
    assert branch_residual(b, p, 0.1 + 0.05j) == 0.0
    assert residual_slope(b, p) == math.inf


def test_branches_solve_the_curve_numerically():
    p = P("x^3+y^5")
    for b in puiseux_branches(p):
        for th in np.linspace(0, 2 * np.pi, 5):
            w = 0.3 * np.exp(1j * th)
            x, y = b.x_at(w), w ** b.n
            assert abs(x ** 3 + y ** 5) < 1e-12


def test_branches_are_deterministic():
    p = P("x^3-x*y^5+y^7")
    a = [b.to_dict() for b in puiseux_branches(p)]
    b = [b.to_dict() for b in puiseux_branches(p)]
    assert a == b
