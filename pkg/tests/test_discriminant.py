import cmath

import numpy as np
import pytest

from lepoly.algebra import NumericPoly
from lepoly.algebra import poly_parse as P
from lepoly.discriminant import (
    GeometryOptions,
    escape_points,
    polar_series,
    select_geometry,
    solve_branch_points,
)
from lepoly.errors import GeometryError, HypothesisError

# Two polar branches, x = 0 and x = -y/3 + gamma*y^2, whose discriminant
# images pass within 1e-5 of each other on the first automatic t.
ADVERSARIAL = "x^3+1/2*x^2*y-58240359/2703278*x^2*y^2+y^3"


def _series(f, g="1"):
    return [s for _, s in polar_series(P(f), P(g))]


def test_v_series_leading_terms():
    (s,) = _series("x^2+y^3")
    assert (s.n, s.leading) == (1, (3, 0, 1 + 0j))
    (s,) = _series("x^2+y^3", "y")
    assert s.leading == (3, 1, 1 + 0j)
    (s,) = _series("x^2-y^2", "y")
    assert s.leading == (2, 1, -1 + 0j)
    (s,) = _series("x^3+y^4")
    assert s.multiplicity == 2 and s.leading == (4, 0, 1 + 0j)


def test_v_series_of_higher_singularity():
    (s,) = _series("x^3-x*y^5+y^7")
    assert s.n == 2
    assert s.leading == (14, 0, 1 + 0j)
    # the polar curve 3x^2 = y^5 has an exact branch, so v is a finite sum
    assert s.branch.exact and s.valid_order is None
    assert [t[:2] for t in s.expanded] == [(14, 0), (15, 0)]


def test_v_series_evaluator_matches_expansion():
    (s,) = _series("x^2-y^2", "y+y^2")
    w = 0.02 * np.exp(1j * np.linspace(0, 6, 7))
    assert np.allclose(s(w), s.expanded_eval(w), rtol=1e-12, atol=0)


def test_branch_points_of_holomorphic_cusp():
    (s,) = _series("x^2+y^3")
    res = solve_branch_points(s, 1e-6, 0.05)
    assert len(res.points) == 3 and res.winding == 3
    assert sorted(round(cmath.phase(p.y), 6) for p in res.points) == sorted(
        round(a, 6) for a in (0.0, 2 * np.pi / 3, -2 * np.pi / 3))
    assert all(abs(abs(p.y) - 0.01) < 1e-12 for p in res.points)


def test_branch_points_count_is_p_minus_q():
    (s,) = _series("x^2+y^3", "y")   # v = w^3 conj(w)
    res = solve_branch_points(s, 1e-6, 0.05)
    assert len(res.points) == 2 and res.signed_count == 2
    assert all(abs(abs(p.y) - 1e-3 ** 0.5) < 1e-12 for p in res.points)


def test_balanced_leading_exponents_raise():
    (s,) = _series("x^2+y", "y")     # v = -|w|^2 to leading order
    assert s.leading[0] == s.leading[1]
    with pytest.raises(HypothesisError):
        solve_branch_points(s, 1e-6, 0.05)
    with pytest.raises(ValueError):
        solve_branch_points(_series("x^2+y^3")[0], 0, 0.05)
    assert solve_branch_points(None, 1e-6, 0.05).points == []


def test_escape_points():
    pts = escape_points(P("y*(y-1/100)*(y-1)"), 0.05)
    assert [(p.id, p.y, p.exact) for p in pts] == [("e0", 0j, True), ("e1", 0.01 + 0j, True)]
    assert escape_points(P("1"), 0.05) == []
    assert len(escape_points(P("y^2+1/10000"), 0.05)) == 2
    with pytest.raises(ValueError):
        escape_points(P("x+y"), 0.05)


def test_select_geometry_cusp():
    geo = select_geometry(P("x^2+y^3"), P("1"), _series("x^2+y^3"))
    assert geo.eta1 == pytest.approx(1 / 20)
    assert geo.lam == pytest.approx(geo.eta1 / 2)
    assert geo.attempts == 1
    assert sorted(geo.order) == ["p0", "p1", "p2"]
    assert all(abs(p.y) < geo.eta1 for p in geo.points)


def test_select_geometry_annulus():
    geo = select_geometry(P("x"), P("y"), [])
    assert [p.id for p in geo.points] == ["e0"]
    assert abs(geo.t) < geo.eps * geo.eta1


def test_select_geometry_respects_fixed_t():
    geo = select_geometry(P("x^2+y^3"), P("1"), _series("x^2+y^3"), GeometryOptions(t=2e-6j))
    assert geo.t == 2e-6j and geo.eta2 == pytest.approx(2e-6)


def test_polar_points_solve_the_discriminant_equation():
    for f, g in (("x^2+y^3", "1"), ("x^2+y^3", "y"), ("x^3-x*y^5+y^7", "1")):
        F, G = P(f), P(g)
        geo = select_geometry(F, G, _series(f, g))
        fn, gn = NumericPoly(F), NumericPoly(G)
        for p in geo.polar_points:
            v = fn(p.x, p.y) * np.conj(gn(0j, p.y))
            assert abs(v - geo.t) <= 1e-8 * abs(geo.t)


def test_adversarial_germ_needs_a_retry():
    geo = select_geometry(P(ADVERSARIAL), P("1"), _series(ADVERSARIAL))
    assert geo.attempts == 2
    assert any("closer than sep_min" in msg for msg in geo.diagnostics["failures"])
    ys = [p.y for p in geo.points]
    seps = [abs(a - b) for i, a in enumerate(ys) for b in ys[i + 1:]]
    assert min(seps) >= geo.sep_min
    assert geo.eta1 == pytest.approx(0.05)


def test_adversarial_germ_fails_with_fixed_t():
    series = _series(ADVERSARIAL)
    auto = select_geometry(P(ADVERSARIAL), P("1"), series)
    t_first = auto.eta2
    with pytest.raises(GeometryError):
        select_geometry(P(ADVERSARIAL), P("1"), series, GeometryOptions(t=t_first))
