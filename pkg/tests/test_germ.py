import numpy as np
import pytest

from lepoly.algebra import NumericPoly
from lepoly.algebra import poly_parse as P
from lepoly.germ import (
    check_hypotheses,
    critical_set_h,
    distance_to_sigma,
    jacobian_minors,
    jacobian_sigma_min,
    polar_components,
    polar_curve,
    real_jacobian,
    sample_rank_deficient,
    sigma_decomposition,
)


def test_critical_set_h_example():
    h = critical_set_h(P("x^2+y^3"), P("y"))
    assert h.is_real()
    assert str(h) == "(-4)*x*xb*y*yb"


def test_critical_set_h_is_real_valued():
    rng = np.random.default_rng(1)
    f, g = P("x^3-x*y^2+(1+i)*y^4"), P("y+2*y^2")
    h = critical_set_h(f, g)
    for _ in range(20):
        x, y = rng.normal(size=2) + 1j * rng.normal(size=2)
        v = h(x, y)
        assert abs(v.imag) <= 1e-12 * max(1.0, abs(v))


def test_polar_curve_examples():
    assert polar_curve(P("x^2+y^3"), P("1")) == P("x")
    assert polar_curve(P("x*y+y^2"), P("1")).is_constant()
    assert polar_curve(P("x"), P("y")).is_constant()
    # f_x = 2x is shared with nothing; the cusp polar survives for g = y
    assert polar_components(P("x^2+y^3"), P("y")) == [(P("x"), 1)]


def test_polar_components_of_higher_singularity():
    (comp, k), = polar_components(P("x^3-x*y^5+y^7"), P("1"))
    assert k == 1
    assert comp.normalized() == P("y^5-3*x^2").normalized()
    (comp, k), = polar_components(P("x^3+y^4"), P("1"))
    assert (comp, k) == (P("x"), 2)


def test_sigma_decomposition_example():
    s = sigma_decomposition(P("x^2+y^3"), P("y"))
    assert s.sigma_f.at_origin and s.sigma_f.isolated
    assert not s.sigma_g.at_origin
    assert s.f_and_g.at_origin and s.f_and_g.isolated
    assert s.local_points() == [(0j, 0j)]


def test_sigma_decomposition_rejects_bad_input():
    with pytest.raises(ValueError):
        sigma_decomposition(P("x^2"), P("1"))
    with pytest.raises(ValueError):
        sigma_decomposition(P("x*y"), P("y"))
    with pytest.raises(ValueError):
        sigma_decomposition(P("x"), P("0"))


def test_check_hypotheses_accepts_standard_germs():
    for f, g in (("x^2+y^3", "1"), ("x^2+y^3", "y"), ("x", "y"), ("x^2-y^2", "y")):
        rep = check_hypotheses(P(f), P(g))
        assert rep.ok, (f, g, rep.failures())
    assert check_hypotheses(P("x"), P("1")).mode == "holomorphic"
    assert check_hypotheses(P("x"), P("y")).mode == "fgbar"


@pytest.mark.parametrize("f,g,failure", [
    ("x^2", "1", "f_reduced"),
    ("x*y+y^2", "1", "f_x_regular"),
    ("x", "x", "g_univariate"),
    ("x*y", "y", "coprime"),
    ("x", "y^2", "g_reduced"),
])
def test_check_hypotheses_reports_failures(f, g, failure):
    rep = check_hypotheses(P(f), P(g))
    assert not rep.ok
    assert failure in rep.failures()


def test_gcd_message_uses_not_equal_sign():
    rep = check_hypotheses(P("x*y"), P("y"))
    assert "gcd(f,g) ≠ 1" in rep.messages


def test_real_jacobian_matches_finite_differences():
    f, g = P("x^2+y^3"), P("y+y^2")
    F = lambda x, y: NumericPoly(f)(x, y) * np.conj(NumericPoly(g)(0 * y, y))
    x0, y0 = 0.03 - 0.02j, 0.01 + 0.04j
    J = real_jacobian(f, g, x0, y0)
    h = 1e-7
    dirs = [(h, 0), (1j * h, 0), (0, h), (0, 1j * h)]
    for k, (dx, dy) in enumerate(dirs):
        d = (F(x0 + dx, y0 + dy) - F(x0 - dx, y0 - dy)) / (2 * h)
        assert abs(J[0, k] - d.real) < 1e-7 and abs(J[1, k] - d.imag) < 1e-7


def test_minors_square_sum_is_gram_determinant():
    f, g = P("x^3+y^4"), P("y")
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=5) * 0.1 + 0j, rng.normal(size=5) * 0.1 + 0.05j
    J = real_jacobian(f, g, x, y)
    lhs = np.sum(jacobian_minors(f, g, x, y) ** 2, axis=-1)
    rhs = np.linalg.det(J @ np.swapaxes(J, -1, -2))
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-30)
    assert np.all(jacobian_sigma_min(f, g, 0j, 0j) == 0)


def test_rank_deficient_sample_is_deterministic_and_near_origin():
    f, g = P("x^2+y^3"), P("y")
    a = sample_rank_deficient(f, g, count=50, seed=4)
    b = sample_rank_deficient(f, g, count=50, seed=4)
    assert a.count == 50
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    assert np.all(a.sigma_min <= 1e-6)
    assert np.max(distance_to_sigma(f, g, a.x, a.y)) <= 1e-4
