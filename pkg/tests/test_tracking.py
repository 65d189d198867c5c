import cmath

import numpy as np
import pytest

from lepoly.algebra import poly_parse as P
from lepoly.errors import TrackingError
from lepoly.tracking import (
    EscapeRegionError,
    FibreModel,
    circle,
    compose,
    cycles,
    fibre_roots,
    inverse,
    monodromy_around,
    polar_partition,
    polyline,
    track_loop,
    track_path,
)


def _model(f, g="1", t=1e-6, eps=0.5):
    return FibreModel(P(f), P(g), t, eps)


def test_fibre_roots_examples():
    # x^2 + y^3 = t over y = 0 gives x = +-sqrt(t)
    fr = fibre_roots(_model("x^2+y^3", t=1e-6), 0j)
    assert np.allclose(sorted(fr.roots, key=lambda z: z.real), [-1e-3, 1e-3], atol=1e-12)
    assert fr.inside.all() and fr.n == 2
    # x * conj(y) = t over y = 0.01 gives x = t / 0.01
    fr = fibre_roots(_model("x", "y", t=1e-4), 0.01)
    assert np.allclose(fr.roots, [1e-2])


def test_fibre_roots_in_escape_region():
    with pytest.raises(EscapeRegionError):
        fibre_roots(_model("x", "y"), 0j)


def test_fibre_roots_degree_drop():
    with pytest.raises(TrackingError):
        fibre_roots(_model("y*x^2+x+y^3"), 0j)


def test_curves():
    c = polyline([0, 1, 1 + 1j])
    assert c.length == pytest.approx(2.0)
    assert c.point(1.5) == pytest.approx(1 + 0.5j)
    c = polyline([0, 1], stop_short=0.25)
    assert c.length == pytest.approx(0.75)
    c = circle(1j, 2.0, 0.0)
    assert c.point(0) == pytest.approx(2 + 1j)
    assert c.point(c.length / 4) == pytest.approx(3j)


def test_path_to_cusp_polar_point_merges_two_sheets():
    m = _model("x^2+y^3", t=1e-6)
    lam = 0.025
    start = fibre_roots(m, lam)
    target = 0.01 + 0j                        # y^3 = t, x = 0 is a polar point
    res = track_path(m, [lam, target], start, [target], stop_short=1e-6)
    assert res.steps > 0
    parts = polar_partition(m, target, res.final_roots, scale=float(np.max(np.abs(start.roots))))
    assert parts == ((0, 1),)


def test_loop_around_cusp_polar_point_is_a_transposition():
    m = _model("x^2+y^3", t=1e-6)
    target = 0.01 + 0j
    r = 1e-4
    start = fibre_roots(m, target + r)
    res = monodromy_around(m, target, r, start, [target])
    assert res.permutation == (1, 0)


def test_loop_around_escape_point_is_a_full_cycle():
    m = _model("x^2+y^3", "y", t=1e-8)
    r = 0.005                                 # polar points sit at |y| = t**(1/4) = 0.01
    start = fibre_roots(m, r)
    res = monodromy_around(m, 0j, r, start, [0j, 0.01, -0.01])
    assert res.permutation == (1, 0)
    assert cycles(res.permutation) == [(0, 1)]


def test_regular_loop_is_identity():
    m = _model("x^2+y^3", t=1e-6)
    center, r = 0.03 + 0.03j, 1e-3            # far from the three polar points
    start = fibre_roots(m, center + r)
    res = monodromy_around(m, center, r, start, [0.01, 0.01 * cmath.exp(2j * cmath.pi / 3)])
    assert res.permutation == (0, 1)


def test_track_loop_from_pieces_closes_up():
    m = _model("x^3-x*y^5+y^7", t=1e-12)
    a = 0.02 + 0j
    start = fibre_roots(m, a)
    res = track_loop(m, [polyline([a, 0.02j]), polyline([0.02j, a])], start, [])
    assert res.permutation == (0, 1, 2)
    assert res.trajectories().shape[1] == 3


def test_permutation_algebra():
    p, q = (1, 2, 0), (1, 0, 2)
    assert compose(p, q) == (0, 2, 1)
    assert compose(p, inverse(p)) == (0, 1, 2)
    assert cycles((1, 2, 0)) == [(0, 1, 2)]
    assert cycles((1, 0, 2, 4, 3)) == [(0, 1), (2,), (3, 4)]
    assert cycles((1, 0, 2), restrict=[0, 1]) == [(0, 1)]
    with pytest.raises(ValueError):
        cycles((1, 0, 2), restrict=[0])
