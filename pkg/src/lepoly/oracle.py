"""Independent checks used by the tests.

Nothing here touches the tracking or polyhedron code: the Milnor number
comes from resultants in the algebra module, the annulus value is a
closed form, and the fibre counts use ``numpy.roots`` directly.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import BivariatePoly, resultant_x

# deterministic generic coordinate changes (x, y) -> (x + a y, y + b x)
SEEDS: tuple[tuple[Fraction, Fraction], ...] = (
    (Fraction(3, 7), Fraction(5, 11)),
    (Fraction(-2, 5), Fraction(7, 13)),
    (Fraction(5, 3), Fraction(-1, 9)),
    (Fraction(-7, 4), Fraction(3, 5)),
    (Fraction(11, 6), Fraction(2, 17)),
)


@dataclass(frozen=True)
class OracleResult:
    name: str
    value: object
    method: str

    def to_dict(self) -> dict:
        v = self.value
        return {"name": self.name, "value": list(v) if isinstance(v, tuple) else v, "method": self.method}


def _res_order(p: BivariatePoly, q: BivariatePoly) -> int | None:
    dp, dq = p.degree("x"), q.degree("x")
    if p.is_zero() or q.is_zero():
        return None
    if dp == 0 and dq == 0:
        return 0
    if dp == 0:
        r = p ** dq
    elif dq == 0:
        r = q ** dp
    else:
        r = resultant_x(p, q)
    return None if r.is_zero() else r.order("y")


def milnor_number_resultant(f: BivariatePoly, seeds=SEEDS) -> int:
    """Milnor number ``mu(f)`` at the origin.

    For each seed the coordinates are changed by ``x -> x + a y``,
    ``y -> y + b x`` and the order at ``y = 0`` of ``Res_x(f_x, f_y)`` is
    taken; the minimum over seeds guards against non-generic projections.
    Returns 0 when ``f`` is smooth at the origin.
    """
    if f.constant_term():
        raise ValueError("f(0,0) != 0: not a germ at the origin")
    x, y = BivariatePoly.x(), BivariatePoly.y()
    orders = []
    for a, b in seeds:
        h = f.compose(x + y.scale(a), y + x.scale(b))
        o = _res_order(h.derivative("x"), h.derivative("y"))
        if o is not None:
            orders.append(o)
    if not orders:
        raise ValueError("non-isolated singularity: the resultant vanishes identically for every seed")
    return min(orders)


def milnor_oracle(f: BivariatePoly) -> OracleResult:
    return OracleResult("milnor_number", milnor_number_resultant(f),
                        "min over seeded linear changes of ord_y Res_x(f_x, f_y)")


def annulus_oracle(t: complex, eps: float, eta1: float) -> tuple[int, int, int]:
    """``(chi, b0, b1)`` of ``{x * conj(y) = t, |x| <= eps, |y| <= eta1}``.

    The fibre is the graph ``x = t / conj(y)`` over the annulus
    ``|t|/eps <= |y| <= eta1``.
    """
    if t == 0:
        raise ValueError("t must be nonzero")
    if eps <= 0 or eta1 <= 0:
        raise ValueError("scales must be positive")
    if abs(t) / eps >= eta1:
        raise ValueError("scale inversion: |t|/eps must be smaller than eta1")
    return (0, 1, 1)


@dataclass(frozen=True)
class FibreCount:
    histogram: dict[int, int]
    ys: np.ndarray
    counts: np.ndarray

    @property
    def mode(self) -> int:
        return max(self.histogram, key=lambda k: (self.histogram[k], k))


def brute_force_fibre_count(f: BivariatePoly, g: BivariatePoly, t: complex, eps: float, eta1: float,
                            grid: int = 32) -> FibreCount:
    """Count fibre points inside the ``eps``-disc over a ``grid x grid`` sample of the y-disc."""
    if grid < 16:
        raise ValueError("grid must be at least 16")
    nx = f.degree("x")
    C = np.zeros((nx + 1, max(f.degree("y"), 0) + 1), dtype=complex)
    for (a, b), c in f.terms.items():
        C[a, b] = complex(c)
    gc = [complex(g.coeff(0, k)) for k in range(max(g.degree("y"), 0) + 1)]
    s = np.linspace(-eta1, eta1, grid)
    ys, counts = [], []
    for re in s:
        for im in s:
            y = complex(re, im)
            if abs(y) > eta1:
                continue
            gy = sum(c * y ** k for k, c in enumerate(gc))
            if gy == 0:
                continue
            coeffs = [sum(C[a, b] * y ** b for b in range(C.shape[1])) for a in range(nx + 1)]
            coeffs[0] -= t / np.conj(gy)
            roots = np.roots(coeffs[::-1])
            ys.append(y)
            counts.append(int(np.sum(np.abs(roots) <= eps)))
    hist = dict(sorted(Counter(counts).items()))
    return FibreCount(hist, np.array(ys), np.array(counts))
