"""Newton-Puiseux expansion of plane curve germs at the origin.

Each branch is returned in the primitive parametrised form

    y = w**n,    x = sum_j alpha_j * w**m_j,

with coefficients computed numerically (mpmath, ~100 digits) from roots of
edge polynomials.  Only the first Newton polygon uses exact arithmetic, to
get the multiplicities of the first edge roots right.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd
from typing import Sequence

import mpmath
import sympy
from sympy import QQ, QQ_I

from .algebra import BivariatePoly, GaussianRational
from .errors import PuiseuxError

log = logging.getLogger(__name__)

DPS = 100
ZERO_DIGITS = DPS - 20          # relative size below which a coefficient is zero
ROOT_MERGE_DIGITS = 25          # numeric edge roots closer than this (relative) coincide
MAX_STAGES = 80
TERM_CAP = 600                  # start dropping high y-powers beyond this many terms


@dataclass(frozen=True)
class NewtonPolygonEdge:
    """One edge of the lower Newton polygon.

    ``start`` has the smaller x-exponent.  The edge polynomial is written
    in ``z = alpha**q`` where ``slope = p/q``; ``coeffs`` are ascending.
    """
    start: tuple[int, int]
    end: tuple[int, int]
    slope: Fraction
    coeffs: tuple

    @property
    def width(self) -> int:
        return self.end[0] - self.start[0]

    def edge_polynomial(self) -> list:
        return list(self.coeffs)


@dataclass(frozen=True)
class NewtonPolygon:
    vertices: tuple[tuple[int, int], ...]
    edges: tuple[NewtonPolygonEdge, ...]
    x_order: int
    y_order: int

    @property
    def has_x_axis_branch(self) -> bool:
        return self.x_order >= 1


def _lower_chain(support: dict[tuple[int, int], object]) -> tuple[list[tuple[int, int]], int, int]:
    a0 = min(a for a, _ in support)
    b_min = min(b for _, b in support)
    bL = min(b for a, b in support if a == a0)
    aR = min(a for a, b in support if b == b_min)
    best: dict[int, int] = {}
    for a, b in support:
        if a0 <= a <= aR and (a not in best or b < best[a]):
            best[a] = b
    hull: list[tuple[int, int]] = []
    for pt in sorted(best.items()):
        while len(hull) >= 2:
            (ax, ay), (bx, by) = hull[-2], hull[-1]
            cross = (bx - ax) * (pt[1] - ay) - (by - ay) * (pt[0] - ax)
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(pt)
    assert hull[0] == (a0, bL) and hull[-1] == (aR, b_min)
    return hull, a0, b_min


def _edges_from_chain(chain, coeff_of) -> list[NewtonPolygonEdge]:
    edges = []
    for (a1, b1), (a2, b2) in zip(chain, chain[1:]):
        slope = Fraction(b1 - b2, a2 - a1)
        q = slope.denominator
        coeffs = []
        for k in range((a2 - a1) // q + 1):
            a = a1 + k * q
            b = b1 - slope.numerator * k
            coeffs.append(coeff_of((a, b)))
        edges.append(NewtonPolygonEdge((a1, b1), (a2, b2), slope, tuple(coeffs)))
    return edges


def newton_polygon(p: BivariatePoly) -> NewtonPolygon:
    """Lower Newton polygon of ``p`` at the origin.

    The chain runs from the support point with the smallest x-exponent to
    the one with the smallest y-exponent.  A positive ``x_order`` flags the
    branch ``x = 0``; a positive ``y_order`` flags a ``y``-axis factor.
    """
    if p.is_zero():
        raise ValueError("newton_polygon of the zero polynomial")
    if p.constant_term():
        raise ValueError("p(0,0) != 0: a unit germ has no branches at the origin")
    terms = p.terms
    chain, a0, b_min = _lower_chain(terms)
    zero = GaussianRational(0)
    edges = _edges_from_chain(chain, lambda m: terms.get(m, zero))
    return NewtonPolygon(tuple(chain), tuple(edges), a0, b_min)


@dataclass(frozen=True)
class PuiseuxBranch:
    """One branch ``y = w**n, x = sum alpha_j w**m_j`` of a curve germ.

    ``truncation`` is the y-exponent bound ``N`` up to which the series is
    complete (``None`` when the series is exact, i.e. finite).  The x-axis
    branch ``x = 0`` has an empty term list and ``is_x_axis`` set.
    """
    n: int
    exponents: tuple[int, ...]
    coefficients: tuple[complex, ...]
    truncation: Fraction | None
    is_x_axis: bool = False
    mp_coefficients: tuple = field(default=(), repr=False, compare=False)

    @property
    def exact(self) -> bool:
        return self.truncation is None

    @property
    def first_exponent(self) -> Fraction | None:
        if not self.exponents:
            return None
        return Fraction(self.exponents[0], self.n)

    def x_at(self, w):
        """Truncated series at ``w`` (complex scalar or numpy array)."""
        out = 0 * w
        for m, a in zip(self.exponents, self.coefficients):
            out = out + a * w ** m
        return out

    def x_at_mp(self, w):
        coeffs = self.mp_coefficients or tuple(mpmath.mpc(c) for c in self.coefficients)
        return mpmath.fsum(a * w ** m for m, a in zip(self.exponents, coeffs)) if coeffs else mpmath.mpc(0)

    def x_derivative_at(self, w):
        out = 0 * w
        for m, a in zip(self.exponents, self.coefficients):
            out = out + m * a * w ** (m - 1)
        return out

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "x_axis": self.is_x_axis,
            "terms": [{"m": m, "re": c.real, "im": c.imag}
                      for m, c in zip(self.exponents, self.coefficients)],
            "truncation": None if self.truncation is None else str(self.truncation),
        }


# ---------------------------------------------------------------------------
# numeric recursion
# ---------------------------------------------------------------------------

def _mp_from_gauss(c: GaussianRational):
    return mpmath.mpc(mpmath.mpf(c.re.numerator) / c.re.denominator,
                      mpmath.mpf(c.im.numerator) / c.im.denominator)


def _is_zero(val, bound) -> bool:
    return abs(val) <= mpmath.mpf(10) ** (-ZERO_DIGITS) * bound


def _clean(poly: dict) -> dict:
    return {m: vb for m, vb in poly.items() if not _is_zero(*vb)}


def _substitute(poly: dict, alpha, p: int, q: int, L: int) -> dict:
    """``P(y^p (alpha + x), y^q) / y^L`` with abs-sum bookkeeping."""
    out: dict[tuple[int, int], list] = {}
    apow = [mpmath.mpc(1)]
    amax = max(a for a, _ in poly)
    for _ in range(amax):
        apow.append(apow[-1] * alpha)
    aabs = [abs(v) for v in apow]
    for (a, b), (c, cb) in poly.items():
        e = p * a + q * b - L
        if e < 0:
            raise PuiseuxError("internal: support below the Newton polygon")
        for k in range(a + 1):
            binom = comb(a, k)
            val = c * binom * apow[a - k]
            bnd = cb * binom * aabs[a - k]
            slot = out.setdefault((k, e), [mpmath.mpc(0), mpmath.mpf(0)])
            slot[0] += val
            slot[1] += bnd
    return _clean({m: (v[0], v[1]) for m, v in out.items()})


def _numeric_roots(coeffs_asc: list) -> list[tuple[object, int]]:
    """Distinct nonzero roots of a univariate mp polynomial with multiplicities."""
    desc = list(reversed(coeffs_asc))
    deg = len(desc) - 1
    if deg == 0:
        return []
    if deg == 1:
        return [(-desc[1] / desc[0], 1)]
    with mpmath.workdps(2 * DPS):
        roots = mpmath.polyroots(desc, maxsteps=2000, extraprec=4 * DPS)
    groups: list[list] = []
    for r in roots:
        for g in groups:
            ref = max(1, abs(g[0]))
            if abs(r - g[0]) <= mpmath.mpf(10) ** (-ROOT_MERGE_DIGITS) * ref:
                g.append(r)
                break
        else:
            groups.append([r])
    out = []
    for g in groups:
        centre = mpmath.fsum(g) / len(g)
        out.append((centre, len(g)))
    return out


def _exact_edge_roots(edge: NewtonPolygonEdge) -> list[tuple[object, int]]:
    """Roots (in ``z``) of a first-stage edge polynomial, multiplicities exact."""
    z = sympy.Symbol("z")
    rep = {(k,): QQ_I(QQ(c.re.numerator, c.re.denominator), QQ(c.im.numerator, c.im.denominator))
           for k, c in enumerate(edge.coeffs) if c}
    poly = sympy.Poly.from_dict(rep, z, domain=QQ_I)
    _, factors = poly.sqf_list()
    out = []
    for fac, mult in factors:
        coeffs = [_mp_from_gauss(GaussianRational(sympy_frac(c.x), sympy_frac(c.y)))
                  for c in reversed(fac.rep.to_list())]
        coeffs = [mpmath.mpc(v) for v in coeffs]
        if fac.degree() == 0:
            continue
        for r, k in _numeric_roots(coeffs):
            if k != 1:
                raise PuiseuxError("internal: squarefree factor with a repeated root")
            out.append((r, int(mult)))
    return out


def sympy_frac(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


@dataclass
class _Partial:
    poly: dict
    K: int
    R: int
    terms: list  # (Fraction exponent, mpc)
    separated: bool
    truncated: bool = False


def _edges_numeric(poly: dict) -> tuple[list[NewtonPolygonEdge], int, int]:
    chain, a0, b_min = _lower_chain(poly)
    zero = (mpmath.mpc(0), mpmath.mpf(0))
    edges = _edges_from_chain(chain, lambda m: poly.get(m, zero)[0])
    return edges, a0, b_min


def _drop_high_powers(part: _Partial, need_exp: Fraction) -> None:
    """Keep the term count bounded by discarding y-powers that cannot matter."""
    if len(part.poly) <= TERM_CAP:
        return
    chain, _, _ = _lower_chain(part.poly)
    r = chain[-1][0]
    bL = chain[0][1]
    remaining = max(Fraction(0), need_exp * part.R - part.K)
    B = 2 * (r * math.ceil(remaining) + bL + 1)
    kept = {m: v for m, v in part.poly.items() if m[1] <= B}
    if len(kept) < len(part.poly):
        part.poly = kept
        part.truncated = True


def puiseux_branches(p: BivariatePoly, order: int = 20, *, warn_y_factor: bool = True) -> list[PuiseuxBranch]:
    """All branches at the origin of the curve ``{p = 0}``.

    Parameters
    ----------
    p
        Squarefree polynomial with ``p(0,0) = 0``.
    order
        Each branch keeps terms up to the y-exponent ``first + order/n``
        (``n`` its ramification index) once it is separated from the
        others; exact (finite) branches stop early.

    Raises
    ------
    PuiseuxError
        If ``p`` is divisible by ``x**2`` or branches fail to separate.
    """
    if order < 1:
        raise ValueError("order must be a positive integer")
    poly_np = newton_polygon(p)
    if poly_np.x_order > 1:
        raise PuiseuxError("polynomial is not squarefree (x^2 divides it)")
    branches: list[PuiseuxBranch] = []
    with mpmath.workdps(DPS):
        mp_poly = {m: (_mp_from_gauss(c), abs(_mp_from_gauss(c))) for m, c in p.terms.items()}
        if poly_np.y_order > 0:
            if warn_y_factor:
                log.warning("dropping the y-axis factor y^%d: not a graph over the y-axis", poly_np.y_order)
            mp_poly = {(a, b - poly_np.y_order): v for (a, b), v in mp_poly.items()}
        if poly_np.x_order == 1:
            branches.append(PuiseuxBranch(1, (), (), None, True))

        stack: list[tuple[_Partial, list]] = []
        first_stage = []
        for edge in poly_np.edges:
            for z0, mult in _exact_edge_roots(edge):
                first_stage.append((edge, z0, mult))
        part0 = _Partial(mp_poly, 0, 1, [], False)
        for edge, z0, mult in first_stage:
            stack.append((part0, [(edge.slope, z0, mult)]))

        results = []
        while stack:
            parent, [(slope, z0, mult)] = stack.pop()
            _advance(parent, slope, z0, mult, order, stack, results)
        for terms, R, trunc in results:
            branches.append(_finish(terms, R, trunc))
    branches = [b for b in branches if b.is_x_axis] + sorted(
        (b for b in branches if not b.is_x_axis), key=_branch_key)
    return branches


def _advance(parent: _Partial, slope: Fraction, z0, mult: int, order: int, stack, results):
    """Take one edge root from ``parent`` and follow it until it ends or splits."""
    part = _Partial(dict(parent.poly), parent.K, parent.R, list(parent.terms),
                    parent.separated, parent.truncated)
    depth = len(part.terms)
    while True:
        depth += 1
        if depth > MAX_STAGES:
            raise PuiseuxError("failed to separate branches within the maximum expansion depth")
        p_, q = slope.numerator, slope.denominator
        alpha = mpmath.root(z0, q) if q > 1 else z0
        e_new = Fraction(part.K * q + p_, part.R * q)
        L = min(p_ * a + q * b for a, b in part.poly)
        part.poly = _substitute(part.poly, alpha, p_, q, L)
        part.terms.append((e_new, alpha))
        part.K, part.R = part.K * q + p_, part.R * q
        part.separated = part.separated or mult == 1
        stop_at = part.terms[0][0] + Fraction(order, part.R) if part.separated else None
        if not part.poly:
            raise PuiseuxError("internal: polynomial vanished during expansion")
        _drop_high_powers(part, stop_at if stop_at is not None else part.terms[0][0] + order)
        edges, a0, _ = _edges_numeric(part.poly)
        if a0 > 1:
            raise PuiseuxError("polynomial is not squarefree along a branch")
        if a0 == 1:
            # x_s = 0 solves the transformed equation: the series terminates here
            results.append((list(part.terms), part.R, stop_at if part.truncated else None))
        roots = [(edge.slope, zz, mm) for edge in edges for zz, mm in _numeric_roots(list(edge.coeffs))]
        if not roots:
            return
        if len(roots) > 1 or a0 == 1:
            for item in roots:
                stack.append((part, [item]))
            return
        slope, z0, mult = roots[0]
        if part.separated:
            nxt = Fraction(part.K * slope.denominator + slope.numerator, part.R * slope.denominator)
            if nxt > stop_at:
                results.append((part.terms, part.R, stop_at))
                return


def _finish(terms, R: int, trunc) -> PuiseuxBranch:
    ms = [int(e * R) for e, _ in terms]
    g = R
    for m in ms:
        g = gcd(g, m)
    n = R // g
    ms = [m // g for m in ms]
    coeffs = [a for _, a in terms]
    keep = [(m, a) for m, a in zip(ms, coeffs)]
    return PuiseuxBranch(
        n=n,
        exponents=tuple(m for m, _ in keep),
        coefficients=tuple(complex(a) for _, a in keep),
        truncation=None if trunc is None else Fraction(trunc),
        is_x_axis=False,
        mp_coefficients=tuple(a for _, a in keep),
    )


def _branch_key(b: PuiseuxBranch):
    arg = cmath.phase(b.coefficients[0]) % (2 * math.pi)
    if abs(arg - 2 * math.pi) < 1e-12:
        arg = 0.0
    return (b.first_exponent, round(arg, 12), b.n, round(abs(b.coefficients[0]), 12))


def branch_residual(branch: PuiseuxBranch, p: BivariatePoly, w: complex) -> float:
    """``|p(x(w), w**n)|`` for the truncated series, evaluated in mpmath."""
    with mpmath.workdps(DPS):
        wm = mpmath.mpc(w)
        x = branch.x_at_mp(wm)
        y = wm ** branch.n
        val = mpmath.fsum(_mp_from_gauss(c) * x ** a * y ** b for (a, b), c in p.terms.items())
        return float(abs(val))


def residual_slope(branch: PuiseuxBranch, p: BivariatePoly, r1: float = 1e-2, r2: float = 1e-3,
                   angles: Sequence[float] = (0.3, 1.9, 4.1)) -> float:
    """Log-log slope of the residual against the y-radius between ``r1`` and ``r2``.

    Returns ``inf`` when the residual vanishes at either radius (exact branch).
    """
    def worst(r):
        rw = r ** (1.0 / branch.n)
        return max(branch_residual(branch, p, rw * cmath.exp(1j * th)) for th in angles)

    a, b = worst(r1), worst(r2)
    if a == 0.0 or b == 0.0:
        return math.inf
    return math.log(a / b) / math.log(r1 / r2)


def weierstrass_degree(p: BivariatePoly) -> int:
    """``ord_x p(x, 0)``: the number of branches counted with ramification."""
    row = [a for (a, b) in p.terms if b == 0]
    if not row:
        raise ValueError("p(x, 0) vanishes identically")
    return min(row)
