"""Discriminant data over the y-disc: polar points, escape points, scales
and the path system from the base point ``lambda_t``.

For each polar branch ``y = w**n, x = x(w)`` the discriminant is traced by

    v(w) = f(x(w), w**n) * conj(g(w**n)),

a polynomial in ``w`` and ``conj(w)``.  Polar points over ``t`` are the
solutions of ``v(w) = t``; zeros of ``g`` are the escape points.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
import sympy
from numpy.polynomial import polynomial as P

from .algebra import BivariatePoly, GaussianRational, NumericPoly, univariate_roots
from .errors import GeometryError, HypothesisError
from .germ import polar_components
from .puiseux import DPS, PuiseuxBranch, _mp_from_gauss, puiseux_branches
from .tracking import FibreModel, fibre_roots

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# v(w)
# ---------------------------------------------------------------------------

def _series_mul(a: list, b: list, cap: int) -> list:
    out = [mpmath.mpc(0)] * min(len(a) + len(b) - 1, cap + 1)
    for i, ai in enumerate(a):
        if ai == 0 or i > cap:
            continue
        for j, bj in enumerate(b):
            if i + j > cap:
                break
            out[i + j] += ai * bj
    return out


def _compose_along(p: BivariatePoly, branch: PuiseuxBranch, cap: int) -> list:
    """Coefficients (ascending in ``w``) of ``p(x(w), w**n)`` up to ``w**cap``."""
    n = branch.n
    xs = [mpmath.mpc(0)] * (max(branch.exponents, default=0) + 1)
    for m, a in zip(branch.exponents, branch.mp_coefficients or [mpmath.mpc(c) for c in branch.coefficients]):
        xs[m] = mpmath.mpc(a)
    xs = xs[:cap + 1]
    total = [mpmath.mpc(0)] * (cap + 1)
    by_a: dict[int, list[tuple[int, GaussianRational]]] = {}
    for (a, b), c in p.terms.items():
        by_a.setdefault(a, []).append((b, c))
    xpow = [mpmath.mpc(1)]
    for a in range(max(by_a) + 1):
        if a > 0:
            xpow = _series_mul(xpow, xs, cap)
        for b, c in by_a.get(a, []):
            shift = n * b
            cc = _mp_from_gauss(c)
            for k, v in enumerate(xpow):
                if k + shift > cap:
                    break
                total[k + shift] += cc * v
    return total


@dataclass
class DiscBranchSeries:
    """``v(w) = f(x(w), w**n) * conj(g(w**n))`` for one polar branch.

    ``expanded`` lists ``(p, q, c)`` for the terms ``c * w**p * conj(w)**q``
    that are determined by the truncated branch; ``leading`` is the term of
    least total degree, which governs ``|v| ~ |c| |w|**(p+q)`` near 0.
    """
    branch: PuiseuxBranch
    branch_id: int
    component: BivariatePoly
    multiplicity: int
    f: BivariatePoly
    g: BivariatePoly
    expanded: list[tuple[int, int, complex]]
    leading: tuple[int, int, complex]
    valid_order: int | None = None

    def __post_init__(self):
        self._f = NumericPoly(self.f)
        self._fx = NumericPoly(self.f.derivative("x"))
        self._fy = NumericPoly(self.f.derivative("y"))
        gdeg = max(self.g.degree("y"), 0)
        self._gc = np.array([complex(self.g.coeff(0, k)) for k in range(gdeg + 1)])
        self._gpc = P.polyder(self._gc) if gdeg else np.zeros(1, dtype=complex)

    @property
    def n(self) -> int:
        return self.branch.n

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        x = self.branch.x_at(w)
        y = w ** self.n
        return self._f(x, y) * np.conj(P.polyval(y, self._gc))

    def wirtinger(self, w):
        """``(dv/dw, dv/dconj(w))`` of the evaluator."""
        w = np.asarray(w, dtype=complex)
        n = self.n
        x = self.branch.x_at(w)
        y = w ** n
        dy = n * w ** (n - 1)
        gbar = np.conj(P.polyval(y, self._gc))
        vw = (self._fx(x, y) * self.branch.x_derivative_at(w) + self._fy(x, y) * dy) * gbar
        vwb = self._f(x, y) * np.conj(P.polyval(y, self._gpc) * dy)
        return vw, vwb

    def expanded_eval(self, w):
        w = np.asarray(w, dtype=complex)
        wb = np.conj(w)
        out = np.zeros_like(w)
        for p, q, c in self.expanded:
            out = out + c * w ** p * wb ** q
        return out

    def to_dict(self) -> dict:
        p, q, c = self.leading
        return {"branch": self.branch_id, "n": self.n, "polar_multiplicity": self.multiplicity,
                "leading": {"p": p, "q": q, "re": c.real, "im": c.imag},
                "terms": len(self.expanded)}


def assemble_v_series(f: BivariatePoly, g: BivariatePoly, branch: PuiseuxBranch, branch_id: int = 0,
                      component: BivariatePoly | None = None, multiplicity: int = 1) -> DiscBranchSeries:
    """Build ``v(w)`` for a polar branch; the expansion is kept up to the
    w-degree that the branch truncation determines."""
    n = branch.n
    with mpmath.workdps(DPS // 2):
        if branch.exact:
            xdeg = max(branch.exponents, default=0)
            cap = f.degree("x") * xdeg + n * f.degree("y") + 1
            valid = None
        else:
            fx_ser = _compose_along(f.derivative("x"), branch, 4 * n * 40)
            ordfx = next((k for k, c in enumerate(fx_ser) if abs(c) > mpmath.mpf(10) ** (-30)), 0)
            cap = int(math.floor(branch.truncation * n)) + ordfx
            valid = cap
        fser = _compose_along(f, branch, cap)
        absmax = max((abs(c) for c in fser), default=mpmath.mpf(0))
        fterms = [(k, complex(c)) for k, c in enumerate(fser)
                  if absmax > 0 and abs(c) > mpmath.mpf(10) ** (-30) * absmax]
    gterms = [(k, complex(g.coeff(0, k))) for k in range(max(g.degree("y"), 0) + 1) if g.coeff(0, k)]
    expanded: dict[tuple[int, int], complex] = {}
    for p, a in fterms:
        for k, b in gterms:
            key = (p, n * k)
            expanded[key] = expanded.get(key, 0) + a * b.conjugate()
    items = sorted(((p, q, c) for (p, q), c in expanded.items() if c != 0), key=lambda t: (t[0] + t[1], t[0]))
    if not items:
        raise HypothesisError("f vanishes along a polar branch: the polar curve meets {f=0}")
    return DiscBranchSeries(branch, branch_id, component if component is not None else BivariatePoly(),
                            multiplicity, f, g, items, items[0], valid)


def polar_series(f: BivariatePoly, g: BivariatePoly, order: int = 20) -> list[tuple[int, DiscBranchSeries]]:
    """``(component index, v-series)`` for every branch of every polar component."""
    out: list[tuple[int, DiscBranchSeries]] = []
    for ci, (comp, k) in enumerate(polar_components(f, g)):
        for br in puiseux_branches(comp, order=order):
            out.append((ci, assemble_v_series(f, g, br, len(out), comp, k)))
    return out


# ---------------------------------------------------------------------------
# special points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpecialPoint:
    """A polar point (critical value of the projection) or an escape point (zero of g)."""
    id: str
    kind: str
    y: complex
    branch_id: int | None = None
    w: complex | None = None
    x: complex | None = None
    cluster_size: int | None = None
    orientation: int = 1
    multiplicity: int = 1
    exact: bool = False
    clusters: tuple[tuple[int, ...], ...] | None = None
    orbits: tuple[tuple[int, ...], ...] | None = None

    @property
    def m(self) -> int | None:
        """Number of distinct fibre points over a polar point."""
        return None if self.clusters is None else len(self.clusters)

    def to_dict(self) -> dict:
        d = {"id": self.id, "kind": self.kind, "y": [self.y.real, self.y.imag]}
        if self.kind == "polar":
            d.update(branch=self.branch_id, w=[self.w.real, self.w.imag],
                     x=[self.x.real, self.x.imag], expected_cluster_size=self.cluster_size,
                     orientation=self.orientation)
            if self.clusters is not None:
                d["clusters"] = [list(c) for c in self.clusters]
                d["m"] = len(self.clusters)
        else:
            d.update(multiplicity=self.multiplicity, exact=self.exact)
            if self.orbits is not None:
                d["orbits"] = [list(o) for o in self.orbits]
        return d


@dataclass
class BranchPointSearch:
    points: list[SpecialPoint]
    winding: int
    signed_count: int
    refinements: int


def _winding(series: DiscBranchSeries, t: complex, rho: float) -> int:
    m = 2048
    for _ in range(5):
        th = np.linspace(0.0, 2 * np.pi, m + 1)
        vals = series(rho * np.exp(1j * th)) - t
        if np.any(np.abs(vals) == 0):
            m *= 4
            continue
        d = np.angle(vals[1:] / vals[:-1])
        if np.max(np.abs(d)) < np.pi / 4:
            return int(round(float(np.sum(d)) / (2 * np.pi)))
        m *= 4
    raise GeometryError("winding number of v - t could not be resolved")


def _newton2(series: DiscBranchSeries, t: complex, w0: np.ndarray, iters: int = 60):
    w = np.array(w0, dtype=complex)
    for _ in range(iters):
        e = series(w) - t
        A, B = series.wirtinger(w)
        # real Jacobian for w = u + i v: d/du = A + B, d/dv = i (A - B)
        ju, jv = A + B, 1j * (A - B)
        det = ju.real * jv.imag - jv.real * ju.imag
        with np.errstate(divide="ignore", invalid="ignore"):
            du = (-e.real * jv.imag + jv.real * e.imag) / det
            dv = (-ju.real * e.imag + ju.imag * e.real) / det
        step = du + 1j * dv
        step[~np.isfinite(step)] = 0
        lim = 0.5 * np.abs(w) + 1e-300
        big = np.abs(step) > lim
        step[big] *= lim[big] / np.abs(step[big])
        w = w + step
    e = np.abs(series(w) - t)
    A, B = series.wirtinger(w)
    return w, e, np.sign(np.abs(A) ** 2 - np.abs(B) ** 2).astype(int)


def solve_branch_points(series: DiscBranchSeries | None, t: complex, eta1: float,
                        max_refine: int = 4, tol: float = 1e-8) -> BranchPointSearch:
    """All ``w`` with ``v(w) = t`` and ``|w**n| < eta1``.

    Seeds are placed on an annulus around ``(|t|/|c|)**(1/(p+q))`` and
    polished by a two-real-variable Newton iteration.  The signed count of
    solutions (sign of ``|v_w|**2 - |v_wbar|**2``) must equal the winding
    number of ``v - t`` on ``|w| = eta1**(1/n)``; otherwise the seed grid
    is refined, up to ``max_refine`` times.
    """
    if series is None:
        return BranchPointSearch([], 0, 0, 0)
    t = complex(t)
    if t == 0:
        raise ValueError("t must be nonzero")
    p, q, c = series.leading
    if p == q:
        raise HypothesisError(
            "v(w) has balanced leading exponents: critical values of f*conj(g) are not isolated")
    n = series.n
    rho = eta1 ** (1.0 / n)
    r0 = (abs(t) / abs(c)) ** (1.0 / (p + q))
    wind = _winding(series, t, rho)
    for level in range(max_refine + 1):
        nr = 5 * 2 ** level
        na = max(16, 8 * (p + q)) * 2 ** level
        radii = r0 * np.geomspace(0.4, 2.5, nr)
        ang = np.linspace(0, 2 * np.pi, na, endpoint=False) + 0.1
        seeds = (radii[:, None] * np.exp(1j * ang[None, :])).ravel()
        w, err, sign = _newton2(series, t, seeds)
        good = (err <= 1e-3 * tol * abs(t)) & (np.abs(w) < rho) & np.isfinite(w)
        sols: list[tuple[complex, int]] = []
        for wi, si in zip(w[good], sign[good]):
            if all(abs(wi - s) > 1e-7 * r0 for s, _ in sols):
                sols.append((complex(wi), int(si)))
        signed = sum(s for _, s in sols)
        if signed == wind and len(sols) == abs(wind) and len(sols) == abs(p - q):
            sols.sort(key=lambda ws: (round(cmath.phase(ws[0] ** n) % (2 * math.pi), 9), abs(ws[0])))
            pts = [SpecialPoint(id="", kind="polar", y=ws ** n, branch_id=series.branch_id, w=ws,
                                x=complex(series.branch.x_at(ws)), cluster_size=series.multiplicity + 1,
                                orientation=sg) for ws, sg in sols]
            return BranchPointSearch(pts, wind, signed, level)
    raise GeometryError("branch-point search inconclusive",
                        {"winding": wind, "found": len(sols), "expected": abs(p - q)})


def polish_polar_point(f: BivariatePoly, g: BivariatePoly, component: BivariatePoly, t: complex,
                       x0: complex, y0: complex, iters: int = 40) -> tuple[complex, complex, float]:
    """Newton on the full system ``{P = 0, f*conj(g) = t}`` in four real unknowns."""
    Pn, Px, Py = NumericPoly(component), NumericPoly(component.derivative("x")), NumericPoly(component.derivative("y"))
    F, Fx, Fy = NumericPoly(f), NumericPoly(f.derivative("x")), NumericPoly(f.derivative("y"))
    gdeg = max(g.degree("y"), 0)
    gc = np.array([complex(g.coeff(0, k)) for k in range(gdeg + 1)])
    gpc = P.polyder(gc) if gdeg else np.zeros(1, dtype=complex)
    x, y = complex(x0), complex(y0)
    t = complex(t)

    def eqs(x, y):
        gb = np.conj(P.polyval(y, gc))
        return complex(Pn(x, y)), complex(F(x, y) * gb - t)

    for _ in range(iters):
        e1, e2 = eqs(x, y)
        gb = np.conj(P.polyval(y, gc))
        # rows: equation; columns: d/dx, d/dy, d/dxbar, d/dybar
        A = np.array([[Px(x, y), Py(x, y)], [Fx(x, y) * gb, Fy(x, y) * gb]], dtype=complex)
        B = np.array([[0, 0], [0, F(x, y) * np.conj(P.polyval(y, gpc))]], dtype=complex)
        # real form: dE = A dz + B dzbar, dz = (dx, dy) = a + i b
        M = np.zeros((4, 4))
        for r in range(2):
            for k in range(2):
                cu = A[r, k] + B[r, k]          # coefficient of Re dz_k
                cv = 1j * (A[r, k] - B[r, k])   # coefficient of Im dz_k
                M[2 * r, k], M[2 * r + 1, k] = cu.real, cu.imag
                M[2 * r, 2 + k], M[2 * r + 1, 2 + k] = cv.real, cv.imag
        rhs = -np.array([e1.real, e1.imag, e2.real, e2.imag])
        try:
            d = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            break
        dx, dy = d[0] + 1j * d[2], d[1] + 1j * d[3]
        x, y = x + dx, y + dy
        if abs(dx) <= 1e-15 * max(abs(x), 1e-300) and abs(dy) <= 1e-15 * abs(y):
            break
    e1, e2 = eqs(x, y)
    return x, y, abs(e2) / abs(t)


def _gauss(c) -> GaussianRational:
    return GaussianRational(Fraction(int(c.x.numerator), int(c.x.denominator)),
                            Fraction(int(c.y.numerator), int(c.y.denominator)))


def escape_points(g: BivariatePoly, eta1: float) -> list[SpecialPoint]:
    """Zeros of the univariate ``g`` with ``|y| < eta1`` (empty if ``g`` is constant)."""
    if g.depends_on("x"):
        raise ValueError("g must depend on y only")
    if g.is_constant():
        return []
    ysym = sympy.Symbol("y")
    expr = g.to_sympy().as_expr().subs(sympy.Symbol("x"), 0)
    _, factors = sympy.Poly(expr, ysym, domain=sympy.QQ_I).factor_list()
    found: list[tuple[complex, int, bool]] = []
    for fac, mult in factors:
        coeffs = [_gauss(cc) for cc in fac.rep.to_list()]
        if fac.degree() == 1:
            found.append((complex(-coeffs[1] / coeffs[0]), int(mult), True))
        else:
            for r in univariate_roots([complex(c) for c in coeffs], tol_root=1e-12):
                found.append((complex(r), int(mult), False))
    pts = [(y, m, ex) for y, m, ex in found if abs(y) < eta1]
    pts.sort(key=lambda p: (abs(p[0]), cmath.phase(p[0])))
    return [SpecialPoint(id=f"e{k}", kind="escape", y=y, multiplicity=m, exact=ex)
            for k, (y, m, ex) in enumerate(pts)]


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

@dataclass
class PlannedPath:
    point_id: str
    vertices: list[complex]
    stop_radius: float

    @property
    def departure(self) -> float:
        return cmath.phase(self.vertices[1] - self.vertices[0])

    def to_dict(self) -> dict:
        return {"point": self.point_id, "vertices": [[v.real, v.imag] for v in self.vertices],
                "stop_radius": self.stop_radius}


@dataclass
class Geometry:
    eps: float
    eta1: float
    eta2: float
    t: complex
    lam: complex
    points: list[SpecialPoint]
    paths: list[PlannedPath]
    clearance: dict[str, float]
    outer_radius: float
    outer_tail: list[complex]
    order: list[str]
    sep_min: float
    attempts: int = 1
    diagnostics: dict = field(default_factory=dict)

    def point(self, pid: str) -> SpecialPoint:
        return next(p for p in self.points if p.id == pid)

    def path(self, pid: str) -> PlannedPath:
        return next(p for p in self.paths if p.point_id == pid)

    @property
    def polar_points(self) -> list[SpecialPoint]:
        return [p for p in self.points if p.kind == "polar"]

    @property
    def escape_points(self) -> list[SpecialPoint]:
        return [p for p in self.points if p.kind == "escape"]

    def to_dict(self) -> dict:
        return {
            "eps": self.eps, "eta1": self.eta1, "eta2": self.eta2,
            "t": [self.t.real, self.t.imag], "lambda": [self.lam.real, self.lam.imag],
            "sep_min": self.sep_min, "outer_radius": self.outer_radius,
            "outer_tail": [[v.real, v.imag] for v in self.outer_tail],
            "order": list(self.order), "attempts": self.attempts,
            "clearance": dict(self.clearance),
            "paths": [p.to_dict() for p in self.paths],
        }


@dataclass
class GeometryOptions:
    eps: float = 0.5
    eta1: float = 0.05
    t: complex | None = None          # None: automatic, otherwise used as given
    arg_t: float = 0.0
    seed: int = 0
    max_retries: int = 6
    escape_margin: float = 1e-3
    guard_factor: float = 1e-2
    sep_rel: float = 1e-4
    residual_tol: float = 1e-8
    t_shrink: int = 0                 # start with t / 10**t_shrink


def _seg_point_dist(a: complex, b: complex, p: complex) -> float:
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0:
        return abs(p - a)
    s = max(0.0, min(1.0, ((p - a) * d.conjugate()).real / L2))
    return abs(a + s * d - p)


def _cross(o: complex, a: complex, b: complex) -> float:
    return ((a - o).conjugate() * (b - o)).imag


def _segments_intersect(a: complex, b: complex, c: complex, d: complex) -> bool:
    d1, d2 = _cross(c, d, a), _cross(c, d, b)
    d3, d4 = _cross(a, b, c), _cross(a, b, d)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True
    tol = 1e-14 * max(abs(a), abs(b), abs(c), abs(d), 1e-300)

    def on(p, q, r):
        return _seg_point_dist(p, q, r) <= tol

    return on(c, d, a) or on(c, d, b) or on(a, b, c) or on(a, b, d)


def _polyline_ok(vertices: list[complex], target_id: str, points: list[SpecialPoint],
                 clearance: dict[str, float], placed: list[PlannedPath], limit: float) -> float | None:
    """Minimum clearance ratio if the polyline is admissible, else ``None``."""
    segs = list(zip(vertices, vertices[1:]))
    if any(abs(v) >= limit for v in vertices):
        return None
    ratio = math.inf
    for pt in points:
        if pt.id == target_id:
            continue
        dist = min(_seg_point_dist(a, b, pt.y) for a, b in segs)
        if dist < 3 * clearance[pt.id]:
            return None
        ratio = min(ratio, dist / clearance[pt.id])
    # the target may only be approached by the last segment
    tgt = next(p for p in points if p.id == target_id)
    for a, b in segs[:-1]:
        if _seg_point_dist(a, b, tgt.y) < 3 * clearance[target_id]:
            return None
    lam = vertices[0]
    for other in placed:
        osegs = list(zip(other.vertices, other.vertices[1:]))
        for i, (a, b) in enumerate(segs):
            for j, (c, d) in enumerate(osegs):
                if i == 0 and j == 0:
                    # both leave lambda: allowed to share only that point
                    da, dc = b - lam, d - lam
                    ang = abs(cmath.phase(da / dc))
                    if ang < 1e-3:
                        return None
                    continue
                if _segments_intersect(a, b, c, d):
                    return None
    return ratio


def _plan_paths(lam: complex, points: list[SpecialPoint], clearance: dict[str, float],
                limit: float) -> list[PlannedPath]:
    placed: list[PlannedPath] = []
    for pt in sorted(points, key=lambda p: (abs(p.y - lam), p.id)):
        direct = [lam, pt.y]
        best = None
        if _polyline_ok(direct, pt.id, points, clearance, placed, limit) is not None:
            best = direct
        else:
            dist = abs(pt.y - lam)
            phi = cmath.phase(pt.y - lam)
            cands = []
            for deg in (15, 30, 45, 60, 75, 90, 110, 130, 150):
                for sgn in (1, -1):
                    for rho in (0.5, 0.75, 1.0, 1.3, 1.7):
                        wpt = lam + rho * dist * cmath.exp(1j * (phi + sgn * math.radians(deg)))
                        cands.append([lam, wpt, pt.y])
            scored = []
            for cand in cands:
                r = _polyline_ok(cand, pt.id, points, clearance, placed, limit)
                if r is not None:
                    length = abs(cand[1] - cand[0]) + abs(cand[2] - cand[1])
                    scored.append((length, -min(r, 1e6), cand))
            if scored:
                scored.sort(key=lambda s: (s[0], s[1]))
                best = scored[0][2]
        if best is None:
            raise GeometryError(f"no admissible path from lambda_t to {pt.id}")
        stop = clearance[pt.id] if pt.kind == "polar" else clearance[f"guard:{pt.id}"]
        placed.append(PlannedPath(pt.id, best, stop))
    return placed


def _outer_tail(lam: complex, paths: list[PlannedPath], points: list[SpecialPoint],
                clearance: dict[str, float], R: float) -> tuple[list[complex], float]:
    deps = sorted(p.departure % (2 * math.pi) for p in paths)
    cands = []
    if not deps:
        cands = [cmath.phase(lam) if lam != 0 else 0.0]
    else:
        gaps = []
        for i, a in enumerate(deps):
            b = deps[(i + 1) % len(deps)] + (2 * math.pi if i + 1 == len(deps) else 0.0)
            gaps.append((b - a, a))
        gaps.sort(key=lambda g: -g[0])
        for size, a in gaps:
            for frac in (0.5, 0.3, 0.7, 0.15, 0.85):
                cands.append(a + frac * size)
    for phi in cands:
        d = cmath.exp(1j * phi)
        # solve |lam + s d| = R for s > 0
        bq = 2 * (lam * d.conjugate()).real
        cq = abs(lam) ** 2 - R ** 2
        s = (-bq + math.sqrt(bq * bq - 4 * cq)) / 2
        end = lam + s * d
        ok = True
        for pt in points:
            if _seg_point_dist(lam, end, pt.y) < 3 * clearance[pt.id]:
                ok = False
                break
        if ok:
            for p in paths:
                segs = list(zip(p.vertices, p.vertices[1:]))
                for j, (a, b) in enumerate(segs):
                    if j == 0:
                        if abs(cmath.phase((b - lam) / d)) < 1e-3:
                            ok = False
                        continue
                    if _segments_intersect(lam, end, a, b):
                        ok = False
                if not ok:
                    break
        if ok:
            return [lam, end], phi
    raise GeometryError("no admissible direction for the outer-loop tail")


def _leading_coeff_ok(f: BivariatePoly, eta1: float) -> bool:
    n = f.degree("x")
    c0 = abs(complex(f.coeff(n, 0)))
    rest = sum(abs(complex(c)) * eta1 ** b for (a, b), c in f.terms.items() if a == n and b > 0)
    return c0 > 2 * rest


def _branch_residual_ok(series: DiscBranchSeries, eta1: float, tol: float) -> bool:
    br = series.branch
    if br.exact:
        return True
    comp = series.component
    rho = eta1 ** (1.0 / br.n)
    w = rho * np.exp(1j * (np.linspace(0, 2 * np.pi, 24, endpoint=False) + 0.05))
    x = br.x_at(w)
    y = w ** br.n
    val = np.abs(NumericPoly(comp)(x, y))
    size = np.zeros_like(np.abs(x))
    for (a, b), c in comp.terms.items():
        size = size + abs(complex(c)) * np.abs(x) ** a * np.abs(y) ** b
    return bool(np.all(val <= tol * np.maximum(size, 1e-300)))


def _t_auto(series_list: Sequence[DiscBranchSeries], eta1: float) -> float:
    if series_list:
        d = max((s.leading[0] + s.leading[1]) / s.n for s in series_list)
        cmin = min(abs(s.leading[2]) for s in series_list)
    else:
        d, cmin = 1.0, 1.0
    return min(1.0, cmin) * eta1 ** max(d, 1.0) / 10


def select_geometry(f: BivariatePoly, g: BivariatePoly, series_list: Sequence[DiscBranchSeries],
                    opts: GeometryOptions | None = None) -> Geometry:
    """Choose validated scales, find the special points and plan the paths.

    ``eps`` is fixed; ``eta1`` is halved until the branch truncations are
    residual-valid, the leading x-coefficient of ``f`` does not vanish on
    the disc, zeros of ``g`` are either well inside or well outside, and
    every branch contributes ``|p - q|`` polar points.  Remaining
    validation failures shrink ``t`` by 10 (automatic ``t`` only).
    """
    opts = opts or GeometryOptions()
    eps = opts.eps
    eta1 = opts.eta1
    diagnostics: dict = {"eta1_halvings": 0, "failures": []}
    gzeros_all = escape_points(g, 1e300) if not g.is_constant() else []
    for _ in range(40):
        ok = _leading_coeff_ok(f, eta1) and all(_branch_residual_ok(s, eta1, opts.residual_tol) for s in series_list)
        ok = ok and all(abs(z.y) <= 0.5 * eta1 or abs(z.y) >= 1.5 * eta1 for z in gzeros_all)
        ok = ok and all(np.all(np.abs(s.branch.x_at(eta1 ** (1 / s.n) * np.exp(1j * np.linspace(0, 6.2, 16)))) < 0.5 * eps)
                        for s in series_list)
        if ok:
            break
        eta1 /= 2
        diagnostics["eta1_halvings"] += 1
    else:
        raise GeometryError("could not find a valid eta1", diagnostics)

    last_error: GeometryError | None = None
    auto = opts.t is None
    retries = opts.max_retries if auto else 0
    for attempt in range(retries + 1):
        shrink = opts.t_shrink + attempt
        try:
            if auto:
                eta2 = _t_auto(series_list, eta1)
                t = eta2 * 10.0 ** (-shrink) * cmath.exp(1j * opts.arg_t)
            else:
                t = complex(opts.t)
                eta2 = abs(t)
            geo = _build(f, g, series_list, eps, eta1, eta2, t, opts)
            geo.attempts = attempt + 1
            geo.diagnostics = dict(diagnostics, **geo.diagnostics)
            return geo
        except GeometryError as exc:
            last_error = exc
            diagnostics["failures"].append(str(exc))
            continue
    raise GeometryError(f"geometry selection failed: {last_error}", diagnostics)


def _check_separation(points: list[SpecialPoint], eta1: float, sep_min: float) -> None:
    for i, a in enumerate(points):
        if abs(a.y) >= eta1 * (1 - 1e-2):
            raise GeometryError(f"{a.id} lies too close to the boundary of the y-disc")
        for b in points[i + 1:]:
            if abs(a.y - b.y) < sep_min:
                raise GeometryError(f"special points {a.id} and {b.id} are closer than sep_min")


def _build(f, g, series_list, eps, eta1, eta2, t, opts: GeometryOptions) -> Geometry:
    raw: list[tuple[DiscBranchSeries, SpecialPoint]] = []
    for s in series_list:
        res = solve_branch_points(s, t, eta1)
        p_, q_, _ = s.leading
        if len(res.points) != abs(p_ - q_):
            raise GeometryError(f"branch {s.branch_id}: found {len(res.points)} polar points, expected {abs(p_ - q_)}")
        raw.extend((s, pt) for pt in res.points)
    raw.sort(key=lambda sp: (sp[1].branch_id, round(cmath.phase(sp[1].y) % (2 * math.pi), 9), abs(sp[1].y)))
    raw = [(s, replace(pt, id=f"p{k}")) for k, (s, pt) in enumerate(raw)]
    escape = escape_points(g, eta1)
    sep_min = opts.sep_rel * eta1
    # separation is checked before polishing: coinciding points make the
    # polishing system singular, and the collision is the real diagnosis
    _check_separation([pt for _, pt in raw] + escape, eta1, sep_min)
    polar: list[SpecialPoint] = []
    for s, pt in raw:
        x, y, err = polish_polar_point(f, g, s.component, t, pt.x, pt.y)
        if err > 1e-10 or abs(y - pt.y) > 1e-2 * abs(pt.y):
            raise GeometryError(f"polishing {pt.id} on branch {s.branch_id} failed (residual {err:.2e})")
        polar.append(replace(pt, x=x, y=y))
    points = polar + escape
    _check_separation(points, eta1, sep_min)

    model = FibreModel(f, g, t, eps)
    margin = opts.escape_margin
    for p in polar:
        fr = fibre_roots(model, p.y, tol_root=1e-6)
        if np.any(np.abs(fr.roots) >= eps * (1 - margin)):
            raise GeometryError(f"fibre over {p.id} leaves the eps-disc")

    rng = np.random.default_rng(opts.seed)
    theta = 0.0 if opts.seed == 0 else float(rng.uniform(0, 2 * math.pi))
    lam = None
    for _ in range(50):
        cand = 0.5 * eta1 * cmath.exp(1j * theta)
        if all(abs(cand - p.y) >= max(sep_min, 1e-3 * eta1) for p in points):
            lam = cand
            break
        theta = float(rng.uniform(0, 2 * math.pi))
    if lam is None:
        raise GeometryError("could not place lambda_t away from the special points")
    base = fibre_roots(model, lam)
    if np.any(np.abs(base.roots) >= eps * (1 - margin)):
        raise GeometryError("fibre over lambda_t leaves the eps-disc")

    clearance: dict[str, float] = {}
    for p in points:
        others = [abs(p.y - q.y) for q in points if q.id != p.id] + [abs(p.y - lam), eta1 - abs(p.y)]
        clearance[p.id] = opts.guard_factor * min(others)
    for e in escape:
        r = clearance[e.id]
        for _ in range(15):
            ring = e.y + r * np.exp(1j * np.linspace(0, 2 * np.pi, 64, endpoint=False))
            try:
                ok = all(np.all(np.abs(fibre_roots(model, y, tol_root=1e-6).roots) >= eps * (1 - margin))
                         for y in ring)
            except Exception:
                ok = False
            if ok:
                break
            r /= 10
        else:
            raise GeometryError(f"no guard radius around {e.id} with all sheets escaped")
        clearance[f"guard:{e.id}"] = r

    R = eta1 * (1 - 1e-3)
    paths = _plan_paths(lam, points, clearance, eta1 * (1 - 2e-3))
    tail, phi_cut = _outer_tail(lam, paths, points, clearance, R)
    rel = {p.point_id: (p.departure - phi_cut) % (2 * math.pi) for p in paths}
    order = sorted(rel, key=lambda k: rel[k])
    return Geometry(eps, eta1, eta2, t, lam, points, paths, clearance, R, tail, order, sep_min,
                    diagnostics={"phi_cut": phi_cut})
