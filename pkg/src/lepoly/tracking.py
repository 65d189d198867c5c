"""Fibres of ``phi_t`` and their continuation along paths and loops.

The fibre over ``y`` is the root set in ``x`` of

    f(x, y) = t / conj(g(y)),

which is holomorphic in ``x`` for fixed ``y``; the right-hand side is an
anti-holomorphic function of ``y``, so the predictor uses its derivative
along the path direction rather than a complex derivative.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .algebra import BivariatePoly, DegreeDropError, NumericPoly, RootFindingError, univariate_roots
from .errors import TrackingError

Permutation = tuple[int, ...]


class EscapeRegionError(TrackingError):
    """``g(y)`` vanishes (numerically) at the requested base point."""


@dataclass
class TrackOptions:
    max_step_rel: float = 0.1
    min_step: float = 1e-14
    newton_iter: int = 6
    newton_tol: float = 1e-12
    trust: float = 0.25
    move: float = 0.3
    tol_root: float = 1e-10
    escape_margin: float = 1e-3
    keep_samples: bool = True


class FibreModel:
    """Numeric evaluation of ``f(x, y) - t/conj(g(y))`` and its derivatives."""

    def __init__(self, f: BivariatePoly, g: BivariatePoly, t: complex, eps: float):
        if g.depends_on("x"):
            raise ValueError("g must depend on y only")
        self.f_exact, self.g_exact = f, g
        self.f = NumericPoly(f)
        self.fy = NumericPoly(f.derivative("y"))
        self.n = f.degree("x")
        self.t = complex(t)
        self.eps = float(eps)
        gdeg = max(g.degree("y"), 0)
        self.gc = np.array([complex(g.coeff(0, k)) for k in range(gdeg + 1)])
        self.gpc = P.polyder(self.gc) if gdeg else np.zeros(1, dtype=complex)
        self.g_scale = float(np.sum(np.abs(self.gc)))

    def g(self, y):
        return P.polyval(y, self.gc)

    def dg(self, y):
        return P.polyval(y, self.gpc)

    def rhs(self, y):
        return self.t / np.conj(self.g(y))

    def drhs(self, y, dy):
        """Derivative of ``t/conj(g(y))`` along the direction ``dy``."""
        gy = self.g(y)
        return -self.t * np.conj(self.dg(y) * dy) / np.conj(gy) ** 2

    def coeffs(self, y: complex) -> np.ndarray:
        """Ascending coefficients in ``x`` of ``f(x, y) - rhs(y)``."""
        c = self.f.coeffs_in_x(y).astype(complex)
        c[0] -= self.rhs(y)
        return c

    def residual(self, x, y):
        return P.polyval(x, self.coeffs(y))

    def value(self, x, y):
        """``f(x, y) * conj(g(y))`` (vectorised over ``x``)."""
        return P.polyval(x, self.f.coeffs_in_x(y)) * np.conj(self.g(y))


@dataclass
class FibreSample:
    y: complex
    roots: np.ndarray
    inside: np.ndarray

    @property
    def n(self) -> int:
        return len(self.roots)


def _sort_roots(r: np.ndarray) -> np.ndarray:
    keys = [(round(cmath.phase(z) % (2 * math.pi), 9), round(abs(z), 12)) for z in r]
    order = sorted(range(len(r)), key=lambda i: keys[i])
    return r[order]


def fibre_roots(model: FibreModel, y: complex, tol_root: float = 1e-10,
                g_tol: float = 1e-14) -> FibreSample:
    """All ``n`` fibre points over ``y``, sorted by argument then modulus."""
    y = complex(y)
    if abs(model.g(y)) <= g_tol * max(model.g_scale, 1.0):
        raise EscapeRegionError(f"g(y) vanishes at y={y}: inside the escape region",
                                {"y": [y.real, y.imag]})
    c = model.coeffs(y)
    try:
        roots = univariate_roots(c[::-1], tol_root=tol_root)
    except DegreeDropError as exc:
        raise TrackingError(f"degree drop in x at y={y}: {exc}") from exc
    except RootFindingError as exc:
        raise TrackingError(f"fibre root finding failed at y={y}: {exc}") from exc
    roots = _sort_roots(np.asarray(roots, dtype=complex))
    return FibreSample(y, roots, np.abs(roots) <= model.eps)


# ---------------------------------------------------------------------------
# curves in the y-plane
# ---------------------------------------------------------------------------

@dataclass
class Curve:
    """Arc-length parametrised curve ``y(s)``, ``0 <= s <= length``."""
    point: Callable[[float], complex]
    tangent: Callable[[float], complex]
    length: float
    breaks: tuple[float, ...] = ()


def polyline(vertices: Sequence[complex], stop_short: float = 0.0) -> Curve:
    """Piecewise-linear curve through ``vertices``; optionally end ``stop_short`` early."""
    v = [complex(z) for z in vertices]
    seg = [abs(b - a) for a, b in zip(v, v[1:])]
    if any(s == 0 for s in seg):
        raise ValueError("polyline has a zero-length segment")
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = float(cum[-1]) - stop_short
    if total <= 0:
        raise ValueError("stop_short exceeds the path length")

    def locate(s):
        k = int(np.searchsorted(cum, s, side="right") - 1)
        return min(max(k, 0), len(seg) - 1)

    def point(s):
        k = locate(s)
        return v[k] + (v[k + 1] - v[k]) * ((s - cum[k]) / seg[k])

    def tangent(s):
        k = locate(s)
        return (v[k + 1] - v[k]) / seg[k]

    breaks = tuple(float(c) for c in cum[1:-1] if c < total)
    return Curve(point, tangent, total, breaks)


def circle(center: complex, radius: float, theta0: float, turns: float = 1.0) -> Curve:
    """Circle traversed counterclockwise (``turns < 0`` for clockwise)."""
    c = complex(center)
    sgn = 1.0 if turns > 0 else -1.0

    def point(s):
        return c + radius * cmath.exp(1j * (theta0 + sgn * s / radius))

    def tangent(s):
        return sgn * 1j * cmath.exp(1j * (theta0 + sgn * s / radius))

    return Curve(point, tangent, abs(turns) * 2 * math.pi * radius)


# ---------------------------------------------------------------------------
# continuation
# ---------------------------------------------------------------------------

@dataclass
class PathTrackResult:
    path_id: str
    kind: str
    start: FibreSample
    final_y: complex
    final_roots: np.ndarray
    samples_y: list[complex] = field(default_factory=list, repr=False)
    samples_x: list[np.ndarray] = field(default_factory=list, repr=False)
    steps: int = 0
    rejected: int = 0
    permutation: Permutation | None = None
    terminal: dict = field(default_factory=dict)

    def trajectories(self) -> np.ndarray:
        """Array of shape (samples, n) with the sheet positions."""
        return np.array(self.samples_x)


def _min_sep(x: np.ndarray) -> float:
    if len(x) < 2:
        return math.inf
    d = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())


def _newton(model: FibreModel, x: np.ndarray, y: complex, opts: TrackOptions, scale: float):
    c = model.coeffs(y)
    dc = P.polyder(c)
    for it in range(1, opts.newton_iter + 1):
        fv = P.polyval(x, c)
        dv = P.polyval(x, dc)
        if np.any(dv == 0):
            return x, False
        dx = fv / dv
        x = x - dx
        if np.all(np.abs(dx) <= opts.newton_tol * np.maximum(np.abs(x), scale)):
            return x, True
    return x, False


def track_curve(model: FibreModel, curve: Curve, x0: np.ndarray, specials: Sequence[complex],
                opts: TrackOptions | None = None, path_id: str = "", kind: str = "path",
                start: FibreSample | None = None, scale: float | None = None) -> PathTrackResult:
    """Continue all sheets ``x0`` along ``curve``.

    Step control: linear predictor along the path tangent, Newton corrector
    in ``x``; a step is accepted only if Newton converges within
    ``opts.newton_iter`` iterations, the correction stays within
    ``opts.trust`` of the smallest sheet separation, the sheets move less
    than ``opts.move`` of that separation, and no two sheets come together.
    The step length is capped by ``opts.max_step_rel`` times the distance
    to the nearest special point.
    """
    opts = opts or TrackOptions()
    x = np.array(x0, dtype=complex)
    n = len(x)
    specials = np.asarray(list(specials), dtype=complex)
    if scale is None:
        scale = max(float(np.max(np.abs(x))), 1e-300)
    s = 0.0
    y = curve.point(0.0)
    res = PathTrackResult(path_id, kind, start or FibreSample(y, x.copy(), np.abs(x) <= model.eps),
                          y, x)
    if opts.keep_samples:
        res.samples_y.append(y)
        res.samples_x.append(x.copy())
    breaks = list(curve.breaks) + [curve.length]

    def cap(yv):
        if specials.size == 0:
            return curve.length
        return opts.max_step_rel * float(np.min(np.abs(specials - yv)))

    h = min(cap(y), curve.length)
    while s < curve.length:
        nxt_break = next(b for b in breaks if b > s + 1e-15 * curve.length)
        hmax = cap(y)
        h = min(h, hmax, nxt_break - s)
        if h < opts.min_step * max(curve.length, 1e-300) and s + h < curve.length:
            raise TrackingError(f"step size underflow on {path_id or kind} at y={y}",
                                {"y": [y.real, y.imag], "s": s})
        tan = curve.tangent(s)
        c = model.coeffs(y)
        fx = P.polyval(x, P.polyder(c))
        fy = P.polyval(x, model.fy.coeffs_in_x(y))
        dxds = (model.drhs(y, tan) - fy * tan) / fx
        y1 = curve.point(s + h)
        xp = x + h * dxds
        sep = _min_sep(x)
        xc, ok = _newton(model, xp.copy(), y1, opts, scale)
        if ok:
            corr = float(np.max(np.abs(xc - xp)))
            move = float(np.max(np.abs(xc - x)))
            if n == 1:
                lim_corr = opts.trust * max(abs(x[0]), scale)
                lim_move = opts.move * max(abs(x[0]), scale)
                sep_ok = True
            else:
                lim_corr = opts.trust * sep
                lim_move = opts.move * sep
                sep_ok = _min_sep(xc) >= 0.5 * sep
            ok = corr <= lim_corr and move <= lim_move and sep_ok and np.all(np.isfinite(xc))
        if not ok:
            res.rejected += 1
            h *= 0.5
            if h < opts.min_step * max(curve.length, 1e-300):
                raise TrackingError(f"step size underflow on {path_id or kind} at y={y}",
                                    {"y": [y.real, y.imag], "s": s})
            continue
        s += h
        if abs(curve.length - s) <= 1e-13 * curve.length:
            s = curve.length
        y, x = y1, xc
        res.steps += 1
        if opts.keep_samples:
            res.samples_y.append(y)
            res.samples_x.append(x.copy())
        h *= 1.5
    res.final_y, res.final_roots = y, x
    return res


def _match(final: np.ndarray, start: np.ndarray, scale: float) -> Permutation:
    d = np.abs(final[:, None] - start[None, :])
    perm = tuple(int(i) for i in np.argmin(d, axis=1))
    if sorted(perm) != list(range(len(start))):
        raise TrackingError("loop end points do not match the start fibre bijectively")
    err = float(np.max(d[np.arange(len(perm)), perm]))
    if err > 1e-6 * max(scale, _min_sep(start) if len(start) > 1 else scale):
        raise TrackingError(f"loop end point mismatch {err:.3e}")
    return perm


def track_path(model: FibreModel, vertices: Sequence[complex], start: FibreSample,
               specials: Sequence[complex], stop_short: float = 0.0, opts: TrackOptions | None = None,
               path_id: str = "", scale: float | None = None) -> PathTrackResult:
    """Track the fibre ``start`` along a polyline ending ``stop_short`` before its last vertex."""
    if abs(complex(vertices[0]) - start.y) > 1e-12 * max(1.0, abs(start.y)):
        raise ValueError("path does not start at the sample's base point")
    curve = polyline(vertices, stop_short)
    return track_curve(model, curve, start.roots, specials, opts, path_id, "path", start, scale)


def monodromy_around(model: FibreModel, center: complex, radius: float, start: FibreSample,
                     specials: Sequence[complex], opts: TrackOptions | None = None,
                     path_id: str = "", turns: float = 1.0, scale: float | None = None) -> PathTrackResult:
    """Track once counterclockwise around ``center`` starting at ``start.y``.

    ``permutation[i] = j`` means sheet ``i`` ends where sheet ``j`` started.
    """
    theta0 = cmath.phase(start.y - center)
    if abs(abs(start.y - center) - radius) > 1e-9 * radius:
        raise ValueError("start point is not on the circle")
    curve = circle(center, radius, theta0, turns)
    scale = scale if scale is not None else max(float(np.max(np.abs(start.roots))), 1e-300)
    res = track_curve(model, curve, start.roots, specials, opts, path_id, "loop", start, scale)
    res.permutation = _match(res.final_roots, start.roots, scale)
    return res


def track_loop(model: FibreModel, curves: Sequence[Curve], start: FibreSample, specials: Sequence[complex],
               opts: TrackOptions | None = None, path_id: str = "", scale: float | None = None
               ) -> PathTrackResult:
    """Track a closed loop made of consecutive curves; returns its permutation."""
    x = start.roots
    scale = scale if scale is not None else max(float(np.max(np.abs(x))), 1e-300)
    merged: PathTrackResult | None = None
    for c in curves:
        r = track_curve(model, c, x, specials, opts, path_id, "loop", start, scale)
        x = r.final_roots
        if merged is None:
            merged = r
        else:
            merged.samples_y.extend(r.samples_y[1:])
            merged.samples_x.extend(r.samples_x[1:])
            merged.steps += r.steps
            merged.rejected += r.rejected
            merged.final_y, merged.final_roots = r.final_y, r.final_roots
    merged.permutation = _match(x, start.roots, scale)
    return merged


# ---------------------------------------------------------------------------
# permutations and terminal classification
# ---------------------------------------------------------------------------

def compose(first: Permutation, second: Permutation) -> Permutation:
    """Apply ``first`` then ``second``."""
    return tuple(second[i] for i in first)


def inverse(p: Permutation) -> Permutation:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def cycles(p: Permutation, restrict: Sequence[int] | None = None) -> list[tuple[int, ...]]:
    """Cycle decomposition, each cycle starting at its smallest element."""
    dom = sorted(range(len(p)) if restrict is None else restrict)
    seen: set[int] = set()
    out = []
    for i in dom:
        if i in seen:
            continue
        cyc = [i]
        seen.add(i)
        j = p[i]
        while j != i:
            if restrict is not None and j not in dom:
                raise ValueError("restriction is not invariant under the permutation")
            cyc.append(j)
            seen.add(j)
            j = p[j]
        out.append(tuple(cyc))
    return out


def polar_partition(model: FibreModel, y_star: complex, final_x: np.ndarray, scale: float,
                    rel_tol: float = 1e-6, gap_ratio: float = 1e3) -> tuple[tuple[int, ...], ...]:
    """Group sheets by the fibre point over ``y_star`` they converge to.

    The fibre over ``y_star`` is clustered with :func:`cluster_roots`
    (tolerance ``rel_tol * scale``); every sheet is then assigned to the
    nearest cluster.  The distance of each sheet to its cluster must be
    ``gap_ratio`` times smaller than the distance between clusters.
    """
    from .algebra import cluster_roots

    c = model.coeffs(y_star)
    roots = univariate_roots(c[::-1], tol_root=1e-8)
    groups = cluster_roots(c[::-1], roots, scale=scale, rel_tol=rel_tol)
    centers = np.array([z for z, _ in groups])
    sizes = [m for _, m in groups]
    d = np.abs(final_x[:, None] - centers[None, :])
    assign = np.argmin(d, axis=1)
    counts = [int(np.sum(assign == k)) for k in range(len(centers))]
    if counts != sizes:
        raise TrackingError(f"sheet assignment {counts} does not match cluster multiplicities {sizes}")
    if len(centers) > 1:
        cd = np.abs(centers[:, None] - centers[None, :])
        np.fill_diagonal(cd, np.inf)
        inter = float(cd.min())
        spread = float(np.max(np.min(np.abs(roots[:, None] - centers[None, :]), axis=1)))
        own = float(np.max(d[np.arange(len(assign)), assign]))
        if spread * gap_ratio > inter:
            raise TrackingError(f"cluster gap ratio {inter / max(spread, 1e-300):.3g} below {gap_ratio:g}")
        if own > 0.5 * inter:
            raise TrackingError("tracked sheets are not close enough to the polar fibre")
    parts = [tuple(int(i) for i in np.nonzero(assign == k)[0]) for k in range(len(centers))]
    return tuple(sorted(parts))


def escape_record(model: FibreModel, res: PathTrackResult, margin: float) -> dict:
    """Per-sheet first exit parameter (sample index) and crossing count of ``|x| = eps``."""
    X = np.abs(np.array(res.samples_x))
    inside = X < model.eps
    exits, crossings = [], []
    for s in range(X.shape[1]):
        col = inside[:, s]
        changes = np.nonzero(col[1:] != col[:-1])[0]
        crossings.append(int(len(changes)))
        exits.append(int(changes[0] + 1) if len(changes) else None)
    final = np.abs(res.final_roots)
    escaping = [int(i) for i in np.nonzero(final >= model.eps * (1 - margin))[0]]
    return {"exit_sample": exits, "crossings": crossings, "escaping": escaping}
