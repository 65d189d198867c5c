"""Set-up objects for the germ f*conj(g): the real function h, the polar
curve, the critical-locus systems, and the hypothesis validators."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .algebra import (
    BivariatePoly,
    GaussianRational,
    NumericPoly,
    is_squarefree,
    poly_exact_div,
    poly_gcd,
    resultant_x,
    resultant_y,
    squarefree_decomposition,
)

log = logging.getLogger(__name__)

Quad = tuple[int, int, int, int]


@dataclass(frozen=True)
class MixedRealPoly:
    """Polynomial in ``x, conj(x), y, conj(y)``.

    Keys are exponent quadruples ``(i, j, k, l)`` for
    ``x**i * conj(x)**j * y**k * conj(y)**l``.
    """
    terms: dict[Quad, GaussianRational]

    def __post_init__(self):
        object.__setattr__(self, "terms", {m: c for m, c in self.terms.items() if c})

    def is_real(self) -> bool:
        """Closed under the conjugation symmetry, hence real-valued."""
        for (i, j, k, l), c in self.terms.items():
            if self.terms.get((j, i, l, k), GaussianRational(0)) != c.conjugate():
                return False
        return True

    def __call__(self, x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        xb, yb = np.conj(x), np.conj(y)
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for (i, j, k, l), c in self.terms.items():
            out = out + complex(c) * x ** i * xb ** j * y ** k * yb ** l
        return out if out.ndim else complex(out)

    def __sub__(self, other: "MixedRealPoly") -> "MixedRealPoly":
        d = dict(self.terms)
        for m, c in other.terms.items():
            d[m] = d.get(m, GaussianRational(0)) - c
        return MixedRealPoly(d)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (i, j, k, l), c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"{v}^{e}" if e > 1 else v
                            for v, e in (("x", i), ("xb", j), ("y", k), ("yb", l)) if e)
            parts.append(f"({c})*{mono}" if mono else f"({c})")
        return " + ".join(parts)


def abs_squared(p: BivariatePoly) -> MixedRealPoly:
    """``|p|**2 = p * conj(p)`` as a mixed polynomial."""
    d: dict[Quad, GaussianRational] = {}
    items = list(p.terms.items())
    for (a, b), c in items:
        for (a2, b2), c2 in items:
            m = (a, a2, b, b2)
            d[m] = d.get(m, GaussianRational(0)) + c * c2.conjugate()
    return MixedRealPoly(d)


def critical_set_h(f: BivariatePoly, g: BivariatePoly) -> MixedRealPoly:
    """``h = |f g_x|^2 - |g f_x|^2``; its zero set is the critical locus of
    ``(x, y) -> (y, f*conj(g))``."""
    return abs_squared(f * g.derivative("x")) - abs_squared(g * f.derivative("x"))


def polar_curve(f: BivariatePoly, g: BivariatePoly) -> BivariatePoly:
    """``df/dx`` with every factor shared with ``f*g`` divided out, normalized.

    Returns the constant 1 (empty curve) when nothing is left, including
    the degenerate case ``df/dx == 0`` which is logged as a warning.
    """
    if f.is_constant():
        raise ValueError("f must be nonconstant")
    fx = f.derivative("x")
    if fx.is_zero():
        log.warning("f does not depend on x: the polar curve is empty")
        return BivariatePoly.constant(1)
    fg = f * g
    gam = fx
    while True:
        d = poly_gcd(gam, fg)
        if d.is_constant():
            break
        gam = poly_exact_div(gam, d)
    return gam.normalized()


def polar_components(f: BivariatePoly, g: BivariatePoly) -> list[tuple[BivariatePoly, int]]:
    """Squarefree decomposition of the polar curve restricted to factors through 0.

    A component of multiplicity ``k`` produces ``k+1`` merging sheets at
    each of its points in a generic fibre.
    """
    gam = polar_curve(f, g)
    if gam.is_constant():
        return []
    return [(c, k) for c, k in squarefree_decomposition(gam) if not c.constant_term()]


@dataclass(frozen=True)
class PolySystem:
    """Common zeros of ``equations`` near the origin."""
    name: str
    equations: tuple[BivariatePoly, ...]
    at_origin: bool
    isolated: bool
    certificate: str

    @property
    def local_points(self) -> list[tuple[complex, complex]]:
        """Solutions in a small neighbourhood of 0 (only meaningful if isolated)."""
        return [(0j, 0j)] if self.at_origin else []


def _system(name: str, eqs: list[BivariatePoly]) -> PolySystem:
    eqs = [e for e in eqs]
    if any(e.is_constant() and not e.is_zero() for e in eqs):
        return PolySystem(name, tuple(eqs), False, True, "contains a nonzero constant: empty")
    nonzero = [e for e in eqs if not e.is_zero()]
    at_origin = all(not e.constant_term() for e in eqs)
    if not nonzero:
        return PolySystem(name, tuple(eqs), True, False, "all equations vanish identically")
    d = reduce(poly_gcd, nonzero)
    if d.is_constant() or d.constant_term():
        cert = f"gcd of the equations is {d}, a unit at 0"
        return PolySystem(name, tuple(eqs), at_origin, True, cert)
    return PolySystem(name, tuple(eqs), at_origin, False, f"common factor {d} passes through 0")


@dataclass(frozen=True)
class SigmaDecomposition:
    sigma_f: PolySystem
    sigma_g: PolySystem
    f_and_g: PolySystem

    @property
    def systems(self) -> tuple[PolySystem, PolySystem, PolySystem]:
        return (self.sigma_f, self.sigma_g, self.f_and_g)

    def local_points(self) -> list[tuple[complex, complex]]:
        pts = []
        for s in self.systems:
            for p in s.local_points:
                if p not in pts:
                    pts.append(p)
        return pts


def sigma_decomposition(f: BivariatePoly, g: BivariatePoly) -> SigmaDecomposition:
    """The three systems whose union is the singular locus of ``f*g``.

    Raises ``ValueError`` unless ``f``, ``g`` are reduced and coprime.
    """
    if not is_squarefree(f):
        raise ValueError("f is not reduced")
    if not is_squarefree(g) and not g.is_constant():
        raise ValueError("g is not reduced")
    if g.is_zero() or f.is_zero():
        raise ValueError("f and g must be nonzero")
    if not poly_gcd(f, g).is_constant():
        raise ValueError("f and g are not coprime")
    return SigmaDecomposition(
        _system("Sigma(f)", [f, f.derivative("x"), f.derivative("y")]),
        _system("Sigma(g)", [g, g.derivative("x"), g.derivative("y")]),
        _system("f=g=0", [f, g]),
    )


@dataclass
class HypothesisReport:
    mode: str
    g_univariate: bool
    f_reduced: bool
    g_reduced: bool
    coprime: bool
    fg_isolated_singularity: bool
    f_x_regular: bool
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all((self.g_univariate, self.f_reduced, self.g_reduced, self.coprime,
                    self.fg_isolated_singularity, self.f_x_regular))

    def failures(self) -> list[str]:
        names = ("g_univariate", "f_reduced", "g_reduced", "coprime",
                 "fg_isolated_singularity", "f_x_regular")
        return [n for n in names if not getattr(self, n)]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "g_univariate": self.g_univariate,
            "f_reduced": self.f_reduced,
            "g_reduced": self.g_reduced,
            "coprime": self.coprime,
            "fg_isolated_singularity": self.fg_isolated_singularity,
            "f_x_regular": self.f_x_regular,
            "messages": list(self.messages),
        }


def _order_at_zero(p: BivariatePoly, var: str) -> int | None:
    if p.is_zero():
        return None
    return p.order(var)


def check_hypotheses(f: BivariatePoly, g: BivariatePoly) -> HypothesisReport:
    """Validate the standing assumptions; never raises, failures are reported.

    ``fg_isolated_singularity`` is the proxy for an isolated critical value
    of ``f*conj(g)``: ``f*g`` squarefree and ``{(fg)_x = (fg)_y = 0}``
    isolated at the origin.  ``f_x_regular`` requires
    ``f(x, 0) = c * x**n`` with ``n = deg_x f >= 1`` so that the projection
    to ``y`` has constant degree ``n``.
    """
    msgs: list[str] = []
    g_const = g.is_constant()
    mode = "holomorphic" if g_const else "fgbar"
    msgs.append(f"mode={mode}")

    g_univariate = not g.depends_on("x")
    msgs.append("g depends only on y" if g_univariate else f"g = {g} depends on x")

    f_reduced = not f.is_constant() and is_squarefree(f)
    if f.is_constant():
        msgs.append("f is constant")
    elif not f_reduced:
        msgs.append(f"f is not reduced: gcd(f, f_x, f_y) = {poly_gcd(poly_gcd(f, f.derivative('x')), f.derivative('y'))}")
    else:
        msgs.append("f reduced: gcd(f, f_x, f_y) = 1")

    if g.is_zero():
        g_reduced = False
        msgs.append("g is identically zero")
    elif g_const:
        g_reduced = True
        msgs.append("g is a nonzero constant")
    else:
        g_reduced = is_squarefree(g)
        msgs.append("g reduced" if g_reduced else "g is not reduced")

    if f.is_zero() or g.is_zero():
        coprime = False
    else:
        d = poly_gcd(f, g)
        coprime = d.is_constant()
        msgs.append(f"gcd(f,g) = {d}")
    if not coprime:
        msgs.append("gcd(f,g) ≠ 1")

    fg_iso = False
    if f_reduced and g_reduced and coprime:
        fg = f * g
        fgx, fgy = fg.derivative("x"), fg.derivative("y")
        if fg.constant_term():
            fg_iso = True
            msgs.append("f*g(0) != 0: no singularity at 0")
        elif fgx.constant_term() or fgy.constant_term():
            fg_iso = True
            msgs.append("f*g is smooth at 0")
        else:
            sys = _system("Sigma(fg)", [fgx, fgy])
            fg_iso = sys.isolated
            msgs.append(f"singular system of f*g: {sys.certificate}")
            for var, res_fn in (("y", resultant_x), ("x", resultant_y)):
                other = "x" if var == "y" else "y"
                dx, dy = fgx.degree(other), fgy.degree(other)
                if dx >= 1 or dy >= 1:
                    # a degree-0 argument q gives Res(p, q) = q**deg(p)
                    if dx >= 1 and dy >= 1:
                        r = res_fn(fgx, fgy)
                    else:
                        r = fgy ** dx if dy == 0 else fgx ** dy
                    if r.is_zero():
                        msgs.append(f"Res_{other}((fg)_x,(fg)_y) vanishes identically")
                    else:
                        msgs.append(f"Res_{other}((fg)_x,(fg)_y) has order {r.order(var)} at 0")
    else:
        msgs.append("isolated-singularity check skipped (needs reduced coprime f, g)")
    msgs.append("note: isolated critical value of f*conj(g) is checked by proxy")

    n = f.degree("x")
    row = [a for (a, b) in f.terms if b == 0]
    f_x_regular = n >= 1 and bool(row) and min(row) == n and f.coeff(n, 0) != 0
    if f_x_regular:
        msgs.append(f"f is x-regular of order {n}")
    else:
        msgs.append(f"f is not x-regular: f(x,0) must equal c*x^{max(n, 1)} with nonzero c")
    if f.constant_term():
        msgs.append("f(0,0) != 0")

    return HypothesisReport(mode, g_univariate, f_reduced, g_reduced, coprime, fg_iso,
                            f_x_regular, msgs)


# ---------------------------------------------------------------------------
# real Jacobian of f*conj(g) and rank-deficiency sampling
# ---------------------------------------------------------------------------

def real_jacobian(f: BivariatePoly, g: BivariatePoly, x, y) -> np.ndarray:
    """Real 2x4 Jacobian of ``F = f*conj(g)`` in ``(Re x, Im x, Re y, Im y)``.

    With ``g = g(y)`` the Wirtinger derivatives are ``F_x = f_x conj(g)``,
    ``F_y = f_y conj(g)``, ``F_xbar = 0`` and ``F_ybar = f conj(g')``; a
    real direction ``u`` contributes ``F_z + F_zbar`` and ``v`` contributes
    ``i (F_z - F_zbar)``.  Returns an array of shape ``(..., 2, 4)``.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    gb = np.conj(NumericPoly(g)(np.zeros_like(y), y))
    gpb = np.conj(NumericPoly(g.derivative("y"))(np.zeros_like(y), y))
    Fx = NumericPoly(f.derivative("x"))(x, y) * gb
    Fy = NumericPoly(f.derivative("y"))(x, y) * gb
    Fyb = NumericPoly(f)(x, y) * gpb
    cols = [Fx, 1j * Fx, Fy + Fyb, 1j * (Fy - Fyb)]
    J = np.empty(np.broadcast(x, y).shape + (2, 4))
    for k, c in enumerate(cols):
        J[..., 0, k] = c.real
        J[..., 1, k] = c.imag
    return J


def jacobian_sigma_min(f: BivariatePoly, g: BivariatePoly, x, y) -> np.ndarray:
    """Smallest singular value of the real Jacobian (0 means rank-deficient)."""
    return np.linalg.svd(real_jacobian(f, g, x, y), compute_uv=False)[..., -1]


def distance_to_sigma(f: BivariatePoly, g: BivariatePoly, x, y) -> np.ndarray:
    """Distance from ``(x, y)`` to the local points of the three systems whose
    union is the singular locus of ``f*g`` (``inf`` if they are all empty near 0)."""
    pts = sigma_decomposition(f, g).local_points()
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    d = np.full(np.broadcast(x, y).shape, np.inf)
    for px, py in pts:
        d = np.minimum(d, np.sqrt(np.abs(x - px) ** 2 + np.abs(y - py) ** 2))
    return d


@dataclass
class DegenerateSample:
    x: np.ndarray
    y: np.ndarray
    sigma_min: np.ndarray
    accepted: np.ndarray
    iterations: int

    @property
    def count(self) -> int:
        return int(self.accepted.sum())


_PAIRS = [(i, j) for i in range(4) for j in range(i + 1, 4)]


def jacobian_minors(f: BivariatePoly, g: BivariatePoly, x, y) -> np.ndarray:
    """The six 2x2 minors of the real Jacobian, shape ``(..., 6)``.

    Their squares sum to ``det(J J^T) = (sigma_1 sigma_2)**2`` (Cauchy-Binet),
    so they vanish together exactly where the Jacobian drops rank.
    """
    J = real_jacobian(f, g, x, y)
    return np.stack([J[..., 0, i] * J[..., 1, j] - J[..., 0, j] * J[..., 1, i] for i, j in _PAIRS], axis=-1)


def sample_rank_deficient(f: BivariatePoly, g: BivariatePoly, count: int = 1000, seed: int = 0,
                          radius: float = 0.1, tol: float = 1e-6, target: float = 1e-14,
                          max_iter: int = 200, oversample: float = 1.5) -> DegenerateSample:
    """Seeded points where the real Jacobian of ``f*conj(g)`` is rank-deficient.

    Random starts in the 4-ball of the given radius are driven to a common
    zero of the Jacobian minors by a batched Levenberg-Marquardt iteration
    (finite-difference derivative of the minors, a few damping values
    and step multipliers tried per iteration, the best decrease kept).
    A vector residual is used rather than ``sigma_min`` itself: close to
    the origin the two singular values nearly coincide, so ``sigma_min``
    is not differentiable, and the minimum lies in narrow valleys where
    scalar descent zig-zags.  Iteration stops once ``sigma_min <= target``
    or the budget runs out; points ending with ``sigma_min <= tol`` are
    accepted and the first ``count`` of them are returned.
    """
    rng = np.random.default_rng(seed)
    N = int(np.ceil(count * oversample))
    z = rng.normal(size=(N, 4))
    z *= (radius * rng.uniform(size=(N, 1)) ** 0.25) / np.linalg.norm(z, axis=1, keepdims=True)

    def split(zz):
        return zz[..., 0] + 1j * zz[..., 1], zz[..., 2] + 1j * zz[..., 3]

    def res(zz):
        return jacobian_minors(f, g, *split(zz))

    def smin(zz):
        return jacobian_sigma_min(f, g, *split(zz))

    r = res(z)
    cost = np.linalg.norm(r, axis=1)
    it = 0
    eye = np.eye(4)
    for it in range(1, max_iter + 1):
        active = (smin(z) > target) & (cost > 0)
        if not active.any():
            break
        za, ra, ca = z[active], r[active], cost[active]
        h = 1e-7 * np.maximum(np.linalg.norm(za, axis=1), 1e-12)
        Jr = np.empty(za.shape[:1] + (6, 4))
        for k in range(4):
            e = h[:, None] * eye[k]
            Jr[:, :, k] = (res(za + e) - res(za - e)) / (2 * h[:, None])
        JtJ = np.swapaxes(Jr, 1, 2) @ Jr
        Jtr = np.einsum("nik,ni->nk", Jr, ra)
        scale = np.trace(JtJ, axis1=1, axis2=2)[:, None, None]
        best_z, best_r, best_c = za, ra, ca
        for mu in (1e-10, 1e-6, 1e-3, 1e-1):
            A = JtJ + mu * np.maximum(scale, 1e-300) * eye
            try:
                step = -np.linalg.solve(A, Jtr[..., None])[..., 0]
            except np.linalg.LinAlgError:
                continue
            for mult in (2.0, 1.0, 0.5):
                cand = za + mult * step
                rc = res(cand)
                cc = np.linalg.norm(rc, axis=1)
                better = np.isfinite(cc) & (cc < best_c)
                best_z = np.where(better[:, None], cand, best_z)
                best_r = np.where(better[:, None], rc, best_r)
                best_c = np.where(better, cc, best_c)
        stalled = best_c >= ca
        z[active], r[active], cost[active] = best_z, best_r, best_c
        if stalled.all():
            break
    s = smin(z)
    acc = np.flatnonzero(s <= tol)[:count]
    mask = np.zeros(N, dtype=bool)
    mask[acc] = True
    return DegenerateSample(z[acc, 0] + 1j * z[acc, 1], z[acc, 2] + 1j * z[acc, 3], s[acc], mask, it)
