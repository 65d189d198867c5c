"""Exact bivariate polynomials over the Gaussian rationals.

Symbolic work (derivatives, gcd, resultants, squarefree decomposition) is
exact; floating point only enters through :func:`complex_eval`,
:class:`NumericPoly` and :func:`univariate_roots`.

The fixed monomial order everywhere is graded lexicographic with x > y.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
import sympy
from sympy import QQ, QQ_I

__all__ = [
    "GaussianRational",
    "BivariatePoly",
    "NumericPoly",
    "PolyParseError",
    "NegativeExponentError",
    "NonPolynomialError",
    "DegreeDropError",
    "RootFindingError",
    "poly_parse",
    "poly_derivative",
    "poly_gcd",
    "poly_exact_div",
    "squarefree_decomposition",
    "is_squarefree",
    "resultant_x",
    "resultant_y",
    "complex_eval",
    "univariate_roots",
    "cluster_roots",
]

_EPS = np.finfo(float).eps


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise TypeError("floats are not exact; pass a Fraction or a string")
    if hasattr(v, "numerator") and hasattr(v, "denominator"):
        return Fraction(int(v.numerator), int(v.denominator))
    return Fraction(v)


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            re, im = re.re, re.im + _frac(im)
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def coerce(cls, v) -> "GaussianRational":
        if isinstance(v, GaussianRational):
            return v
        if isinstance(v, complex):
            raise TypeError("complex floats are not exact")
        return cls(v)

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        n = self * o.conjugate()
        return GaussianRational(n.re / d, n.im / d)

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussianRational(1) / (self ** -k)
        out, base = GaussianRational(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # comparisons / conversions ---------------------------------------
    def __eq__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        return f"GaussianRational({str(self.re)!r}, {str(self.im)!r})"

    def __str__(self):
        return _format_coeff(self)


def _coerce_or_none(v):
    if isinstance(v, GaussianRational):
        return v
    if isinstance(v, (int, Fraction)):
        return GaussianRational(v)
    return None


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I_UNIT = GaussianRational(0, 1)


def _fmt_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _format_coeff(c: GaussianRational) -> str:
    if c.im == 0:
        return _fmt_rational(c.re)
    if c.re == 0:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{_fmt_rational(c.im)}*i"
    sign = "-" if c.im < 0 else "+"
    mag = abs(c.im)
    im = "i" if mag == 1 else f"{_fmt_rational(mag)}*i"
    return f"({_fmt_rational(c.re)}{sign}{im})"


def _grlex_key(mono: tuple[int, int]) -> tuple[int, int]:
    a, b = mono
    return (a + b, a)


class BivariatePoly:
    """Immutable polynomial in ``x, y`` with Gaussian-rational coefficients.

    ``terms`` maps exponent pairs ``(a, b)`` (for ``x**a * y**b``) to nonzero
    coefficients; the zero polynomial has no terms.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None):
        clean: dict[tuple[int, int], GaussianRational] = {}
        for (a, b), c in (terms or {}).items():
            a, b = int(a), int(b)
            if a < 0 or b < 0:
                raise ValueError("exponents must be nonnegative")
            c = GaussianRational.coerce(c)
            if c:
                clean[(a, b)] = clean.get((a, b), ZERO) + c
                if not clean[(a, b)]:
                    del clean[(a, b)]
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("BivariatePoly is immutable")

    # constructors -------------------------------------------------------
    @classmethod
    def constant(cls, c) -> "BivariatePoly":
        return cls({(0, 0): c})

    @classmethod
    def x(cls) -> "BivariatePoly":
        return cls({(1, 0): 1})

    @classmethod
    def y(cls) -> "BivariatePoly":
        return cls({(0, 1): 1})

    @classmethod
    def monomial(cls, a: int, b: int, c=1) -> "BivariatePoly":
        return cls({(a, b): c})

    @classmethod
    def _wrap(cls, d):
        p = cls.__new__(cls)
        object.__setattr__(p, "_terms", d)
        object.__setattr__(p, "_hash", None)
        return p

    # basic queries --------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, int], GaussianRational]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[tuple[int, int], GaussianRational]]:
        return iter(sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True))

    def coeff(self, a: int, b: int) -> GaussianRational:
        return self._terms.get((a, b), ZERO)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == (0, 0) for m in self._terms)

    def constant_term(self) -> GaussianRational:
        return self.coeff(0, 0)

    def degree(self, var: str) -> int:
        """Degree in ``var``; ``-1`` for the zero polynomial."""
        idx = _var_index(var)
        return max((m[idx] for m in self._terms), default=-1)

    def order(self, var: str) -> int:
        """Largest power of ``var`` dividing the polynomial (``-1`` for zero)."""
        idx = _var_index(var)
        return min((m[idx] for m in self._terms), default=-1)

    def total_degree(self) -> int:
        return max((a + b for a, b in self._terms), default=-1)

    def depends_on(self, var: str) -> bool:
        idx = _var_index(var)
        return any(m[idx] > 0 for m in self._terms)

    def leading_monomial(self) -> tuple[int, int]:
        if not self._terms:
            raise ValueError("zero polynomial has no leading monomial")
        return max(self._terms, key=_grlex_key)

    def leading_coeff(self) -> GaussianRational:
        return self._terms[self.leading_monomial()]

    def normalized(self) -> "BivariatePoly":
        """Scale so the grlex-leading coefficient is 1."""
        if not self._terms:
            return self
        lc = self.leading_coeff()
        return BivariatePoly._wrap({m: c / lc for m, c in self._terms.items()})

    def conjugate_coeffs(self) -> "BivariatePoly":
        return BivariatePoly._wrap({m: c.conjugate() for m, c in self._terms.items()})

    def coeffs_in_x(self) -> list["BivariatePoly"]:
        """Coefficients of ``x**0, x**1, ...`` as polynomials in ``y``."""
        out = [dict() for _ in range(self.degree("x") + 1)]
        for (a, b), c in self._terms.items():
            out[a][(0, b)] = c
        return [BivariatePoly._wrap(d) for d in out]

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        d = dict(self._terms)
        for m, c in o._terms.items():
            s = d.get(m, ZERO) + c
            if s:
                d[m] = s
            else:
                d.pop(m, None)
        return BivariatePoly._wrap(d)

    __radd__ = __add__

    def __neg__(self):
        return BivariatePoly._wrap({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        d: dict[tuple[int, int], GaussianRational] = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in o._terms.items():
                m = (a1 + a2, b1 + b2)
                d[m] = d.get(m, ZERO) + c1 * c2
        return BivariatePoly._wrap({m: c for m, c in d.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        out, base = BivariatePoly.constant(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale(self, c) -> "BivariatePoly":
        c = GaussianRational.coerce(c)
        return BivariatePoly({m: v * c for m, v in self._terms.items()})

    def __eq__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(frozenset(self._terms.items())))
        return self._hash

    # calculus / substitution ---------------------------------------------
    def derivative(self, var: str) -> "BivariatePoly":
        return poly_derivative(self, var)

    def compose(self, xsub: "BivariatePoly", ysub: "BivariatePoly") -> "BivariatePoly":
        """Substitute ``x -> xsub`` and ``y -> ysub``."""
        xs, ys = _as_poly(xsub), _as_poly(ysub)
        xpow: dict[int, BivariatePoly] = {0: BivariatePoly.constant(1)}
        ypow: dict[int, BivariatePoly] = {0: BivariatePoly.constant(1)}
        for k in range(1, self.degree("x") + 1):
            xpow[k] = xpow[k - 1] * xs
        for k in range(1, self.degree("y") + 1):
            ypow[k] = ypow[k - 1] * ys
        out = BivariatePoly()
        for (a, b), c in self._terms.items():
            out = out + (xpow[a] * ypow[b]).scale(c)
        return out

    def evaluate(self, x, y) -> GaussianRational:
        """Exact evaluation at Gaussian-rational (or rational) points."""
        x, y = GaussianRational.coerce(x), GaussianRational.coerce(y)
        total = ZERO
        for (a, b), c in self._terms.items():
            total = total + c * x ** a * y ** b
        return total

    def __call__(self, x, y):
        if isinstance(x, (complex, float)) or isinstance(y, (complex, float)):
            return complex_eval(self, complex(x), complex(y))
        return self.evaluate(x, y)

    # sympy bridge ---------------------------------------------------------
    def to_sympy(self) -> sympy.Poly:
        d = {m: QQ_I(QQ(c.re.numerator, c.re.denominator), QQ(c.im.numerator, c.im.denominator))
             for m, c in self._terms.items()}
        return sympy.Poly.from_dict(d, _SX, _SY, domain=QQ_I)

    @classmethod
    def from_sympy(cls, p: sympy.Poly) -> "BivariatePoly":
        gens = p.gens
        d = {}
        for mono, c in p.rep.to_dict().items():
            e = dict(zip(gens, mono))
            a, b = int(e.get(_SX, 0)), int(e.get(_SY, 0))
            if set(gens) - {_SX, _SY}:
                raise ValueError(f"unexpected generators {gens}")
            d[(a, b)] = GaussianRational(_frac(c.x), _frac(c.y))
        return cls(d)

    # printing -------------------------------------------------------------
    def __str__(self):
        if not self._terms:
            return "0"
        parts: list[str] = []
        for (a, b), c in self.items():
            mono = "*".join(
                s for s in (
                    ("x" if a == 1 else f"x^{a}") if a else "",
                    ("y" if b == 1 else f"y^{b}") if b else "",
                ) if s
            )
            negative = (c.im == 0 and c.re < 0) or (c.re == 0 and c.im < 0)
            mag = -c if negative else c
            cs = _format_coeff(mag)
            if not mono:
                body = cs
            elif mag == ONE:
                body = mono
            else:
                body = f"{cs}*{mono}"
            if not parts:
                parts.append(("-" if negative else "") + body)
            else:
                parts.append((" - " if negative else " + ") + body)
        return "".join(parts)

    def __repr__(self):
        return f"BivariatePoly({str(self)!r})"


_SX, _SY = sympy.symbols("x y")


def _var_index(var: str) -> int:
    if var == "x":
        return 0
    if var == "y":
        return 1
    raise ValueError(f"unknown variable {var!r}; expected 'x' or 'y'")


def _as_poly(v):
    if isinstance(v, BivariatePoly):
        return v
    if isinstance(v, (int, Fraction, GaussianRational)):
        return BivariatePoly.constant(v)
    return None


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class PolyParseError(ValueError):
    """Raised on malformed polynomial text; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NegativeExponentError(PolyParseError):
    pass


class NonPolynomialError(PolyParseError):
    pass


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise PolyParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            toks.append(("num", m.group(1), start))
        elif m.group(2) is not None:
            name = m.group(2)
            if name not in ("x", "y", "i"):
                raise PolyParseError(f"unknown symbol {name!r}", start)
            toks.append(("id", name, start))
        else:
            op = "^" if m.group(3) == "**" else m.group(3)
            toks.append(("op", op, start))
        pos = m.end()
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op: str):
        t = self.take()
        if t[0] != "op" or t[1] != op:
            raise PolyParseError(f"expected {op!r}", t[2])
        return t

    def parse(self) -> BivariatePoly:
        if self.peek()[0] == "end":
            raise PolyParseError("empty expression", 0)
        p = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise PolyParseError(f"unexpected token {t[1]!r}", t[2])
        return p

    def expr(self) -> BivariatePoly:
        p = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> BivariatePoly:
        p = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            _, op, pos = self.take()
            q = self.unary()
            if op == "*":
                p = p * q
            else:
                if not q.is_constant():
                    raise NonPolynomialError("division by a non-constant expression", pos)
                c = q.constant_term()
                if not c:
                    raise PolyParseError("division by zero", pos)
                p = p.scale(ONE / c)
        return p

    def unary(self) -> BivariatePoly:
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            p = self.unary()
            return -p if t[1] == "-" else p
        return self.power()

    def power(self) -> BivariatePoly:
        base = self.atom()
        t = self.peek()
        if t[0] == "op" and t[1] == "^":
            self.take()
            k = self.exponent()
            base = base ** k
            t2 = self.peek()
            if t2[0] == "op" and t2[1] == "^":
                raise PolyParseError("chained exponents are ambiguous; add parentheses", t2[2])
        return base

    def exponent(self) -> int:
        t = self.peek()
        pos = t[2]
        sign = 1
        while t[0] == "op" and t[1] in "+-":
            self.take()
            if t[1] == "-":
                sign = -sign
            t = self.peek()
        if t[0] == "num":
            self.take()
            val = GaussianRational(sign * int(t[1]))
        elif t[0] == "op" and t[1] == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            if not e.is_constant():
                raise NonPolynomialError("exponent must be a constant", pos)
            val = e.constant_term() * sign
        else:
            raise PolyParseError("expected an exponent", pos)
        if val.im != 0 or val.re.denominator != 1:
            raise NonPolynomialError("exponent must be an integer", pos)
        if val.re < 0:
            raise NegativeExponentError("negative exponent", pos)
        return int(val.re)

    def atom(self) -> BivariatePoly:
        t = self.take()
        kind, val, pos = t
        if kind == "num":
            out = BivariatePoly.constant(int(val))
        elif kind == "id":
            out = {"x": BivariatePoly.x(), "y": BivariatePoly.y(),
                   "i": BivariatePoly.constant(I_UNIT)}[val]
        elif kind == "op" and val == "(":
            out = self.expr()
            self.expect(")")
        else:
            raise PolyParseError(f"unexpected token {val!r}" if val else "unexpected end of input", pos)
        nxt = self.peek()
        if nxt[0] in ("num", "id") or (nxt[0] == "op" and nxt[1] == "("):
            raise PolyParseError("missing operator (implicit multiplication is not allowed)", nxt[2])
        return out


def poly_parse(text: str) -> BivariatePoly:
    """Parse an arithmetic expression in ``x``, ``y`` and ``i``.

    Accepts integer literals, ``+ - * /``, ``^`` (or ``**``) with nonnegative
    integer exponents, and parentheses. Division is allowed only by nonzero
    constants, so ``1/2*x`` is fine and ``x/y`` is rejected.

    >>> str(poly_parse("(x+y)^2"))
    'x^2 + 2*x*y + y^2'
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Exact symbolic operations
# ---------------------------------------------------------------------------

def poly_derivative(p: BivariatePoly, var: str) -> BivariatePoly:
    idx = _var_index(var)
    d = {}
    for (a, b), c in p._terms.items():
        e = (a, b)[idx]
        if e:
            m = (a - 1, b) if idx == 0 else (a, b - 1)
            d[m] = c * e
    return BivariatePoly._wrap(d)


def poly_gcd(p: BivariatePoly, q: BivariatePoly) -> BivariatePoly:
    """Greatest common divisor, normalized to grlex-leading coefficient 1."""
    if p.is_zero() and q.is_zero():
        raise ValueError("gcd of two zero polynomials is undefined")
    if p.is_zero():
        return q.normalized()
    if q.is_zero():
        return p.normalized()
    if p.is_constant() or q.is_constant():
        return BivariatePoly.constant(1)
    return BivariatePoly.from_sympy(p.to_sympy().gcd(q.to_sympy())).normalized()


def poly_exact_div(p: BivariatePoly, d: BivariatePoly) -> BivariatePoly:
    """``p / d``; raises ``ValueError`` unless the division is exact."""
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if d.is_constant():
        return p.scale(ONE / d.constant_term())
    quo, rem = p.to_sympy().div(d.to_sympy())
    if not rem.is_zero:
        raise ValueError(f"{d} does not divide {p}")
    return BivariatePoly.from_sympy(quo)


def squarefree_decomposition(p: BivariatePoly) -> list[tuple[BivariatePoly, int]]:
    """Pairwise coprime squarefree factors with multiplicities, each normalized."""
    if p.is_zero():
        raise ValueError("zero polynomial has no squarefree decomposition")
    if p.is_constant():
        return []
    _, factors = p.to_sympy().sqf_list()
    out = [(BivariatePoly.from_sympy(f).normalized(), int(k)) for f, k in factors]
    return sorted(out, key=lambda fk: (fk[1], str(fk[0])))


def is_squarefree(p: BivariatePoly) -> bool:
    if p.is_zero():
        return False
    g = reduce(poly_gcd, [p, p.derivative("x"), p.derivative("y")])
    return g.is_constant()


def _resultant(p: BivariatePoly, q: BivariatePoly, var: str) -> BivariatePoly:
    if p.degree(var) < 1 or q.degree(var) < 1:
        raise ValueError(f"resultant needs positive degree in {var} for both inputs")
    sp, sq = p.to_sympy(), q.to_sympy()
    gen = _SX if var == "x" else _SY
    r = sympy.resultant(sp.as_expr(), sq.as_expr(), gen)
    r = sympy.Poly(r, _SX, _SY, domain=QQ_I)
    return BivariatePoly.from_sympy(r)


def resultant_x(p: BivariatePoly, q: BivariatePoly) -> BivariatePoly:
    """Sylvester resultant eliminating ``x``; the result depends on ``y`` only."""
    return _resultant(p, q, "x")


def resultant_y(p: BivariatePoly, q: BivariatePoly) -> BivariatePoly:
    """Sylvester resultant eliminating ``y``; the result depends on ``x`` only."""
    return _resultant(p, q, "y")


# ---------------------------------------------------------------------------
# Floating point evaluation
# ---------------------------------------------------------------------------

def complex_eval(p: BivariatePoly, x: complex, y: complex) -> complex:
    """Horner evaluation in ``y`` for each power of ``x``, then in ``x``.

    Relative error is of order machine epsilon times the number of terms
    times the condition number of the sum; this is not certified.
    """
    x, y = complex(x), complex(y)
    by_a: dict[int, list[tuple[int, complex]]] = {}
    for (a, b), c in p._terms.items():
        by_a.setdefault(a, []).append((b, complex(c)))
    if not by_a:
        return 0j
    acc = 0j
    for a in range(max(by_a), -1, -1):
        row = by_a.get(a, [])
        cy = 0j
        if row:
            coeffs = dict(row)
            for b in range(max(coeffs), -1, -1):
                cy = cy * y + coeffs.get(b, 0j)
        acc = acc * x + cy
    if not (math.isfinite(acc.real) and math.isfinite(acc.imag)):
        raise OverflowError(f"evaluation of {p} overflowed at x={x}, y={y}")
    return acc


class NumericPoly:
    """Dense complex coefficient matrix for fast vectorised evaluation.

    ``C[a, b]`` is the coefficient of ``x**a * y**b``.
    """

    def __init__(self, p: BivariatePoly):
        self.exact = p
        nx, ny = max(p.degree("x"), 0), max(p.degree("y"), 0)
        C = np.zeros((nx + 1, ny + 1), dtype=complex)
        for (a, b), c in p._terms.items():
            C[a, b] = complex(c)
        self.C = C

    @property
    def deg_x(self) -> int:
        return self.C.shape[0] - 1

    def coeffs_in_x(self, y: complex) -> np.ndarray:
        """Ascending coefficients of the univariate polynomial ``p(., y)``."""
        return np.polynomial.polynomial.polyval(complex(y), self.C.T)

    def __call__(self, x, y):
        return np.polynomial.polynomial.polyval2d(x, y, self.C)


# ---------------------------------------------------------------------------
# Univariate roots
# ---------------------------------------------------------------------------

class DegreeDropError(ValueError):
    """The leading coefficient is below tolerance: the degree effectively drops."""


class RootFindingError(RuntimeError):
    """Simultaneous iteration did not reach the residual target."""


def _horner_with_derivative(c_desc: np.ndarray, z: np.ndarray):
    p = np.full_like(z, c_desc[0])
    dp = np.zeros_like(z)
    for c in c_desc[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def univariate_roots(coeffs: Sequence[complex], tol_root: float = 1e-10,
                     lead_tol: float = 1e-14, maxiter: int = 1000) -> np.ndarray:
    """All complex roots, with multiplicity, of a univariate polynomial.

    Parameters
    ----------
    coeffs
        Coefficients, highest degree first (``numpy.roots`` convention).
    tol_root
        Every returned root satisfies ``|p(r)| <= tol_root * sum_k |c_k| |r|^k``.
    lead_tol
        A leading coefficient below ``lead_tol * max|c|`` raises
        :class:`DegreeDropError`.

    Notes
    -----
    Aberth-Ehrlich iteration from equally spaced starting points on a circle
    whose radius is the geometric mean of the root moduli.
    """
    c = np.asarray(coeffs, dtype=complex).ravel()
    if c.size < 2:
        raise ValueError("need degree >= 1")
    cmax = np.max(np.abs(c))
    if not np.all(np.isfinite(c)):
        raise ValueError("non-finite coefficient")
    if cmax == 0 or abs(c[0]) <= lead_tol * cmax:
        raise DegreeDropError(f"leading coefficient {abs(c[0]):.3e} below tolerance")
    zeros_at_origin = 0
    while c.size > 1 and c[-1] == 0:
        c = c[:-1]
        zeros_at_origin += 1
    n = c.size - 1
    if n == 0:
        return np.zeros(zeros_at_origin, dtype=complex)
    c = c / c[0]
    absc = np.abs(c)
    radius = abs(c[-1]) ** (1.0 / n)
    ang = 2 * np.pi * np.arange(n) / n + 0.4
    z = radius * np.exp(1j * ang)
    converged = np.zeros(n, dtype=bool)
    for _ in range(maxiter):
        p, dp = _horner_with_derivative(c, z)
        scale = np.polyval(absc, np.abs(z))
        converged = np.abs(p) <= 4 * _EPS * scale
        if converged.all():
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            w = ratio / (1.0 - ratio * s)
        bad = ~np.isfinite(w)
        if bad.any():
            w[bad] = 1e-3 * (1 + np.abs(z[bad])) * np.exp(1j * np.arange(bad.sum()))
        w[converged] = 0
        z = z - w
    p, _ = _horner_with_derivative(c, z)
    scale = np.polyval(absc, np.abs(z))
    if not np.all(np.abs(p) <= tol_root * scale):
        worst = float(np.max(np.abs(p) / scale))
        raise RootFindingError(f"root iteration did not converge (relative residual {worst:.2e})")
    if zeros_at_origin:
        z = np.concatenate([z, np.zeros(zeros_at_origin, dtype=complex)])
    return z


def _taylor_at(c_desc: np.ndarray, x0: complex) -> np.ndarray:
    """Taylor coefficients ``p^(j)(x0)/j!`` for ``j = 0..n`` via repeated Horner."""
    a = np.array(c_desc, dtype=complex)
    n = a.size - 1
    out = np.zeros(n + 1, dtype=complex)
    for j in range(n + 1):
        acc = a[0]
        nxt = [acc]
        for k in range(1, a.size):
            acc = acc * x0 + a[k]
            nxt.append(acc)
        out[j] = nxt[-1]
        a = np.array(nxt[:-1])
        if a.size == 0:
            break
    return out


def cluster_roots(coeffs: Sequence[complex], roots: Iterable[complex], scale: float | None = None,
                  rel_tol: float = 1e-6, validate_tol: float = 1e-6) -> list[tuple[complex, int]]:
    """Group numerically split multiple roots into ``(center, multiplicity)``.

    Roots closer than ``rel_tol * max(scale, |r|)`` are merged. Because a
    root of multiplicity ``k`` splits by about ``eps**(1/k)`` in floating
    point, candidate groups are first formed with the looser radius
    ``10 * eps**(1/deg)``, and such a group is kept only if the Taylor
    coefficients of the polynomial at its centroid confirm the
    multiplicity (the deflated residual test). ``scale`` defaults to 1.
    """
    c = np.asarray(coeffs, dtype=complex)
    r = np.asarray(list(roots), dtype=complex)
    m = r.size
    if m == 0:
        return []
    s = 1.0 if scale is None else float(scale)
    loc = np.maximum(s, np.abs(r))
    deg = max(c.size - 1, 1)
    loose = max(rel_tol, 10 * _EPS ** (1.0 / deg))

    def groups(tol):
        parent = list(range(m))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(m):
            for j in range(i + 1, m):
                if abs(r[i] - r[j]) <= tol * max(loc[i], loc[j]):
                    parent[find(i)] = find(j)
        out: dict[int, list[int]] = {}
        for i in range(m):
            out.setdefault(find(i), []).append(i)
        return list(out.values())

    result: list[tuple[complex, int]] = []
    for grp in groups(loose):
        k = len(grp)
        center = complex(np.mean(r[grp]))
        if k == 1:
            result.append((center, 1))
            continue
        T = _taylor_at(c, center)
        rho = max(s, abs(center))
        mags = np.abs(T) * rho ** np.arange(T.size)
        ref = mags[k:].max() if mags[k:].size else 1.0
        if ref > 0 and np.all(mags[:k] <= validate_tol * ref):
            result.append((center, k))
            continue
        # not a genuine k-fold root: fall back to the strict radius
        sub_r = r[grp]
        parent_groups: list[list[int]] = []
        used = [False] * k
        for i in range(k):
            if used[i]:
                continue
            cur = [i]
            used[i] = True
            for j in range(i + 1, k):
                if not used[j] and abs(sub_r[i] - sub_r[j]) <= rel_tol * max(s, abs(sub_r[i]), abs(sub_r[j])):
                    cur.append(j)
                    used[j] = True
            parent_groups.append(cur)
        for cur in parent_groups:
            result.append((complex(np.mean(sub_r[cur])), len(cur)))
    result.sort(key=lambda cm: (round(cm[0].real, 12), round(cm[0].imag, 12)))
    return result
