"""Slow, independent cross-checkers.

Nothing here shares code with the series kernel: expansions use plain
``fractions.Fraction`` pairs keyed by exponent tuples and schoolbook
multiplication, and derivatives are central finite differences in floating
point.  Verdicts never depend on this module; it exists to catch kernel bugs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "SamplePlan",
    "CrossCheckReport",
    "Expr",
    "Term",
    "Const",
    "Add",
    "Mul",
    "Scale",
    "Exp",
    "Log",
    "Pow",
    "FromSeries",
    "fd_mixed_second",
    "fd_metric",
    "brute_expand",
    "brute_epsilon_entries",
    "cross_check",
    "sample_points",
]

MAX_TERMS = 200_000
MAX_DEPTH = 64


# ---------------------------------------------------------------------------
# finite differences


def fd_mixed_second(f: Callable, alpha: int, beta: int, point: Sequence[complex], h: float) -> complex:
    """Central-difference estimate of d^2 f / dz_alpha dzbar_beta.

    Uses ``d_z = (d_x - i d_y)/2`` and ``d_zbar = (d_x + i d_y)/2`` with a
    4-point stencil for each real second derivative.
    """
    p = np.asarray(point, dtype=complex)

    def d2(u: np.ndarray, v: np.ndarray) -> complex:
        return (
            f(p + h * u + h * v) - f(p + h * u - h * v) - f(p - h * u + h * v) + f(p - h * u - h * v)
        ) / (4 * h * h)

    n = len(p)
    ex_a = np.zeros(n, dtype=complex)
    ex_a[alpha] = 1
    ey_a = 1j * ex_a
    ex_b = np.zeros(n, dtype=complex)
    ex_b[beta] = 1
    ey_b = 1j * ex_b
    xx = d2(ex_a, ex_b)
    yy = d2(ey_a, ey_b)
    xy = d2(ex_a, ey_b)
    yx = d2(ey_a, ex_b)
    return 0.25 * (xx + yy + 1j * (xy - yx))


def fd_metric(f: Callable, point: Sequence[complex], h: float) -> np.ndarray:
    n = len(point)
    return np.array([[fd_mixed_second(f, a, b, point, h) for b in range(n)] for a in range(n)])


# ---------------------------------------------------------------------------
# brute-force expansion


class Expr:
    """Expression tree node evaluated by :func:`brute_expand`."""

    def __add__(self, other):
        return Add(self, _lift(other))

    def __radd__(self, other):
        return Add(_lift(other), self)

    def __sub__(self, other):
        return Add(self, Scale(_lift(other), -1))

    def __rsub__(self, other):
        return Add(_lift(other), Scale(self, -1))

    def __mul__(self, other):
        if isinstance(other, Expr):
            return Mul(self, other)
        return Scale(self, other)

    __rmul__ = __mul__


def _lift(x):
    return x if isinstance(x, Expr) else Const(x)


@dataclass(eq=False)
class Term(Expr):
    """Single monomial ``coeff * z^m * zbar^k``; ``coeff`` real or ``(re, im)``."""

    m: tuple
    k: tuple
    coeff: object = 1


@dataclass(eq=False)
class Const(Expr):
    value: object


@dataclass(eq=False)
class Add(Expr):
    a: Expr
    b: Expr


@dataclass(eq=False)
class Mul(Expr):
    a: Expr
    b: Expr


@dataclass(eq=False)
class Scale(Expr):
    a: Expr
    s: object


@dataclass(eq=False)
class Exp(Expr):
    a: Expr


@dataclass(eq=False)
class Log(Expr):
    a: Expr


@dataclass(eq=False)
class Pow(Expr):
    a: Expr
    r: object


@dataclass(eq=False)
class FromSeries(Expr):
    """Leaf taking its coefficients from an existing series (read through ``terms()``)."""

    series: object


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def _cfrac(x) -> tuple[Fraction, Fraction]:
    if isinstance(x, tuple):
        return _frac(x[0]), _frac(x[1])
    if hasattr(x, "re") and hasattr(x, "im"):
        return _frac(x.re), _frac(x.im)
    return _frac(x), Fraction(0)


class _Poly:
    """Naive truncated series: dict[(m, k)] -> (re, im)."""

    def __init__(self, n: int, d: int, terms=None):
        self.n = n
        self.d = d
        self.t = {}
        for (m, k), v in (terms or {}).items():
            if sum(m) <= d and sum(k) <= d and (v[0] or v[1]):
                self.t[(m, k)] = v

    def add(self, other, sign=1):
        out = dict(self.t)
        for key, (r, i) in other.t.items():
            a, b = out.get(key, (Fraction(0), Fraction(0)))
            out[key] = (a + sign * r, b + sign * i)
        return _Poly(self.n, self.d, out)

    def scale(self, s):
        sr, si = _cfrac(s)
        return _Poly(self.n, self.d, {k: (r * sr - i * si, r * si + i * sr) for k, (r, i) in self.t.items()})

    def mul(self, other):
        out = {}
        for (m1, k1), (r1, i1) in self.t.items():
            for (m2, k2), (r2, i2) in other.t.items():
                m = tuple(x + y for x, y in zip(m1, m2))
                k = tuple(x + y for x, y in zip(k1, k2))
                if sum(m) > self.d or sum(k) > self.d:
                    continue
                a, b = out.get((m, k), (Fraction(0), Fraction(0)))
                out[(m, k)] = (a + r1 * r2 - i1 * i2, b + r1 * i2 + i1 * r2)
        if len(out) > MAX_TERMS:
            raise MemoryError("brute expansion exceeded its size limit")
        return _Poly(self.n, self.d, out)

    def const(self):
        return self.t.get(((0,) * self.n, (0,) * self.n), (Fraction(0), Fraction(0)))

    def one(self):
        z = (0,) * self.n
        return _Poly(self.n, self.d, {(z, z): (Fraction(1), Fraction(0))})


def _series_sum(b: _Poly, coeffs: Callable[[int], Fraction]) -> _Poly:
    # sum_k coeffs(k) b^k for b without constant term (b^k vanishes for k > 2d)
    total = b.one().scale(coeffs(0))
    power = b.one()
    for k in range(1, 2 * b.d + 1):
        power = power.mul(b)
        if not power.t:
            break
        total = total.add(power.scale(coeffs(k)))
    return total


def _eval(e: Expr, n: int, d: int, depth: int = 0) -> _Poly:
    if depth > MAX_DEPTH:
        raise RecursionError("expression too deep for brute expansion")
    z = (0,) * n
    if isinstance(e, Term):
        return _Poly(n, d, {(tuple(e.m), tuple(e.k)): _cfrac(e.coeff)})
    if isinstance(e, Const):
        return _Poly(n, d, {(z, z): _cfrac(e.value)})
    if isinstance(e, FromSeries):
        return _Poly(n, d, {(m, k): _cfrac(c) for m, k, c in e.series.terms()})
    if isinstance(e, Add):
        return _eval(e.a, n, d, depth + 1).add(_eval(e.b, n, d, depth + 1))
    if isinstance(e, Mul):
        return _eval(e.a, n, d, depth + 1).mul(_eval(e.b, n, d, depth + 1))
    if isinstance(e, Scale):
        return _eval(e.a, n, d, depth + 1).scale(e.s)
    a = _eval(e.a, n, d, depth + 1)
    c0 = a.const()
    if isinstance(e, Exp):
        if c0 != (0, 0):
            raise ValueError("Exp needs a zero constant term")
        return _series_sum(a, lambda k: Fraction(1, math.factorial(k)))
    b = a.add(a.one().scale((c0[0], c0[1])), sign=-1)
    if c0 != (1, 0):
        raise ValueError("Log/Pow need constant term 1")
    if isinstance(e, Log):
        return _series_sum(b, lambda k: Fraction(0) if k == 0 else Fraction((-1) ** (k + 1), k))
    if isinstance(e, Pow):
        r = _frac(e.r)

        def binom(k):
            out = Fraction(1)
            for j in range(k):
                out = out * (r - j) / (j + 1)
            return out

        return _series_sum(b, binom)
    raise TypeError(f"unknown expression node {type(e).__name__}")


def brute_expand(expr: Expr, n: int, d: int):
    """Expand ``expr`` in ``n`` variables to order ``d`` by schoolbook arithmetic.

    Returns a ``HermitianSeries`` when the result is Hermitian, otherwise a
    ``Series`` with equal orders.
    """
    from .series import GaussianRational, HermitianSeries, Series, InvariantError

    p = _eval(expr, n, d)
    terms = {
        key: GaussianRational(r, i) if i else r
        for key, (r, i) in p.t.items()
    }
    terms = {k: (Fraction(v) if isinstance(v, Fraction) else v) for k, v in terms.items()}
    try:
        return HermitianSeries(n, d, terms)
    except InvariantError:
        return Series(n, d, d, terms)


def brute_epsilon_entries(psi, c: int, eps, d: int) -> list[list[Fraction]]:
    """Rescaled radial submatrix ``v_{jk}`` obtained the long way, for integer ``c``.

    Expands ``D_q(z0, z) = |z0+eps|^{2c} e^{c psi} - eps^c (z0+eps)^c
    - eps^c (zbar0+eps)^c + eps^{2c}`` in ``n + 1`` variables, exponentiates,
    reads the coefficients of ``z0 zbar0 z^m zbar^k`` and divides by
    ``c^2 eps^{2c-2}``.
    """
    if int(c) != c or c < 1:
        raise ValueError("the brute epsilon oracle handles positive integer c only")
    c = int(c)
    eps = _frac(eps)
    n = psi.n
    n1 = n + 1
    zero = (0,) * n1
    one0 = (1,) + (0,) * n

    def z0_shift_power(conj: bool) -> Expr:
        # (z0 + eps)^c, or its conjugate, as a sum of monomials
        out: Expr = Const(0)
        for j in range(c + 1):
            m = (j,) + (0,) * n
            coeff = math.comb(c, j) * eps ** (c - j)
            out = out + (Term(zero, m, coeff) if conj else Term(m, zero, coeff))
        return out

    psi_terms: Expr = Const(0)
    for m, k, val in psi.terms():
        psi_terms = psi_terms + Term((0,) + m, (0,) + k, _cfrac(val))
    e_cpsi = Exp(Scale(psi_terms, c))
    modulus = Mul(z0_shift_power(False), z0_shift_power(True))
    dq = modulus * e_cpsi - Scale(z0_shift_power(False), eps ** c) - Scale(
        z0_shift_power(True), eps ** c
    ) + Const(eps ** (2 * c))
    series = _eval(Exp(dq) - Const(1), n1, d + 1)
    from .series import GradedOrder

    monos = GradedOrder(n).monomials(d)
    scale = Fraction(1, c * c) / eps ** (2 * c - 2)
    out = []
    for mj in monos:
        row = []
        for mk in monos:
            r, i = series.t.get(((1,) + mj, (1,) + mk), (Fraction(0), Fraction(0)))
            if i:
                raise ValueError("unexpected imaginary coefficient for a real potential")
            row.append(r * scale)
        out.append(row)
    del one0
    return out


# ---------------------------------------------------------------------------
# sampled comparison


@dataclass(frozen=True)
class SamplePlan:
    points: tuple
    h: float
    tolerance: float = 1e-6
    radius: float = 0.5

    def __post_init__(self):
        for p in self.points:
            if max(abs(complex(x)) for x in p) > self.radius:
                raise ValueError(f"sample point {p} lies outside the evaluation radius {self.radius}")
        if self.h > 1e-3 * self.radius:
            raise ValueError("finite-difference step must be at most 1e-3 of the radius")


@dataclass(frozen=True)
class CrossCheckReport:
    max_rel_error: float
    tolerance: float
    values: tuple

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def sample_points(n: int, count: int, radius: float, seed: int = 0) -> tuple:
    """Deterministic points with rational (dyadic) coordinates inside ``radius``."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < count:
        raw = rng.uniform(-radius, radius, size=(n, 2)) / math.sqrt(2)
        p = tuple(complex(round(x * 1024) / 1024, round(y * 1024) / 1024) for x, y in raw)
        if max(abs(z) for z in p) <= radius:
            pts.append(p)
    return tuple(pts)


def cross_check(symbolic, f: Callable, plan: SamplePlan) -> CrossCheckReport:
    """Max relative deviation between the truncated series and ``f`` on the plan."""
    worst = 0.0
    vals = []
    for p in plan.points:
        a = symbolic.evaluate(p)
        b = complex(f(p))
        vals.append((a, b))
        scale = max(abs(b), 1e-300)
        worst = max(worst, abs(a - b) / scale)
    return CrossCheckReport(worst, plan.tolerance, tuple(vals))
