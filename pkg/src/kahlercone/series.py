"""Exact truncated power series in z and conj(z).

A real-analytic germ is stored as a sparse map from monomials
``z^m zbar^k`` to Gaussian-rational coefficients.  Holomorphic and
antiholomorphic degrees are truncated independently: a series of order
``(hdeg, adeg)`` keeps exactly the terms with ``|m| <= hdeg`` and
``|k| <= adeg``.  Both bounds are equal for a :class:`HermitianSeries`.

Internally every monomial is packed into one integer (8 bits per exponent
plus two degree digits) so that multiplying monomials is an integer
addition.  Real and imaginary parts live in separate dicts of
``gmpy2.mpq`` values; almost every potential met in practice is real and
then only one convolution is needed per product.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from gmpy2 import mpq

__all__ = [
    "MAX_ORDER",
    "InvariantError",
    "GaussianRational",
    "Coefficient",
    "to_rational",
    "to_gaussian",
    "GradedOrder",
    "index_position",
    "monomial_at",
    "Series",
    "HermitianSeries",
    "HoloSeries",
    "constant",
    "variable_abs2",
    "norm2",
    "real_part_monomial",
    "mul",
    "exp",
    "log",
    "power",
    "wirtinger",
    "gram_from_factors",
    "laurent_substitute",
    "recenter_polynomial",
    "embed",
    "evaluate",
]

#: Largest supported truncation order; exponents are packed in 8-bit digits.
MAX_ORDER = 127

_BITS = 8
_DIGIT = (1 << _BITS) - 1
ZERO = mpq(0)
ONE = mpq(1)


class InvariantError(AssertionError):
    """An internal invariant (Hermitian symmetry, exactness, ...) was violated."""


def to_rational(x) -> mpq:
    """Convert ``x`` to an exact ``mpq``; floats are rejected."""
    if isinstance(x, type(ZERO)):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        s = x.strip()
        if not s or any(ch in s for ch in ".eE"):
            raise ValueError(f"not an exact rational literal: {x!r}")
        return mpq(s)
    if type(x).__name__ == "mpz":
        return mpq(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = to_rational(re)
        self.im = to_rational(im)

    @classmethod
    def _raw(cls, re: mpq, im: mpq) -> "GaussianRational":
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._raw(self.re, -self.im)

    def abs2(self) -> mpq:
        return self.re * self.re + self.im * self.im

    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            other = to_gaussian(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __add__(self, other):
        o = to_gaussian(other)
        return GaussianRational._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = to_gaussian(other)
        return GaussianRational._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return to_gaussian(other) - self

    def __mul__(self, other):
        o = to_gaussian(other)
        return GaussianRational._raw(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = to_gaussian(other)
        den = o.abs2()
        if den == 0:
            raise ZeroDivisionError("division by zero")
        return GaussianRational._raw(
            (self.re * o.re + self.im * o.im) / den, (self.im * o.re - self.re * o.im) / den
        )

    def __rtruediv__(self, other):
        return to_gaussian(other) / self

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re} {sign} {abs(self.im)}*i"


Coefficient = GaussianRational


def to_gaussian(x) -> GaussianRational:
    if isinstance(x, GaussianRational):
        return x
    return GaussianRational._raw(to_rational(x), ZERO)


def _split(x) -> tuple[mpq, mpq]:
    g = to_gaussian(x)
    return g.re, g.im


# ---------------------------------------------------------------------------
# monomial order


@lru_cache(maxsize=None)
def _count_degree(nvars: int, deg: int) -> int:
    """Number of monomials in ``nvars`` variables of exact degree ``deg``."""
    if deg < 0:
        return 0
    if nvars == 0:
        return 1 if deg == 0 else 0
    return math.comb(deg + nvars - 1, nvars - 1)


class GradedOrder:
    """Graded order on multi-indices in ``n`` variables.

    Degree first; within a degree ascending lexicographic with the first
    variable most significant.  Position 0 is the zero index.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one variable")
        self.n = n
        self._mono_cache: dict[int, tuple[tuple[int, ...], ...]] = {}

    def __eq__(self, other):
        return isinstance(other, GradedOrder) and other.n == self.n

    def __hash__(self):
        return hash(("GradedOrder", self.n))

    def __repr__(self):
        return f"GradedOrder(n={self.n})"

    def count(self, d: int) -> int:
        """Number of multi-indices with total degree at most ``d``."""
        return math.comb(self.n + d, self.n) if d >= 0 else 0

    def position(self, m: Sequence[int]) -> int:
        m = tuple(m)
        if len(m) != self.n:
            raise ValueError(f"multi-index {m} has length {len(m)}, expected {self.n}")
        if any(e < 0 for e in m):
            raise ValueError(f"negative exponent in {m}")
        deg = sum(m)
        pos = self.count(deg - 1)
        rem = deg
        for i in range(self.n - 1):
            for v in range(m[i]):
                pos += _count_degree(self.n - i - 1, rem - v)
            rem -= m[i]
        return pos

    def monomial(self, pos: int) -> tuple[int, ...]:
        if pos < 0:
            raise ValueError("negative position")
        deg = 0
        while self.count(deg) <= pos:
            deg += 1
        r = pos - self.count(deg - 1)
        rem = deg
        out = []
        for i in range(self.n - 1):
            v = 0
            while True:
                cnt = _count_degree(self.n - i - 1, rem - v)
                if r < cnt:
                    break
                r -= cnt
                v += 1
            out.append(v)
            rem -= v
        out.append(rem)
        return tuple(out)

    def monomials(self, d: int) -> tuple[tuple[int, ...], ...]:
        """All multi-indices of degree at most ``d`` in position order."""
        got = self._mono_cache.get(d)
        if got is None:
            got = tuple(self._by_degree(d))
            self._mono_cache[d] = got
        return got

    def _by_degree(self, d: int) -> Iterator[tuple[int, ...]]:
        for deg in range(d + 1):
            yield from _lex_of_degree(self.n, deg)


def _lex_of_degree(n: int, deg: int) -> Iterator[tuple[int, ...]]:
    if n == 1:
        yield (deg,)
        return
    for first in range(deg + 1):
        for rest in _lex_of_degree(n - 1, deg - first):
            yield (first,) + rest


def index_position(m: Sequence[int], order: GradedOrder) -> int:
    return order.position(m)


def monomial_at(pos: int, order: GradedOrder) -> tuple[int, ...]:
    return order.monomial(pos)


# ---------------------------------------------------------------------------
# packed monomial codes


def _encode(m: Sequence[int], k: Sequence[int], n: int) -> int:
    code = 0
    for i, e in enumerate(m):
        code |= e << (_BITS * i)
    for i, e in enumerate(k):
        code |= e << (_BITS * (n + i))
    code |= sum(m) << (_BITS * 2 * n)
    code |= sum(k) << (_BITS * (2 * n + 1))
    return code


def _decode(code: int, n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    m = tuple((code >> (_BITS * i)) & _DIGIT for i in range(n))
    k = tuple((code >> (_BITS * (n + i))) & _DIGIT for i in range(n))
    return m, k


def _degrees(code: int, n: int) -> tuple[int, int]:
    s = _BITS * 2 * n
    return (code >> s) & _DIGIT, (code >> (s + _BITS)) & _DIGIT


def _swap(code: int, n: int) -> int:
    w = _BITS * n
    mask = (1 << w) - 1
    hol = code & mask
    anti = (code >> w) & mask
    h = (code >> (2 * w)) & _DIGIT
    a = (code >> (2 * w + _BITS)) & _DIGIT
    return anti | (hol << w) | (a << (2 * w)) | (h << (2 * w + _BITS))


def _check_order(d: int) -> int:
    if not isinstance(d, int) or d < 0:
        raise ValueError(f"truncation order must be a nonnegative integer, got {d!r}")
    if d > MAX_ORDER:
        raise ValueError(f"truncation order {d} exceeds MAX_ORDER={MAX_ORDER}")
    return d


# ---------------------------------------------------------------------------
# sparse kernels on dict[code, mpq]


def _bucket(terms: Mapping[int, mpq], n: int) -> list[tuple[int, int, list[tuple[int, mpq]]]]:
    groups: dict[tuple[int, int], list[tuple[int, mpq]]] = {}
    for c, v in terms.items():
        groups.setdefault(_degrees(c, n), []).append((c, v))
    return [(h, a, items) for (h, a), items in sorted(groups.items())]


def _convolve_into(out: dict, a: Mapping[int, mpq], b: Mapping[int, mpq], n: int,
                   hdeg: int, adeg: int, sign: int = 1) -> None:
    if not a or not b:
        return
    if len(b) > len(a):
        a, b = b, a
    buckets = _bucket(b, n)
    get = out.get
    for ca, va in a.items():
        ha, aa = _degrees(ca, n)
        hmax = hdeg - ha
        amax = adeg - aa
        if hmax < 0 or amax < 0:
            continue
        for hb, ab, items in buckets:
            if hb > hmax:
                break
            if ab > amax:
                continue
            if sign > 0:
                for cb, vb in items:
                    key = ca + cb
                    out[key] = get(key, ZERO) + va * vb
            else:
                for cb, vb in items:
                    key = ca + cb
                    out[key] = get(key, ZERO) - va * vb


def _prune(d: dict) -> dict:
    return {c: v for c, v in d.items() if v}


def _truncated(terms: Mapping[int, mpq], n: int, hdeg: int, adeg: int) -> dict:
    out = {}
    for c, v in terms.items():
        h, a = _degrees(c, n)
        if h <= hdeg and a <= adeg:
            out[c] = v
    return out


def _cmul(are, aim, bre, bim, n, hdeg, adeg):
    re: dict = {}
    im: dict = {}
    _convolve_into(re, are, bre, n, hdeg, adeg)
    _convolve_into(re, aim, bim, n, hdeg, adeg, sign=-1)
    _convolve_into(im, are, bim, n, hdeg, adeg)
    _convolve_into(im, aim, bre, n, hdeg, adeg)
    return _prune(re), _prune(im)


def _graded(terms: Mapping[int, mpq], n: int) -> dict[int, dict[int, mpq]]:
    out: dict[int, dict[int, mpq]] = {}
    for c, v in terms.items():
        h, a = _degrees(c, n)
        out.setdefault(h + a, {})[c] = v
    return out


# ---------------------------------------------------------------------------
# series types


class Series:
    """Truncated germ ``sum c_{mk} z^m zbar^k`` with independent degree bounds.

    Instances are treated as immutable values.  Arithmetic returns the
    most specific type it can prove: Hermitian inputs to a Hermitian-
    preserving operation produce a :class:`HermitianSeries`.
    """

    __slots__ = ("n", "hdeg", "adeg", "_re", "_im")

    def __init__(self, n: int, hdeg: int, adeg: int, terms: Mapping | None = None):
        if n < 1:
            raise ValueError("need at least one variable")
        self.n = n
        self.hdeg = _check_order(hdeg)
        self.adeg = _check_order(adeg)
        re: dict = {}
        im: dict = {}
        for (m, k), value in (terms or {}).items():
            m = tuple(m)
            k = tuple(k)
            if len(m) != n or len(k) != n:
                raise ValueError(f"multi-index length mismatch for term ({m}, {k}); n={n}")
            if any(e < 0 for e in m + k):
                raise ValueError(f"negative exponent in term ({m}, {k})")
            if sum(m) > hdeg or sum(k) > adeg:
                continue
            vr, vi = _split(value)
            code = _encode(m, k, n)
            if vr:
                re[code] = re.get(code, ZERO) + vr
            if vi:
                im[code] = im.get(code, ZERO) + vi
        self._re = _prune(re)
        self._im = _prune(im)
        self._validate()

    @classmethod
    def _make(cls, n, hdeg, adeg, re, im):
        obj = object.__new__(cls)
        obj.n = n
        obj.hdeg = hdeg
        obj.adeg = adeg
        obj._re = re
        obj._im = im
        obj._validate()
        return obj

    def _validate(self):
        pass

    # -- inspection ---------------------------------------------------------

    @property
    def is_real_coefficients(self) -> bool:
        return not self._im

    def coeff(self, m: Sequence[int], k: Sequence[int]) -> GaussianRational:
        code = _encode(tuple(m), tuple(k), self.n)
        return GaussianRational._raw(self._re.get(code, ZERO), self._im.get(code, ZERO))

    def __getitem__(self, mk) -> GaussianRational:
        m, k = mk
        return self.coeff(m, k)

    def constant_term(self) -> GaussianRational:
        return GaussianRational._raw(self._re.get(0, ZERO), self._im.get(0, ZERO))

    def _codes(self) -> set[int]:
        return set(self._re) | set(self._im)

    def terms(self) -> list[tuple[tuple[int, ...], tuple[int, ...], GaussianRational]]:
        """Nonzero terms sorted by (position of m, position of k)."""
        order = GradedOrder(self.n)
        out = []
        for code in self._codes():
            m, k = _decode(code, self.n)
            out.append((order.position(m), order.position(k), m, k, code))
        out.sort()
        return [
            (m, k, GaussianRational._raw(self._re.get(code, ZERO), self._im.get(code, ZERO)))
            for _, _, m, k, code in out
        ]

    def __len__(self):
        return len(self._codes())

    def is_zero(self) -> bool:
        return not self._re and not self._im

    def max_degrees(self) -> tuple[int, int]:
        h = a = 0
        for code in self._codes():
            dh, da = _degrees(code, self.n)
            h = max(h, dh)
            a = max(a, da)
        return h, a

    def is_hermitian(self) -> bool:
        if self.hdeg != self.adeg:
            return False
        n = self.n
        for c, v in self._re.items():
            if self._re.get(_swap(c, n), ZERO) != v:
                return False
        for c, v in self._im.items():
            if self._im.get(_swap(c, n), ZERO) != -v:
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self.n == other.n
            and self.hdeg == other.hdeg
            and self.adeg == other.adeg
            and self._re == other._re
            and self._im == other._im
        )

    __hash__ = None

    def __repr__(self):
        name = type(self).__name__
        shown = []
        for m, k, c in self.terms()[:6]:
            shown.append(f"({c})*z^{m}*zb^{k}")
        more = "" if len(self) <= 6 else f" + ... ({len(self)} terms)"
        body = " + ".join(shown) if shown else "0"
        return f"{name}(n={self.n}, order=({self.hdeg},{self.adeg}): {body}{more})"

    # -- structural ops ------------------------------------------------------

    def truncate(self, hdeg: int, adeg: int | None = None) -> "Series":
        adeg = hdeg if adeg is None else adeg
        if hdeg > self.hdeg or adeg > self.adeg:
            raise ValueError(
                f"cannot raise truncation order from ({self.hdeg},{self.adeg}) to ({hdeg},{adeg})"
            )
        re = _truncated(self._re, self.n, hdeg, adeg)
        im = _truncated(self._im, self.n, hdeg, adeg)
        cls = type(self) if hdeg == adeg else Series
        return cls._make(self.n, hdeg, adeg, re, im)

    def conj(self) -> "Series":
        """Complex conjugate germ: swaps z and zbar and conjugates coefficients."""
        n = self.n
        re = {_swap(c, n): v for c, v in self._re.items()}
        im = {_swap(c, n): -v for c, v in self._im.items()}
        return type(self)._make(n, self.adeg, self.hdeg, re, im)

    def drop_pure(self) -> "Series":
        """Remove every term that is purely holomorphic or purely antiholomorphic."""
        n = self.n

        def keep(terms):
            out = {}
            for c, v in terms.items():
                h, a = _degrees(c, n)
                if h and a:
                    out[c] = v
            return out

        return type(self)._make(n, self.hdeg, self.adeg, keep(self._re), keep(self._im))

    def has_pure_terms(self) -> bool:
        for c in self._codes():
            h, a = _degrees(c, self.n)
            if h == 0 or a == 0:
                return True
        return False

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
            return other
        re, im = _split(other)
        cls = HermitianSeries if self.hdeg == self.adeg and not im else Series
        return cls._make(self.n, self.hdeg, self.adeg, {0: re} if re else {}, {0: im} if im else {})

    def _result_type(self, other: "Series", hdeg: int, adeg: int):
        if (
            isinstance(self, HermitianSeries)
            and isinstance(other, HermitianSeries)
            and hdeg == adeg
        ):
            return HermitianSeries
        return Series

    def _add(self, other, sign):
        other = self._coerce(other)
        hdeg = min(self.hdeg, other.hdeg)
        adeg = min(self.adeg, other.adeg)
        n = self.n

        def combine(x, y):
            out = _truncated(x, n, hdeg, adeg)
            for c, v in y.items():
                h, a = _degrees(c, n)
                if h <= hdeg and a <= adeg:
                    out[c] = out.get(c, ZERO) + sign * v
            return _prune(out)

        cls = self._result_type(other, hdeg, adeg)
        return cls._make(n, hdeg, adeg, combine(self._re, other._re), combine(self._im, other._im))

    def __add__(self, other):
        return self._add(other, 1)

    def __radd__(self, other):
        return self._add(other, 1)

    def __sub__(self, other):
        return self._add(other, -1)

    def __rsub__(self, other):
        return (-self)._add(other, 1)

    def __neg__(self):
        return type(self)._make(
            self.n, self.hdeg, self.adeg,
            {c: -v for c, v in self._re.items()},
            {c: -v for c, v in self._im.items()},
        )

    def scale(self, s) -> "Series":
        sr, si = _split(s)
        re: dict = {}
        im: dict = {}
        for c, v in self._re.items():
            re[c] = re.get(c, ZERO) + sr * v
            im[c] = im.get(c, ZERO) + si * v
        for c, v in self._im.items():
            re[c] = re.get(c, ZERO) - si * v
            im[c] = im.get(c, ZERO) + sr * v
        cls = type(self) if not si else Series
        return cls._make(self.n, self.hdeg, self.adeg, _prune(re), _prune(im))

    def __mul__(self, other):
        if isinstance(other, Series):
            return mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, Series):
            raise TypeError("series division is not supported; use power(b, -1)")
        return self.scale(to_gaussian(1) / to_gaussian(other))

    def __pow__(self, k):
        if isinstance(k, int) and k >= 0:
            result = self._coerce(1)
            base = self
            while k:
                if k & 1:
                    result = mul(result, base)
                k >>= 1
                if k:
                    base = mul(base, base)
            return result
        return power(self, k)

    def evaluate(self, point: Sequence) -> complex:
        return evaluate(self, point)


class HermitianSeries(Series):
    """Real-valued germ: ``c_{km} = conj(c_{mk})`` and one common order ``d``."""

    __slots__ = ()

    def __init__(self, n: int, d: int, terms: Mapping | None = None):
        super().__init__(n, d, d, terms)

    @property
    def d(self) -> int:
        return self.hdeg

    def _validate(self):
        if self.hdeg != self.adeg:
            raise InvariantError(
                f"Hermitian series needs equal orders, got ({self.hdeg},{self.adeg})"
            )
        n = self.n
        for c, v in self._re.items():
            w = self._re.get(_swap(c, n), ZERO)
            if w != v:
                m, k = _decode(c, n)
                raise InvariantError(
                    f"Hermitian symmetry violated: real parts of ({m},{k}) and ({k},{m}) differ"
                )
        for c, v in self._im.items():
            w = self._im.get(_swap(c, n), ZERO)
            if w != -v:
                m, k = _decode(c, n)
                raise InvariantError(
                    f"Hermitian symmetry violated: imaginary parts of ({m},{k}) and ({k},{m}) "
                    "are not opposite"
                )

    @classmethod
    def from_series(cls, s: Series) -> "HermitianSeries":
        return cls._make(s.n, s.hdeg, s.adeg, dict(s._re), dict(s._im))

    def truncate(self, d: int, adeg: int | None = None) -> Series:
        return super().truncate(d, adeg)

    def real_coefficient_terms(self):
        return self.terms()


class HoloSeries:
    """Truncated holomorphic germ ``sum c_m z^m``."""

    __slots__ = ("n", "d", "coeffs")

    def __init__(self, n: int, d: int, coeffs: Mapping | None = None):
        self.n = n
        self.d = _check_order(d)
        out = {}
        for m, v in (coeffs or {}).items():
            m = tuple(m)
            if len(m) != n:
                raise ValueError(f"multi-index {m} has length {len(m)}, expected {n}")
            if sum(m) > d:
                continue
            g = to_gaussian(v)
            if g:
                out[m] = g
        self.coeffs = out

    def __repr__(self):
        return f"HoloSeries(n={self.n}, d={self.d}, {len(self.coeffs)} terms)"


# ---------------------------------------------------------------------------
# builders


def constant(n: int, d: int, value=1) -> HermitianSeries:
    re, im = _split(value)
    if im:
        raise ValueError("a Hermitian constant must be real")
    return HermitianSeries._make(n, _check_order(d), d, {0: re} if re else {}, {})


def variable_abs2(n: int, d: int, i: int) -> HermitianSeries:
    """``|z_i|^2``."""
    e = [0] * n
    e[i] = 1
    return HermitianSeries(n, d, {(tuple(e), tuple(e)): 1})


def norm2(n: int, d: int, variables: Iterable[int] | None = None) -> HermitianSeries:
    """``sum |z_i|^2`` over ``variables`` (all by default)."""
    terms = {}
    for i in variables if variables is not None else range(n):
        e = [0] * n
        e[i] = 1
        terms[(tuple(e), tuple(e))] = 1
    return HermitianSeries(n, d, terms)


def real_part_monomial(n: int, d: int, m: Sequence[int], coeff=1) -> HermitianSeries:
    """``c z^m + conj(c) zbar^m`` (twice the real part of ``c z^m``)."""
    g = to_gaussian(coeff)
    zero = (0,) * n
    m = tuple(m)
    if m == zero:
        return constant(n, d, 2 * g.re)
    return HermitianSeries(n, d, {(m, zero): g, (zero, m): g.conjugate()})


# ---------------------------------------------------------------------------
# operations


def mul(a: Series, b: Series) -> Series:
    """Truncated product; the result order is the smaller of the two on each side."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    hdeg = min(a.hdeg, b.hdeg)
    adeg = min(a.adeg, b.adeg)
    re, im = _cmul(a._re, a._im, b._re, b._im, a.n, hdeg, adeg)
    cls = a._result_type(b, hdeg, adeg)
    return cls._make(a.n, hdeg, adeg, re, im)


def _graded_solve(a: Series, step) -> tuple[dict, dict]:
    """Shared driver for Euler-operator recurrences graded by total degree.

    ``step(t, fre, fim)`` must return the (re, im) dicts of the degree-``t``
    component given all lower components stored in ``fre``/``fim``.
    """
    fre: dict[int, dict] = {}
    fim: dict[int, dict] = {}
    for t in range(1, a.hdeg + a.adeg + 1):
        re, im = step(t, fre, fim)
        fre[t] = re
        fim[t] = im
    out_re: dict = {}
    out_im: dict = {}
    for t in fre:
        out_re.update(fre[t])
        out_im.update(fim[t])
    return out_re, out_im


def exp(a: Series) -> Series:
    """``sum_k a^k / k!`` truncated; ``a`` must have zero constant term.

    Uses ``E(exp a) = exp(a) * E(a)`` with ``E`` the total-degree (Euler)
    operator, so the cost is about one series product.
    """
    c0 = a.constant_term()
    if c0:
        raise ValueError(
            f"exp needs a zero constant term (got {c0}); factor the scalar e^c out first"
        )
    n, hdeg, adeg = a.n, a.hdeg, a.adeg
    # s * a_s by total degree
    ga_re = {s: {c: s * v for c, v in part.items()} for s, part in _graded(a._re, n).items()}
    ga_im = {s: {c: s * v for c, v in part.items()} for s, part in _graded(a._im, n).items()}

    def step(t, fre, fim):
        re: dict = {}
        im: dict = {}
        for s in range(1, t + 1):
            ar = ga_re.get(s, {})
            ai = ga_im.get(s, {})
            if not ar and not ai:
                continue
            if s == t:
                br, bi = {0: ONE}, {}
            else:
                br, bi = fre.get(t - s, {}), fim.get(t - s, {})
            _convolve_into(re, ar, br, n, hdeg, adeg)
            _convolve_into(re, ai, bi, n, hdeg, adeg, sign=-1)
            _convolve_into(im, ar, bi, n, hdeg, adeg)
            _convolve_into(im, ai, br, n, hdeg, adeg)
        inv = mpq(1, t)
        return (
            {c: v * inv for c, v in re.items() if v},
            {c: v * inv for c, v in im.items() if v},
        )

    re, im = _graded_solve(a, step)
    re[0] = ONE
    return type(a)._make(n, hdeg, adeg, re, im)


def log(a: Series) -> Series:
    """Truncated logarithm of a series with constant term exactly 1."""
    c0 = a.constant_term()
    if c0 != 1:
        raise ValueError(f"log needs constant term 1 (got {c0}); divide the scalar out first")
    n, hdeg, adeg = a.n, a.hdeg, a.adeg
    gb_re = _graded(a._re, n)
    gb_im = _graded(a._im, n)
    gb_re.pop(0, None)

    def step(t, fre, fim):
        re = {c: t * v for c, v in gb_re.get(t, {}).items()}
        im = {c: t * v for c, v in gb_im.get(t, {}).items()}
        for s in range(1, t):
            sr = {c: s * v for c, v in fre.get(s, {}).items()}
            si = {c: s * v for c, v in fim.get(s, {}).items()}
            br, bi = gb_re.get(t - s, {}), gb_im.get(t - s, {})
            _convolve_into(re, sr, br, n, hdeg, adeg, sign=-1)
            _convolve_into(re, si, bi, n, hdeg, adeg)
            _convolve_into(im, sr, bi, n, hdeg, adeg, sign=-1)
            _convolve_into(im, si, br, n, hdeg, adeg, sign=-1)
        inv = mpq(1, t)
        return (
            {c: v * inv for c, v in re.items() if v},
            {c: v * inv for c, v in im.items() if v},
        )

    re, im = _graded_solve(a, step)
    return type(a)._make(n, hdeg, adeg, re, im)


def power(a: Series, r) -> Series:
    """``a^r`` for rational ``r``; ``a`` must have constant term 1."""
    r = to_rational(r)
    c0 = a.constant_term()
    if c0 != 1:
        raise ValueError(f"power needs constant term 1 (got {c0})")
    n, hdeg, adeg = a.n, a.hdeg, a.adeg
    ga_re = _graded(a._re, n)
    ga_im = _graded(a._im, n)
    ga_re.pop(0, None)

    def step(t, fre, fim):
        re: dict = {}
        im: dict = {}
        for s in range(1, t + 1):
            w = r * s - (t - s)
            if not w:
                continue
            ar = {c: w * v for c, v in ga_re.get(s, {}).items()}
            ai = {c: w * v for c, v in ga_im.get(s, {}).items()}
            if not ar and not ai:
                continue
            if s == t:
                br, bi = {0: ONE}, {}
            else:
                br, bi = fre.get(t - s, {}), fim.get(t - s, {})
            _convolve_into(re, ar, br, n, hdeg, adeg)
            _convolve_into(re, ai, bi, n, hdeg, adeg, sign=-1)
            _convolve_into(im, ar, bi, n, hdeg, adeg)
            _convolve_into(im, ai, br, n, hdeg, adeg)
        inv = mpq(1, t)
        return (
            {c: v * inv for c, v in re.items() if v},
            {c: v * inv for c, v in im.items() if v},
        )

    re, im = _graded_solve(a, step)
    re[0] = ONE
    return type(a)._make(n, hdeg, adeg, re, im)


def wirtinger(a: Series, alpha: int, conjugate: bool = False) -> Series:
    """Formal derivative in ``z_alpha`` (or ``zbar_alpha``); that side's order drops by one."""
    n = a.n
    if not 0 <= alpha < n:
        raise ValueError(f"variable index {alpha} out of range for n={n}")
    if (a.adeg if conjugate else a.hdeg) == 0:
        raise ValueError("cannot differentiate a series truncated at order 0 on that side")
    digit = _BITS * (n + alpha if conjugate else alpha)
    deg_digit = _BITS * (2 * n + (1 if conjugate else 0))
    delta = (1 << digit) + (1 << deg_digit)

    def diff(terms):
        out = {}
        for c, v in terms.items():
            e = (c >> digit) & _DIGIT
            if e:
                out[c - delta] = e * v
        return out

    hdeg = a.hdeg if conjugate else a.hdeg - 1
    adeg = a.adeg - 1 if conjugate else a.adeg
    return Series._make(n, hdeg, adeg, diff(a._re), diff(a._im))


def gram_from_factors(fs: Sequence[HoloSeries], weights: Sequence | None = None) -> HermitianSeries:
    """``sum_j w_j |f_j|^2`` for holomorphic germs ``f_j`` (weights default to 1).

    A nonnegative weight stands for a factor whose squared modulus is
    rational while the factor itself is not (e.g. ``z^2/sqrt(2)`` is the
    monomial ``z^2`` with weight ``1/2``).
    """
    if not fs:
        raise ValueError("need at least one holomorphic factor")
    n, d = fs[0].n, fs[0].d
    for f in fs:
        if f.n != n or f.d != d:
            raise ValueError("holomorphic factors must share n and d")
    if weights is None:
        weights = [1] * len(fs)
    if len(weights) != len(fs):
        raise ValueError("one weight per factor")
    re: dict = {}
    im: dict = {}
    for f, w in zip(fs, weights):
        w = to_rational(w)
        if w < 0:
            raise ValueError("weights must be nonnegative")
        items = list(f.coeffs.items())
        for m, cm in items:
            for k, ck in items:
                p = cm * ck.conjugate() * w
                code = _encode(m, k, n)
                if p.re:
                    re[code] = re.get(code, ZERO) + p.re
                if p.im:
                    im[code] = im.get(code, ZERO) + p.im
    return HermitianSeries._make(n, d, d, _prune(re), _prune(im))


def laurent_substitute(a: Series, rules: Mapping[int, Sequence[int]], polynomial: bool = False) -> Series:
    """Substitute ``z_j -> z^{rules[j]}`` (and ``zbar_j`` correspondingly).

    Each rule is an exponent vector that may contain negative entries, so a
    rule like ``z_1 -> z_1 / z_0`` is ``{1: (-1, 1)}``.  Unlisted variables
    are left alone.  The input must be an exact polynomial (``polynomial=True``
    is the caller's declaration that nothing was lost to truncation).  Raises
    ``ValueError`` if a negative exponent survives in the result.
    """
    if not polynomial:
        raise ValueError("laurent_substitute needs an exact polynomial; pass polynomial=True")
    n = a.n
    mat = []
    for j in range(n):
        r = tuple(rules.get(j, tuple(1 if i == j else 0 for i in range(n))))
        if len(r) != n:
            raise ValueError(f"rule for z_{j} has length {len(r)}, expected {n}")
        mat.append(r)
    negative_vars = {i for r in mat for i, e in enumerate(r) if e < 0}
    if len(negative_vars) > 1:
        raise ValueError("only one designated variable may carry negative exponents")

    def image(m):
        return tuple(sum(m[j] * mat[j][i] for j in range(n)) for i in range(n))

    terms = {}
    hmax = amax = 0
    for m, k, c in a.terms():
        mi, ki = image(m), image(k)
        terms[(mi, ki)] = terms.get((mi, ki), 0) + c
    residual = [(m, k) for (m, k), c in terms.items() if c and (min(m) < 0 or min(k) < 0)]
    if residual:
        m, k = residual[0]
        raise ValueError(f"negative exponent survives substitution in term z^{m} zbar^{k}")
    for (m, k), c in terms.items():
        if c:
            hmax = max(hmax, sum(m))
            amax = max(amax, sum(k))
    hdeg = max(a.hdeg, hmax)
    adeg = max(a.adeg, amax)
    if isinstance(a, HermitianSeries) and hdeg == adeg:
        return HermitianSeries(n, hdeg, terms)
    return Series(n, hdeg, adeg, terms)


def recenter_polynomial(a: Series, w: Sequence, polynomial: bool = False) -> Series:
    """Exact expansion of ``a(z + w, conj(z + w))`` for a polynomial germ ``a``."""
    if not polynomial:
        raise ValueError("recenter_polynomial needs an exact polynomial; pass polynomial=True")
    n = a.n
    w = [to_gaussian(x) for x in w]
    if len(w) != n:
        raise ValueError("center has wrong dimension")
    wb = [x.conjugate() for x in w]

    def shifts(e, pt):
        # expansion of prod_i (z_i + pt_i)^{e_i} as {exponent: coefficient}
        out = {(): to_gaussian(1)}
        for i, ei in enumerate(e):
            nxt = {}
            for j in range(ei + 1):
                c = _gpow(pt[i], ei - j) * math.comb(ei, j)
                if not c:
                    continue
                for prefix, v in out.items():
                    nxt[prefix + (j,)] = nxt.get(prefix + (j,), 0) + v * c
            out = nxt
        return out

    terms: dict = {}
    for m, k, c in a.terms():
        for mm, cm in shifts(m, w).items():
            for kk, ck in shifts(k, wb).items():
                terms[(mm, kk)] = terms.get((mm, kk), 0) + c * cm * ck
    cls = type(a)
    if cls is HermitianSeries:
        return HermitianSeries(n, a.hdeg, terms)
    return Series(n, a.hdeg, a.adeg, terms)


def _gpow(x: GaussianRational, e: int) -> GaussianRational:
    out = to_gaussian(1)
    for _ in range(e):
        out = out * x
    return out


def embed(a: Series, n_total: int, offset: int) -> Series:
    """View ``a`` as a series in ``n_total`` variables, its variables starting at ``offset``."""
    if offset < 0 or offset + a.n > n_total:
        raise ValueError("embedding out of range")
    terms = {}
    pad_l = (0,) * offset
    pad_r = (0,) * (n_total - offset - a.n)
    for m, k, c in a.terms():
        terms[(pad_l + m + pad_r, pad_l + k + pad_r)] = c
    if isinstance(a, HermitianSeries):
        return HermitianSeries(n_total, a.hdeg, terms)
    return Series(n_total, a.hdeg, a.adeg, terms)


def evaluate(a: Series, point: Sequence) -> complex:
    """Floating-point value of the truncated sum at ``point`` (cross-checks only)."""
    if len(point) != a.n:
        raise ValueError(f"point has dimension {len(point)}, expected {a.n}")
    z = [complex(p) for p in point]
    zb = [p.conjugate() for p in z]
    total = 0j
    for code in a._codes():
        m, k = _decode(code, a.n)
        v = complex(float(a._re.get(code, ZERO)), float(a._im.get(code, ZERO)))
        for i in range(a.n):
            if m[i]:
                v *= z[i] ** m[i]
            if k[i]:
                v *= zb[i] ** k[i]
        total += v
    return total
