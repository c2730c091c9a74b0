"""Builtin potentials, the potential file format and name parsing.

Builtins are generated from closed forms at whatever order is requested.
Potential names::

    flat:N[:Q]          Q * (|z_1|^2 + ... + |z_N|^2)
    fs:N[:Q]            Q * log(1 + |z|^2)               (Fubini-Study)
    hyp:N[:Q]           -Q * log(1 - |z|^2)              (complex hyperbolic)
    perturbed_quartic   |z|^2 - |z|^4 / 4
    product(A,B,...)    sum of the factors on disjoint variable blocks
    PATH                a potential file (see ``serialize``)

File format (JSON, ``format = "kahlercone-potential"``, ``version = 1``)::

    {"format": "kahlercone-potential", "version": 1, "n": 1, "d": 4,
     "terms": [{"m": [1], "k": [1], "re": "1", "im": "0"}]}

Monomials ``z^m zbar^k`` use exponent lists of length ``n``; ``re``/``im``
are ``"p/q"`` strings.  Every term ``(m, k)`` needs its partner ``(k, m)``
with the conjugate value.  Instead of ``terms`` a file may carry
``"builtin": "<name>"``.  Terms are written in graded order: degree first,
then lexicographic with the first variable most significant.
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

from gmpy2 import mpq

from .calabi import is_kahler_at_origin
from .series import (
    GaussianRational,
    HermitianSeries,
    InvariantError,
    constant,
    embed,
    log,
    norm2,
    recenter_polynomial,
    to_gaussian,
    to_rational,
)

__all__ = [
    "FORMAT",
    "VERSION",
    "Potential",
    "PotentialParseError",
    "flat",
    "fubini_study",
    "hyperbolic",
    "perturbed_quartic",
    "product",
    "custom",
    "builtin",
    "parse_potential",
    "parse_text",
    "serialize",
    "corpus",
    "fmt_rational",
]

FORMAT = "kahlercone-potential"
VERSION = 1


class PotentialParseError(ValueError):
    """Malformed potential name or file; the message locates the problem."""


@dataclass(frozen=True)
class Potential:
    """A named potential with its series, Kähler flag and (for builtins) a float closed form."""

    name: str
    series: HermitianSeries
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    closed_form: Callable | None = field(default=None, compare=False, repr=False)

    @property
    def n(self) -> int:
        return self.series.n

    @property
    def d(self) -> int:
        return self.series.d

    @property
    def kahler(self) -> bool:
        return is_kahler_at_origin(self.series)


def fmt_rational(x) -> str:
    x = to_rational(x)
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def _center(n: int, center) -> list[GaussianRational]:
    if center is None:
        return [to_gaussian(0)] * n
    if len(center) != n:
        raise ValueError(f"center has {len(center)} coordinates, expected {n}")
    return [to_gaussian(w) for w in center]


def _shifted_norm(n: int, d: int, w) -> tuple[HermitianSeries, mpq]:
    # |z + w|^2 expanded, and its value at z = 0
    s = recenter_polynomial(norm2(n, d), w, polynomial=True)
    return s, sum((x.abs2() for x in w), mpq(0))


def _log_shift(n, d, w, sign):
    # log((1 + sign |z+w|^2) / (1 + sign |w|^2))
    s, at_w = _shifted_norm(n, d, w)
    denom = 1 + sign * at_w
    if denom <= 0:
        raise ValueError("center lies outside the domain of the potential")
    return log((constant(n, d) + s * sign) * (1 / denom))


def _float_center(w):
    return [complex(x) for x in w]


def flat(n: int, d: int, q=1, center=None) -> Potential:
    q = to_rational(q)
    w = _center(n, center)
    wf = _float_center(w)
    s, _ = _shifted_norm(n, d, w)
    series = HermitianSeries.from_series(s * q)

    def f(z):
        return float(q) * sum(abs(a + b) ** 2 for a, b in zip(z, wf))

    return Potential(_name("flat", n, q), series, "flat", {"n": n, "q": fmt_rational(q)}, f)


def fubini_study(n: int, d: int, q=1, center=None) -> Potential:
    q = to_rational(q)
    w = _center(n, center)
    wf = _float_center(w)
    series = HermitianSeries.from_series(_log_shift(n, d, w, 1) * q)

    def f(z):
        return float(q) * math.log(1 + sum(abs(a + b) ** 2 for a, b in zip(z, wf)))

    return Potential(_name("fs", n, q), series, "fubini_study", {"n": n, "q": fmt_rational(q)}, f)


def hyperbolic(n: int, d: int, q=1, center=None) -> Potential:
    q = to_rational(q)
    w = _center(n, center)
    wf = _float_center(w)
    series = HermitianSeries.from_series(_log_shift(n, d, w, -1) * -q)

    def f(z):
        return -float(q) * math.log(1 - sum(abs(a + b) ** 2 for a, b in zip(z, wf)))

    return Potential(_name("hyp", n, q), series, "hyperbolic", {"n": n, "q": fmt_rational(q)}, f)


def perturbed_quartic(d: int, center=None) -> Potential:
    w = _center(1, center)
    wf = _float_center(w)[0]
    u = norm2(1, d)
    poly = HermitianSeries.from_series(u - u * u * mpq(1, 4))
    series = HermitianSeries.from_series(recenter_polynomial(poly, w, polynomial=True))

    def f(z):
        r = abs(z[0] + wf) ** 2
        return r - r * r / 4

    return Potential("perturbed_quartic", series, "perturbed_quartic", {}, f)


def product(factors: Sequence[Potential]) -> Potential:
    if not factors:
        raise ValueError("product needs at least one factor")
    n = sum(p.n for p in factors)
    d = min(p.d for p in factors)
    total = HermitianSeries(n, d)
    offset = 0
    spans = []
    for p in factors:
        total = total + embed(p.series.truncate(d), n, offset)
        spans.append((offset, p.n, p.closed_form))
        offset += p.n
    name = "product(" + ",".join(p.name for p in factors) + ")"

    f = None
    if all(cf is not None for _, _, cf in spans):
        def f(z):
            return sum(cf(list(z[o:o + k])) for o, k, cf in spans)

    return Potential(name, HermitianSeries.from_series(total), "product",
                     {"factors": [p.name for p in factors]}, f)


def custom(series: HermitianSeries, name: str = "custom") -> Potential:
    return Potential(name, series, "custom", {}, None)


def _name(prefix: str, n: int, q) -> str:
    return f"{prefix}:{n}" if q == 1 else f"{prefix}:{n}:{fmt_rational(q)}"


_SIMPLE = re.compile(r"^(flat|fs|hyp):(\d+)(?::([0-9/+-]+))?$")
_ALIASES = {"fubini_study": "fs", "hyperbolic": "hyp"}


def _split_args(body: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur).strip())
    return [p for p in parts if p]


def builtin(name: str, d: int) -> Potential:
    """Resolve a builtin name (grammar in the module docstring) at order ``d``."""
    s = name.strip()
    for long, short in _ALIASES.items():
        if s.startswith(long + ":"):
            s = short + s[len(long):]
    if s in ("perturbed_quartic", "pq"):
        return perturbed_quartic(d)
    if s.startswith("product(") and s.endswith(")"):
        args = _split_args(s[len("product("):-1])
        return product([builtin(a, d) for a in args])
    m = _SIMPLE.match(s)
    if not m:
        raise PotentialParseError(f"unknown potential {name!r}")
    kind, n, q = m.group(1), int(m.group(2)), m.group(3) or "1"
    if n < 1:
        raise PotentialParseError(f"{name!r}: need at least one variable")
    try:
        q = to_rational(q)
    except (ValueError, TypeError) as exc:
        raise PotentialParseError(f"{name!r}: bad scale {q!r}") from exc
    if q <= 0:
        raise PotentialParseError(f"{name!r}: scale must be positive")
    return {"flat": flat, "fs": fubini_study, "hyp": hyperbolic}[kind](n, d, q)


# ---------------------------------------------------------------------------
# file format


def _rat_field(term: dict, key: str, where: str) -> mpq:
    raw = term.get(key, "0")
    if isinstance(raw, bool) or not isinstance(raw, (str, int)):
        raise PotentialParseError(f"{where}: field {key!r} must be a 'p/q' string")
    try:
        return to_rational(raw)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise PotentialParseError(f"{where}: field {key!r} = {raw!r} is not an exact rational") from exc


def _exponents(term: dict, key: str, n: int, where: str) -> tuple[int, ...]:
    raw = term.get(key)
    if not isinstance(raw, list) or len(raw) != n or not all(
        isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in raw
    ):
        raise PotentialParseError(f"{where}: {key!r} must be a list of {n} nonnegative integers")
    return tuple(raw)


def _term_lines(text: str) -> list[int]:
    # line number of each '{' that opens a term object inside "terms": [...]
    start = text.find('"terms"')
    if start < 0:
        return []
    lines = []
    depth = 0
    for i in range(text.find("[", start), len(text)):
        ch = text[i]
        if ch == "{":
            if depth == 0:
                lines.append(text.count("\n", 0, i) + 1)
            depth += 1
        elif ch == "}":
            depth -= 1
        elif ch == "]" and depth == 0:
            break
    return lines


def parse_text(text: str, d: int | None = None, source: str = "<string>") -> Potential:
    """Parse the JSON potential format; errors name the line or term at fault."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PotentialParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise PotentialParseError(f"{source}: top level must be an object")
    if doc.get("format", FORMAT) != FORMAT:
        raise PotentialParseError(f"{source}: unknown format {doc.get('format')!r}")
    if doc.get("version") != VERSION:
        raise PotentialParseError(f"{source}: unsupported version {doc.get('version')!r}")
    file_d = doc.get("d")
    if "builtin" in doc:
        order = d if d is not None else file_d
        if not isinstance(order, int) or order < 1:
            raise PotentialParseError(f"{source}: builtin potentials need an order 'd'")
        return builtin(doc["builtin"], order)
    n = doc.get("n")
    if not isinstance(n, int) or n < 1:
        raise PotentialParseError(f"{source}: 'n' must be a positive integer")
    if not isinstance(file_d, int) or file_d < 1:
        raise PotentialParseError(f"{source}: 'd' must be a positive integer")
    terms = doc.get("terms")
    if not isinstance(terms, list):
        raise PotentialParseError(f"{source}: 'terms' must be a list")
    lines = _term_lines(text)
    values: dict = {}
    where_of: dict = {}
    for i, t in enumerate(terms):
        where = f"{source}: term {i}" + (f" (line {lines[i]})" if i < len(lines) else "")
        if not isinstance(t, dict):
            raise PotentialParseError(f"{where}: must be an object")
        m = _exponents(t, "m", n, where)
        k = _exponents(t, "k", n, where)
        if sum(m) > file_d or sum(k) > file_d:
            raise PotentialParseError(f"{where}: degree exceeds d = {file_d}")
        if (m, k) in values:
            raise PotentialParseError(f"{where}: duplicate of {where_of[(m, k)]}")
        values[(m, k)] = GaussianRational(_rat_field(t, "re", where), _rat_field(t, "im", where))
        where_of[(m, k)] = where
    for (m, k), v in values.items():
        partner = values.get((k, m), GaussianRational(0, 0))
        if partner != v.conjugate():
            raise PotentialParseError(
                f"{source}: Hermitian violation between term z^{list(m)} zbar^{list(k)} "
                f"({where_of[(m, k)].split(': ', 1)[1]}) and its partner z^{list(k)} zbar^{list(m)}"
                + ("" if (k, m) in values else " (missing)")
            )
    try:
        series = HermitianSeries(n, file_d, values)
    except InvariantError as exc:
        raise PotentialParseError(f"{source}: {exc}") from exc
    if d is not None:
        if d > file_d:
            raise PotentialParseError(f"{source}: file holds terms through order {file_d}, {d} requested")
        series = HermitianSeries.from_series(series.truncate(d))
    name = doc.get("name") or os.path.basename(source)
    return Potential(str(name), series, "custom", {}, None)


def parse_potential(spec: str, d: int | None = None) -> Potential:
    """A builtin name or a path to a potential file."""
    if os.path.exists(spec) or spec.endswith(".json"):
        try:
            with open(spec, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise PotentialParseError(f"{spec}: {exc.strerror}") from exc
        return parse_text(text, d, source=spec)
    if d is None:
        raise PotentialParseError("builtin potentials need an order")
    return builtin(spec, d)


def serialize(p: Potential | HermitianSeries, name: str | None = None) -> str:
    """Explicit-terms JSON for a potential (inverse of :func:`parse_text`)."""
    series = p.series if isinstance(p, Potential) else p
    if name is None and isinstance(p, Potential):
        name = p.name
    terms = [
        {"m": list(m), "k": list(k), "re": fmt_rational(c.re), "im": fmt_rational(c.im)}
        for m, k, c in series.terms()
    ]
    doc = {"format": FORMAT, "version": VERSION, "n": series.n, "d": series.d, "terms": terms}
    if name:
        doc["name"] = name
    lines = [json.dumps({k: v for k, v in doc.items() if k != "terms"}, sort_keys=True)[:-1] + ', "terms": [']
    for i, t in enumerate(terms):
        sep = "," if i + 1 < len(terms) else ""
        lines.append("  " + json.dumps(t, sort_keys=True) + sep)
    lines.append("]}")
    return "\n".join(lines) + "\n"


CORPUS_NAMES = (
    "flat:1",
    "flat:2",
    "fs:1",
    "fs:2",
    "fs:1:1/2",
    "hyp:1",
    "hyp:2",
    "perturbed_quartic",
    "product(fs:1,flat:1)",
)


def corpus(d: int, names: Sequence[str] = CORPUS_NAMES) -> list[Potential]:
    """The standard test corpus at order ``d``."""
    return [builtin(s, d) for s in names]
