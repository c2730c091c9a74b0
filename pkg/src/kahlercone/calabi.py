"""Diastasis normalization, Calabi coefficient matrices and exact PSD certificates.

A real-analytic Kähler potential is locally induced from complex
projective space exactly when the coefficient matrix of ``e^D - 1`` (``D``
the diastasis) is positive semidefinite.  At a finite order only a leading
principal block of that matrix is available, so the pipeline reports either a
conclusive :class:`NotInduced` (a negative principal block stays negative at
every higher order) or an explicitly inconclusive :class:`ConsistentUpTo`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from .series import (
    GaussianRational,
    GradedOrder,
    HermitianSeries,
    InvariantError,
    Series,
    exp,
    to_gaussian,
    to_rational,
)

__all__ = [
    "CalabiMatrix",
    "Psd",
    "NotPsd",
    "LdlFactor",
    "NotInduced",
    "ConsistentUpTo",
    "MultipleSearch",
    "DegenerateMetricError",
    "diastasis_normalize",
    "calabi_matrix",
    "coefficient_matrix",
    "psd_check_exact",
    "kahler_form_at_origin",
    "is_kahler_at_origin",
    "inducibility",
    "find_inducing_multiple",
    "quadratic_form",
]


class DegenerateMetricError(ValueError):
    """The potential does not define a Kähler metric at the center."""


def diastasis_normalize(phi: HermitianSeries) -> HermitianSeries:
    """Calabi's diastasis centered at the origin.

    ``D(z) = phi(z, zbar) + phi(0, 0) - phi(z, 0) - phi(0, zbar)``, i.e. drop
    every purely holomorphic or purely antiholomorphic term (the constant
    included).  The metric is unchanged.
    """
    if not isinstance(phi, HermitianSeries):
        raise TypeError("diastasis_normalize needs a HermitianSeries")
    return phi.drop_pure()


def coefficient_matrix(s: Series, d: int) -> list[list]:
    """Matrix ``[c_{m_j m_k}]`` of ``s`` over the graded basis up to degree ``d``.

    Entries are ``mpq`` when ``s`` has real coefficients, else ``GaussianRational``.
    """
    if d > min(s.hdeg, s.adeg):
        raise ValueError(f"order {d} exceeds the series order ({s.hdeg},{s.adeg})")
    monos = GradedOrder(s.n).monomials(d)
    if s.is_real_coefficients:
        return [[s.coeff(m, k).re for k in monos] for m in monos]
    return [[s.coeff(m, k) for k in monos] for m in monos]


@dataclass(frozen=True, eq=False)
class CalabiMatrix:
    """Coefficients ``b_{jk}`` of ``e^D - 1`` in the monomials ``z^{m_j} zbar^{m_k}``."""

    order: GradedOrder
    d: int
    entries: list
    diastasis: HermitianSeries | None = None

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def monomials(self):
        return self.order.monomials(self.d)

    def entry(self, mj, mk):
        return self.entries[self.order.position(mj)][self.order.position(mk)]

    def principal(self, d: int) -> "CalabiMatrix":
        """Leading principal block of monomials with degree at most ``d``."""
        if d > self.d:
            raise ValueError("cannot enlarge a Calabi matrix")
        size = self.order.count(d)
        rows = [row[:size] for row in self.entries[:size]]
        return CalabiMatrix(self.order, d, rows, self.diastasis)

    def __eq__(self, other):
        if not isinstance(other, CalabiMatrix):
            return NotImplemented
        return self.order == other.order and self.d == other.d and self.entries == other.entries


def calabi_matrix(D: HermitianSeries, d: int | None = None) -> CalabiMatrix:
    """Calabi matrix of a diastasis-normalized potential at order ``d``."""
    if D.has_pure_terms():
        raise ValueError("calabi_matrix needs a diastasis-normalized potential (pure terms present)")
    d = D.d if d is None else d
    if d > D.d:
        raise ValueError(f"order {d} exceeds the potential's truncation order {D.d}")
    Dd = D.truncate(d)
    e = exp(Dd) - 1
    entries = coefficient_matrix(e, d)
    if entries[0][0] != 0 or any(entries[0][k] != 0 or entries[k][0] != 0 for k in range(len(entries))):
        raise InvariantError("row/column 0 of the Calabi matrix must vanish")
    return CalabiMatrix(GradedOrder(D.n), d, entries, Dd)


# ---------------------------------------------------------------------------
# exact PSD certification


@dataclass(frozen=True)
class LdlFactor:
    """One term ``pivot * l l^*`` of a square-root-free factorization."""

    index: int
    pivot: object
    vector: tuple


@dataclass(frozen=True)
class Psd:
    rank: int
    factors: tuple[LdlFactor, ...] = field(default=(), repr=False, compare=False)

    def gram(self, size: int) -> list[list]:
        """Rebuild ``sum_k d_k l_k l_k^*`` exactly."""
        out = [[mpq(0)] * size for _ in range(size)]
        for f in self.factors:
            v = f.vector
            for i in range(size):
                if not v[i]:
                    continue
                for j in range(size):
                    if v[j]:
                        out[i][j] = out[i][j] + f.pivot * v[i] * _conj(v[j])
        return out


@dataclass(frozen=True)
class NotPsd:
    """Certificate of indefiniteness: ``witness^* M witness = value < 0``."""

    witness: tuple
    value: object


def _conj(x):
    return x.conjugate() if isinstance(x, GaussianRational) else x


def _is_real(x) -> bool:
    return not isinstance(x, GaussianRational) or x.im == 0


def _real(x):
    return x.re if isinstance(x, GaussianRational) else x


def quadratic_form(M: Sequence[Sequence], v: Sequence):
    """Exact ``v^* M v``."""
    total = mpq(0)
    n = len(M)
    for i in range(n):
        if not v[i]:
            continue
        ci = _conj(v[i])
        row = M[i]
        acc = mpq(0)
        for j in range(n):
            if v[j] and row[j]:
                acc = acc + row[j] * v[j]
        total = total + ci * acc
    if isinstance(total, GaussianRational):
        if total.im:
            raise InvariantError("quadratic form of a Hermitian matrix is not real")
        return total.re
    return total


def _normalize_witness(v: list) -> tuple:
    """Scale to Gaussian integers with content 1; first nonzero entry made positive real part."""
    parts = []
    for x in v:
        g = to_gaussian(x)
        parts.extend((g.re, g.im))
    den = 1
    for p in parts:
        den = math.lcm(den, int(p.denominator))
    ints = [int(p * den) for p in parts]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    g = g or 1
    ints = [x // g for x in ints]
    pairs = list(zip(ints[0::2], ints[1::2]))
    for re, im in pairs:
        if re or im:
            # multiply by a unit so the leading entry has re > 0, or re == 0 and im > 0
            if re < 0 or (re == 0 and im < 0):
                pairs = [(-a, -b) for a, b in pairs]
            break
    if all(im == 0 for _, im in pairs):
        return tuple(mpq(re) for re, _ in pairs)
    return tuple(GaussianRational(re, im) for re, im in pairs)


def psd_check_exact(M: Sequence[Sequence] | CalabiMatrix, keep_factors: bool = True) -> Psd | NotPsd:
    """Exact positive-semidefiniteness test by symmetric-pivoted elimination.

    At every step the remaining Schur complement is inspected: a negative
    diagonal entry or a nonzero off-diagonal entry in a row whose diagonal is
    zero yields a negativity witness (pulled back to the original
    coordinates); otherwise the first positive diagonal entry is the pivot.
    """
    if isinstance(M, CalabiMatrix):
        M = M.entries
    n = len(M)
    for row in M:
        if len(row) != n:
            raise ValueError("matrix is not square")
    for i in range(n):
        if not _is_real(M[i][i]):
            raise ValueError(f"non-Hermitian input: diagonal entry {i} is not real")
        for j in range(i + 1, n):
            if M[i][j] != _conj(M[j][i]):
                raise ValueError(f"non-Hermitian input at ({i},{j})")

    A = [list(row) for row in M]
    # T[i] = original-coordinate vector represented by Schur coordinate i (sparse dict)
    T: list[dict] = [{i: mpq(1)} for i in range(n)]
    remaining = list(range(n))
    factors: list[LdlFactor] = []
    rank = 0

    def witness_from(vec: dict) -> NotPsd:
        v = [mpq(0)] * n
        for k, x in vec.items():
            v[k] = x
        w = _normalize_witness(v)
        value = quadratic_form(M, w)
        if not value < 0:
            raise InvariantError("negativity witness does not certify a negative value")
        return NotPsd(w, value)

    while remaining:
        pivot = None
        for i in remaining:
            dii = _real(A[i][i])
            if dii < 0:
                return witness_from(T[i])
            if pivot is None and dii > 0:
                pivot = i
        if pivot is None:
            for i in remaining:
                for j in remaining:
                    if i != j and A[i][j]:
                        x = -A[i][j]
                        vec = {k: x * val for k, val in T[i].items()}
                        for k, val in T[j].items():
                            vec[k] = vec.get(k, 0) + val
                        return witness_from(vec)
            break
        p = pivot
        dp = _real(A[p][p])
        remaining.remove(p)
        rank += 1
        col = {i: A[i][p] for i in remaining if A[i][p]}
        if keep_factors:
            vec = [mpq(0)] * n
            vec[p] = mpq(1)
            for i, a in col.items():
                vec[i] = a / dp
            factors.append(LdlFactor(p, dp, tuple(vec)))
        rowp = A[p]
        for i, aip in col.items():
            Ai = A[i]
            f = aip / dp
            for j in remaining:
                apj = rowp[j]
                if apj:
                    Ai[j] = Ai[j] - f * apj
        tp = T[p]
        for j in remaining:
            apj = rowp[j]
            if apj:
                g = apj / dp
                tj = T[j]
                for k, val in tp.items():
                    tj[k] = tj.get(k, 0) - g * val
    return Psd(rank, tuple(factors))


# ---------------------------------------------------------------------------
# inducibility


@dataclass(frozen=True)
class NotInduced:
    """Conclusive: no local Kähler immersion into any complex projective space."""

    order: int
    witness: tuple
    value: object
    monomials: tuple = field(default=(), compare=False)
    #: radial weight of the failing block when the verdict concerns a cone
    radial_weight: int | None = None

    def witness_support(self) -> list[tuple[tuple[int, ...], object]]:
        return [(m, w) for m, w in zip(self.monomials, self.witness) if w]

    @property
    def verdict_class(self) -> str:
        return "NotInduced"


@dataclass(frozen=True)
class ConsistentUpTo:
    """No obstruction through ``order``; does not assert inducibility."""

    order: int
    rank_lower_bound: int

    @property
    def verdict_class(self) -> str:
        return "ConsistentUpTo"


def kahler_form_at_origin(phi: HermitianSeries) -> list[list]:
    """Matrix of the ``z_a zbar_b`` coefficients (the metric at the center)."""
    n = phi.n
    units = [tuple(1 if i == a else 0 for i in range(n)) for a in range(n)]
    out = []
    for a in range(n):
        row = []
        for b in range(n):
            c = phi.coeff(units[a], units[b])
            row.append(c if c.im else c.re)
        out.append(row)
    return out


def is_kahler_at_origin(phi: HermitianSeries) -> bool:
    if phi.d < 1:
        return False
    verdict = psd_check_exact(kahler_form_at_origin(phi), keep_factors=False)
    return isinstance(verdict, Psd) and verdict.rank == phi.n


def _require_kahler(phi: HermitianSeries) -> None:
    if not is_kahler_at_origin(phi):
        raise DegenerateMetricError("the potential is not Kähler at the origin (degenerate metric)")


def verdict_from_matrix(M: CalabiMatrix) -> NotInduced | ConsistentUpTo:
    res = psd_check_exact(M, keep_factors=False)
    if isinstance(res, NotPsd):
        return NotInduced(M.d, res.witness, res.value, M.monomials)
    return ConsistentUpTo(M.d, res.rank)


def inducibility(phi: HermitianSeries, d: int | None = None) -> NotInduced | ConsistentUpTo:
    """Normalize, build the Calabi matrix at order ``d`` and certify it."""
    _require_kahler(phi)
    D = diastasis_normalize(phi)
    return verdict_from_matrix(calabi_matrix(D, d))


@dataclass(frozen=True)
class MultipleSearch:
    """Outcome of the search for an integer multiple with no obstruction."""

    k: int | None
    verdicts: dict

    @property
    def witnesses(self) -> dict:
        return {k: v for k, v in self.verdicts.items() if isinstance(v, NotInduced)}


def find_inducing_multiple(phi: HermitianSeries, K: int, d: int | None = None) -> MultipleSearch:
    """Smallest ``k`` in ``1..K`` with ``k*phi`` unobstructed through order ``d``."""
    _require_kahler(phi)
    verdicts = {}
    for k in range(1, K + 1):
        v = inducibility(phi * k, d)
        verdicts[k] = v
        if isinstance(v, ConsistentUpTo):
            return MultipleSearch(k, verdicts)
    return MultipleSearch(None, verdicts)


def scalar(x):
    """Exact scalar in the representation used for matrix entries."""
    g = to_gaussian(x)
    return g if g.im else to_rational(g.re)
