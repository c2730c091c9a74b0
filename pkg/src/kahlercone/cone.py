"""Kähler cone potentials ``|z0|^{2c} e^{c psi}`` over a base potential ``psi``.

The cone potential is kept symbolically as the pair ``(c, psi)``; ``|z0|^{2c}``
is never expanded for fractional ``c``.  Expanding ``exp(|z0|^{2c} e^{c psi}) - 1``
in powers of ``|z0|^{2c}`` gives blocks of radial weight ``k = 1, 2, ...``
that never mix (the exponents ``kc`` are distinct), and the weight-``k``
block is ``e^{kc psi} / k!``.  The cone is therefore obstructed exactly when
one of these blocks fails to be positive semidefinite, which mirrors the
base criterion for ``c * psi``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import gmpy2
from gmpy2 import mpq

from . import oracle
from .calabi import (
    ConsistentUpTo,
    NotInduced,
    NotPsd,
    coefficient_matrix,
    diastasis_normalize,
    psd_check_exact,
)
from .series import (
    GradedOrder,
    HermitianSeries,
    Series,
    embed,
    exp,
    laurent_substitute,
    norm2,
    to_rational,
)

__all__ = [
    "ConePotential",
    "RadialBlockMatrix",
    "EpsilonSubmatrix",
    "FlatnessResult",
    "RadialIdentityReport",
    "lift",
    "homothety",
    "radial_blocks",
    "cone_inducibility",
    "rational_power",
    "epsilon_for",
    "epsilon_submatrix",
    "epsilon_limit_matrix",
    "epsilon_generator",
    "verify_radial_derivative_identity",
    "flatness_witness",
    "cone_series",
    "flat_potential",
]


@dataclass(frozen=True, eq=False)
class ConePotential:
    """``Phi_c = |z0|^{2c} e^{c psi}`` on ``(C minus 0) x U``; ``c = 1/a``."""

    c: mpq
    psi: HermitianSeries
    exp_c_psi: HermitianSeries = field(repr=False)

    @property
    def a(self) -> mpq:
        return 1 / self.c

    @property
    def n(self) -> int:
        return self.psi.n

    @property
    def d(self) -> int:
        return self.psi.d

    def __eq__(self, other):
        if not isinstance(other, ConePotential):
            return NotImplemented
        return self.c == other.c and self.psi == other.psi


def _positive(x, name: str) -> mpq:
    x = to_rational(x)
    if x <= 0:
        raise ValueError(f"{name} must be positive, got {x}")
    return x


def _make(c: mpq, psi: HermitianSeries) -> ConePotential:
    if psi.constant_term():
        raise ValueError("psi must vanish at the center; subtract its constant term first")
    return ConePotential(c, psi, exp(psi * c))


def lift(psi: HermitianSeries, a) -> ConePotential:
    """Cone potential ``|z0|^{2/a} e^{psi/a}`` over the base potential ``psi``."""
    a = _positive(a, "a")
    return _make(1 / a, psi)


def homothety(cp: ConePotential, a) -> ConePotential:
    """Rescale the structure by ``a``: ``t -> t^a``, i.e. ``c -> c a``."""
    a = _positive(a, "a")
    if a == 1:
        return cp
    return _make(cp.c * a, cp.psi)


@dataclass(frozen=True)
class RadialBlockMatrix:
    """Blocks ``B_k = coeff(e^{k c psi}) / k!`` for radial weights ``k = 1..K``."""

    K: int
    d: int
    c: mpq
    blocks: tuple

    def block(self, k: int):
        return self.blocks[k - 1]


def _base(cp: ConePotential, d: int | None) -> tuple[HermitianSeries, int]:
    d = cp.d if d is None else d
    if d > cp.d:
        raise ValueError(f"order {d} exceeds the base potential order {cp.d}")
    return diastasis_normalize(cp.psi).truncate(d), d


def radial_blocks(cp: ConePotential, K: int, d: int | None = None) -> RadialBlockMatrix:
    if K < 1:
        raise ValueError("need at least one radial weight")
    psi, d = _base(cp, d)
    blocks = []
    for k in range(1, K + 1):
        m = coefficient_matrix(exp(psi * (cp.c * k)), d)
        f = mpq(1, math.factorial(k))
        blocks.append([[x * f for x in row] for row in m])
    return RadialBlockMatrix(K, d, cp.c, tuple(blocks))


def cone_inducibility(cp: ConePotential, K: int, d: int | None = None):
    """Inducibility of the cone read off its radial blocks (weights ``1..K``)."""
    rb = radial_blocks(cp, K, d)
    monos = GradedOrder(cp.n).monomials(rb.d)
    rank = 0
    for k, B in enumerate(rb.blocks, start=1):
        res = psd_check_exact(B, keep_factors=False)
        if isinstance(res, NotPsd):
            return NotInduced(rb.d, res.witness, res.value, monos, radial_weight=k)
        rank += res.rank
    return ConsistentUpTo(rb.d, rank)


# ---------------------------------------------------------------------------
# epsilon submatrix


def rational_power(x, r) -> mpq:
    """Exact ``x**r`` for rational ``x > 0`` and ``r``; ValueError if irrational."""
    x = _positive(x, "base")
    r = to_rational(r)
    p, q = int(r.numerator), int(r.denominator)
    num, den = int(x.numerator), int(x.denominator)
    if p < 0:
        num, den, p = den, num, -p
    rn, exact_n = gmpy2.iroot(gmpy2.mpz(num), q)
    rd, exact_d = gmpy2.iroot(gmpy2.mpz(den), q)
    if not (exact_n and exact_d):
        raise ValueError(f"{x}^({r}) is irrational; choose epsilon as an exact {q}-th power")
    return mpq(rn, rd) ** p


def epsilon_for(c, base) -> mpq:
    """A value of epsilon for which ``epsilon^(2c)`` is rational: ``base^q`` with ``2c = p/q``."""
    two_c = 2 * to_rational(c)
    return _positive(base, "base") ** int(two_c.denominator)


def epsilon_generator(cp: ConePotential, eps, d: int | None = None, prefactor=1) -> HermitianSeries:
    """``prefactor * e^{D_q(0,z)} { eps^{2c} (e^{c psi} - 1)^2 + e^{c psi} }``.

    With the diastasis constant ``eps^{2c}``, ``D_q(0, z) = eps^{2c} (e^{c psi} - 1)``.
    ``eps = 0`` gives the limit ``e^{c psi}``.
    """
    psi, d = _base(cp, d)
    eps = to_rational(eps)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    s = rational_power(eps, 2 * cp.c) if eps else mpq(0)
    E = exp(psi * cp.c)
    P = E - 1
    G = exp(P * s) * (P * P * s + E)
    return G * to_rational(prefactor)


@dataclass(frozen=True)
class EpsilonSubmatrix:
    """Rescaled submatrix ``v_{jk} = c^{-2} eps^{2-2c} u_{jk}`` over base monomials."""

    eps: mpq
    c: mpq
    d: int
    eps_2c: mpq
    entries: list
    #: ``eps^2 - eps^{2c}``. Using ``+eps^2`` as the constant of ``D_q`` would scale
    #: every entry by ``exp`` of this number, which leaves PSD verdicts unchanged.
    constant_offset: mpq

    def u_entries(self) -> list:
        """Undo the rescaling: ``u_{jk} = c^2 eps^{2c-2} v_{jk}``."""
        f = self.c * self.c * self.eps_2c / (self.eps * self.eps)
        return [[f * x for x in row] for row in self.entries]


def epsilon_submatrix(cp: ConePotential, eps, d: int | None = None) -> EpsilonSubmatrix:
    eps = _positive(eps, "epsilon")
    _, d = _base(cp, d)
    G = epsilon_generator(cp, eps, d)
    s = rational_power(eps, 2 * cp.c)
    return EpsilonSubmatrix(eps, cp.c, d, s, coefficient_matrix(G, d), eps * eps - s)


def epsilon_limit_matrix(cp: ConePotential, d: int | None = None) -> list:
    """The ``eps -> 0`` matrix: coefficients of ``e^{c psi}``."""
    _, d = _base(cp, d)
    return coefficient_matrix(epsilon_generator(cp, 0, d), d)


# ---------------------------------------------------------------------------
# radial second derivative, checked numerically


@dataclass(frozen=True)
class RadialIdentityReport:
    c: mpq
    eps: mpq
    points: tuple
    fd_values: tuple
    closed_values: tuple
    series_values: tuple
    max_rel_error_fd: float
    max_rel_error_series: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error_fd < self.tolerance and self.max_rel_error_series < self.tolerance


def _rel(a: complex, b: complex) -> float:
    scale = max(abs(b), 1e-300)
    return abs(a - b) / scale


def verify_radial_derivative_identity(
    cp: ConePotential,
    eps,
    samples: Sequence[Sequence],
    psi_fn: Callable[[Sequence[complex]], float] | None = None,
    tolerance: float = 1e-6,
    radius: float | None = None,
) -> RadialIdentityReport:
    """Compare ``d^2/dz0 dz0bar (e^{D_q} - 1)`` at ``z0 = 0`` with its closed form.

    The left side is a central finite difference of the closed-form ``D_q``;
    ``psi_fn`` evaluates the base potential (default: the truncated diastasis
    series).  The right side is evaluated both from floats and from the exact
    series produced by :func:`epsilon_generator`.
    """
    eps_q = _positive(eps, "epsilon")
    c = float(cp.c)
    e = float(eps_q)
    psi_series = diastasis_normalize(cp.psi)
    if psi_fn is None:
        def psi_fn(z):
            return psi_series.evaluate(z).real
    G = epsilon_generator(cp, eps_q)
    scale = c * c * e ** (2 * c - 2)
    # D_q(q) = 0 fixes the constant at eps^{2c}
    e2c = e ** (2 * c)

    fd_vals, closed_vals, series_vals = [], [], []
    err_fd = err_series = 0.0
    for z in samples:
        z = [complex(x) for x in z]
        psi0 = psi_fn(z)
        ecpsi = math.exp(c * psi0)

        def F(p):
            w0 = p[0]
            zz = p[1:]
            ez = math.exp(c * psi_fn(zz))
            a = cmath.exp(c * cmath.log(w0 + e))
            b = a.conjugate()
            modulus = (a * b).real
            dq = modulus * ez - e ** c * a - e ** c * b + e2c
            return cmath.exp(dq) - 1

        h = 1e-4 * (radius if radius is not None else e)
        lhs = oracle.fd_mixed_second(F, 0, 0, [0j] + z, h)
        dq0 = e2c * (ecpsi - 1)
        rhs = scale * math.exp(dq0) * (e2c * (ecpsi - 1) ** 2 + ecpsi)
        ser = scale * G.evaluate(z)
        fd_vals.append(lhs)
        closed_vals.append(rhs)
        series_vals.append(ser)
        err_fd = max(err_fd, _rel(lhs, rhs))
        err_series = max(err_series, _rel(ser, rhs))
    return RadialIdentityReport(
        cp.c, eps_q, tuple(tuple(p) for p in samples), tuple(fd_vals), tuple(closed_vals),
        tuple(series_vals), err_fd, err_series, tolerance,
    )


# ---------------------------------------------------------------------------
# explicit cone series (integer c only)


def _integer_c(cp: ConePotential) -> int:
    if cp.c.denominator != 1:
        raise ValueError(
            f"c = {cp.c} is fractional: |z0|^(2c) has no power-series expansion; "
            "use the Einstein-constant bridge instead"
        )
    return int(cp.c)


def flat_potential(n_total: int, d: int) -> HermitianSeries:
    """``|z0|^2 + ... + |z_{n}|^2`` in ``n_total`` variables."""
    return norm2(n_total, d)


def cone_series(cp: ConePotential, d: int | None = None, z0_center=0) -> HermitianSeries:
    """``|z0 + w|^{2c} e^{c psi(z)}`` in ``n + 1`` variables (``z0`` first), integer ``c``.

    ``z0_center = 0`` gives the normal form around the apex direction (degenerate
    metric at the origin); ``z0_center = 1`` expands around a regular point.
    """
    k = _integer_c(cp)
    d = cp.d if d is None else d
    n1 = cp.n + 1
    e = embed(cp.exp_c_psi.truncate(d), n1, 1)
    w = to_rational(z0_center)
    # |z0 + w|^2 = |z0|^2 + w z0 + w zbar0 + w^2
    one = (1,) + (0,) * cp.n
    zero = (0,) * n1
    radial = HermitianSeries(n1, d, {(one, one): 1, (one, zero): w, (zero, one): w, (zero, zero): w * w})
    return radial ** k * e


@dataclass(frozen=True)
class FlatnessResult:
    flat: bool
    substituted: Series | None
    reason: str = ""


def flatness_witness(cp: ConePotential, polynomial: bool | None = None) -> FlatnessResult:
    """Substitute ``z_j -> z_j / z0`` in the normal form and compare with the flat potential.

    ``polynomial`` declares that ``e^{c psi}`` is an exact polynomial; when
    omitted it is inferred from a gap below the truncation order.
    """
    if cp.c != 1:
        return FlatnessResult(False, None, f"c = {cp.c}: only c = 1 can have the flat normal form")
    E = cp.exp_c_psi
    if polynomial is None:
        h, a = E.max_degrees()
        polynomial = h < E.d and a < E.d
    if not polynomial:
        return FlatnessResult(False, None, "e^{c psi} is not an exact polynomial at this order")
    phi = cone_series(cp)
    n1 = cp.n + 1
    rules = {}
    for j in range(1, n1):
        r = [0] * n1
        r[0] = -1
        r[j] = 1
        rules[j] = tuple(r)
    try:
        sub = laurent_substitute(phi, rules, polynomial=True)
    except ValueError as exc:
        return FlatnessResult(False, None, str(exc))
    target = flat_potential(n1, sub.hdeg)
    return FlatnessResult(sub == target, sub, "" if sub == target else "substituted potential is not flat")
