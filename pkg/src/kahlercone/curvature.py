"""Metric, Ricci potential and Einstein constants of truncated potentials.

Conventions: with ``omega = (i/2) dd^c phi`` the metric matrix is
``g = (d^2 phi / dz_a dzbar_b)`` and the Ricci potential is
``-2 log det g``, so that ``rho = (i/2) dd^c (ricci potential)`` and an
Einstein constant ``lam`` with ``rho = lam * omega`` shows up as
``ricci potential = lam * phi`` modulo pluriharmonic terms.  Constant factors
in ``g`` only add a constant to ``log det g`` and drop out; ``det g(0)`` is
divided out before taking the logarithm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from gmpy2 import mpq

from . import oracle
from .calabi import DegenerateMetricError, diastasis_normalize, is_kahler_at_origin
from .cone import ConePotential, cone_series
from .series import HermitianSeries, InvariantError, Series, log, to_rational, wirtinger

__all__ = [
    "MetricSeries",
    "RicciReport",
    "RicciFlatResult",
    "BridgeReport",
    "metric_from_potential",
    "determinant",
    "ricci_report",
    "ricci_flat_check",
    "sasaki_einstein_bridge",
    "metric_cross_check",
]


@dataclass(frozen=True)
class MetricSeries:
    """``g[a][b] = d^2 phi / dz_a dzbar_b`` truncated at order ``d``.

    Diagonal entries are real series; ``g[b][a]`` is the conjugate of ``g[a][b]``.
    """

    n: int
    d: int
    entries: tuple

    def at_origin(self) -> list[list]:
        zero = (0,) * self.n
        return [[e.coeff(zero, zero) for e in row] for row in self.entries]

    def evaluate(self, point: Sequence) -> np.ndarray:
        return np.array([[e.evaluate(point) for e in row] for row in self.entries])


def metric_from_potential(phi: HermitianSeries, d: int | None = None) -> MetricSeries:
    if not is_kahler_at_origin(phi):
        raise DegenerateMetricError("metric is degenerate at the origin")
    top = phi.d - 1
    d = top if d is None else d
    if d > top:
        raise ValueError(f"order {d} needs the potential through order {d + 1}, got {phi.d}")
    rows = []
    for a in range(phi.n):
        da = wirtinger(phi, a)
        row = []
        for b in range(phi.n):
            g = wirtinger(da, b, conjugate=True).truncate(d, d)
            if a == b:
                g = HermitianSeries.from_series(g)
            row.append(g)
        rows.append(tuple(row))
    out = MetricSeries(phi.n, d, tuple(rows))
    for a in range(phi.n):
        for b in range(a):
            if out.entries[a][b] != out.entries[b][a].conj():
                raise InvariantError(f"metric entries ({a},{b}) and ({b},{a}) are not conjugate")
    return out


def determinant(g: MetricSeries) -> HermitianSeries:
    """Cofactor expansion along rows, memoized on the set of remaining columns."""
    n = g.n
    memo: dict[int, Series] = {}

    def minor(row: int, cols: int) -> Series:
        if row == n:
            return 1
        if cols in memo:
            return memo[cols]
        total = None
        sign = 1
        for j in range(n):
            if not cols >> j & 1:
                continue
            term = g.entries[row][j] * minor(row + 1, cols & ~(1 << j))
            if sign < 0:
                term = -term
            total = term if total is None else total + term
            sign = -sign
        memo[cols] = total
        return total

    return HermitianSeries.from_series(minor(0, (1 << n) - 1))


@dataclass(frozen=True)
class RicciReport:
    d: int
    det_ratio: HermitianSeries
    ricci_potential: HermitianSeries
    normalized_potential: HermitianSeries
    lam: mpq | None
    candidate: mpq | None
    residual: HermitianSeries
    mismatch: tuple | None


def _ricci_potential(phi: HermitianSeries, d: int | None):
    g = metric_from_potential(phi, d)
    det = determinant(g)
    det0 = det.constant_term()
    if det0.im or det0.re <= 0:
        raise InvariantError(f"det g(0) = {det0} is not a positive real")
    ratio = HermitianSeries.from_series(det.scale(1 / det0.re))
    rp = HermitianSeries.from_series(log(ratio) * -2)
    return g.d, ratio, diastasis_normalize(rp)


def ricci_report(phi: HermitianSeries, d: int | None = None) -> RicciReport:
    """Ricci potential of ``phi`` and the Einstein constant, if one exists through order ``d``."""
    d, ratio, rp = _ricci_potential(phi, d)
    base = diastasis_normalize(phi).truncate(d)
    base = HermitianSeries.from_series(base)
    lowest = base.terms()[0]
    m, k, c = lowest
    candidate = rp.coeff(m, k) / c
    candidate = candidate.re if not candidate.im else None
    if candidate is None:
        residual = rp
    else:
        residual = HermitianSeries.from_series(rp - base * candidate)
    mismatch = None
    if not residual.is_zero():
        m1, k1, _ = residual.terms()[0]
        mismatch = (m1, k1)
    lam = candidate if mismatch is None else None
    return RicciReport(d, ratio, rp, base, lam, candidate, residual, mismatch)


@dataclass(frozen=True)
class RicciFlatResult:
    flat: bool
    d: int
    residual: HermitianSeries
    potential: HermitianSeries


def ricci_flat_check(phi: HermitianSeries | ConePotential, d: int | None = None) -> RicciFlatResult:
    """Exact test that the Ricci potential vanishes through order ``d``.

    A :class:`ConePotential` is expanded as ``|1 + z0|^{2c} e^{c psi}``, i.e.
    around the regular point ``z0 = 1`` (the normal form is degenerate on
    ``z0 = 0``); this needs integer ``c``.
    """
    if isinstance(phi, ConePotential):
        phi = cone_series(phi, z0_center=1)
    _, _, rp = _ricci_potential(phi, d)
    return RicciFlatResult(rp.is_zero(), rp.d, rp, phi)


@dataclass(frozen=True)
class BridgeReport:
    n: int
    a: mpq
    c: mpq
    d: int
    lam_base: mpq | None
    base_is_ke: bool
    cone_ricci_flat: bool
    residual_terms: int


def sasaki_einstein_bridge(psi: HermitianSeries, a, d: int | None = None) -> BridgeReport:
    """Base Einstein constant of ``c psi`` against Ricci-flatness of ``|z0|^2 e^{c psi}``.

    Rescaling ``psi`` by ``c`` turns the cone potential ``|z0|^{2c} e^{c psi}``
    into one with exponent 1 after the change ``z0 -> z0^c``, so the cone
    check always runs with integer exponent.  The two sides must agree; a
    disagreement raises :class:`InvariantError`.
    """
    from .cone import lift

    a = to_rational(a)
    if a <= 0:
        raise ValueError("a must be positive")
    c = 1 / a
    chi = HermitianSeries.from_series(diastasis_normalize(psi) * c)
    rep = ricci_report(chi, d)
    n = chi.n
    base_ke = rep.lam is not None and rep.lam == 2 * n + 2
    flat = ricci_flat_check(lift(chi, 1), rep.d)
    if base_ke != flat.flat:
        raise InvariantError(
            f"base Einstein test ({base_ke}) and cone Ricci-flatness ({flat.flat}) disagree"
        )
    return BridgeReport(n, a, c, rep.d, rep.lam, base_ke, flat.flat, len(flat.residual))


@dataclass(frozen=True)
class MetricCheck:
    max_rel_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def metric_cross_check(phi: HermitianSeries, f: Callable, plan: oracle.SamplePlan, d: int | None = None) -> MetricCheck:
    """Compare the series metric and ``det g / det g(0)`` with finite differences of ``f``."""
    g = metric_from_potential(phi, d)
    ratio = determinant(g)
    det0 = complex(ratio.constant_term())
    zero = [0j] * phi.n
    num0 = np.linalg.det(oracle.fd_metric(f, zero, plan.h))
    worst = 0.0
    for p in plan.points:
        fd = oracle.fd_metric(f, p, plan.h)
        sym = g.evaluate(p)
        scale = max(np.abs(fd).max(), 1e-300)
        worst = max(worst, float(np.abs(fd - sym).max() / scale))
        a = ratio.evaluate(p) / det0
        b = np.linalg.det(fd) / num0
        worst = max(worst, abs(a - b) / abs(b))
    return MetricCheck(float(worst), plan.tolerance)
