import random
from fractions import Fraction

import pytest

from kahlercone import oracle
from kahlercone.acceptance import random_hermitian
from kahlercone.calabi import DegenerateMetricError
from kahlercone.cone import cone_series, lift
from kahlercone.corpus import CORPUS_NAMES, builtin
from kahlercone.curvature import (
    determinant,
    metric_cross_check,
    metric_from_potential,
    ricci_flat_check,
    ricci_report,
    sasaki_einstein_bridge,
)
from kahlercone.series import HermitianSeries, constant, log, norm2, power, real_part_monomial


def fs(n, d):
    return log(constant(n, d) + norm2(n, d))


def hyp(n, d):
    return log(constant(n, d) - norm2(n, d)) * -1


def test_metric_examples():
    g = metric_from_potential(norm2(2, 4))
    assert g.d == 3
    for a in range(2):
        for b in range(2):
            assert g.entries[a][b] == (constant(2, 3) if a == b else HermitianSeries(2, 3))
    g = metric_from_potential(fs(1, 6))
    assert g.entries[0][0] == power(constant(1, 5) + norm2(1, 5), -2)
    g = metric_from_potential(hyp(1, 6))
    assert g.entries[0][0] == power(constant(1, 5) - norm2(1, 5), -2)


def test_metric_degenerate():
    with pytest.raises(DegenerateMetricError):
        metric_from_potential(HermitianSeries(1, 4, {((2,), (2,)): 1}))


def test_metric_order_bound():
    with pytest.raises(ValueError):
        metric_from_potential(fs(1, 4), 4)


def test_determinant_fs2():
    # det g for log(1 + |z|^2) in two variables is (1 + |z|^2)^{-3}
    det = determinant(metric_from_potential(fs(2, 5)))
    assert det == power(constant(2, 4) + norm2(2, 4), -3)


def test_ricci_examples():
    assert ricci_report(fs(1, 5)).lam == 4
    r = ricci_report(norm2(2, 4))
    assert r.lam == 0 and r.residual.is_zero()
    assert ricci_report(hyp(1, 5)).lam == -4


@pytest.mark.parametrize("n", [1, 2, 3])
def test_fubini_study_einstein_constant(n):
    assert ricci_report(fs(n, 5)).lam == 2 * (n + 1)


def test_non_einstein_reports_mismatch():
    u = norm2(1, 5)
    r = ricci_report(HermitianSeries.from_series(u - u * u * Fraction(1, 4)))
    assert r.lam is None
    assert r.mismatch == ((2,), (2,))
    assert not r.residual.is_zero()


def test_pure_terms_do_not_change_curvature():
    rng = random.Random(4)
    for name in ("fs:2", "hyp:1", "perturbed_quartic"):
        phi = builtin(name, 5).series
        base = ricci_report(phi)
        for _ in range(3):
            m = tuple(rng.randint(0, 2) for _ in range(phi.n))
            noise = real_part_monomial(phi.n, 5, m, Fraction(rng.randint(-3, 3), 2)) + rng.randint(-2, 2)
            other = HermitianSeries.from_series(phi + noise)
            assert metric_from_potential(other).entries == metric_from_potential(phi).entries
            r = ricci_report(other)
            assert r.ricci_potential == base.ricci_potential and r.lam == base.lam


def test_lambda_scales_inversely():
    for name in CORPUS_NAMES:
        phi = builtin(name, 5).series
        lam = ricci_report(phi).lam
        for k in (Fraction(2), Fraction(1, 3)):
            scaled = ricci_report(HermitianSeries.from_series(phi * k)).lam
            if lam is None:
                assert scaled is None
            else:
                assert scaled == lam / k


def test_ricci_flat_examples():
    assert ricci_flat_check(lift(fs(1, 5), 1), 4).flat
    assert ricci_flat_check(norm2(2, 4)).flat
    assert not ricci_flat_check(lift(norm2(1, 5), 1), 4).flat


def test_ricci_flat_rejects_fractional_cone():
    with pytest.raises(ValueError):
        ricci_flat_check(lift(fs(1, 5), 2), 4)


def test_ricci_flat_agrees_with_finite_differences():
    radius = 0.2
    pts = oracle.sample_points(2, 3, radius, seed=3)
    plan = oracle.SamplePlan(pts, 1e-4 * radius, 1e-6, radius)
    for psi, f_base, flat in (
        (fs(1, 9), lambda z: 1 + abs(z[0]) ** 2, True),
        (norm2(1, 9), lambda z: 2.718281828459045 ** (abs(z[0]) ** 2), False),
    ):
        cp = lift(psi, 1)
        phi = cone_series(cp, z0_center=1)

        def f(z, f_base=f_base):
            return abs(1 + z[0]) ** 2 * f_base(z[1:])

        assert metric_cross_check(phi, f, plan).passed
        assert ricci_flat_check(cp, 4).flat is flat


def test_bridge_examples():
    r = sasaki_einstein_bridge(fs(1, 5), 1, 4)
    assert r.lam_base == 4 and r.base_is_ke and r.cone_ricci_flat
    r2 = sasaki_einstein_bridge(fs(1, 5) * 2, 2, 4)
    assert (r2.lam_base, r2.cone_ricci_flat) == (r.lam_base, r.cone_ricci_flat)
    r = sasaki_einstein_bridge(hyp(1, 5), 1, 4)
    assert r.lam_base == -4 and not r.base_is_ke and not r.cone_ricci_flat


def test_bridge_on_random_potentials():
    rng = random.Random(8)
    for _ in range(15):
        extra = random_hermitian(rng, 1, 5, terms=2)
        kept = {(m, k): c for m, k, c in extra.terms() if sum(m) + sum(k) > 2 and sum(m) and sum(k)}
        psi = HermitianSeries.from_series(fs(1, 5) + HermitianSeries(1, 5, kept) * Fraction(1, 5))
        rep = sasaki_einstein_bridge(psi, rng.choice([1, 2, Fraction(1, 2)]), 3)
        assert rep.base_is_ke == rep.cone_ricci_flat
