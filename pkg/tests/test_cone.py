import math
from fractions import Fraction

import pytest

from kahlercone import oracle
from kahlercone.calabi import ConsistentUpTo, NotInduced, calabi_matrix, coefficient_matrix, inducibility, psd_check_exact
from kahlercone.cone import (
    cone_inducibility,
    cone_series,
    epsilon_for,
    epsilon_generator,
    epsilon_limit_matrix,
    epsilon_submatrix,
    flatness_witness,
    homothety,
    lift,
    radial_blocks,
    rational_power,
    verify_radial_derivative_identity,
)
from kahlercone.corpus import CORPUS_NAMES, builtin
from kahlercone.series import HermitianSeries, constant, exp, log, norm2

from conftest import frac


def fs(n, d):
    return log(constant(n, d) + norm2(n, d))


def test_lift_examples():
    cp = lift(fs(2, 4), 1)
    assert cp.c == 1 and cp.exp_c_psi == constant(2, 4) + norm2(2, 4)
    zero = lift(HermitianSeries(1, 3), 3)
    assert zero.c == Fraction(1, 3) and zero.exp_c_psi == constant(1, 3)
    half = lift(norm2(1, 4), 2)
    assert half.c == Fraction(1, 2) and half.exp_c_psi == exp(norm2(1, 4) * Fraction(1, 2))
    with pytest.raises(ValueError):
        lift(norm2(1, 3), 0)
    with pytest.raises(ValueError):
        lift(norm2(1, 3) + 1, 1)


def test_cone_series_matches_normal_form():
    phi = cone_series(lift(fs(1, 4), 1))
    assert phi == HermitianSeries(2, 4, {((1, 0), (1, 0)): 1, ((1, 1), (1, 1)): 1})


def test_homothety():
    psi = norm2(1, 3)
    a = Fraction(3, 2)
    assert homothety(lift(psi, a), a).c == 1
    assert homothety(lift(psi, a), a * 4).c == 4
    cp = lift(psi, a)
    assert homothety(cp, 1) == cp
    for x, y in [(Fraction(2), Fraction(1, 3)), (Fraction(5, 2), Fraction(3))]:
        assert homothety(homothety(cp, x), y) == homothety(cp, x * y)
    with pytest.raises(ValueError):
        homothety(cp, -1)


def test_radial_blocks_examples():
    rb = radial_blocks(lift(fs(1, 4), 1), 2, 4)
    one = constant(1, 4) + norm2(1, 4)
    assert rb.block(1) == coefficient_matrix(one, 4)
    assert rb.block(2) == [[x / 2 for x in row] for row in coefficient_matrix(one * one, 4)]
    rb = radial_blocks(lift(HermitianSeries(1, 3), 1), 3, 3)
    for k in (1, 2, 3):
        B = rb.block(k)
        assert B[0][0] == Fraction(1, math.factorial(k))
        assert sum(1 for row in B for x in row if x) == 1


def test_block_identity_against_repeated_products():
    for name in ("fs:1", "hyp:2", "perturbed_quartic"):
        cp = lift(builtin(name, 4).series, Fraction(1, 2))
        rb = radial_blocks(cp, 3, 4)
        power = constant(cp.n, 4)
        for k in (1, 2, 3):
            power = power * cp.exp_c_psi
            assert [[x * math.factorial(k) for x in row] for row in rb.block(k)] == coefficient_matrix(power, 4)


def test_cone_inducibility_examples():
    assert isinstance(cone_inducibility(lift(fs(2, 4), 1), 3, 4), ConsistentUpTo)
    u = norm2(1, 3)
    quartic = HermitianSeries.from_series(u - u * u * Fraction(1, 4))
    v = cone_inducibility(lift(quartic, 1), 1, 3)
    assert isinstance(v, NotInduced) and v.value == Fraction(-1, 12) and v.radial_weight == 1
    cp = lift(fs(1, 4) * Fraction(1, 2), 1)
    assert isinstance(cone_inducibility(cp, 3, 4), NotInduced)
    assert isinstance(cone_inducibility(homothety(cp, 2), 3, 4), ConsistentUpTo)


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_metamorphic_equivalence(name):
    p = builtin(name, 5)
    for c in (Fraction(1, 2), 1, 2, 3):
        cp = lift(p.series, 1 / Fraction(c))
        for d in (3, 4, 5):
            assert cone_inducibility(cp, 4, d).verdict_class == inducibility(p.series * c, d).verdict_class


def test_rational_power():
    assert rational_power(Fraction(1, 100), Fraction(1, 2)) == Fraction(1, 10)
    assert rational_power(Fraction(8, 27), Fraction(-2, 3)) == Fraction(9, 4)
    with pytest.raises(ValueError):
        rational_power(Fraction(1, 10), Fraction(1, 2))
    eps = epsilon_for(Fraction(3, 4), Fraction(1, 10))
    assert rational_power(eps, Fraction(3, 2)) == Fraction(1, 1000)


def test_epsilon_psi_zero():
    cp = lift(HermitianSeries(1, 3), 1)
    E = epsilon_submatrix(cp, Fraction(1, 10), 3)
    assert E.entries[0][0] == 1
    assert all(x == 0 for j, row in enumerate(E.entries) for k, x in enumerate(row) if (j, k) != (0, 0))


def test_epsilon_rejects_bad_values():
    cp = lift(norm2(1, 3), 1)
    with pytest.raises(ValueError):
        epsilon_submatrix(cp, 0, 3)
    with pytest.raises(ValueError):
        epsilon_submatrix(lift(norm2(1, 3), 4), Fraction(1, 10), 3)


def test_epsilon_against_brute_force():
    for c, psi in ((1, norm2(1, 4)), (1, fs(1, 4)), (2, norm2(1, 4)), (3, fs(1, 4))):
        E = epsilon_submatrix(lift(psi, Fraction(1, c)), Fraction(1, 10), 3)
        got = [[frac(x) for x in row] for row in E.entries]
        assert got == oracle.brute_epsilon_entries(psi, c, Fraction(1, 10), 3)
        assert E.constant_offset == Fraction(1, 100) - Fraction(1, 10) ** (2 * c)


def test_epsilon_limit_is_calabi_matrix():
    for name in ("fs:1", "hyp:1", "perturbed_quartic", "product(fs:1,flat:1)"):
        psi = builtin(name, 4).series
        cp = lift(psi, 1)
        L = epsilon_limit_matrix(cp, 4)
        C = calabi_matrix(psi, 4).entries
        L[0][0] -= 1
        assert L == C
        prev = None
        for eps in (Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000)):
            E = epsilon_submatrix(cp, eps, 4).entries
            L0 = epsilon_limit_matrix(cp, 4)
            dev = max(abs(E[j][k] - L0[j][k]) for j in range(len(E)) for k in range(len(E)))
            if prev is not None:
                assert dev < prev
            prev = dev


def test_positive_prefactor_preserves_verdict():
    for name in ("fs:1", "perturbed_quartic", "hyp:2"):
        cp = lift(builtin(name, 4).series, 1)
        a = psd_check_exact(coefficient_matrix(epsilon_generator(cp, Fraction(1, 10), 4), 4))
        b = psd_check_exact(coefficient_matrix(epsilon_generator(cp, Fraction(1, 10), 4, prefactor=Fraction(7, 3)), 4))
        assert type(a) is type(b)


def test_radial_identity_examples():
    rep = verify_radial_derivative_identity(lift(fs(1, 12), 1), Fraction(1, 2), [(0.25,)])
    assert rep.passed
    rep = verify_radial_derivative_identity(lift(norm2(1, 12), Fraction(1, 2)), Fraction(1, 3), [(0.2,)])
    assert rep.passed
    rep = verify_radial_derivative_identity(lift(HermitianSeries(1, 4), 1), Fraction(1, 2), [(0.1,)])
    assert rep.passed
    # psi = 0: both sides are c^2 eps^(2c-2) e^{D_q(0,0)} = 1 here
    assert abs(rep.closed_values[0] - 1) < 1e-15


def test_flatness_witness_examples():
    for n in (1, 3):
        res = flatness_witness(lift(fs(n, 3), 1))
        assert res.flat
        assert res.substituted == norm2(n + 1, 3)
    res = flatness_witness(lift(norm2(1, 4), 1))
    assert not res.flat
    assert not flatness_witness(lift(fs(1, 3), 2)).flat
