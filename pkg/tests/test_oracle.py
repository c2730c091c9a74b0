import math
from fractions import Fraction

import pytest

from kahlercone import oracle
from kahlercone.oracle import Add, Const, Exp, FromSeries, Log, Mul, Pow, Scale, Term, brute_expand
from kahlercone.corpus import fubini_study, flat
from kahlercone.series import HermitianSeries, constant, exp, log, norm2, power


def test_fd_examples():
    assert abs(oracle.fd_mixed_second(lambda p: abs(p[0]) ** 2, 0, 0, [0.3], 1e-4) - 1) < 1e-8
    v = oracle.fd_mixed_second(lambda p: math.log(1 + abs(p[0]) ** 2), 0, 0, [0.5], 1e-4)
    assert abs(v - 1.25 ** -2) < 1e-6
    assert abs(oracle.fd_mixed_second(lambda p: 7.0, 0, 0, [0.1], 1e-4)) < 1e-12


def test_fd_off_diagonal():
    # d^2/dz0 dzbar1 of z0 * zbar1 is 1, of |z0|^2 is 0
    f = lambda p: (p[0] * p[1].conjugate())
    assert abs(oracle.fd_mixed_second(f, 0, 1, [0.1, 0.2j], 1e-4) - 1) < 1e-7
    assert abs(oracle.fd_mixed_second(lambda p: abs(p[0]) ** 2, 0, 1, [0.1, 0.2], 1e-4)) < 1e-7


def test_brute_expand_examples():
    u = Term((1,), (1,))
    e = brute_expand(Exp(u), 1, 6)
    assert all(e.coeff((k,), (k,)) == Fraction(1, math.factorial(k)) for k in range(7))
    s = brute_expand(Exp(Scale(Log(Const(1) - u), Fraction(-1, 2))), 1, 6)
    for k in range(7):
        binom = Fraction(1)
        for j in range(k):
            binom *= (Fraction(-1, 2) - j) / (j + 1)
        assert s.coeff((k,), (k,)) == binom * (-1) ** k
    assert brute_expand(Exp(Const(0)), 1, 3) == constant(1, 3)


def test_brute_matches_kernel():
    a = norm2(2, 4) + HermitianSeries(2, 4, {((1, 0), (0, 1)): Fraction(1, 3), ((0, 1), (1, 0)): Fraction(1, 3)})
    leaf = FromSeries(a)
    assert brute_expand(Exp(leaf), 2, 4) == exp(a)
    assert brute_expand(Log(Const(1) + leaf), 2, 4) == log(constant(2, 4) + a)
    assert brute_expand(Pow(Const(1) + leaf, Fraction(-3, 2)), 2, 4) == power(constant(2, 4) + a, Fraction(-3, 2))
    assert brute_expand(Mul(leaf, Add(leaf, Const(1))), 2, 4) == a * (a + 1)


def test_brute_limits():
    deep = Term((1,), (1,))
    for _ in range(oracle.MAX_DEPTH + 2):
        deep = Scale(deep, 1)
    with pytest.raises(RecursionError):
        brute_expand(deep, 1, 2)
    with pytest.raises(ValueError):
        brute_expand(Exp(Const(1)), 1, 2)


def test_sample_plan_validation():
    with pytest.raises(ValueError):
        oracle.SamplePlan(((0.6,),), 1e-5, 1e-6, 0.5)
    with pytest.raises(ValueError):
        oracle.SamplePlan(((0.1,),), 1e-2, 1e-6, 0.5)


def test_cross_check_examples():
    p = fubini_study(1, 12)
    pts = oracle.sample_points(1, 4, 0.5, seed=1)
    plan = oracle.SamplePlan(pts, 5e-5, 1e-9, 0.5)
    assert oracle.cross_check(p.series, p.closed_form, plan).passed
    fl = flat(2, 3)
    plan2 = oracle.SamplePlan(oracle.sample_points(2, 3, 0.5, seed=2), 5e-5, 1e-15, 0.5)
    assert oracle.cross_check(fl.series, fl.closed_form, plan2).passed
    bad = HermitianSeries.from_series(p.series + HermitianSeries(1, 12, {((1,), (1,)): Fraction(1, 10 ** 4)}))
    assert not oracle.cross_check(bad, p.closed_form, plan).passed


def test_sample_points_deterministic():
    assert oracle.sample_points(2, 3, 0.3, seed=5) == oracle.sample_points(2, 3, 0.3, seed=5)
    for p in oracle.sample_points(3, 5, 0.3, seed=0):
        assert max(abs(z) for z in p) <= 0.3
