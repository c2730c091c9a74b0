import random
from fractions import Fraction

import pytest

from kahlercone.acceptance import random_hermitian
from kahlercone.calabi import (
    ConsistentUpTo,
    DegenerateMetricError,
    NotInduced,
    NotPsd,
    Psd,
    calabi_matrix,
    coefficient_matrix,
    diastasis_normalize,
    find_inducing_multiple,
    inducibility,
    psd_check_exact,
    quadratic_form,
)
from kahlercone.corpus import CORPUS_NAMES, builtin
from kahlercone.series import (
    GaussianRational,
    HermitianSeries,
    HoloSeries,
    constant,
    gram_from_factors,
    log,
    norm2,
    real_part_monomial,
)


def quartic(d):
    u = norm2(1, d)
    return HermitianSeries.from_series(u - u * u * Fraction(1, 4))


def test_diastasis_normalize_examples(fs1):
    assert diastasis_normalize(fs1) == fs1
    phi = norm2(1, 3) + real_part_monomial(1, 3, (1,), Fraction(1, 2)) + 5
    assert diastasis_normalize(phi) == norm2(1, 3)


def test_calabi_matrix_fubini_study():
    M = calabi_matrix(log(constant(2, 4) + norm2(2, 4)), 4)
    nonzero = {(j, k) for j in range(M.size) for k in range(M.size) if M.entries[j][k]}
    assert nonzero == {(1, 1), (2, 2)}
    assert M.entry((0, 1), (0, 1)) == 1 and M.entry((1, 0), (1, 0)) == 1


def test_calabi_matrix_flat_and_quartic():
    M = calabi_matrix(norm2(1, 4), 4)
    assert [M.entries[k][k] for k in range(5)] == [0, 1, Fraction(1, 2), Fraction(1, 6), Fraction(1, 24)]
    Q = calabi_matrix(quartic(3), 3)
    assert Q.entry((3,), (3,)) == Fraction(-1, 12)


def test_calabi_matrix_rejects_pure_terms():
    with pytest.raises(ValueError):
        calabi_matrix(norm2(1, 3) + 1)


def test_psd_examples():
    r = psd_check_exact([[1, 0], [0, 0]])
    assert isinstance(r, Psd) and r.rank == 1
    r = psd_check_exact([[0, 1], [1, 0]])
    assert isinstance(r, NotPsd)
    assert r.witness == (1, -1) and r.value == -2
    r = psd_check_exact(calabi_matrix(norm2(1, 3), 3))
    assert isinstance(r, Psd) and r.rank == 3


def test_psd_complex_hermitian():
    i = GaussianRational(0, 1)
    M = [[2, i], [-i, 2]]
    assert isinstance(psd_check_exact(M), Psd)
    M = [[1, 2 * i], [-2 * i, 1]]
    r = psd_check_exact(M)
    assert isinstance(r, NotPsd)
    assert quadratic_form(M, r.witness) == r.value < 0


def test_psd_rejects_non_hermitian():
    with pytest.raises(ValueError):
        psd_check_exact([[1, 2], [3, 1]])


def test_psd_factorization_reconstructs():
    rng = random.Random(3)
    for _ in range(30):
        n = rng.randint(1, 5)
        vecs = [[Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n)] for _ in range(rng.randint(1, 3))]
        M = [[sum(v[i] * v[j] for v in vecs) for j in range(n)] for i in range(n)]
        r = psd_check_exact(M)
        assert isinstance(r, Psd)
        assert r.rank <= len(vecs)
        assert r.gram(n) == M


def test_psd_witness_is_exact():
    rng = random.Random(5)
    found = 0
    for _ in range(60):
        n = rng.randint(2, 5)
        M = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                M[i][j] = M[j][i] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        r = psd_check_exact(M)
        if isinstance(r, NotPsd):
            found += 1
            assert r.value < 0
            assert quadratic_form(M, r.witness) == r.value
            assert all(Fraction(x).denominator == 1 for x in r.witness)
    assert found > 10


def test_inducibility_examples():
    v = inducibility(log(constant(2, 4) + norm2(2, 4)), 4)
    assert v == ConsistentUpTo(4, 2)
    v = inducibility(quartic(3), 3)
    assert isinstance(v, NotInduced) and v.order == 3
    assert v.witness == (0, 0, 0, 1) and v.value == Fraction(-1, 12)
    assert v.witness_support() == [((3,), 1)]
    hyp = log(constant(1, 6) - norm2(1, 6)) * Fraction(-1, 2)
    assert inducibility(hyp, 6) == ConsistentUpTo(6, 6)


def test_inducibility_degenerate():
    with pytest.raises(DegenerateMetricError):
        inducibility(HermitianSeries(1, 4, {((2,), (2,)): 1}), 4)


def test_find_inducing_multiple_examples():
    half = log(constant(1, 4) + norm2(1, 4)) * Fraction(1, 2)
    res = find_inducing_multiple(half, 4, 4)
    assert res.k == 2
    assert res.witnesses[1].value == Fraction(-1, 8)
    assert find_inducing_multiple(log(constant(1, 4) + norm2(1, 4)), 3, 4).k == 1


def test_find_inducing_multiple_quartic():
    # at order 3 the |z|^6 coefficient of e^{2 phi} is already positive
    assert find_inducing_multiple(quartic(3), 5, 3).k == 2
    assert find_inducing_multiple(quartic(4), 5, 4).k == 3
    assert find_inducing_multiple(quartic(5), 5, 5).k == 5
    res = find_inducing_multiple(quartic(6), 5, 6)
    assert res.k is None
    assert sorted(res.witnesses) == [1, 2, 3, 4, 5]


def test_monotone_in_order():
    rng = random.Random(11)
    seen = 0
    for _ in range(40):
        extra = random_hermitian(rng, 1, 6, terms=3)
        kept = {(m, k): c for m, k, c in extra.terms() if sum(m) + sum(k) > 2}
        phi = HermitianSeries.from_series(norm2(1, 6) + HermitianSeries(1, 6, kept) * Fraction(1, 3))
        for d in range(2, 6):
            if isinstance(inducibility(phi, d), NotInduced):
                seen += 1
                assert all(isinstance(inducibility(phi, e), NotInduced) for e in range(d + 1, 7))
                break
    assert seen > 5


def test_gram_from_factors_is_psd():
    rng = random.Random(2)
    for _ in range(20):
        fs = []
        for _ in range(rng.randint(1, 4)):
            coeffs = {(rng.randint(0, 3),): Fraction(rng.randint(-2, 2), rng.randint(1, 2)) for _ in range(2)}
            coeffs[(0,)] = coeffs.get((0,), 0)
            fs.append(HoloSeries(1, 3, coeffs))
        g = gram_from_factors(fs)
        r = psd_check_exact(coefficient_matrix(g, 3))
        assert isinstance(r, Psd) and r.rank <= len(fs)


def test_scaling_preserves_consistency():
    for name in CORPUS_NAMES:
        phi = builtin(name, 5).series
        if isinstance(inducibility(phi, 5), ConsistentUpTo):
            for k in (2, 3):
                assert isinstance(inducibility(phi * k, 5), ConsistentUpTo)


def test_principal_submatrix():
    M = calabi_matrix(log(constant(1, 5) + norm2(1, 5)) * Fraction(1, 2), 5)
    P = M.principal(3)
    assert P == calabi_matrix(log(constant(1, 3) + norm2(1, 3)) * Fraction(1, 2), 3)
