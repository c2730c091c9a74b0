"""The acceptance suite, shared by ``kahlercone selftest`` and the test-suite.

:func:`run_all` returns one :class:`CriterionResult` per criterion; a
crash inside a criterion is reported as a failure rather than raised.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from gmpy2 import mpq

from . import oracle
from .calabi import (
    ConsistentUpTo,
    NotInduced,
    calabi_matrix,
    diastasis_normalize,
    find_inducing_multiple,
    inducibility,
)
from .cone import (
    cone_inducibility,
    epsilon_limit_matrix,
    epsilon_submatrix,
    flat_potential,
    flatness_witness,
    cone_series,
    homothety,
    lift,
    verify_radial_derivative_identity,
)
from .corpus import CORPUS_NAMES, builtin, fubini_study, hyperbolic, flat, perturbed_quartic
from .curvature import metric_cross_check, ricci_flat_check, ricci_report
from .series import (
    GaussianRational,
    HermitianSeries,
    constant,
    exp,
    log,
    power,
)

__all__ = ["CriterionResult", "run_all", "CRITERIA", "random_hermitian", "kernel_property_cases"]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def __str__(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.number}: {self.name} ({self.detail})"


def _timed(number: int, name: str, body: Callable[[], tuple[bool, str]]) -> CriterionResult:
    start = time.perf_counter()
    try:
        ok, detail = body()
    except Exception as exc:  # a crash is a failed criterion, reported with its cause
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CriterionResult(number, name, ok, detail, time.perf_counter() - start)


# ---------------------------------------------------------------------------


def _c1() -> tuple[bool, str]:
    notes = []
    fs = inducibility(builtin("fs:2", 4).series, 4)
    ok_fs = isinstance(fs, ConsistentUpTo) and fs.order == 4 and fs.rank_lower_bound == 2
    notes.append(f"fs:2 {fs.verdict_class}({fs.order}, rank {getattr(fs, 'rank_lower_bound', '-')})")

    d = 6
    phi = builtin("flat:1", d).series
    v = inducibility(phi, d)
    M = calabi_matrix(diastasis_normalize(phi), d).entries
    diag_ok = all(
        M[j][k] == (mpq(1, math.factorial(j)) if j == k and j > 0 else 0)
        for j in range(d + 1) for k in range(d + 1)
    )
    ok_flat = isinstance(v, ConsistentUpTo) and diag_ok
    notes.append(f"flat:1 diagonal 1/k! {diag_ok}")

    q = inducibility(builtin("perturbed_quartic", 3).series, 3)
    ok_q = isinstance(q, NotInduced) and q.order == 3 and q.value == mpq(-1, 12)
    notes.append(f"perturbed_quartic {q.verdict_class}(3) value {getattr(q, 'value', '-')}")
    return ok_fs and ok_flat and ok_q, "; ".join(notes)


def _c2() -> tuple[bool, str]:
    cs = [mpq(1, 2), mpq(1), mpq(2), mpq(3)]
    corpus = [builtin(name, 6) for name in CORPUS_NAMES]
    total = disagreements = 0
    bad = []
    for p in corpus:
        for c in cs:
            cp = lift(p.series, 1 / c)
            for d in range(3, 7):
                a = cone_inducibility(cp, 4, d).verdict_class
                b = inducibility(p.series * c, d).verdict_class
                total += 1
                if a != b:
                    disagreements += 1
                    bad.append(f"{p.name} c={c} d={d}")
    detail = f"{total} cases, {disagreements} disagreements"
    if bad:
        detail += ": " + ", ".join(bad[:5])
    return disagreements == 0, detail


def _c3() -> tuple[bool, str]:
    epsilons = [mpq(1, 10), mpq(1, 100), mpq(1, 1000)]
    d = 4
    notes = []
    ok = True
    for name in ("fs:1", "hyp:1", "perturbed_quartic", "fs:2"):
        psi = builtin(name, d).series
        cp = lift(psi, 1)
        L = epsilon_limit_matrix(cp, d)
        C = calabi_matrix(diastasis_normalize(psi * cp.c), d).entries
        size = len(L)
        shifted = [[L[j][k] - (1 if j == k == 0 else 0) for k in range(size)] for j in range(size)]
        exact_limit = shifted == C
        devs = []
        for eps in epsilons:
            V = epsilon_submatrix(cp, eps, d).entries
            devs.append([[abs(V[j][k] - L[j][k]) for k in range(size)] for j in range(size)])
        monotone = all(
            devs[i + 1][j][k] <= devs[i][j][k]
            for i in range(len(epsilons) - 1) for j in range(size) for k in range(size)
        )
        worst = [max(max(r) for r in dv) for dv in devs]
        shrinking = all(worst[i + 1] < worst[i] for i in range(len(worst) - 1))
        ok = ok and exact_limit and monotone and shrinking
        notes.append(f"{name}: limit exact {exact_limit}, max dev " + " > ".join(f"{float(w):.2e}" for w in worst))
    return ok, "; ".join(notes)


def _c4() -> tuple[bool, str]:
    cases = [(1, "fs:1"), (2, "flat:1"), (1, "hyp:1")]
    eps = mpq(1, 2)
    notes = []
    ok = True
    for c, name in cases:
        p = builtin(name, 12)
        cp = lift(p.series, mpq(1, c))
        pts = oracle.sample_points(1, 3, 0.3, seed=c + len(name))
        rep = verify_radial_derivative_identity(cp, eps, pts, psi_fn=p.closed_form, tolerance=1e-6)
        ok = ok and rep.passed and len(pts) == 3
        notes.append(f"c={c} {name}: fd {rep.max_rel_error_fd:.1e}, series {rep.max_rel_error_series:.1e}")
    return ok, "; ".join(notes)


def _c5() -> tuple[bool, str]:
    got = {}
    for n in (1, 2, 3):
        got[f"fs:{n}"] = ricci_report(builtin(f"fs:{n}", 5).series).lam
    got["hyp:1"] = ricci_report(builtin("hyp:1", 5).series).lam
    got["flat:1"] = ricci_report(builtin("flat:1", 5).series).lam
    got["flat:2"] = ricci_report(builtin("flat:2", 5).series).lam
    want = {"fs:1": 4, "fs:2": 6, "fs:3": 8, "hyp:1": -4, "flat:1": 0, "flat:2": 0}
    ok = all(got[k] is not None and got[k] == v for k, v in want.items())
    return ok, ", ".join(f"{k}: {got[k]}" for k in want)


def _c6() -> tuple[bool, str]:
    ok = True
    notes = []
    for n in (1, 2, 3):
        cp = lift(builtin(f"fs:{n}", 5).series, 1)
        rf = ricci_flat_check(cp, 4)
        ci = cone_inducibility(cp, 4, 4)
        fw = flatness_witness(cp)
        target = flat_potential(n + 1, fw.substituted.hdeg) if fw.substituted is not None else None
        exact_flat = fw.flat and fw.substituted == target
        step = rf.flat and rf.residual.is_zero() and isinstance(ci, ConsistentUpTo) and exact_flat
        ok = ok and step
        notes.append(f"n={n}: ricci-flat {rf.flat}, {ci.verdict_class}, flat normal form {exact_flat}")
    neg = ricci_flat_check(lift(builtin("hyp:1", 5).series, 1), 4)
    ok = ok and not neg.flat
    notes.append(f"hyp:1 cone ricci-flat {neg.flat}")
    return ok, "; ".join(notes)


def _c7() -> tuple[bool, str]:
    phi = builtin("fs:1:1/2", 4).series
    res = find_inducing_multiple(phi, 4, 4)
    cp = lift(phi, 1)
    before = cone_inducibility(cp, 4, 4)
    after = cone_inducibility(homothety(cp, res.k or 1), 4, 4) if res.k else None
    ok = res.k == 2 and isinstance(before, NotInduced) and isinstance(after, ConsistentUpTo)
    return ok, (
        f"k = {res.k}; cone {before.verdict_class} -> "
        f"{after.verdict_class if after else '-'} after homothety by {res.k}"
    )


def _c8() -> tuple[bool, str]:
    failures, count, kinds = kernel_property_cases(1000, seed=20240601)
    ofail, ocount = oracle_cross_checks()
    ok = failures == [] and count == 1000 and ofail == []
    detail = f"{count} property cases ({kinds}), {len(failures)} failures; {ocount} oracle checks, {len(ofail)} failures"
    if failures:
        detail += "; first: " + failures[0]
    if ofail:
        detail += "; oracle: " + ofail[0]
    return ok, detail


CRITERIA = [
    (1, "Calabi criterion instances", _c1),
    (2, "cone/base metamorphic equivalence", _c2),
    (3, "epsilon-limit of the radial submatrix", _c3),
    (4, "radial second-derivative identity", _c4),
    (5, "Einstein constants", _c5),
    (6, "Ricci-flat, induced and flat cone over Fubini-Study", _c6),
    (7, "integer multiple and homothety", _c7),
    (8, "kernel properties and oracle cross-checks", _c8),
]


def run_all(only: set[int] | None = None) -> list[CriterionResult]:
    return [_timed(num, name, fn) for num, name, fn in CRITERIA if only is None or num in only]


# ---------------------------------------------------------------------------
# randomized kernel properties


def _rand_rational(rng: random.Random, size: int = 3) -> Fraction:
    return Fraction(rng.randint(-size, size), rng.randint(1, size))


def _rand_mono(rng: random.Random, n: int, d: int) -> tuple[int, ...]:
    deg = rng.randint(0, d)
    m = [0] * n
    for _ in range(deg):
        m[rng.randrange(n)] += 1
    return tuple(m)


def random_hermitian(rng: random.Random, n: int, d: int, terms: int = 4, constant_term: bool = False) -> HermitianSeries:
    """Sparse random Hermitian series with small Gaussian-rational coefficients."""
    out: dict = {}
    for _ in range(terms):
        m, k = _rand_mono(rng, n, d), _rand_mono(rng, n, d)
        if not constant_term and sum(m) == 0 and sum(k) == 0:
            continue
        if m == k:
            v = GaussianRational(_rand_rational(rng), 0)
        else:
            v = GaussianRational(_rand_rational(rng), _rand_rational(rng) if rng.random() < 0.5 else 0)
        out[(m, k)] = v
        out[(k, m)] = v.conjugate()
    return HermitianSeries(n, d, out)


def _shape(rng: random.Random) -> tuple[int, int]:
    n = rng.randint(1, 3)
    d = rng.randint(1, {1: 6, 2: 4, 3: 3}[n])
    return n, d


def _case_hermitian(rng):
    n, d = _shape(rng)
    a, b = random_hermitian(rng, n, d), random_hermitian(rng, n, d)
    outs = [a + b, a * b, a * Fraction(2, 3), exp(a), log(constant(n, d) + a)]
    return all(isinstance(s, HermitianSeries) and s.is_hermitian() for s in outs), f"n={n} d={d}"


def _case_roundtrip(rng):
    n, d = _shape(rng)
    a = random_hermitian(rng, n, d)
    one = constant(n, d)
    return log(exp(a)) == a and exp(log(one + a)) == one + a, f"n={n} d={d}"


def _case_algebra(rng):
    n, d = _shape(rng)
    a, b, c = (random_hermitian(rng, n, d, constant_term=True) for _ in range(3))
    return (a * b) * c == a * (b * c) and a * b == b * a, f"n={n} d={d}"


def _case_oracle(rng):
    # kernel against the schoolbook expansion
    n = rng.randint(1, 2)
    d = rng.randint(1, 4 if n == 1 else 3)
    a = random_hermitian(rng, n, d, terms=3)
    leaf = oracle.FromSeries(a)
    r = Fraction(rng.choice([-3, -1, 1, 3]), 2)
    checks = [
        (oracle.Exp(leaf), exp(a)),
        (oracle.Log(oracle.Const(1) + leaf), log(constant(n, d) + a)),
        (oracle.Pow(oracle.Const(1) + leaf, r), power(constant(n, d) + a, r)),
    ]
    return all(oracle.brute_expand(e, n, d) == s for e, s in checks), f"n={n} d={d} r={r}"


def _perturbed(rng, n: int, d: int) -> HermitianSeries:
    base = flat(n, d).series
    extra = random_hermitian(rng, n, d, terms=3)
    # keep the metric at the center untouched: drop constant and (1,1)-degree terms
    kept = {
        (m, k): c for m, k, c in extra.terms() if not (sum(m) <= 1 and sum(k) <= 1)
    }
    return HermitianSeries.from_series(base + HermitianSeries(n, d, kept) * Fraction(1, 4))


def _case_monotone(rng):
    n = rng.randint(1, 2)
    d = rng.randint(2, 4 if n == 1 else 3)
    phi = _perturbed(rng, n, d + 1)
    v = inducibility(phi, d)
    if isinstance(v, NotInduced):
        w = inducibility(phi, d + 1)
        return isinstance(w, NotInduced), f"n={n} d={d} obstructed"
    return True, f"n={n} d={d} unobstructed"


def _rand_center(rng, n):
    step = Fraction(1, 40)
    return [GaussianRational(step * rng.randint(-4, 4), step * rng.randint(-4, 4)) for _ in range(n)]


def _case_basepoint(rng):
    kind = rng.choice(["fs", "hyp", "flat", "pq"])
    n = 1 if kind == "pq" else rng.randint(1, 2)
    d = rng.randint(2, 4 if n == 1 else 3)
    w = _rand_center(rng, n)
    make = {
        "fs": lambda center: fubini_study(n, d, 1, center),
        "hyp": lambda center: hyperbolic(n, d, 1, center),
        "flat": lambda center: flat(n, d, 1, center),
        "pq": lambda center: perturbed_quartic(d, center),
    }[kind]
    at0 = inducibility(make(None).series, d)
    atw = inducibility(make(w).series, d)
    same = at0.verdict_class == atw.verdict_class
    if same and isinstance(at0, ConsistentUpTo):
        same = at0.rank_lower_bound == atw.rank_lower_bound
    return same, f"{kind} n={n} d={d} w={[str(x) for x in w]}"


CASES = [
    ("hermitian", _case_hermitian),
    ("roundtrip", _case_roundtrip),
    ("algebra", _case_algebra),
    ("brute", _case_oracle),
    ("monotone", _case_monotone),
    ("basepoint", _case_basepoint),
]


def kernel_property_cases(count: int, seed: int = 0) -> tuple[list[str], int, str]:
    """Run ``count`` seeded random cases cycling over the property kinds."""
    rng = random.Random(seed)
    failures = []
    tally = {name: 0 for name, _ in CASES}
    for i in range(count):
        name, fn = CASES[i % len(CASES)]
        tally[name] += 1
        try:
            ok, info = fn(rng)
        except Exception as exc:
            ok, info = False, f"{type(exc).__name__}: {exc}"
        if not ok:
            failures.append(f"case {i} {name}: {info}")
    kinds = ", ".join(f"{k} {v}" for k, v in tally.items())
    return failures, count, kinds


# ---------------------------------------------------------------------------
# oracle cross-checks


def oracle_cross_checks(tolerance: float = 1e-6) -> tuple[list[str], int]:
    failures = []
    count = 0

    def record(ok, label):
        nonlocal count
        count += 1
        if not ok:
            failures.append(label)

    # truncated FS potential against its closed form, with a corrupted negative control
    fs = fubini_study(1, 12)
    pts = oracle.sample_points(1, 3, 0.5, seed=7)
    plan = oracle.SamplePlan(pts, 1e-4 * 0.5, 1e-9, 0.5)
    record(oracle.cross_check(fs.series, fs.closed_form, plan).passed, "fs:1 truncation at 1e-9")
    bad = HermitianSeries.from_series(fs.series + HermitianSeries(1, 12, {((2,), (2,)): Fraction(1, 1000)}))
    record(not oracle.cross_check(bad, fs.closed_form, plan).passed, "corrupted coefficient not detected")

    # metrics and determinants against finite differences
    radius = 0.2
    for name in ("fs:1", "fs:2", "hyp:1", "hyp:2", "flat:2", "perturbed_quartic", "product(fs:1,flat:1)"):
        p = builtin(name, 8)
        pts = oracle.sample_points(p.n, 3, radius, seed=len(name))
        plan = oracle.SamplePlan(pts, 1e-4 * radius, tolerance, radius)
        rep = metric_cross_check(p.series, p.closed_form, plan)
        record(rep.passed, f"{name} metric {rep.max_rel_error:.2e}")

    # the Ricci-flat cone, expanded at z0 = 1
    for n in (1, 2):
        cp = lift(fubini_study(n, 8).series, 1)
        phi = cone_series(cp, z0_center=1)

        def f(z):
            return abs(1 + z[0]) ** 2 * (1 + sum(abs(x) ** 2 for x in z[1:]))

        pts = oracle.sample_points(n + 1, 3, radius, seed=11 + n)
        rep = metric_cross_check(phi, f, oracle.SamplePlan(pts, 1e-4 * radius, tolerance, radius))
        record(rep.passed and ricci_flat_check(cp, 4).flat, f"cone over fs:{n} {rep.max_rel_error:.2e}")

    # epsilon submatrix against the long-hand expansion of D_q
    for c, name in ((1, "flat:1"), (1, "fs:1"), (2, "flat:1"), (2, "fs:1")):
        psi = builtin(name, 4).series
        eps = Fraction(1, 10)
        E = epsilon_submatrix(lift(psi, Fraction(1, c)), eps, 3)
        brute = oracle.brute_epsilon_entries(psi, c, eps, 3)
        mine = [[Fraction(int(x.numerator), int(x.denominator)) for x in row] for row in E.entries]
        record(mine == brute, f"epsilon entries c={c} {name}")

    # closed-form oracles from the kernel's documentation
    e = oracle.brute_expand(oracle.Exp(oracle.Term((1,), (1,))), 1, 6)
    record(all(e.coeff((k,), (k,)) == Fraction(1, math.factorial(k)) for k in range(7)), "exp |z|^2")
    half = oracle.brute_expand(
        oracle.Exp(oracle.Scale(oracle.Log(oracle.Const(1) - oracle.Term((1,), (1,))), Fraction(-1, 2))), 1, 6
    )
    record(
        all(half.coeff((k,), (k,)) == Fraction(math.comb(2 * k, k), 4 ** k) for k in range(7)),
        "(1-|z|^2)^(-1/2)",
    )
    return failures, count
