import json
from fractions import Fraction

import pytest

from kahlercone.corpus import (
    CORPUS_NAMES,
    PotentialParseError,
    builtin,
    corpus,
    fubini_study,
    hyperbolic,
    parse_potential,
    parse_text,
    serialize,
)
from kahlercone.series import GaussianRational, HermitianSeries, constant, log, norm2


def test_builtin_examples():
    assert builtin("fs:2", 4).series == log(constant(2, 4) + norm2(2, 4))
    u = norm2(1, 4)
    assert builtin("perturbed_quartic", 4).series == u - u * u * Fraction(1, 4)
    assert builtin("fs:1:1/2", 4).series == log(constant(1, 4) + u) * Fraction(1, 2)
    assert builtin("hyperbolic:1", 3).series == log(constant(1, 3) - norm2(1, 3)) * -1
    p = builtin("product(fs:1,flat:1)", 3)
    assert p.n == 2 and p.series.coeff((0, 1), (0, 1)) == 1 and p.series.coeff((1, 0), (1, 0)) == 1


def test_term_list():
    text = json.dumps({"format": "kahlercone-potential", "version": 1, "n": 1, "d": 3,
                       "terms": [{"m": [1], "k": [1], "re": "1", "im": "0"}]})
    assert parse_text(text).series == norm2(1, 3)


def test_builtin_file(tmp_path):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"version": 1, "builtin": "fs:2", "d": 3}))
    assert parse_potential(str(f)).series == builtin("fs:2", 3).series


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_round_trip(name):
    p = builtin(name, 4)
    assert parse_text(serialize(p)).series == p.series
    assert serialize(parse_text(serialize(p))) == serialize(p)


def test_round_trip_complex_coefficients():
    w = [GaussianRational(Fraction(1, 10), Fraction(-1, 20))]
    p = fubini_study(1, 4, center=w)
    assert any(c.im for _, _, c in p.series.terms())
    assert parse_text(serialize(p)).series == p.series


def test_recentered_value_is_normalized():
    p = hyperbolic(2, 3, center=[Fraction(1, 5), GaussianRational(0, Fraction(1, 5))])
    assert p.series.constant_term() == 0
    assert p.kahler


def test_parse_errors_locate_problem():
    with pytest.raises(PotentialParseError, match=r"<string>:2:"):
        parse_text('{"version": 1,\n "n": 1 "d": 2}')
    bad = '{"version": 1, "n": 1, "d": 2, "terms": [\n {"m": [1], "k": [1], "re": "1"},\n {"m": [1], "k": [0], "re": "x"}]}'
    with pytest.raises(PotentialParseError, match=r"term 1 \(line 3\)"):
        parse_text(bad)
    with pytest.raises(PotentialParseError, match="nonnegative"):
        parse_text('{"version": 1, "n": 1, "d": 2, "terms": [{"m": [-1], "k": [1]}]}')
    with pytest.raises(PotentialParseError, match="version"):
        parse_text('{"version": 7, "n": 1, "d": 2, "terms": []}')


def test_hermitian_violation_names_pair():
    text = json.dumps({"version": 1, "n": 1, "d": 2, "terms": [
        {"m": [1], "k": [0], "re": "1", "im": "1"},
        {"m": [0], "k": [1], "re": "1", "im": "1"},
    ]})
    with pytest.raises(PotentialParseError, match=r"z\^\[1\] zbar\^\[0\].*z\^\[0\] zbar\^\[1\]"):
        parse_text(text)


def test_unknown_builtin():
    with pytest.raises(PotentialParseError):
        builtin("sphere:2", 3)
    with pytest.raises(PotentialParseError):
        builtin("fs:1:-1", 3)


def test_order_requests():
    text = serialize(builtin("fs:1", 4))
    assert parse_text(text, 2).series.d == 2
    with pytest.raises(PotentialParseError):
        parse_text(text, 5)


def test_corpus_is_kahler():
    for p in corpus(3):
        assert p.kahler
