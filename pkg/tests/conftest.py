from fractions import Fraction

import pytest

from kahlercone.series import constant, log, norm2


@pytest.fixture
def fs1():
    return log(constant(1, 6) + norm2(1, 6))


def frac(x):
    return Fraction(int(x.numerator), int(x.denominator))
