"""
Checking the kernel against slow oracles
========================================

Two independent references: a schoolbook expansion on plain Fractions and
central finite differences in floating point.  Neither is used for verdicts.
"""

from fractions import Fraction

import numpy as np

from kahlercone import oracle
from kahlercone.corpus import builtin
from kahlercone.curvature import metric_cross_check, metric_from_potential
from kahlercone.oracle import Const, Exp, Log, Scale, Term
from kahlercone.series import constant, norm2, power

u = Term((1,), (1,))
s = oracle.brute_expand(Exp(Scale(Log(Const(1) - u), Fraction(-1, 2))), 1, 6)
print("schoolbook (1-|z|^2)^(-1/2):", [str(s.coeff((k,), (k,))) for k in range(7)])
print("matches kernel:", s == power(constant(1, 6) - norm2(1, 6), Fraction(-1, 2)))

fs = builtin("fs:2", 8)
pts = oracle.sample_points(2, 3, 0.2, seed=0)
plan = oracle.SamplePlan(pts, 2e-5, 1e-6, 0.2)
print("metric vs finite differences:", metric_cross_check(fs.series, fs.closed_form, plan))

g = metric_from_potential(fs.series)
p = pts[0]
print("series metric at", p)
print(np.round(g.evaluate(p), 8))
print("finite differences")
print(np.round(oracle.fd_metric(fs.closed_form, p, 2e-5), 8))
