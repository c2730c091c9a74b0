"""
Calabi's criterion on three potentials
======================================

A potential is locally induced by a holomorphic isometry into complex
projective space exactly when the coefficient matrix of exp(D) - 1 is
positive semidefinite, D being the diastasis.  At a finite order we can only
ever find obstructions; a clean pass means "nothing wrong so far".
"""

from fractions import Fraction

from kahlercone import calabi_matrix, diastasis_normalize, find_inducing_multiple, inducibility
from kahlercone.corpus import builtin

# Fubini-Study on C^2: exp(D) - 1 = |z1|^2 + |z2|^2, a rank-2 matrix
fs = builtin("fs:2", 4)
print(fs.name, "->", inducibility(fs.series, 4))

# the flat metric: diagonal entries 1/k!
flat = builtin("flat:1", 5)
M = calabi_matrix(diastasis_normalize(flat.series), 5)
print("flat diagonal:", [str(M.entries[k][k]) for k in range(M.size)])

# a quartic perturbation of the flat potential is obstructed at order 3
pq = builtin("perturbed_quartic", 3)
v = inducibility(pq.series, 3)
print(pq.name, "->", v.verdict_class, "witness on", v.witness_support(), "value", v.value)

# half of Fubini-Study is not induced, but twice of it is
half = builtin("fs:1:1/2", 4)
res = find_inducing_multiple(half.series, 4, 4)
print("smallest multiple of", half.name, "that passes:", res.k)
for k, w in res.witnesses.items():
    print(f"  k={k} fails with value {w.value}")

# for the quartic the smallest passing k grows with the order
for d in (3, 4, 5, 6):
    r = find_inducing_multiple(builtin("perturbed_quartic", d).series, 5, d)
    print(f"  quartic, order {d}: smallest passing k = {r.k}")

assert v.value == Fraction(-1, 12)
