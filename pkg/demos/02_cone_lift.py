"""
Cones over a base potential
===========================

The cone over a base with potential psi has potential |z0|^(2c) e^(c psi).
Expanding exp of it in powers of |z0|^(2c) splits its Calabi matrix into
blocks of radial weight k, each equal to e^(k c psi)/k!, so the cone is
obstructed exactly when c*psi is.
"""

from fractions import Fraction

from kahlercone import cone_inducibility, epsilon_submatrix, homothety, inducibility, lift, radial_blocks
from kahlercone.cone import epsilon_limit_matrix, verify_radial_derivative_identity
from kahlercone.corpus import builtin

psi = builtin("fs:1", 4).series
cp = lift(psi, 1)
print("c =", cp.c, " e^(c psi) =", cp.exp_c_psi)

rb = radial_blocks(cp, 3, 3)
for k, B in enumerate(rb.blocks, start=1):
    print(f"B_{k} diagonal:", [str(B[j][j]) for j in range(len(B))])

# cone verdict against base verdict for a few exponents
half = builtin("fs:1:1/2", 4).series
for c in (Fraction(1, 2), 1, 2, 3):
    cone_v = cone_inducibility(lift(half, 1 / Fraction(c)), 4, 4).verdict_class
    base_v = inducibility(half * c, 4).verdict_class
    print(f"c={c}: cone {cone_v}, base {base_v}")

# a homothety rescales c; here it repairs the obstruction
cp_half = lift(half, 1)
print("before:", cone_inducibility(cp_half, 3, 4).verdict_class,
      " after factor 2:", cone_inducibility(homothety(cp_half, 2), 3, 4).verdict_class)

# the epsilon submatrix tends to the coefficient matrix of e^(c psi)
L = epsilon_limit_matrix(cp, 3)
for eps in (Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000)):
    E = epsilon_submatrix(cp, eps, 3)
    dev = max(abs(E.entries[j][k] - L[j][k]) for j in range(4) for k in range(4))
    print(f"eps={eps}: max deviation {float(dev):.3e}, constant offset {E.constant_offset}")

# and the closed form of the radial second derivative holds numerically
rep = verify_radial_derivative_identity(lift(builtin("fs:1", 12).series, 1), Fraction(1, 2), [(0.25,), (0.1j,)])
print("radial identity, max relative error:", rep.max_rel_error_fd)
