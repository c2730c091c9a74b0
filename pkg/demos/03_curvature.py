"""
Einstein constants and Ricci-flat cones
=======================================

With omega = (i/2) dd^c phi we take -2 log det(phi_{a bbar}) as Ricci
potential, so an Einstein metric has Ricci potential = lambda * phi up to
pluriharmonic terms.  The cone |z0|^2 e^(psi) is Ricci-flat exactly when
the base has lambda = 2n + 2.
"""

from kahlercone import flatness_witness, lift, ricci_flat_check, ricci_report, sasaki_einstein_bridge
from kahlercone.corpus import builtin

for name in ("fs:1", "fs:2", "fs:3", "hyp:1", "flat:2", "perturbed_quartic"):
    rep = ricci_report(builtin(name, 5).series)
    if rep.lam is not None:
        print(f"{name:18s} lambda = {rep.lam}")
    else:
        print(f"{name:18s} not Einstein, first mismatch at {rep.mismatch}")

# the cone over Fubini-Study is flat space in disguise
cp = lift(builtin("fs:2", 5).series, 1)
print("Ricci-flat through order 4:", ricci_flat_check(cp, 4).flat)
fw = flatness_witness(cp)
print("after z_j -> z_j/z0:", fw.substituted)

# over the hyperbolic disc it is not
print("hyperbolic cone Ricci-flat:", ricci_flat_check(lift(builtin("hyp:1", 5).series, 1), 4).flat)

for name, a in (("fs:1", 1), ("fs:1:2", 2), ("hyp:1", 1)):
    b = sasaki_einstein_bridge(builtin(name, 5).series, a, 4)
    print(f"{name} a={a}: lambda(c psi) = {b.lam_base}, cone Ricci-flat = {b.cone_ricci_flat}")
