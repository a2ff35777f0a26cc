"""
Point perturbation of the round three-sphere
============================================

On S^3 the Laplacian has levels n^2 - 1 with multiplicity n^2.  Adding a
point interaction with angle alpha moves one eigenvalue out of every level
into the gap below it.  For alpha = pi/2 the new eigenvalues are known in
closed form, which makes the sphere a good first test.
"""

import math

import numpy as np

from pseudolap import ManifoldModel
from pseudolap.scattering import ExtensionParam, f_closed
from pseudolap.pseudospectrum import secular_roots

sphere = ManifoldModel.sphere3()

# The scattering coefficient F(lam) is the regular part of the resolvent
# kernel at the point.  Below the spectrum it grows like sqrt(-lam)/(4 pi).
for lam in (-2.0, -10.0, -100.0):
    F = f_closed(sphere, lam).value
    print(f"F({lam:7.1f}) = {F: .12f}   sqrt(-lam-1)/(4 pi) = {math.sqrt(-lam - 1) / (4 * math.pi): .12f}")

# New eigenvalues solve cot(alpha) = F(lam).  At alpha = pi/2 that is F = 0,
# whose roots are (n + 1/2)^2 - 1.
spec = secular_roots(sphere, ExtensionParam(math.pi / 2), 40.0)
expected = np.array([(n + 0.5) ** 2 - 1 for n in range(len(spec.roots))])
print("\nroots      closed form   residual")
for r, e in zip(spec.roots, expected):
    print(f"{r.value:9.6f}  {e:9.6f}     {r.residual:.1e}")

# Each old level keeps all but one copy of its eigenspace.
print("\nretained levels (value, multiplicity):", spec.retained)

# Moving alpha pushes every root upward while interlacing is preserved.
print("\nalpha      nu_0          nu_1")
for alpha in (0.3, 1.0, math.pi / 2, 2.5):
    s = secular_roots(sphere, ExtensionParam(alpha), 5.0)
    print(f"{alpha:5.3f}  {s.values()[0]:12.6f}  {s.values()[1]:10.6f}")
