"""
Polynomial hulls and the Siciak extremal function
=================================================

The polynomial hull of the unit circle is the closed unit disk: a
polynomial bounded by 1 on the circle is bounded by 1 inside it. On a grid
we keep the candidates that pass every polynomial of a finite family, which
gives an outer approximation.

The Siciak extremal function measures how fast polynomials bounded on K
can grow away from K. A finite family only gives lower estimates.
"""

import math

from capprox import circle, disk, hausdorff, poly_hull, rational_hull, segment, siciak, to_rational
from capprox.extremal import chebyshev_family, monomial_family
from capprox.numeric import FamilySpec

circ = circle(0, 1, 0.05)

# Polynomials of degree <= 2 with Gaussian-rational coefficients of height <= 1.
fam = FamilySpec(1, 2, 1)
H = poly_hull(circ, fam)
print(f"hull: {len(H)} points, distance to the unit disk {hausdorff(H, disk(0, 1, 0.05)):.3f}")

# With 1/z in the family the inside of the circle is cut away again:
# the circle is rationally convex.
R = rational_hull(circ, fam, [to_rational("1/z")])
print(f"rational hull: {len(R)} points, distance to the circle {hausdorff(R, circ):.3f}")

# For the unit disk Phi(z) = |z| outside the disk, attained by z^k.
D = disk(0, 1, 0.05)
est = siciak(D, 2, monomial_family(8), normalize=True)
print(f"disk: Phi(2) >= {est.value:.12f} ({est.label}), witness {est.witness}")

# For [-1, 1] the Chebyshev polynomials are extremal:
# Phi(2) = 2 + sqrt(3).
S = segment(-1, 1, 0.01)
for deg in (4, 8, 16, 32):
    v = siciak(S, 2, chebyshev_family(deg), normalize=True).value
    print(f"segment, T_1..T_{deg:<2d}: Phi(2) >= {v:.6f}   (exact {2 + math.sqrt(3):.6f})")
