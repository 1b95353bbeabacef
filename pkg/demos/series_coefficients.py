"""
Taylor and Laurent coefficients by torus quadrature
===================================================

Coefficients come from the trapezoidal rule on a circle (or a torus in
several variables), which is an FFT in disguise. For functions analytic
on an annulus around the circle the error decays geometrically in the
number of nodes.
"""

import math

from capprox import laurent_table, taylor_table
from capprox.series import homogeneous_part, rotation, rotation_uniqueness_check

# exp(z) = sum z^k / k!
t = taylor_table("exp(z)", 10, rho=1.0, m=64)
for k in range(0, 11, 2):
    print(f"c_{k:<2d} = {t[(k,)].real: .16f}   1/k! = {1 / math.factorial(k):.16f}")

# 1/(z(1-z)) = 1/z + 1/(1-z) has c_k = 1 for k >= -1 on the annulus 0 < |z| < 1.
lt = laurent_table("1/(z*(1-z))", 5, rho=0.5, m=256)
print("Laurent:", [round(lt[(k,)].real, 12) for k in range(-3, 6)])

# Coefficients do not depend on the circle, as long as it stays in the annulus.
a = laurent_table("exp(z)/(z-3)", 4, rho=0.5, m=128)
b = laurent_table("exp(z)/(z-3)", 4, rho=2.0, m=128)
print("radius change:", max(abs(a[(k,)] - b[(k,)]) for k in range(5)))

# In two variables the Taylor series regroups into homogeneous parts.
# A unitary change of variables maps the parts of f onto the parts of f o R.
f = "exp(z1 + 2*z2)"
t2 = taylor_table(f, 3, rho=1.0, m=32, dim=2)
print("degree-2 part of", f, ":", homogeneous_part(t2, 2))
for m in range(4):
    print(f"  rotation check, degree {m}: {rotation_uniqueness_check(f, rotation(0.7), m, 1.0):.2e}")
