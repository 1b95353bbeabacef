"""
Rational approximation on a disk
================================

A function holomorphic near a compact set can be approximated uniformly on
it by rational functions whose poles sit on a contour around the set. Here
the set is a net of the disk |z| <= 0.5 and the function is 1/(z - 2),
whose only pole lies well outside.
"""

import numpy as np

from capprox import approximate, build_contour, disk

# A 0.01-net of the disk. Every point of the disk is within 0.01 of a net point.
K = disk(0, 0.5, 0.01)
print(f"net: {len(K)} points, mesh {K.mesh}")

# The contour is the boundary of a union of grid squares that cover K.
# `margin` says how far from K the function is known to be holomorphic.
gamma = build_contour(K, margin=0.5)
print(f"contour: {len(gamma.cycles)} cycle, length {gamma.length:.3f}, cell {gamma.cell}")

# Halve the partition size until the sup error on the net drops below eps.
res = approximate("1/(z-2)", K, margin=0.5, eps=1e-4)
for delta, nodes, err in res.history:
    print(f"  delta={delta:.3e}  poles={nodes:6d}  error={err:.3e}")

# The Riemann sum is first order: halving delta roughly halves the error.
errs = np.array([e for _, _, e in res.history])
print("error ratios:", np.round(errs[1:] / errs[:-1], 3))

# The result is a plain partial-fraction sum and can be evaluated anywhere
# off its poles.
R = res.rational
w = 0.3 - 0.1j
print(f"R({w}) = {R(w):.8f}, exact {1 / (w - 2):.8f}")
