"""
Random compact sets over a finite sample space
==============================================

A finite sigma-algebra is generated by a partition of the outcomes into
atoms; a map out of the sample space is measurable exactly when it is
constant on every atom. The transforms below act outcome by outcome and
each output is checked to be atom-constant again.
"""

import numpy as np

from capprox import FiniteSampleSpace, RandomCompactSet, RandomFunctionTable, circle, disk, is_measurable
from capprox.errors import MeasurabilityError
from capprox.extremal import monomial_family
from capprox.numeric import FamilySpec
from capprox.randomness import random_hull, random_image, random_siciak, random_space

space = FiniteSampleSpace(["heads", "tails", "edge"], [["heads", "tails"], ["edge"]])
C, D = circle(0, 1, 0.1), disk(0, 0.5, 0.1)

K = RandomCompactSet(space, {"heads": C, "tails": C, "edge": D})
print("K measurable:", is_measurable(K))

H = random_hull(K, FamilySpec(1, 2, 1), res=0.1)
print({w: len(H[w]) for w in space.outcomes}, "measurable:", is_measurable(H))

g = RandomFunctionTable(space, {"heads": "z^2", "tails": "z^2", "edge": "exp(z)"})
img = random_image(C, g)
print("image sizes:", {w: len(img[w]) for w in space.outcomes})

print("Siciak at 2:", random_siciak(K, 2, monomial_family(4), normalize=True))

# An assignment that splits an atom is refused before any work is done.
bad = RandomCompactSet(space, {"heads": C, "tails": D, "edge": D})
try:
    random_hull(bad, FamilySpec(1, 2, 1))
except MeasurabilityError as exc:
    print("refused:", exc)

# Random spaces for fuzzing: random size, random partition.
rng = np.random.default_rng(0)
sp = random_space(rng, 64)
print(f"random space: {len(sp.outcomes)} outcomes in {len(sp.atoms)} atoms")
