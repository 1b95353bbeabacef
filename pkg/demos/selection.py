"""
Measurable selection of approximants
====================================

Each outcome carries a sequence of polynomials converging to exp on the
unit disk, at a speed that depends on the atom. We choose, per atom, the
first index after which every later term stays within eps, and check that
the choice is atom-constant.

Then, per atom, we pick the lowest-degree Taylor polynomial that meets a
tolerance on the atom's compact set.
"""

from capprox import FiniteSampleSpace, RandomCompactSet, disk, is_measurable, select_uniform
from capprox.errors import SelectionError
from capprox.randomness import constant_table, oka_weil_select, taylor_offset_battery

K, f_seq, target, offsets = taylor_offset_battery(outcomes=100, atoms=10)
print("offsets per atom:", offsets)
for eps in (1e-3, 1e-6):
    res = select_uniform(K, f_seq, target, eps)
    print(f"eps={eps:g}: indices per atom {res.per_atom}, error {res.error:.2e}, "
          f"atom-constant {is_measurable(K.space, res.phi)}")

# An unreachable tolerance names the atoms that failed.
try:
    select_uniform(K, f_seq, target, 1e-20)
except SelectionError as exc:
    print("selection failed on atoms", sorted(exc.atoms))

space = FiniteSampleSpace(["a", "b", "c"], [["a", "b"], ["c"]])
Kc = RandomCompactSet(space, {"a": disk(0, 0.5, 0.05), "b": disk(0, 0.5, 0.05), "c": disk(0, 0.9, 0.05)})
ow = oka_weil_select(Kc, constant_table(space, "exp(z)"), 1e-6, 20, {"a": 0.5, "b": 0.5, "c": 0.9})
print("degrees per atom:", ow.degrees, "errors:", {a: f"{e:.1e}" for a, e in ow.errors.items()})
