"""Random compact sets and random functions over finite sample spaces.

A finite sample space carries a partition of its outcomes into atoms; the
sigma-algebra is the one generated by the atoms, so an assignment is
measurable exactly when it is constant on every atom. Transforms are
applied outcome by outcome and their outputs are checked again.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _parallel
from .compactset import CompactNet, hausdorff, image, union
from .errors import ArgumentError, DimensionError, MeasurabilityError, NumericError, SelectionError
from .extremal import siciak
from .funcparser import FunctionExpr, evaluator, parse
from .hulls import poly_hull, rational_hull
from .numeric import Polynomial
from .series import coeff, homogeneous_sum, partial_sum_errors, taylor_table


class FiniteSampleSpace:
    """Outcomes with a partition into atoms and optional weights.

    Parameters
    ----------
    outcomes : sequence of hashable labels
    atoms : sequence of sequences of labels, optional
        Defaults to the discrete partition (every outcome is an atom).
    weights : sequence of float, optional
        Nonnegative, summing to 1; carried for reporting only.
    """

    def __init__(self, outcomes, atoms=None, weights=None):
        outcomes = list(outcomes)
        if not outcomes:
            raise ArgumentError("a sample space needs at least one outcome")
        if len(set(outcomes)) != len(outcomes):
            raise ArgumentError("outcome labels must be distinct")
        atoms = [[w] for w in outcomes] if atoms is None else [list(a) for a in atoms]
        seen = {}
        for i, a in enumerate(atoms):
            if not a:
                raise ArgumentError(f"atom {i} is empty")
            for w in a:
                if w in seen:
                    raise ArgumentError(f"outcome {w!r} lies in atoms {seen[w]} and {i}")
                seen[w] = i
        missing = [w for w in outcomes if w not in seen]
        extra = [w for w in seen if w not in set(outcomes)]
        if missing or extra:
            raise ArgumentError(f"atoms must partition the outcomes (missing {missing}, unknown {extra})")
        if weights is not None:
            weights = [float(x) for x in weights]
            if len(weights) != len(outcomes) or any(x < 0 or not math.isfinite(x) for x in weights):
                raise ArgumentError("weights must be nonnegative, one per outcome")
            if abs(sum(weights) - 1) > 1e-12:
                raise ArgumentError("weights must sum to 1")
        self.outcomes = tuple(outcomes)
        self.atoms = tuple(tuple(a) for a in atoms)
        self.weights = None if weights is None else tuple(weights)
        self._atom_of = seen

    def __repr__(self):
        return f"FiniteSampleSpace(outcomes={len(self.outcomes)}, atoms={len(self.atoms)})"

    def __eq__(self, other):
        return (
            isinstance(other, FiniteSampleSpace)
            and self.outcomes == other.outcomes
            and {frozenset(a) for a in self.atoms} == {frozenset(a) for a in other.atoms}
        )

    def __hash__(self):
        return hash(self.outcomes)

    def atom_of(self, outcome):
        return self._atom_of[outcome]

    def weight(self, outcome):
        if self.weights is None:
            return 1.0 / len(self.outcomes)
        return self.weights[self.outcomes.index(outcome)]

    def to_json(self):
        obj = {"outcomes": list(self.outcomes), "atoms": [list(a) for a in self.atoms]}
        if self.weights is not None:
            obj["weights"] = list(self.weights)
        return obj

    @classmethod
    def from_json(cls, obj):
        return cls(obj["outcomes"], obj.get("atoms"), obj.get("weights"))


def random_space(rng, max_outcomes=64, max_atoms=None):
    """Sample space with a random number of outcomes ``w0, w1, ...`` and a random partition."""
    m = int(rng.integers(1, max_outcomes + 1))
    k = int(rng.integers(1, (max_atoms or m) + 1))
    k = min(k, m)
    labels = [f"w{i}" for i in range(m)]
    # every atom gets one outcome, the rest are spread at random
    order = rng.permutation(m)
    owner = np.empty(m, dtype=int)
    owner[order[:k]] = np.arange(k)
    owner[order[k:]] = rng.integers(0, k, m - k)
    atoms = [[labels[i] for i in range(m) if owner[i] == a] for a in range(k)]
    return FiniteSampleSpace(labels, atoms)


class _RandomAssignment:
    def __init__(self, space, assignment):
        if not isinstance(space, FiniteSampleSpace):
            raise ArgumentError("space must be a FiniteSampleSpace")
        if callable(assignment) and not isinstance(assignment, dict):
            assignment = {w: assignment(w) for w in space.outcomes}
        missing = [w for w in space.outcomes if w not in assignment]
        if missing:
            raise ArgumentError(f"assignment is not total; missing outcomes {missing[:5]}")
        self.space = space
        self.assignment = {w: assignment[w] for w in space.outcomes}

    def __getitem__(self, outcome):
        return self.assignment[outcome]

    def items(self):
        return self.assignment.items()

    def atom_values(self):
        """One representative value per atom (that of the atom's first outcome)."""
        return [self.assignment[a[0]] for a in self.space.atoms]


class RandomCompactSet(_RandomAssignment):
    """Assignment outcome -> `CompactNet`, all of one dimension."""

    def __init__(self, space, assignment):
        super().__init__(space, assignment)
        dims = {K.dim for K in self.assignment.values() if isinstance(K, CompactNet)}
        if len(dims) != 1 or not all(isinstance(K, CompactNet) for K in self.assignment.values()):
            raise DimensionError("a random compact set needs CompactNet values of one dimension")
        self.dim = dims.pop()

    def __repr__(self):
        return f"RandomCompactSet(dim={self.dim}, {self.space!r})"

    def to_json(self):
        return {"space": self.space.to_json(), "values": {str(w): K.to_json() for w, K in self.assignment.items()}}

    @classmethod
    def from_json(cls, obj):
        space = FiniteSampleSpace.from_json(obj["space"])
        return cls(space, {w: CompactNet.from_json(obj["values"][str(w)]) for w in space.outcomes})


class RandomFunctionTable(_RandomAssignment):
    """Assignment outcome -> function of ``dim`` variables.

    Values may be expression strings (parsed once per distinct string),
    `FunctionExpr`, `Polynomial`, or other objects with ``evaluate``.
    """

    def __init__(self, space, assignment, dim=1):
        super().__init__(space, assignment)
        cache = {}
        for w, f in self.assignment.items():
            if isinstance(f, str):
                if f not in cache:
                    cache[f] = parse(f, dim)
                self.assignment[w] = cache[f]
            elif getattr(self.assignment[w], "dim", dim) != dim:
                raise DimensionError(f"function for outcome {w!r} has the wrong dimension")
        self.dim = dim

    def __repr__(self):
        return f"RandomFunctionTable(dim={self.dim}, {self.space!r})"

    def to_json(self):
        def enc(f):
            if isinstance(f, FunctionExpr):
                return {"expr": f.source}
            if isinstance(f, Polynomial):
                return {"polynomial": f.to_json()}
            raise ArgumentError(f"cannot serialize function of type {type(f).__name__}")

        return {"space": self.space.to_json(), "dim": self.dim, "values": {str(w): enc(f) for w, f in self.items()}}

    @classmethod
    def from_json(cls, obj):
        space = FiniteSampleSpace.from_json(obj["space"])
        dim = int(obj.get("dim", 1))

        def dec(v):
            if isinstance(v, str):
                return v
            if "expr" in v:
                return v["expr"]
            return Polynomial.from_json(v["polynomial"])

        return cls(space, {w: dec(obj["values"][str(w)]) for w in space.outcomes}, dim)


def constant_table(space, f, dim=1):
    return RandomFunctionTable(space, {w: f for w in space.outcomes}, dim)


def constant_compact(space, K):
    return RandomCompactSet(space, {w: K for w in space.outcomes})


# measurability ---------------------------------------------------------------

def _same(a, b, tol):
    if a is b:
        return True
    if isinstance(a, CompactNet) and isinstance(b, CompactNet):
        return a.dim == b.dim and hausdorff(a, b) <= tol
    if isinstance(a, (int, float, complex, np.number)) and isinstance(b, (int, float, complex, np.number)):
        if a == b:
            return True
        return abs(complex(a) - complex(b)) <= tol
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        a, b = np.asarray(a), np.asarray(b)
        return a.shape == b.shape and bool(np.all(np.abs(a - b) <= tol))
    if isinstance(a, (tuple, list)) and isinstance(b, (tuple, list)):
        return len(a) == len(b) and all(_same(x, y, tol) for x, y in zip(a, b))
    return a == b


def is_measurable(space, assignment=None, tol=0.0):
    """True iff the assignment is constant on every atom of ``space``.

    Compact nets are compared by Hausdorff distance ``<= tol``, numbers by
    ``|a - b| <= tol``, functions structurally (equal expression trees or
    equal coefficient lists). Also accepts a single random object.
    """
    if assignment is None and isinstance(space, _RandomAssignment):
        space, assignment = space.space, space.assignment
    if isinstance(assignment, _RandomAssignment):
        assignment = assignment.assignment
    for atom in space.atoms:
        first = assignment[atom[0]]
        for w in atom[1:]:
            if not _same(first, assignment[w], tol):
                return False
    return True


def non_measurable_atoms(space, assignment, tol=0.0):
    return [i for i, atom in enumerate(space.atoms) if not all(_same(assignment[atom[0]], assignment[w], tol) for w in atom[1:])]


def require_measurable(X, name="input", tol=0.0):
    if not is_measurable(X.space, X.assignment, tol):
        bad = non_measurable_atoms(X.space, X.assignment, tol)
        raise MeasurabilityError(f"{name} is not constant on atoms {bad[:10]}")


def _pointwise(space, values, fn, what):
    """Apply ``fn`` to each outcome's value(s); distinct value objects are computed once."""
    cache = {}
    out = {}
    for w in space.outcomes:
        key = tuple(id(v) for v in values(w))
        if key not in cache:
            try:
                cache[key] = fn(*values(w))
            except NumericError as exc:
                raise type(exc)(f"{what} failed for outcome {w!r}: {exc}") from exc
        out[w] = cache[key]
    return out


def _checked(result, name, tol=0.0):
    if not is_measurable(result.space, result.assignment, tol):
        raise NumericError(f"{name} produced an assignment that is not constant on atoms")
    return result


# transforms ------------------------------------------------------------------

def random_hull(K, family, grid=None, slack=1e-9, res=0.05):
    """Outcome-wise polynomial hull of a measurable random compact set."""
    require_measurable(K, "random compact set")
    vals = _pointwise(K.space, lambda w: (K[w],), lambda k: poly_hull(k, family, grid, slack, res=res), "hull")
    return _checked(RandomCompactSet(K.space, vals), "random_hull")


def random_rational_hull(K, poly_family, rationals, grid=None, slack=1e-9, tau_sing=None, res=0.05):
    """Outcome-wise rational hull of a measurable random compact set."""
    from .numeric import TAU_SING

    require_measurable(K, "random compact set")
    ts = TAU_SING if tau_sing is None else tau_sing
    rationals = list(rationals)
    vals = _pointwise(
        K.space, lambda w: (K[w],),
        lambda k: rational_hull(k, poly_family, rationals, grid, slack, tau_sing=ts, res=res), "rational hull",
    )
    return _checked(RandomCompactSet(K.space, vals), "random_rational_hull")


def random_image(X, g):
    """``w -> image(X, g(w))`` for a measurable random function table ``g``."""
    require_measurable(g, "random function")
    vals = _pointwise(g.space, lambda w: (g[w],), lambda f: image(X, f), "image")
    return _checked(RandomCompactSet(g.space, vals), "random_image")


def spectrum_C(f, K):
    """Spectrum in the algebra C(K): the range ``f(w, K)`` for each outcome."""
    return random_image(K, f)


def _is_polynomial(f):
    return isinstance(f, Polynomial) or (isinstance(f, FunctionExpr) and f.is_polynomial)


def joint_spectrum(fs, K, algebra="C", family=None, grid=None, slack=1e-9, res=0.05):
    """Joint spectrum of ``(f_1, ..., f_q)`` in C(K) or P(K).

    For C(K) this is the image of ``K``; for P(K) the image of the
    polynomial hull of ``K`` (computed with ``family``), which requires the
    ``f_i`` to be polynomials.
    """
    fs = list(fs)
    if not fs:
        raise ArgumentError("need at least one function")
    space = fs[0].space
    for f in fs:
        if f.space != space:
            raise ArgumentError("all tables must share one sample space")
        require_measurable(f, "random function")
    if algebra == "C":
        base = K
    elif algebra == "P":
        for f in fs:
            bad = [w for w, v in f.items() if not _is_polynomial(v)]
            if bad:
                raise ArgumentError(f"P(K) needs polynomial functions; outcome {bad[0]!r} is not")
        if family is None:
            raise ArgumentError("P(K) needs a polynomial family for the hull")
        base = poly_hull(K, family, grid, slack, res=res)
    else:
        raise ArgumentError(f"algebra must be 'C' or 'P', got {algebra!r}")
    vals = _pointwise(space, lambda w: tuple(f[w] for f in fs), lambda *maps: image(base, list(maps)), "joint spectrum")
    return _checked(RandomCompactSet(space, vals), "joint_spectrum")


def random_siciak(K, z, family, normalize=False):
    """Outcome -> Siciak lower estimate at ``z``."""
    require_measurable(K, "random compact set")
    vals = _pointwise(K.space, lambda w: (K[w],), lambda k: siciak(k, z, family, normalize).value, "siciak")
    if not is_measurable(K.space, vals):
        raise NumericError("random_siciak produced values that are not constant on atoms")
    return vals


def random_union(A, B):
    """Outcome-wise union of two random compact sets on one space."""
    if A.space != B.space:
        raise ArgumentError("random sets live on different sample spaces")
    require_measurable(A, "first random compact set")
    require_measurable(B, "second random compact set")
    vals = _pointwise(A.space, lambda w: (A[w], B[w]), union, "union")
    return _checked(RandomCompactSet(A.space, vals), "random_union")


def random_coeff(f, nu, rho, m=128):
    """Outcome -> quadrature coefficient ``c_nu`` of ``f(w, .)``."""
    require_measurable(f, "random function")
    return _pointwise(f.space, lambda w: (f[w],), lambda g: coeff(g, nu, rho, m, dim=f.dim), "coefficient")


def graph(K):
    """All pairs ``(w, x)`` with ``x`` a net point of ``K(w)``."""
    return [(w, x) for w in K.space.outcomes for x in K[w].points]


def preimage(K, z):
    """Outcomes whose net comes within ``h / 2`` of ``z``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape != (K.dim,):
        raise DimensionError("point has the wrong dimension")
    return [w for w in K.space.outcomes if K[w].distances_from(z[None, :])[0] <= K[w].mesh / 2]


def uniform_net(K):
    """Union of the distinct values' point lists (mesh = largest mesh)."""
    seen = {}
    for w in K.space.outcomes:
        seen.setdefault(id(K[w]), K[w])
    vals = list(seen.values())
    return CompactNet(np.concatenate([v.points for v in vals]), max(v.mesh for v in vals), dim=K.dim)


# selection -------------------------------------------------------------------

@dataclass
class SelectionResult:
    """Selected index per outcome, constant on atoms, with the graph-uniform error."""

    phi: dict
    error: float
    per_atom: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "phi": {str(w): int(j) for w, j in self.phi.items()},
            "error": self.error,
            "per_atom": {str(a): int(j) for a, j in self.per_atom.items()},
        }


def _sup_diff(K, f, g):
    ef, _ = evaluator(f, K.dim)
    eg, _ = evaluator(g, K.dim)
    return float(np.max(np.abs(ef(K.points) - eg(K.points))))


def select_uniform(K, f_seq, f_target, eps):
    """Minimal-index measurable selection.

    For each outcome ``w`` let ``e_k(w) = sup_{K(w)} |f_target(w) - f_k(w)|``
    and ``N(w) = {j : e_k(w) <= eps for all k >= j}`` (over the supplied
    index range). The selection is ``phi(w) = max`` over the atom of
    ``min N(w')``; with measurable inputs the per-outcome minima agree on
    each atom and this is their common value. Raises `SelectionError`
    naming the atoms where some ``N(w)`` is empty.
    """
    f_seq = list(f_seq)
    if not f_seq:
        raise ArgumentError("empty function sequence")
    eps = float(eps)
    if not eps > 0:
        raise ArgumentError("eps must be positive")
    space = K.space
    require_measurable(K, "random compact set")
    require_measurable(f_target, "target function")
    for j, f in enumerate(f_seq):
        if f.space != space:
            raise ArgumentError(f"sequence element {j} lives on another sample space")
        require_measurable(f, f"sequence element {j}")

    def errors_for(w):
        return [_sup_diff(K[w], f_target[w], f[w]) for f in f_seq]

    cache = {}
    errs = {}
    for w in space.outcomes:
        key = (id(K[w]), id(f_target[w])) + tuple(id(f[w]) for f in f_seq)
        if key not in cache:
            cache[key] = errors_for(w)
        errs[w] = cache[key]

    first = {}
    for w, e in errs.items():
        ok = np.array(e) <= eps
        tail = np.flip(np.logical_and.accumulate(np.flip(ok)))
        first[w] = int(np.argmax(tail)) if tail.any() else None

    failed = {}
    per_atom = {}
    for a, atom in enumerate(space.atoms):
        mins = [first[w] for w in atom]
        if any(m is None for m in mins):
            failed[a] = min(min(errs[w]) for w in atom)
        else:
            per_atom[a] = max(mins)
    if failed:
        raise SelectionError(
            f"no index reaches eps={eps:g} on atoms {sorted(failed)} (best errors "
            + ", ".join(f"{a}: {e:.3e}" for a, e in sorted(failed.items())[:10]) + ")",
            failed,
        )
    phi = {w: per_atom[space.atom_of(w)] for w in space.outcomes}
    error = max(errs[w][phi[w]] for w in space.outcomes)
    return SelectionResult(phi, error, per_atom, {w: errs[w][phi[w]] for w in space.outcomes})


@dataclass
class OkaWeilResult:
    table: RandomFunctionTable
    degrees: dict
    errors: dict
    exceptional: set = field(default_factory=set)

    def to_json(self):
        return {
            "degrees": {str(a): d for a, d in self.degrees.items()},
            "errors": {str(a): e for a, e in self.errors.items()},
            "exceptional": sorted(str(w) for w in self.exceptional),
            "polynomials": {str(a): self.table[self.table.space.atoms[a][0]].to_json() for a in self.degrees},
        }


def _per_outcome(x, space, name):
    if isinstance(x, dict):
        missing = [w for w in space.outcomes if w not in x]
        if missing:
            raise ArgumentError(f"{name} is missing outcomes {missing[:5]}")
        return dict(x)
    return {w: x for w in space.outcomes}


def oka_weil_select(K, f, eps, max_degree, radii, m=128):
    """Per-atom polynomial approximants from homogeneous partial sums.

    Each ``K(w)`` must lie in the closed polydisc of radii ``radii(w)`` on
    which ``f(w)`` is holomorphic (the caller's assertion). For every atom
    the smallest degree ``m <= max_degree`` with ``sup_{K(w)} |f - p_m| <
    eps(w)`` on every outcome of the atom is chosen. The exceptional set is
    always empty: any atom without such a degree makes the whole call fail
    with a `SelectionError` listing the atoms and their best errors.
    """
    space = K.space
    if f.space != space:
        raise ArgumentError("K and f live on different sample spaces")
    eps = _per_outcome(eps, space, "eps")
    radii = _per_outcome(radii, space, "radii")
    require_measurable(K, "random compact set")
    require_measurable(f, "random function")
    if not is_measurable(space, eps):
        raise MeasurabilityError("eps is not constant on atoms")
    if not is_measurable(space, {w: tuple(np.atleast_1d(r).tolist()) for w, r in radii.items()}):
        raise MeasurabilityError("polydisc radii are not constant on atoms")
    for w, e in eps.items():
        if not float(e) > 0:
            raise ArgumentError(f"eps for outcome {w!r} must be positive")

    def one(atom):
        w0 = atom[0]
        Kw = K[w0]
        r = np.broadcast_to(np.atleast_1d(np.asarray(radii[w0], dtype=float)), (Kw.dim,))
        if np.any(np.abs(Kw.points) > r[None, :] * (1 + 1e-12)):
            raise ArgumentError(f"K({w0!r}) is not inside the declared polydisc of radii {r.tolist()}")
        try:
            t = taylor_table(f[w0], max_degree, r, max(m, max_degree + 1), dim=Kw.dim)
        except NumericError:
            # f is singular on the torus itself: no partial sum can be formed
            return None, math.inf, None
        # errors of every partial sum on every outcome of the atom
        errs = np.max([partial_sum_errors(f[w], t, K[w]) for w in atom], axis=0)
        good = np.flatnonzero(errs < min(float(eps[w]) for w in atom))
        if len(good) == 0:
            return None, float(errs.min()), t
        d = int(good[0])
        return d, float(errs[d]), homogeneous_sum(t, d)

    results = _parallel.ordered_map(one, space.atoms)
    failed = {a: best for a, (d, best, _) in enumerate(results) if d is None}
    if failed:
        raise SelectionError(
            f"degree budget {max_degree} exhausted on atoms {sorted(failed)} (best errors "
            + ", ".join(f"{a}: {e:.3e}" for a, e in sorted(failed.items())[:10]) + ")",
            failed,
        )
    polys = {}
    for a, atom in enumerate(space.atoms):
        for w in atom:
            polys[w] = results[a][2]
    table = RandomFunctionTable(space, polys, K.dim)
    return OkaWeilResult(
        table, {a: r[0] for a, r in enumerate(results)}, {a: r[1] for a, r in enumerate(results)}, set()
    )


# battery used by the selection tests and the demo ----------------------------

def taylor_offset_battery(outcomes=100, max_index=25, max_offset=5, seed=0, h=0.05, atoms=10):
    """Offset Taylor sums of ``exp`` on the unit disk.

    Outcomes ``w0 .. w{outcomes-1}`` are split at random into ``atoms``
    atoms; atom ``a`` gets an offset ``o_a`` and the ``k``-th function is
    the Taylor polynomial of ``exp`` of degree ``k + o_a``.

    Returns ``(K, f_seq, f_target, offsets)``.
    """
    rng = np.random.default_rng(seed)
    labels = [f"w{i}" for i in range(outcomes)]
    owner = np.concatenate([np.arange(atoms), rng.integers(0, atoms, outcomes - atoms)])
    owner = owner[rng.permutation(outcomes)]
    space = FiniteSampleSpace(labels, [[labels[i] for i in range(outcomes) if owner[i] == a] for a in range(atoms)])
    offsets = {a: int(rng.integers(0, max_offset + 1)) for a in range(atoms)}
    disk = CompactNet(_disk_points(h), h)
    K = constant_compact(space, disk)
    coeffs = [1.0 / math.factorial(k) for k in range(max_index + max_offset + 1)]
    partial = [Polynomial.from_univariate(coeffs[: d + 1]) for d in range(len(coeffs))]
    f_seq = [
        RandomFunctionTable(space, {w: partial[k + offsets[space.atom_of(w)]] for w in labels})
        for k in range(max_index + 1)
    ]
    target = constant_table(space, "exp(z)")
    return K, f_seq, target, offsets


def _disk_points(h):
    from .compactset import disk

    return disk(0, 1, h).points
