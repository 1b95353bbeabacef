"""Polynomials and rational functions on C^n, and rational-coefficient families.

Coefficients are stored in double precision. The Gaussian-rational lattice
``(a + b i) / c`` is only used to *enumerate* a countable family; no exact
arithmetic is performed.

Terms are always summed in graded-lexicographic multi-index order (total
degree first, then the exponent tuple), which makes every evaluation
deterministic.
"""

from fractions import Fraction
from math import comb, isfinite

import numpy as np

from .errors import ArgumentError, DimensionError, PoleProximityError, ResourceBudgetError

TAU_POLE = 1e-12
TAU_SING = 1e-9


def _mono_key(alpha):
    return (sum(alpha), alpha)


def as_points(z, dim):
    """Coerce ``z`` to a complex array of shape ``(N, dim)``.

    Returns the array and a flag telling whether a single point was given.
    """
    arr = np.asarray(z, dtype=complex)
    if arr.ndim == 0:
        if dim != 1:
            raise DimensionError(f"scalar point given for dimension {dim}")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if dim == 1 and arr.shape[0] != 1:
            return arr.reshape(-1, 1), False
        if arr.shape[0] != dim:
            raise DimensionError(f"point has dimension {arr.shape[0]}, expected {dim}")
        return arr.reshape(1, dim), True
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise DimensionError(f"points of shape {arr.shape} do not have dimension {dim}")
    return arr, False


def int_power(z, k):
    """``z**k`` for a non-negative integer ``k`` by repeated squaring."""
    result = np.ones_like(z)
    base = z
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def monomials(n, k):
    """All multi-indices of length ``n`` with total degree at most ``k``, graded-lex."""
    if n < 1 or k < 0:
        raise ArgumentError("need n >= 1 and k >= 0")
    out = []

    def rec(prefix, remaining, slots):
        if slots == 0:
            out.append(tuple(prefix))
            return
        for e in range(remaining + 1):
            rec(prefix + [e], remaining - e, slots - 1)

    rec([], k, n)
    out.sort(key=_mono_key)
    return out


def term_count(n, k):
    """Number of monomials in ``n`` variables of degree at most ``k``.

    This is ``sum_{l=0}^{k} C(n+l-1, n-1)``, which telescopes to ``C(n+k, n)``.
    """
    if n < 1 or k < 0:
        raise ArgumentError("need n >= 1 and k >= 0")
    return sum(comb(n + l - 1, n - 1) for l in range(k + 1))


def power_table(points, max_exps):
    """``table[j][e] = points[:, j] ** e`` for ``e <= max_exps[j]``."""
    tables = []
    for j, emax in enumerate(max_exps):
        col = points[:, j]
        row = [np.ones(points.shape[0], dtype=complex)]
        for _ in range(emax):
            row.append(row[-1] * col)
        tables.append(row)
    return tables


def monomial_matrix(points, monos):
    """Matrix ``V[i, t] = points[i] ** monos[t]``."""
    points = np.asarray(points, dtype=complex)
    n = points.shape[1]
    max_exps = [max((a[j] for a in monos), default=0) for j in range(n)]
    tables = power_table(points, max_exps)
    V = np.empty((points.shape[0], len(monos)), dtype=complex)
    for t, alpha in enumerate(monos):
        col = tables[0][alpha[0]]
        for j in range(1, n):
            col = col * tables[j][alpha[j]]
        V[:, t] = col
    return V


def evaluate_family(V, C):
    """Values of every family member at every point: ``V @ C.T``.

    Accumulates term by term in monomial order instead of calling BLAS, so
    a polynomial's value never depends on which other polynomials share
    the chunk.
    """
    out = np.zeros((V.shape[0], C.shape[0]), dtype=complex)
    for t in range(V.shape[1]):
        ct = C[:, t]
        if np.any(ct):
            out += V[:, t, None] * ct[None, :]
    return out


class Polynomial:
    """Polynomial on C^n stored as a sorted tuple of ``(alpha, coefficient)``.

    Immutable. Zero coefficients are dropped; the zero polynomial has degree 0.
    """

    __slots__ = ("dim", "terms", "_hash")

    def __init__(self, dim, terms=()):
        dim = int(dim)
        if dim < 1:
            raise ArgumentError("polynomial dimension must be >= 1")
        items = terms.items() if isinstance(terms, dict) else terms
        acc = {}
        for alpha, c in items:
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim or any(a < 0 for a in alpha):
                raise DimensionError(f"multi-index {alpha} invalid for dimension {dim}")
            c = complex(c)
            if not (isfinite(c.real) and isfinite(c.imag)):
                raise ArgumentError("polynomial coefficients must be finite")
            acc[alpha] = acc.get(alpha, 0j) + c
        object.__setattr__(self, "dim", dim)
        object.__setattr__(
            self, "terms", tuple(sorted(((a, c) for a, c in acc.items() if c != 0), key=lambda t: _mono_key(t[0])))
        )
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # constructors
    @classmethod
    def constant(cls, c, dim=1):
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def variable(cls, j, dim=1):
        alpha = [0] * dim
        alpha[j] = 1
        return cls(dim, {tuple(alpha): 1})

    @classmethod
    def monomial(cls, alpha, c=1.0):
        return cls(len(alpha), {tuple(alpha): c})

    @classmethod
    def from_coefficients(cls, dim, monos, coeffs):
        return cls(dim, zip(monos, coeffs))

    @classmethod
    def from_univariate(cls, coeffs):
        """From ascending coefficients ``c0 + c1 z + ...`` in one variable."""
        return cls(1, {(k,): c for k, c in enumerate(coeffs)})

    @property
    def degree(self):
        return max((sum(a) for a, _ in self.terms), default=0)

    @property
    def is_zero(self):
        return not self.terms

    def coeff(self, alpha):
        alpha = tuple(alpha)
        for a, c in self.terms:
            if a == alpha:
                return c
        return 0j

    def as_dict(self):
        return dict(self.terms)

    def evaluate(self, points):
        """Values at ``points`` of shape ``(N, dim)``; returns shape ``(N,)``."""
        points = np.asarray(points, dtype=complex)
        out = np.zeros(points.shape[0], dtype=complex)
        if not self.terms:
            return out
        max_exps = [max(a[j] for a, _ in self.terms) for j in range(self.dim)]
        tables = power_table(points, max_exps)
        for alpha, c in self.terms:
            mono = tables[0][alpha[0]]
            for j in range(1, self.dim):
                mono = mono * tables[j][alpha[j]]
            out = out + c * mono
        return out

    def __call__(self, z):
        pts, single = as_points(z, self.dim)
        vals = self.evaluate(pts)
        return complex(vals[0]) if single else vals

    def derivative(self, j):
        terms = {}
        for alpha, c in self.terms:
            if alpha[j] > 0:
                beta = list(alpha)
                beta[j] -= 1
                terms[tuple(beta)] = c * alpha[j]
        return Polynomial(self.dim, terms)

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.dim != self.dim:
                raise DimensionError("polynomial dimensions differ")
            return other
        return Polynomial.constant(other, self.dim)

    def __add__(self, other):
        other = self._coerce(other)
        return Polynomial(self.dim, list(self.terms) + list(other.terms))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.dim, [(a, -c) for a, c in self.terms])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial(self.dim, [(a, c * complex(other)) for a, c in self.terms])
        other = self._coerce(other)
        terms = {}
        for a, c in self.terms:
            for b, d in other.terms:
                key = tuple(x + y for x, y in zip(a, b))
                terms[key] = terms.get(key, 0j) + c * d
        return Polynomial(self.dim, terms)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / complex(scalar))

    def __pow__(self, k):
        if int(k) != k or k < 0:
            raise ArgumentError("polynomial powers must be non-negative integers")
        result = Polynomial.constant(1, self.dim)
        for _ in range(int(k)):
            result = result * self
        return result

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.dim == other.dim and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.dim, self.terms)))
        return self._hash

    def __repr__(self):
        if not self.terms:
            return f"Polynomial(dim={self.dim}, 0)"
        body = " + ".join(f"({c:g})*z^{a}" for a, c in self.terms)
        return f"Polynomial(dim={self.dim}, {body})"

    def to_json(self):
        return {
            "dim": self.dim,
            "terms": [{"alpha": list(a), "re": c.real, "im": c.imag} for a, c in self.terms],
        }

    @classmethod
    def from_json(cls, obj):
        return cls(obj["dim"], [(t["alpha"], complex(t["re"], t["im"])) for t in obj["terms"]])


def poly_eval(p, z):
    """Value of ``p`` at the single point ``z`` (a scalar when ``dim == 1``)."""
    pts, single = as_points(z, p.dim)
    if not single:
        raise DimensionError("poly_eval takes a single point")
    return complex(p.evaluate(pts)[0])


class RationalFunction:
    """Quotient ``numerator / denominator`` of two polynomials of equal dimension."""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator, denominator):
        if not isinstance(numerator, Polynomial):
            numerator = Polynomial.constant(numerator, denominator.dim)
        if numerator.dim != denominator.dim:
            raise DimensionError("numerator and denominator dimensions differ")
        if denominator.is_zero:
            raise ArgumentError("denominator is identically zero")
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "denominator", denominator)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction is immutable")

    @property
    def dim(self):
        return self.numerator.dim

    def evaluate(self, points, tau_pole=TAU_POLE):
        points = np.asarray(points, dtype=complex)
        num = self.numerator.evaluate(points)
        den = self.denominator.evaluate(points)
        close = np.abs(den) < tau_pole * (1.0 + np.abs(num))
        if np.any(close):
            i = int(np.argmax(close))
            raise PoleProximityError(
                f"|denominator| = {abs(den[i]):.3e} at {points[i].tolist()} is below the pole tolerance",
                point=points[i],
                magnitude=float(abs(den[i])),
            )
        return num / den

    def __call__(self, z):
        pts, single = as_points(z, self.dim)
        vals = self.evaluate(pts)
        return complex(vals[0]) if single else vals

    def __eq__(self, other):
        return (
            isinstance(other, RationalFunction)
            and self.numerator == other.numerator
            and self.denominator == other.denominator
        )

    def __hash__(self):
        return hash((self.numerator, self.denominator))

    def __repr__(self):
        return f"RationalFunction({self.numerator!r} / {self.denominator!r})"

    def to_json(self):
        return {"num": self.numerator.to_json(), "den": self.denominator.to_json()}

    @classmethod
    def from_json(cls, obj):
        return cls(Polynomial.from_json(obj["num"]), Polynomial.from_json(obj["den"]))


def rational_eval(r, z, tau_pole=TAU_POLE):
    pts, single = as_points(z, r.dim)
    if not single:
        raise DimensionError("rational_eval takes a single point")
    return complex(r.evaluate(pts, tau_pole=tau_pole)[0])


def singularity_distance(r, K):
    """``min_{x in K} |denominator(x)|``, a computable proxy for dist(K, poles of r).

    ``r`` counts as analytic over ``K`` when this is at least ``TAU_SING``.
    """
    if r.dim != K.dim:
        raise DimensionError("rational function and compact net dimensions differ")
    return float(np.min(np.abs(r.denominator.evaluate(K.points))))


class FamilySpec:
    """Truncation ``(max_degree, height)`` of the polynomials with Gaussian-rational coefficients.

    Parameters
    ----------
    dim : int
        Number of variables.
    max_degree : int
        Maximal total degree ``d >= 0``.
    height : int
        Coefficients are ``(a + b i) / c`` with ``|a|, |b| <= height`` and
        ``1 <= c <= height``.
    cap : int, optional
        Largest family size allowed; exceeding it is an error unless
        ``truncate`` is set, in which case the first ``cap`` members are kept.
    """

    def __init__(self, dim, max_degree, height, cap=None, truncate=False):
        if int(dim) < 1:
            raise ArgumentError("family dimension must be >= 1")
        if int(max_degree) < 0:
            raise ArgumentError("max_degree must be >= 0")
        if int(height) < 1:
            raise ArgumentError("height must be >= 1 (the family would be empty)")
        if cap is not None and int(cap) < 1:
            raise ArgumentError("cap must be positive")
        self.dim = int(dim)
        self.max_degree = int(max_degree)
        self.height = int(height)
        self.cap = None if cap is None else int(cap)
        self.truncate = bool(truncate)

    def __repr__(self):
        return (
            f"FamilySpec(dim={self.dim}, max_degree={self.max_degree}, height={self.height}, "
            f"cap={self.cap}, truncate={self.truncate})"
        )

    @property
    def full_size(self):
        L = len(gaussian_rationals(self.height))
        return L ** term_count(self.dim, self.max_degree) - 1

    def describe(self):
        return {"kind": "rational", "dim": self.dim, "max_degree": self.max_degree, "height": self.height}


def gaussian_rationals(height):
    """Distinct values ``(a + b i)/c`` with ``|a|, |b| <= height``, ``1 <= c <= height``.

    Zero comes first; the rest follow in first-occurrence order of the tuple
    ``(c, a, b)`` iterated lexicographically.
    """
    seen = {(Fraction(0), Fraction(0))}
    values = [0j]
    for c in range(1, height + 1):
        for a in range(-height, height + 1):
            for b in range(-height, height + 1):
                key = (Fraction(a, c), Fraction(b, c))
                if key not in seen:
                    seen.add(key)
                    values.append(complex(a / c, b / c))
    return values


def family_coefficients(spec, max_size=None):
    """Coefficient matrix of the enumerated family.

    Returns ``(monos, C)`` where ``monos`` is the graded-lex monomial list of
    degree ``<= spec.max_degree`` and row ``i`` of ``C`` holds the coefficients
    of the ``i``-th family member. Order: total degree, then the coefficient
    vector compared lexicographically in lattice order, constant term most
    significant.
    """
    lattice = np.array(gaussian_rationals(spec.height))
    L = len(lattice)
    monos = monomials(spec.dim, spec.max_degree)
    T = len(monos)
    full = L**T - 1
    limit = spec.cap if max_size is None else max_size
    if limit is not None and full > limit and not spec.truncate:
        raise ResourceBudgetError(f"family has {full} members, more than the cap {limit}")
    want = full if (limit is None or not spec.truncate) else min(full, limit)
    blocks = []
    got = 0
    prev = 0
    for k in range(spec.max_degree + 1):
        t_k = term_count(spec.dim, k)
        count = L**t_k
        need = want - got
        period = L ** (t_k - prev)
        # a block of `period` consecutive indices contains period-1 kept rows
        count = min(count, -(-need * period // (period - 1)) + period)
        if count > 50_000_000:
            raise ResourceBudgetError(f"enumerating {count} coefficient vectors exceeds the hard budget")
        idx = np.arange(count, dtype=np.int64)
        digits = np.empty((count, t_k), dtype=np.int64)
        rest = idx.copy()
        for col in range(t_k - 1, -1, -1):
            digits[:, col] = rest % L
            rest //= L
        top = digits[:, prev:t_k]
        keep = np.any(top != 0, axis=1)
        digits = digits[keep]
        take = min(len(digits), want - got)
        digits = digits[:take]
        block = np.zeros((take, T), dtype=complex)
        block[:, :t_k] = lattice[digits]
        blocks.append(block)
        got += take
        prev = t_k
        if got >= want:
            break
    return monos, np.concatenate(blocks, axis=0)


def enumerate_rational_family(spec):
    """The enumerated family as a list of `Polynomial`, in the documented order."""
    monos, C = family_coefficients(spec)
    return [Polynomial.from_coefficients(spec.dim, monos, row) for row in C]


def family_matrix(family, dim=None):
    """Normalize a family argument to ``(monos, C, description)``.

    ``family`` is a `FamilySpec` or an iterable of `Polynomial`.
    """
    if isinstance(family, FamilySpec):
        monos, C = family_coefficients(family)
        return monos, C, family.describe()
    polys = list(family)
    if not polys:
        raise ArgumentError("empty polynomial family")
    d = polys[0].dim if dim is None else dim
    for p in polys:
        if not isinstance(p, Polynomial):
            raise ArgumentError(f"family members must be Polynomial, got {type(p).__name__}")
        if p.dim != d:
            raise DimensionError("family members have mixed dimensions")
    monos = sorted({a for p in polys for a, _ in p.terms} | {(0,) * d}, key=_mono_key)
    index = {a: t for t, a in enumerate(monos)}
    C = np.zeros((len(polys), len(monos)), dtype=complex)
    for i, p in enumerate(polys):
        for a, c in p.terms:
            C[i, index[a]] = c
    return monos, C, {"kind": "explicit", "size": len(polys)}


def row_degrees(monos, C):
    """Total degree of each row of a coefficient matrix (0 for the zero row)."""
    mdeg = np.array([sum(a) for a in monos])
    nz = C != 0
    return np.where(nz.any(axis=1), np.max(np.where(nz, mdeg[None, :], 0), axis=1), 0)
