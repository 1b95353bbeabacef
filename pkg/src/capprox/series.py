"""Taylor, homogeneous and Laurent expansions about 0 by quadrature on a torus.

The coefficient of index ``nu`` in Z^n is the normalized torus average

    c_nu = rho^{-nu} * mean_k f(rho_1 w^{k_1}, ..., rho_n w^{k_n}) w^{-nu.k},
    w = exp(2 pi i / m),

i.e. the trapezoidal rule with ``m`` nodes per circle. For a Laurent
polynomial whose exponents satisfy ``|nu_j| < m / 2`` the rule is exact.
"""

from dataclasses import dataclass
import itertools
import math

import numpy as np

from .compactset import CompactNet
from .errors import ArgumentError, ConvergenceError, DimensionError
from .funcparser import evaluator, parse, require_holomorphic
from .numeric import Polynomial, monomials

DEFAULT_NODES = 128
MIN_NODES = 8


def _radii(rho, dim):
    r = np.atleast_1d(np.asarray(rho, dtype=float))
    if r.shape == (1,) and dim > 1:
        r = np.repeat(r, dim)
    if r.shape != (dim,):
        raise DimensionError(f"{r.shape[0]} radii given for dimension {dim}")
    if not np.all((r > 0) & np.isfinite(r)):
        raise ArgumentError("radii must be positive and finite")
    return r


def _check_nodes(m):
    m = int(m)
    if m < MIN_NODES:
        raise ArgumentError(f"need at least {MIN_NODES} nodes per circle, got {m}")
    return m


def _dim_of(f, dim):
    if dim is not None:
        return int(dim)
    if isinstance(f, str):
        return 1
    return int(getattr(f, "dim", 1))


def shifted(f, a, dim=None):
    """``z -> f(z + a)``: expansions about ``a`` reduce to expansions about 0."""
    dim = _dim_of(f, dim)
    ev, _ = evaluator(f, dim)
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    if a.shape != (dim,):
        raise DimensionError("shift has the wrong dimension")
    return _Wrapped(lambda pts: ev(pts + a[None, :]), dim)


class _Wrapped:
    __slots__ = ("_fn", "dim")

    def __init__(self, fn, dim):
        self._fn = fn
        self.dim = dim

    def evaluate(self, points):
        return self._fn(np.asarray(points, dtype=complex))


def torus_values(f, rho, m, dim=None, assume_holomorphic=False):
    """``f`` on the torus grid, as an array of shape ``(m,) * n`` (axis j <-> k_j)."""
    dim = _dim_of(f, dim)
    r = _radii(rho, dim)
    m = _check_nodes(m)
    if isinstance(f, str):
        f = parse(f, dim)
    require_holomorphic(f, assume_holomorphic)
    ev, _ = evaluator(f, dim)
    roots = np.exp(2j * np.pi * np.arange(m) / m)
    axes = [r[j] * roots for j in range(dim)]
    grid = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grid], axis=1)
    return ev(pts).reshape((m,) * dim)


def coeff(f, nu, rho, m=DEFAULT_NODES, dim=None, assume_holomorphic=False):
    """Single coefficient ``c_nu`` (Taylor coefficient ``a_nu`` when ``nu >= 0``).

    >>> round(abs(coeff("exp(z)", 5, 1.0, 64) - 1 / 120), 15)
    0.0
    """
    nu = tuple(int(v) for v in np.atleast_1d(nu))
    dim = _dim_of(f, dim if dim is not None else len(nu))
    if len(nu) != dim:
        raise DimensionError(f"index {nu} does not match dimension {dim}")
    r = _radii(rho, dim)
    F = torus_values(f, r, m, dim, assume_holomorphic)
    k = np.arange(F.shape[0])
    # contract one axis at a time, last axis first, in a fixed order
    for j in range(dim - 1, -1, -1):
        w = np.exp(-2j * np.pi * nu[j] * k / F.shape[0]) / F.shape[0]
        F = np.tensordot(F, w, axes=([j], [0]))
    return complex(F) * float(np.prod(r ** (-np.asarray(nu, dtype=float))))


@dataclass(frozen=True)
class SeriesTable:
    """Finite table of expansion coefficients ``nu -> c_nu``.

    ``kind`` is ``"taylor"`` (indices ``alpha >= 0``, ``|alpha| <= order``)
    or ``"laurent"`` (``|nu_j| <= order``).
    """

    dim: int
    radii: tuple
    nodes: int
    order: int
    kind: str
    entries: dict

    def __getitem__(self, nu):
        nu = tuple(int(v) for v in np.atleast_1d(nu))
        if nu not in self.entries:
            raise KeyError(f"index {nu} outside the table (order {self.order}, {self.kind})")
        return self.entries[nu]

    def get(self, nu, default=0j):
        return self.entries.get(tuple(int(v) for v in np.atleast_1d(nu)), default)

    def __len__(self):
        return len(self.entries)

    def nonzero(self, tol=1e-12):
        return {nu: c for nu, c in self.entries.items() if abs(c) > tol}

    def to_json(self):
        return {
            "dim": self.dim,
            "radii": list(self.radii),
            "nodes": self.nodes,
            "order": self.order,
            "kind": self.kind,
            "entries": [{"nu": list(nu), "re": c.real, "im": c.imag} for nu, c in self.entries.items()],
        }

    @classmethod
    def from_json(cls, obj):
        entries = {tuple(e["nu"]): complex(e["re"], e["im"]) for e in obj["entries"]}
        return cls(obj["dim"], tuple(obj["radii"]), obj.get("nodes", DEFAULT_NODES), obj.get("order", 0),
                   obj.get("kind", "laurent"), entries)


def _fft_coefficients(F, r):
    m = F.shape[0]
    return np.fft.fftn(F) / m ** F.ndim, m


def _scaled(C, m, nu, r):
    idx = tuple(v % m for v in nu)
    return complex(C[idx]) * float(np.prod(r ** (-np.asarray(nu, dtype=float))))


def laurent_table(f, order, rho, m=DEFAULT_NODES, dim=None, assume_holomorphic=False):
    """All ``c_nu`` with ``|nu_j| <= order``; needs ``m > 2 * order`` to avoid aliasing."""
    dim = _dim_of(f, dim)
    order = int(order)
    m = _check_nodes(m)
    if order < 0 or m <= 2 * order:
        raise ArgumentError(f"Laurent order {order} needs more than {2 * order} nodes per circle (got {m})")
    r = _radii(rho, dim)
    C, m = _fft_coefficients(torus_values(f, r, m, dim, assume_holomorphic), r)
    rng = range(-order, order + 1)
    entries = {nu: _scaled(C, m, nu, r) for nu in itertools.product(rng, repeat=dim)}
    return SeriesTable(dim, tuple(float(x) for x in r), m, order, "laurent", entries)


def taylor_table(f, max_degree, rho, m=DEFAULT_NODES, dim=None, assume_holomorphic=False):
    """All Taylor coefficients ``a_alpha`` with ``|alpha| <= max_degree``; needs ``m > max_degree``."""
    dim = _dim_of(f, dim)
    d = int(max_degree)
    m = _check_nodes(m)
    if d < 0 or m <= d:
        raise ArgumentError(f"Taylor degree {d} needs more than {d} nodes per circle (got {m})")
    r = _radii(rho, dim)
    C, m = _fft_coefficients(torus_values(f, r, m, dim, assume_holomorphic), r)
    entries = {alpha: _scaled(C, m, alpha, r) for alpha in monomials(dim, d)}
    return SeriesTable(dim, tuple(float(x) for x in r), m, d, "taylor", entries)


def homogeneous_part(t, k):
    """``P_k``: the degree-``k`` terms of the table as a `Polynomial`.

    Both table kinds hold every degree-``k`` term for ``k <= t.order``.
    """
    k = int(k)
    if k < 0 or k > t.order:
        raise ArgumentError(f"degree {k} exceeds the table's truncation order {t.order}")
    return Polynomial(t.dim, [(alpha, t.entries[alpha]) for alpha in monomials(t.dim, k) if sum(alpha) == k])


def homogeneous_sum(t, m):
    """``P_0 + ... + P_m`` as a `Polynomial`.

    >>> p = homogeneous_sum(taylor_table("exp(z)", 4, 1.0, 64), 2)
    >>> [round(abs(p.coeff((k,))), 12) for k in range(3)]
    [1.0, 1.0, 0.5]
    """
    m = int(m)
    if m < 0 or m > t.order:
        raise ArgumentError(f"degree {m} exceeds the table's truncation order {t.order}")
    terms = []
    for k in range(m + 1):
        terms.extend(homogeneous_part(t, k).terms)
    return Polynomial(t.dim, terms)


@dataclass
class ConvergenceReport:
    degree: int
    error: float
    errors: list


def partial_sum_errors(f, t, K):
    """``sup_K |f - p_m|`` for ``m = 0 .. order``, adding one homogeneous part at a time."""
    ev, _ = evaluator(f, t.dim)
    target = ev(K.points)
    approx = np.zeros(len(K), dtype=complex)
    errors = []
    for k in range(t.order + 1):
        approx = approx + homogeneous_part(t, k).evaluate(K.points)
        errors.append(float(np.max(np.abs(target - approx))))
    return errors


def compact_convergence_check(f, t, K, eps, margin=0.0):
    """Smallest ``m`` with ``sup_K |f - p_m| < eps``.

    ``K`` must lie in the closed polydisc of radii ``rho * (1 - margin)``.
    Raises `ConvergenceError` (with the best error) when no ``m`` up to the
    table order qualifies.
    """
    if not isinstance(K, CompactNet) or K.dim != t.dim:
        raise DimensionError("K must be a CompactNet of the table's dimension")
    limit = np.asarray(t.radii) * (1 - float(margin))
    over = np.abs(K.points) > limit[None, :] * (1 + 1e-12)
    if np.any(over):
        i = int(np.argmax(over.any(axis=1)))
        raise ArgumentError(f"K point {K.points[i].tolist()} lies outside the polydisc of radii {limit.tolist()}")
    errors = partial_sum_errors(f, t, K)
    for m, e in enumerate(errors):
        if e < eps:
            return ConvergenceReport(m, e, errors)
    best = min(errors)
    raise ConvergenceError(
        f"partial sums up to degree {t.order} do not reach {eps:g} on K (best {best:.3e})", best_error=best
    )


def negative_vanishing_check(f, d, rho, m=DEFAULT_NODES, dim=None, assume_holomorphic=False):
    """Largest ``|c_nu|`` over indices with some negative entry and ``|nu_j| <= d``."""
    t = laurent_table(f, d, rho, m, dim, assume_holomorphic)
    vals = [abs(c) for nu, c in t.entries.items() if min(nu) < 0]
    return max(vals) if vals else 0.0


def sphere_samples(radius=1.0, count=16):
    """Deterministic points on the sphere ``|w| = radius`` in C^2."""
    theta = (np.arange(count) + 0.5) * (np.pi / 2) / count
    phi = 2 * np.pi * np.arange(count) / count
    T, P1, P2 = np.meshgrid(theta, phi, phi, indexing="ij")
    w1 = radius * np.cos(T) * np.exp(1j * P1)
    w2 = radius * np.sin(T) * np.exp(1j * P2)
    return np.stack([w1.reshape(-1), w2.reshape(-1)], axis=1)


def rotation_uniqueness_check(f, R, degree, rho, m=64, samples=16):
    """Compare homogeneous parts before and after a unitary change of variables.

    With ``g(w) = f(R w)``, the degree-``degree`` homogeneous part ``Q`` of
    ``g`` must equal ``P o R`` where ``P`` is that of ``f``. Returns
    ``sup |Q(w) - P(R w)|`` over a sample sphere of radius ``min(rho)``.
    """
    R = np.asarray(R, dtype=complex)
    if R.shape != (2, 2):
        raise DimensionError("R must be a 2x2 matrix")
    if not np.allclose(R.conj().T @ R, np.eye(2), atol=1e-12):
        raise ArgumentError("R must be unitary")
    ev, _ = evaluator(f, 2)
    g = _Wrapped(lambda pts: ev(pts @ R.T), 2)
    k = int(degree)
    r = _radii(rho, 2)
    P = homogeneous_part(taylor_table(f, k, r, m, dim=2), k)
    Q = homogeneous_part(taylor_table(g, k, r, m, dim=2), k)
    w = sphere_samples(float(r.min()), samples)
    return float(np.max(np.abs(Q.evaluate(w) - P.evaluate(w @ R.T))))


def rotation(theta):
    """Real rotation of C^2 by angle ``theta`` (a unitary matrix)."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


SWAP = np.array([[0, 1], [1, 0]], dtype=complex)
