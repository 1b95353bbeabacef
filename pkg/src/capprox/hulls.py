"""Grid approximations of polynomially and rationally convex hulls.

A candidate point ``z`` survives when ``|p(z)| <= (1 + eta) max_K |p|`` for
every polynomial ``p`` of the family (and the analogous test for every
rational function analytic over ``K``). Candidates are the lattice points
of a box plus the points of ``K`` itself, so the result always contains
``K``.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import _parallel
from .compactset import DEDUP_TOL, CompactNet, hausdorff
from .errors import ArgumentError, DimensionError
from .numeric import TAU_POLE, TAU_SING, FamilySpec, family_matrix, monomial_matrix, row_degrees, singularity_distance

DEFAULT_SLACK = 1e-9
_FAMILY_CHUNK = 4096
_BATCH = 8


class CandidateGrid:
    """Lattice ``res * Z^{2n}`` restricted to a box in C^n = R^{2n}."""

    __slots__ = ("lower", "upper", "res", "_points")

    def __init__(self, lower, upper, res):
        lo = np.atleast_1d(np.asarray(lower, dtype=complex))
        hi = np.atleast_1d(np.asarray(upper, dtype=complex))
        if lo.shape != hi.shape:
            raise DimensionError("grid corners have different dimensions")
        res = float(res)
        if not (res > 0 and math.isfinite(res)):
            raise ArgumentError(f"grid resolution must be positive, got {res}")
        if np.any(hi.real < lo.real) or np.any(hi.imag < lo.imag):
            raise ArgumentError("grid upper corner must dominate the lower corner")
        self.lower, self.upper, self.res = lo, hi, res
        self._points = None

    @classmethod
    def around(cls, K, res, pad=None):
        """Box around ``K`` enlarged by ``pad`` (default ``max(2 h, res)``)."""
        pad = max(2 * K.mesh, float(res)) if pad is None else float(pad)
        lo = K.points.real.min(axis=0) - pad + 1j * (K.points.imag.min(axis=0) - pad)
        hi = K.points.real.max(axis=0) + pad + 1j * (K.points.imag.max(axis=0) + pad)
        return cls(lo, hi, res)

    @property
    def dim(self):
        return self.lower.shape[0]

    def axis_ticks(self):
        ticks = []
        for j in range(self.dim):
            for a, b in ((self.lower[j].real, self.upper[j].real), (self.lower[j].imag, self.upper[j].imag)):
                k0 = math.ceil(a / self.res - 1e-9)
                k1 = math.floor(b / self.res + 1e-9)
                ticks.append(self.res * np.arange(k0, k1 + 1))
        return ticks

    @property
    def size(self):
        return int(np.prod([len(t) for t in self.axis_ticks()]))

    @property
    def points(self):
        """Lattice points, shape ``(M, n)``, in C-order over (re1, im1, re2, ...)."""
        if self._points is None:
            grid = np.meshgrid(*self.axis_ticks(), indexing="ij")
            real = np.stack([g.reshape(-1) for g in grid], axis=1)
            self._points = real[:, 0::2] + 1j * real[:, 1::2]
        return self._points

    def contains(self, K, fatten=0.0):
        """Whether the box contains the ``fatten``-box around every point of ``K``."""
        pts = K.points
        return bool(
            np.all(pts.real - fatten >= self.lower.real - 1e-12)
            and np.all(pts.real + fatten <= self.upper.real + 1e-12)
            and np.all(pts.imag - fatten >= self.lower.imag - 1e-12)
            and np.all(pts.imag + fatten <= self.upper.imag + 1e-12)
        )

    def describe(self):
        return {
            "lower": [[z.real, z.imag] for z in self.lower],
            "upper": [[z.real, z.imag] for z in self.upper],
            "res": self.res,
            "size": self.size,
        }


def projective_classes(monos, C):
    """Drop constants and keep one representative per class ``{s p : s != 0}``.

    Each row is divided by its first nonzero coefficient and rounded to
    1e-12; the rounded row is the representative. Scaling does not change
    the hull constraint, and using the same representative for every member
    of a class keeps family monotonicity exact.
    """
    C = C[row_degrees(monos, C) > 0]
    if len(C) == 0:
        return C
    first = np.argmax(C != 0, axis=1)
    Q = C / C[np.arange(len(C)), first][:, None]
    Q = np.round(Q.real, 12) + 1j * np.round(Q.imag, 12)
    Q = Q + 0.0  # normalize -0.0
    keys = np.ascontiguousarray(Q).view(np.dtype((np.void, Q.itemsize * Q.shape[1]))).reshape(-1)
    _, idx = np.unique(keys, return_index=True)
    return Q[np.sort(idx)]


def _abs_family(V, C):
    # |p(z)| for each row of V (monomial values) and each row of C (coefficients).
    # einsum without BLAS: each entry is computed by the same loop whatever the
    # shapes, so values do not depend on chunking or on the other rows present.
    return np.abs(np.einsum("nt,pt->np", V, C, optimize=False))


def _gradient_bound(points, monos, C):
    # max over points of sqrt(sum_j |d_j p|^2), per polynomial
    n = points.shape[1]
    total = np.zeros((points.shape[0], C.shape[0]))
    for j in range(n):
        dmonos, rows = [], []
        for t, a in enumerate(monos):
            if a[j] > 0:
                b = list(a)
                b[j] -= 1
                dmonos.append(tuple(b))
                rows.append((t, a[j]))
        if not dmonos:
            continue
        Dj = np.stack([C[:, t] * e for t, e in rows], axis=1)
        total += _abs_family(monomial_matrix(points, dmonos), Dj) ** 2
    return np.sqrt(total.max(axis=0))


def _candidates(K, grid):
    """``K``'s points followed by the lattice points not within 1e-12 of them."""
    if grid.dim != K.dim:
        raise DimensionError("grid and K dimensions differ")
    if not grid.contains(K):
        raise ArgumentError("grid box must contain K")
    g = grid.points
    g = g[K.distances_from(g) > DEDUP_TOL]
    return np.concatenate([K.points, g])


@dataclass
class HullReport:
    net: CompactNet
    family_size: int
    effective_size: int
    candidates: int
    skipped: list = None

    @property
    def survivors(self):
        return len(self.net)


def _filter_polys(test_points, ref_points, monos, C, slack, compensate, mesh):
    """Mask of ``test_points`` passing every polynomial row of ``C``.

    Maxima are taken over ``ref_points``. Points already rejected are not
    evaluated again for later chunks of the family.
    """
    alive = np.ones(len(test_points), dtype=bool)
    V_ref = monomial_matrix(ref_points, monos)
    chunks = _parallel.chunks(len(C), _FAMILY_CHUNK)
    for b0 in range(0, len(chunks), _BATCH):
        batch = chunks[b0:b0 + _BATCH]
        idx = np.flatnonzero(alive)
        if len(idx) == 0:
            break
        V = monomial_matrix(test_points[idx], monos)

        def one(rng):
            Cc = C[rng[0]:rng[1]]
            ref = _abs_family(V_ref, Cc).max(axis=0)
            eta = np.full(len(Cc), slack)
            if compensate:
                L = _gradient_bound(test_points, monos, Cc)
                with np.errstate(divide="ignore", invalid="ignore"):
                    eta = np.maximum(eta, np.where(ref > 0, L * mesh / ref, np.inf))
            return np.all(_abs_family(V, Cc) <= ((1 + eta) * ref)[None, :], axis=1)

        for ok in _parallel.ordered_map(one, batch):
            alive[idx] &= ok
    return alive


def poly_hull(K, family, grid=None, slack=DEFAULT_SLACK, compensate=False, max_over=None, res=0.05, report=False):
    """Points of ``grid`` and of ``K`` passing ``|p(z)| <= (1 + slack) max |p|`` for the family.

    Parameters
    ----------
    K : CompactNet
    family : FamilySpec or list of Polynomial
    grid : CandidateGrid, optional
        Defaults to ``CandidateGrid.around(K, res)``.
    slack : float
        ``eta >= 0``.
    compensate : bool
        Use ``eta_p = max(slack, L_p h / max_K |p|)`` with ``L_p`` the largest
        gradient norm of ``p`` over the candidates.
    max_over : CompactNet, optional
        Take maxima over this net instead of ``K`` (still injecting ``K``'s
        points as candidates).
    """
    if slack < 0:
        raise ArgumentError("slack must be >= 0")
    grid = CandidateGrid.around(K, res) if grid is None else grid
    monos, C, _ = family_matrix(family, K.dim)
    if C.shape[0] == 0:
        raise ArgumentError("empty polynomial family")
    reps = projective_classes(monos, C)
    if len(reps) == 0:
        raise ArgumentError("family has no nonconstant polynomial; every candidate would survive")
    cand = _candidates(K, grid)
    ref = K if max_over is None else max_over
    if ref.dim != K.dim:
        raise DimensionError("max_over has the wrong dimension")
    alive = np.ones(len(cand), dtype=bool)
    # with maxima over K, K's own points pass by definition; the union keeps them first
    start = len(K) if max_over is None else 0
    alive[start:] = _filter_polys(cand[start:], ref.points, monos, reps, float(slack), compensate, K.mesh)
    net = CompactNet(cand[alive], grid.res)
    if report:
        return HullReport(net, C.shape[0], len(reps), len(cand))
    return net


def rational_hull(K, poly_family, rationals, grid=None, slack=DEFAULT_SLACK, tau_sing=TAU_SING,
                  tau_pole=TAU_POLE, res=0.05, report=False, compensate=False):
    """Polynomial hull further cut by rational functions analytic over ``K``.

    A rational ``r`` with ``singularity_distance(r, K) < tau_sing`` is
    skipped. Otherwise a candidate is removed when ``|q(z)| < tau_pole`` or
    ``|r(z)| > (1 + slack) max_K |r|``. ``poly_family=None`` applies no
    polynomial constraint.
    """
    grid = CandidateGrid.around(K, res) if grid is None else grid
    if poly_family is None:
        base = HullReport(CompactNet(_candidates(K, grid), grid.res), 0, 0, 0)
    else:
        base = poly_hull(K, poly_family, grid, slack, compensate=compensate, report=True)
    pts = base.net.points
    alive = np.ones(len(pts), dtype=bool)
    skipped = []
    rationals = list(rationals)
    for i, r in enumerate(rationals):
        if r.dim != K.dim:
            raise DimensionError("rational function has the wrong dimension")
        if singularity_distance(r, K) < tau_sing:
            skipped.append(i)
            continue
        ref = np.abs(r.numerator.evaluate(K.points) / r.denominator.evaluate(K.points)).max()
        q = r.denominator.evaluate(pts)
        num = r.numerator.evaluate(pts)
        near = np.abs(q) < tau_pole
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.abs(num / np.where(near, 1.0, q))
        alive &= ~near & (val <= (1 + slack) * ref)
    net = CompactNet(pts[alive], grid.res)
    if report:
        return HullReport(net, base.family_size, base.effective_size, base.candidates, skipped)
    return net


def hull_defect(K, hull):
    """Hausdorff distance between ``K`` and a hull approximation."""
    return hausdorff(K, hull)


__all__ = [
    "CandidateGrid", "FamilySpec", "HullReport", "hull_defect", "poly_hull", "projective_classes", "rational_hull",
]
