"""Finite nets standing in for nonempty compact subsets of C^n.

A `CompactNet` is a nonempty finite point list together with a declared
mesh ``h``: the intended compact set lies within ``h`` of the points. The
mesh is metadata propagated by simple rules (max for unions, ``L*h`` for
images); it is never certified.
"""

import math

import numpy as np
from scipy.spatial import cKDTree

from .errors import ArgumentError, DimensionError
from .funcparser import evaluator, expr_lipschitz_bound, parse

DEDUP_TOL = 1e-12


def _real_view(points):
    """(N, n) complex -> (N, 2n) float ordered re1, im1, ..., ren, imn."""
    out = np.empty((points.shape[0], 2 * points.shape[1]))
    out[:, 0::2] = points.real
    out[:, 1::2] = points.imag
    return out


def _dedup(points, tol=DEDUP_TOL):
    if points.shape[0] < 2:
        return points
    pairs = cKDTree(_real_view(points)).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return points
    # keep the first point of every cluster
    parent = np.arange(points.shape[0])

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    keep = np.array([find(i) == i for i in range(points.shape[0])])
    return points[keep]


class CompactNet:
    """Nonempty finite h-net in C^n.

    Parameters
    ----------
    points : array_like
        Complex array of shape ``(N, n)``; a 1-D array is read as ``N``
        points of C.
    mesh : float
        Declared fineness ``h > 0``.
    """

    __slots__ = ("points", "mesh", "_tree")

    def __init__(self, points, mesh, dim=None):
        pts = np.asarray(points, dtype=complex)
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
        elif pts.ndim == 1:
            pts = pts.reshape(-1, 1) if dim in (None, 1) else pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ArgumentError("a compact net needs at least one point (empty compacts are not supported)")
        if dim is not None and pts.shape[1] != dim:
            raise DimensionError(f"points have dimension {pts.shape[1]}, expected {dim}")
        if not np.all(np.isfinite(pts)):
            raise ArgumentError("net points must be finite")
        mesh = float(mesh)
        if not (mesh > 0 and math.isfinite(mesh)):
            raise ArgumentError(f"mesh must be positive and finite, got {mesh}")
        pts = _dedup(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "mesh", mesh)
        object.__setattr__(self, "_tree", None)

    def __setattr__(self, name, value):
        raise AttributeError("CompactNet is immutable")

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __repr__(self):
        return f"CompactNet(dim={self.dim}, n_points={len(self)}, mesh={self.mesh:g})"

    @property
    def tree(self):
        if self._tree is None:
            object.__setattr__(self, "_tree", cKDTree(_real_view(self.points)))
        return self._tree

    def distances_from(self, points):
        """Distance from each of ``points`` (shape ``(M, n)``) to the net."""
        pts = np.asarray(points, dtype=complex).reshape(-1, self.dim)
        d, _ = self.tree.query(_real_view(pts))
        return d

    def bounding_box(self):
        return (
            self.points.real.min(axis=0) + 1j * self.points.imag.min(axis=0),
            self.points.real.max(axis=0) + 1j * self.points.imag.max(axis=0),
        )

    def same_points(self, other, tol=0.0):
        return self.dim == other.dim and len(self) == len(other) and hausdorff(self, other) <= tol

    def point_set(self):
        """Points as a set of tuples (exact floats), for set comparisons."""
        return {tuple(row) for row in self.points.tolist()}

    def to_json(self):
        return {"dim": self.dim, "mesh": self.mesh, "points": _real_view(self.points).tolist()}

    @classmethod
    def from_json(cls, obj):
        dim = int(obj["dim"])
        real = np.asarray(obj["points"], dtype=float).reshape(-1, 2 * dim)
        return cls(real[:, 0::2] + 1j * real[:, 1::2], obj["mesh"], dim=dim)


def _check_dims(A, B):
    if A.dim != B.dim:
        raise DimensionError(f"dimensions differ: {A.dim} vs {B.dim}")


def hausdorff(A, B):
    """Exact Hausdorff distance between two finite point sets (Euclidean on R^2n)."""
    _check_dims(A, B)
    dab = B.tree.query(_real_view(A.points))[0].max()
    dba = A.tree.query(_real_view(B.points))[0].max()
    return float(max(dab, dba))


def union(A, B):
    _check_dims(A, B)
    return CompactNet(np.concatenate([A.points, B.points]), max(A.mesh, B.mesh))


def _padded_box(K):
    lo, hi = K.bounding_box()
    pad = K.mesh
    return lo - pad * (1 + 1j), hi + pad * (1 + 1j)


def image(K, g):
    """Pointwise image of ``K`` under ``g`` (one function or a list, giving C^m).

    The output mesh is ``L * h`` with ``L`` the estimated Lipschitz constant
    of ``g`` on the (mesh-padded) bounding box of ``K``; it is floored at
    the dedup tolerance so that constant maps still yield a valid net.
    """
    funcs = list(g) if isinstance(g, (list, tuple)) else [g]
    funcs = [parse(f, K.dim) if isinstance(f, str) else f for f in funcs]
    cols = []
    for f in funcs:
        ev, _ = evaluator(f, K.dim)
        cols.append(ev(K.points))
    L = expr_lipschitz_bound(funcs, _padded_box(K), dim=K.dim)
    mesh = max(L * K.mesh, DEDUP_TOL)
    return CompactNet(np.stack(cols, axis=1), mesh, dim=len(funcs))


def max_abs_on(K, p):
    """``max_{x in K} |p(x)|`` over the net points."""
    ev, _ = evaluator(p, K.dim)
    return float(np.max(np.abs(ev(K.points))))


# constructors ----------------------------------------------------------------

def _as_c(x):
    return complex(x)


def _circle_points(c, r, h):
    count = max(1, math.ceil(2 * math.pi * r / h))
    theta = 2 * math.pi * np.arange(count) / count
    return c + r * (np.cos(theta) + 1j * np.sin(theta))


def _square_grid(c, r, h):
    k = int(math.floor(r / h))
    ticks = h * np.arange(-k, k + 1)
    X, Y = np.meshgrid(ticks, ticks, indexing="xy")
    return (X + 1j * Y).reshape(-1), c


def circle(center, radius, h):
    """Uniform angular net of ``ceil(2 pi r / h)`` nodes, starting at angle 0."""
    c, r = _as_c(center), float(radius)
    _check_positive(r=r, h=h)
    return CompactNet(_circle_points(c, r, h), h)


def disk(center, radius, h):
    """Square grid of spacing ``h`` (through the center) clipped to the disk, plus the boundary circle."""
    c, r = _as_c(center), float(radius)
    _check_positive(r=r, h=h)
    offsets, _ = _square_grid(c, r, h)
    inside = offsets[np.abs(offsets) <= r]
    return CompactNet(np.concatenate([c + inside, _circle_points(c, r, h)]), h)


def annulus(center, r1, r2, h):
    c, r1, r2 = _as_c(center), float(r1), float(r2)
    _check_positive(r1=r1, h=h)
    if not r1 < r2:
        raise ArgumentError("annulus needs r1 < r2")
    offsets, _ = _square_grid(c, r2, h)
    mod = np.abs(offsets)
    inside = offsets[(mod >= r1) & (mod <= r2)]
    return CompactNet(np.concatenate([c + inside, _circle_points(c, r1, h), _circle_points(c, r2, h)]), h)


def segment(a, b, h):
    """Equispaced points from ``a`` to ``b`` (endpoints included), gaps at most ``h``."""
    _check_positive(h=h)
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    if a.shape != b.shape:
        raise DimensionError("segment endpoints have different dimensions")
    length = float(np.linalg.norm(b - a))
    count = max(1, math.ceil(length / h - 1e-12)) + 1
    t = np.linspace(0.0, 1.0, count)
    return CompactNet(a[None, :] + t[:, None] * (b - a)[None, :], h, dim=a.shape[0])


def torus(radii, h, center=None):
    """Product of circles ``|z_j - c_j| = radii[j]`` (the distinguished boundary of a polydisc)."""
    radii = [float(r) for r in np.atleast_1d(radii)]
    _check_positive(h=h, **{f"radius{j}": r for j, r in enumerate(radii)})
    n = len(radii)
    c = np.zeros(n, dtype=complex) if center is None else np.atleast_1d(np.asarray(center, dtype=complex))
    if c.shape != (n,):
        raise DimensionError("torus center dimension mismatch")
    factors = [_circle_points(c[j], radii[j], h) for j in range(n)]
    grids = np.meshgrid(*factors, indexing="ij")
    return CompactNet(np.stack([g.reshape(-1) for g in grids], axis=1), h, dim=n)


def box(lower, upper, h):
    """Grid on the box ``lower <= z <= upper`` (componentwise on real and imaginary parts)."""
    _check_positive(h=h)
    lo = np.atleast_1d(np.asarray(lower, dtype=complex))
    hi = np.atleast_1d(np.asarray(upper, dtype=complex))
    if lo.shape != hi.shape:
        raise DimensionError("box corners have different dimensions")
    if np.any(hi.real < lo.real) or np.any(hi.imag < lo.imag):
        raise ArgumentError("box upper corner must dominate the lower corner")
    axes = []
    for j in range(lo.shape[0]):
        for a, b in ((lo[j].real, hi[j].real), (lo[j].imag, hi[j].imag)):
            count = max(1, math.ceil((b - a) / h - 1e-12)) + 1 if b > a else 1
            axes.append(np.linspace(a, b, count))
    grid = np.meshgrid(*axes, indexing="ij")
    real = np.stack([g.reshape(-1) for g in grid], axis=1)
    return CompactNet(real[:, 0::2] + 1j * real[:, 1::2], h, dim=lo.shape[0])


def finite(points, h):
    pts = np.asarray(points, dtype=complex)
    return CompactNet(pts, h)


def _check_positive(**values):
    for name, v in values.items():
        if not (float(v) > 0 and math.isfinite(float(v))):
            raise ArgumentError(f"{name} must be positive, got {v}")


SHAPES = {
    "disk": disk,
    "circle": circle,
    "segment": segment,
    "annulus": annulus,
    "torus": torus,
    "box": box,
    "points": finite,
}


def make_net(shape, h, **params):
    """Build a net by shape name: disk, circle, segment, annulus, torus, box or points.

    >>> len(make_net("circle", 0.01, center=0, radius=1).points)
    629
    """
    try:
        ctor = SHAPES[shape]
    except KeyError:
        raise ArgumentError(f"unknown shape {shape!r}; choose from {sorted(SHAPES)}") from None
    try:
        return ctor(h=h, **params)
    except TypeError as exc:
        raise ArgumentError(f"bad parameters for shape {shape!r}: {exc}") from None
