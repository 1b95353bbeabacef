"""Polygonal contours around plane compacts and discretized Cauchy integrals.

A contour is built as the boundary of a union of closed lattice squares of
side ``s`` covering a fattening of ``K``. It is then cut into pieces shorter
than ``delta``. The Cauchy integral is replaced by the Riemann sum whose
nodes are the terminal points of the pieces::

    (1 / 2 pi i) * sum_j f(zeta_j) (zeta_j - zeta_{j-1}) / (zeta_j - z)
"""

import math

import numpy as np
from scipy.spatial import cKDTree

from . import _parallel
from .compactset import CompactNet, _real_view
from .errors import ArgumentError, DimensionError, GeometryError, PoleProximityError, ResourceBudgetError
from .funcparser import evaluator

MAX_NODES = 20_000_000
TAU_NODE = 1e-9


class PolygonalContour:
    """Oriented closed polygonal cycles; the enclosed region lies to the left.

    ``cycles`` holds closed complex vertex arrays (first vertex repeated at
    the end). ``cell`` is the square side used to build the contour, or
    ``None`` for hand-made contours; ``clearance`` is the guaranteed distance
    from the source compact to the contour (``cell / 2`` when built).
    """

    __slots__ = ("cycles", "cell", "clearance")

    def __init__(self, cycles, cell=None, clearance=None):
        out = []
        for cyc in cycles:
            v = np.asarray(cyc, dtype=complex).reshape(-1)
            if v.shape[0] < 3:
                raise ArgumentError("a cycle needs at least two distinct vertices")
            if v[0] != v[-1]:
                v = np.append(v, v[0])
            if not np.all(np.isfinite(v)):
                raise ArgumentError("contour vertices must be finite")
            v.setflags(write=False)
            out.append(v)
        if not out:
            raise ArgumentError("a contour needs at least one cycle")
        object.__setattr__(self, "cycles", tuple(out))
        object.__setattr__(self, "cell", None if cell is None else float(cell))
        if clearance is None:
            clearance = 0.0 if cell is None else float(cell) / 2
        object.__setattr__(self, "clearance", float(clearance))
        if self.length <= 0:
            raise ArgumentError("contour has zero length")

    def __setattr__(self, name, value):
        raise AttributeError("PolygonalContour is immutable")

    def __repr__(self):
        return f"PolygonalContour(cycles={len(self.cycles)}, vertices={self.vertex_count}, length={self.length:.6g})"

    @property
    def length(self):
        return float(sum(np.abs(np.diff(c)).sum() for c in self.cycles))

    @property
    def vertex_count(self):
        return sum(len(c) - 1 for c in self.cycles)

    def edges(self):
        """``(starts, ends)`` of all edges, cycle by cycle."""
        starts = np.concatenate([c[:-1] for c in self.cycles])
        ends = np.concatenate([c[1:] for c in self.cycles])
        return starts, ends

    def distance(self, z):
        """Euclidean distance from each point in ``z`` to the contour."""
        z = np.atleast_1d(np.asarray(z, dtype=complex)).reshape(-1)
        a, b = self.edges()
        out = np.full(z.shape, np.inf)
        for i0, i1 in _parallel.chunks(len(z), 4096):
            zz = z[i0:i1, None]
            d = b - a
            t = np.clip(((zz - a) * d.conj()).real / (np.abs(d) ** 2), 0.0, 1.0)
            out[i0:i1] = np.abs(zz - (a + t * d)).min(axis=1)
        return out

    def winding(self, z):
        """Exact winding number (integer) of the contour around each point in ``z``.

        Points on the contour get 0.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex)).reshape(-1)
        a, b = self.edges()
        w = np.zeros(z.shape, dtype=int)
        for i0, i1 in _parallel.chunks(len(z), 4096):
            x = z[i0:i1, None].real
            y = z[i0:i1, None].imag
            cross = (b.real - a.real) * (y - a.imag) - (x - a.real) * (b.imag - a.imag)
            up = (a.imag <= y) & (b.imag > y) & (cross > 0)
            down = (a.imag > y) & (b.imag <= y) & (cross < 0)
            w[i0:i1] = up.sum(axis=1) - down.sum(axis=1)
        return w

    def cycle_distances(self):
        """Minimum distance between each pair of distinct cycles (empty for one cycle)."""
        out = {}
        for i in range(len(self.cycles)):
            for j in range(i + 1, len(self.cycles)):
                other = PolygonalContour([self.cycles[j]])
                out[(i, j)] = float(other.distance(self.cycles[i][:-1]).min())
                out[(i, j)] = min(out[(i, j)], float(PolygonalContour([self.cycles[i]]).distance(self.cycles[j][:-1]).min()))
        return out

    def to_json(self):
        obj = {"cycles": [[[float(v.real), float(v.imag)] for v in c] for c in self.cycles]}
        if self.cell is not None:
            obj["cell"] = self.cell
        return obj

    @classmethod
    def from_json(cls, obj):
        cycles = [np.array([complex(x, y) for x, y in c]) for c in obj["cycles"]]
        return cls(cycles, cell=obj.get("cell"))


def rectangle_contour(lower, upper):
    """Positively oriented boundary of the rectangle with corners ``lower``, ``upper``."""
    lo, hi = complex(lower), complex(upper)
    if not (hi.real > lo.real and hi.imag > lo.imag):
        raise ArgumentError("rectangle needs upper > lower in both coordinates")
    return PolygonalContour([[lo, complex(hi.real, lo.imag), hi, complex(lo.real, hi.imag), lo]])


def square_contour(center=0.0, side=1.0):
    """Boundary of the axis-aligned square of the given side, e.g. ``[-0.5, 0.5]^2`` by default."""
    c, r = complex(center), float(side) / 2
    return rectangle_contour(c - r * (1 + 1j), c + r * (1 + 1j))


# construction ------------------------------------------------------------------

def _rect_distance(x, y, i, j, s):
    # distance from points (x, y) to the closed squares [i s, (i+1) s] x [j s, (j+1) s]
    dx = np.maximum(np.maximum(i * s - x, x - (i + 1) * s), 0.0)
    dy = np.maximum(np.maximum(j * s - y, y - (j + 1) * s), 0.0)
    return np.hypot(dx, dy)


def _cells_near(points, s, radius):
    """Lattice cells whose closed square lies within ``radius`` of some point."""
    x, y = points.real, points.imag
    w = int(math.ceil(radius / s)) + 1
    ci = np.floor(x / s).astype(np.int64)
    cj = np.floor(y / s).astype(np.int64)
    found = []
    for di in range(-w, w + 1):
        for dj in range(-w, w + 1):
            i, j = ci + di, cj + dj
            hit = _rect_distance(x, y, i, j, s) < radius
            found.append(np.stack([i[hit], j[hit]], axis=1))
    cells = np.unique(np.concatenate(found), axis=0)
    return {(int(a), int(b)) for a, b in cells}


def _resolve_pinches(cells):
    # two cells touching only at a corner make the boundary ambiguous; fill one gap
    while True:
        added = None
        for i, j in sorted(cells):
            for dj in (1, -1):
                if (i + 1, j + dj) in cells and (i + 1, j) not in cells and (i, j + dj) not in cells:
                    added = min((i + 1, j), (i, j + dj))
                    break
            if added:
                break
        if added is None:
            return cells
        cells.add(added)


def _trace(cells):
    nxt = {}
    for i, j in cells:
        if (i, j - 1) not in cells:
            nxt[(i, j)] = (i + 1, j)
        if (i + 1, j) not in cells:
            nxt[(i + 1, j)] = (i + 1, j + 1)
        if (i, j + 1) not in cells:
            nxt[(i + 1, j + 1)] = (i, j + 1)
        if (i - 1, j) not in cells:
            nxt[(i, j + 1)] = (i, j)
    cycles = []
    remaining = set(nxt)
    while remaining:
        start = min(remaining)
        cyc = [start]
        remaining.discard(start)
        v = nxt[start]
        while v != start:
            cyc.append(v)
            remaining.discard(v)
            v = nxt[v]
        cycles.append(_merge_collinear(cyc))
    return cycles


def _merge_collinear(cyc):
    n = len(cyc)
    keep = []
    for k in range(n):
        p, q, r = cyc[k - 1], cyc[k], cyc[(k + 1) % n]
        if (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]) != 0:
            keep.append(q)
    return keep


def build_contour(K, margin=None, cell=None, forbidden=None):
    """Contour around ``K`` inside its ``margin``-neighborhood.

    The neighborhood is ``{z : dist(z, K) < margin}``. When ``forbidden``
    (a `CompactNet` or point list) is given, the margin defaults to
    ``dist(K, forbidden)`` and no square may come within ``cell`` of it.

    Squares of the lattice ``cell * Z^2`` are kept when they meet the
    ``(cell/2 + h)``-fattening of the net, where ``h`` is the net's mesh.
    Every point within ``h`` of the net then lies at distance at least
    ``cell/2`` from the contour and is encircled once.
    """
    if not isinstance(K, CompactNet):
        raise ArgumentError("K must be a CompactNet")
    if K.dim != 1:
        raise DimensionError("contours are planar; K must have dimension 1")
    F = None
    if forbidden is not None:
        F = forbidden if isinstance(forbidden, CompactNet) else CompactNet(forbidden, 1.0)
        if F.dim != 1:
            raise DimensionError("forbidden set must be planar")
        gap = float(F.distances_from(K.points).min())
        if margin is None:
            margin = gap
        margin = min(float(margin), gap)
    if margin is None:
        raise ArgumentError("give a margin or a forbidden set")
    rho = float(margin)
    if not (rho > 0 and math.isfinite(rho)):
        raise ArgumentError(f"margin must be positive, got {margin}")
    s = rho / 8 if cell is None else float(cell)
    if not (0 < s <= rho / 4):
        raise ArgumentError(f"cell side {s:g} must satisfy 0 < cell <= margin/4 = {rho / 4:g}")

    pts = K.points[:, 0]
    cells = _resolve_pinches(_cells_near(pts, s, s / 2 + K.mesh))

    arr = np.array(sorted(cells), dtype=float)
    centers = (arr[:, 0] + 0.5) * s + 1j * (arr[:, 1] + 0.5) * s
    reach = K.distances_from(centers[:, None]) + s / math.sqrt(2)
    if reach.max() > rho - s:
        raise GeometryError(
            f"squares of side {s:g} reach {reach.max():.4g} from K, beyond margin - cell = {rho - s:.4g}; "
            "use a smaller cell or a finer net"
        )
    if F is not None:
        dF = F.distances_from(centers[:, None]) - s / math.sqrt(2)
        if dF.min() < s:
            raise GeometryError(f"a square of side {s:g} comes within {max(dF.min(), 0):.4g} of the forbidden set")

    cycles = [s * np.array([complex(a, b) for a, b in cyc]) for cyc in _trace(cells)]
    gamma = PolygonalContour(cycles, cell=s)
    w = gamma.winding(pts)
    if np.any(w != 1):
        bad = pts[int(np.argmax(w != 1))]
        raise GeometryError(f"winding number {int(w[np.argmax(w != 1)])} at K point {bad}")
    return gamma


# partition ---------------------------------------------------------------------

class ContourPartition:
    """Pieces of a contour shorter than ``delta``.

    ``nodes`` are the terminal points zeta_j and ``starts`` the initial
    points zeta_{j-1}; ``chords = nodes - starts``.
    """

    __slots__ = ("nodes", "starts", "delta", "contour")

    def __init__(self, nodes, starts, delta, contour):
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "delta", float(delta))
        object.__setattr__(self, "contour", contour)

    def __setattr__(self, name, value):
        raise AttributeError("ContourPartition is immutable")

    def __len__(self):
        return self.nodes.shape[0]

    def __repr__(self):
        return f"ContourPartition(nodes={len(self)}, delta={self.delta:g})"

    @property
    def chords(self):
        return self.nodes - self.starts


def partition(gamma, delta):
    """Split every edge of length ``l`` into ``floor(l / delta) + 1`` equal pieces."""
    delta = float(delta)
    if not (delta > 0 and math.isfinite(delta)):
        raise ArgumentError(f"delta must be positive, got {delta}")
    a, b = gamma.edges()
    counts = np.floor(np.abs(b - a) / delta).astype(np.int64) + 1
    total = int(counts.sum())
    if total > MAX_NODES:
        raise ResourceBudgetError(f"partition would have {total} nodes (limit {MAX_NODES}); increase delta")
    edge = np.repeat(np.arange(len(a)), counts)
    first = np.repeat(np.cumsum(counts) - counts, counts)
    k = np.arange(total) - first
    n = counts[edge]
    step = (b - a)[edge] / n
    starts = a[edge] + k * step
    nodes = a[edge] + (k + 1) * step
    # exact vertices at edge ends
    last = np.cumsum(counts) - 1
    nodes[last] = b
    starts[first[last]] = a
    nodes.setflags(write=False)
    starts.setflags(write=False)
    return ContourPartition(nodes, starts, delta, gamma)


# Riemann sums ------------------------------------------------------------------

DIRECT_BUDGET = 20_000_000
_CHUNK_TARGETS = 256
_NODE_CHUNK = 1 << 20
_TERMS = 26


def min_pair_distance(poles, z):
    """Smallest ``|poles[i] - z[j]|``; the tree is built on the smaller set."""
    a, b = (poles, z) if len(poles) <= len(z) else (z, poles)
    return float(cKDTree(_real_view(a[:, None])).query(_real_view(b[:, None]))[0].min())


def partial_fraction_sum(poles, coeffs, z, min_dist=None):
    """``sum_j coeffs[j] / (poles[j] - z)`` for every target ``z``.

    Uses direct summation when ``len(poles) * len(z)`` is small and a
    single-level box expansion otherwise. Results are independent of the
    worker count; each target's value is computed by the same fixed
    sequence of floating-point operations. ``min_dist`` is an optional
    lower bound for the target-pole distances (for instance the distance
    to the contour carrying the poles).
    """
    poles = np.asarray(poles, dtype=complex).reshape(-1)
    coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
    z = np.atleast_1d(np.asarray(z, dtype=complex)).reshape(-1)
    if len(poles) * len(z) <= DIRECT_BUDGET or len(poles) < 4096:
        return direct_sum(poles, coeffs, z)
    return expansion_sum(poles, coeffs, z, min_dist)


def direct_sum(poles, coeffs, z):
    out = np.zeros(z.shape, dtype=complex)
    node_chunks = _parallel.chunks(len(poles), _NODE_CHUNK)

    def one(rng):
        i0, i1 = rng
        acc = np.zeros(i1 - i0, dtype=complex)
        for n0, n1 in node_chunks:
            acc += (coeffs[None, n0:n1] / (poles[None, n0:n1] - z[i0:i1, None])).sum(axis=1)
        return acc

    size = max(1, min(_CHUNK_TARGETS, _NODE_CHUNK // max(len(poles), 1)))
    ranges = _parallel.chunks(len(z), size)
    for (i0, i1), vals in zip(ranges, _parallel.ordered_map(one, ranges)):
        out[i0:i1] = vals
    return out


def expansion_sum(poles, coeffs, z, min_dist=None):
    """Box-expansion evaluation of a partial-fraction sum.

    Poles are binned into squares of side ``d / 4`` where ``d`` is the
    smallest target-pole distance; each square is then seen from every
    target at a ratio of at most about 0.215, and 26 moments give relative
    truncation below 1e-17.
    """
    d = min_pair_distance(poles, z) if min_dist is None else float(min_dist)
    if d <= 0:
        raise PoleProximityError("target coincides with a pole", point=None, magnitude=0.0)
    b = d / 4
    ki = np.floor(poles.real / b).astype(np.int64)
    kj = np.floor(poles.imag / b).astype(np.int64)
    ki -= ki.min()
    kj -= kj.min()
    uniq, box = np.unique(ki * (int(kj.max()) + 1) + kj, return_inverse=True)
    box = box.reshape(-1)
    first = np.zeros(len(uniq), dtype=np.int64)
    first[box[::-1]] = np.arange(len(box))[::-1]
    centers = (np.floor(poles[first].real / b) + 0.5) * b + 1j * (np.floor(poles[first].imag / b) + 0.5) * b
    u = poles - centers[box]
    nb = len(uniq)
    moments = np.empty((_TERMS, nb), dtype=complex)
    pw = coeffs.copy()
    for k in range(_TERMS):
        moments[k] = np.bincount(box, pw.real, nb) + 1j * np.bincount(box, pw.imag, nb)
        pw = pw * u

    def one(rng):
        i0, i1 = rng
        t = 1.0 / (z[i0:i1, None] - centers[None, :])
        acc = np.broadcast_to(moments[_TERMS - 1], t.shape).copy()
        for k in range(_TERMS - 2, -1, -1):
            acc = moments[k] + t * acc
        vals = -(t * acc)
        out = np.zeros(i1 - i0, dtype=complex)
        for c in range(nb):
            out += vals[:, c]
        return out

    size = max(1, min(_CHUNK_TARGETS, 4_000_000 // max(nb, 1)))
    ranges = _parallel.chunks(len(z), size)
    out = np.empty(z.shape, dtype=complex)
    for (i0, i1), vals in zip(ranges, _parallel.ordered_map(one, ranges)):
        out[i0:i1] = vals
    return out


def _check_clearance(P, z):
    dist = P.contour.distance(z)
    return _require(P, z, dist)


def _require(P, z, dist):
    need = max(P.contour.clearance, TAU_NODE)
    close = dist < need
    if np.any(close):
        i = int(np.argmax(close))
        raise PoleProximityError(
            f"point {complex(z[i])} lies {dist[i]:.3e} from the contour (needs >= {need:.3e})",
            point=np.array([z[i]]), magnitude=float(dist[i]),
        )
    return float(dist.min())


def node_values(f, P):
    """``f`` at the partition nodes; evaluation errors carry the offending node."""
    ev, _ = evaluator(f, 1)
    return ev(P.nodes[:, None])


def cauchy_eval(f, P, z):
    """Riemann sum of the Cauchy integral of ``f`` over the partition at ``z``.

    ``z`` may be a scalar or an array of points; it must keep the contour's
    clearance.
    """
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex)).reshape(-1)
    dmin = _check_clearance(P, zz)
    vals = node_values(f, P)
    coeffs = vals * P.chords / (2j * math.pi)
    out = partial_fraction_sum(P.nodes, coeffs, zz, dmin)
    return complex(out[0]) if scalar else out


def winding_quadrature(P, z):
    """Riemann-sum winding number (``f = 1``) at ``z``."""
    return cauchy_eval(lambda pts: np.ones(pts.shape[0], dtype=complex), P, z)
