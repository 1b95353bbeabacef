"""Rational approximation on plane compacts from Riemann sums of the Cauchy integral.

The approximant is kept in partial-fraction form
``R(z) = sum_j a_j / (zeta_j - z)`` with ``zeta_j`` the partition nodes
and ``a_j = f(zeta_j) (zeta_j - zeta_{j-1}) / (2 pi i)``. It is never
expanded into a numerator/denominator pair.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .compactset import CompactNet
from .contour import (
    ContourPartition, PolygonalContour, build_contour, min_pair_distance, node_values, partial_fraction_sum, partition,
)
from .errors import ArgumentError, ConvergenceError, DimensionError, PoleProximityError, ResourceBudgetError
from .funcparser import evaluator, parse, require_holomorphic
from .numeric import as_points

TAU_POLE_DIST = 1e-9
MAX_HALVINGS = 24


class PartialFractionRational:
    """``R(z) = sum_j coeffs[j] / (poles[j] - z)``; immutable."""

    __slots__ = ("poles", "coeffs", "support")
    dim = 1

    def __init__(self, poles, coeffs, support=None):
        p = np.asarray(poles, dtype=complex).reshape(-1).copy()
        c = np.asarray(coeffs, dtype=complex).reshape(-1).copy()
        if p.shape != c.shape:
            raise ArgumentError("poles and coefficients must have the same length")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(c))):
            raise ArgumentError("poles and coefficients must be finite")
        p.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "poles", p)
        object.__setattr__(self, "coeffs", c)
        # contour carrying the poles, if known; used for fast distance bounds
        object.__setattr__(self, "support", support)

    def __setattr__(self, name, value):
        raise AttributeError("PartialFractionRational is immutable")

    def __len__(self):
        return self.poles.shape[0]

    def __repr__(self):
        return f"PartialFractionRational(terms={len(self)})"

    def pole_distance(self, points):
        """Lower bound for the distance from the poles to ``points``.

        Exact when the poles carry no contour; otherwise the distance to the
        contour on which all poles lie.
        """
        pts = np.asarray(points, dtype=complex).reshape(-1)
        if self.support is not None:
            return float(self.support.distance(pts).min())
        return min_pair_distance(self.poles, pts)

    def evaluate(self, points):
        pts = np.asarray(points, dtype=complex)
        if pts.ndim != 2 or pts.shape[1] != 1:
            raise DimensionError(f"points of shape {pts.shape} are not in C")
        z = pts[:, 0]
        if len(self) == 0:
            return np.zeros(z.shape, dtype=complex)
        d = self.pole_distance(z)
        if d < TAU_POLE_DIST:
            raise PoleProximityError(f"evaluation point within {d:.3e} of a pole", point=None, magnitude=d)
        return partial_fraction_sum(self.poles, self.coeffs, z, d)

    def __call__(self, z):
        pts, single = as_points(z, 1)
        vals = self.evaluate(pts)
        return complex(vals[0]) if single else vals

    def to_json(self):
        return {
            "poles": [[float(v.real), float(v.imag)] for v in self.poles],
            "coeffs": [[float(v.real), float(v.imag)] for v in self.coeffs],
        }

    @classmethod
    def from_json(cls, obj):
        poles = [complex(x, y) for x, y in obj["poles"]]
        coeffs = [complex(x, y) for x, y in obj["coeffs"]]
        return cls(poles, coeffs)


def riemann_sum_rational(f, P):
    """Partial-fraction rational whose poles are the nodes of ``P``."""
    if not isinstance(P, ContourPartition):
        raise ArgumentError("P must be a ContourPartition")
    vals = node_values(f, P)
    return PartialFractionRational(P.nodes, vals * P.chords / (2j * math.pi), support=P.contour)


def sup_error(f, R, K):
    """``max_{x in K} |f(x) - R(x)|`` over the net points."""
    if K.dim != 1:
        raise DimensionError("K must be planar")
    ev, _ = evaluator(f, 1)
    return float(np.max(np.abs(ev(K.points) - R.evaluate(K.points))))


@dataclass
class RungeResult:
    rational: PartialFractionRational
    achieved_error: float
    delta: float
    contour: PolygonalContour
    history: list = field(default_factory=list)

    def __iter__(self):
        # unpacks as (rational, achieved_error, delta)
        return iter((self.rational, self.achieved_error, self.delta))

    @property
    def pole_clearance(self):
        return self.contour.clearance


def approximate(f, K, margin, eps, cell=None, max_halvings=MAX_HALVINGS, assume_holomorphic=False, delta0=None):
    """Refine ``delta`` from ``margin / 4`` by halving until ``sup_K |f - R| < eps``.

    ``f`` must be holomorphic on the ``margin``-neighborhood of ``K``; this
    is the caller's assertion and is not checked, except that expressions
    containing ``log`` are refused unless ``assume_holomorphic`` is set.
    Accuracy is measured on the net points only.

    Returns a `RungeResult` (unpackable as ``(R, achieved_error, delta)``);
    ``history`` lists ``(delta, nodes, error)`` per step. Raises
    `ConvergenceError` with the best error when ``max_halvings`` halvings do
    not reach ``eps``.
    """
    eps = float(eps)
    if not (eps > 0):
        raise ArgumentError(f"eps must be positive, got {eps}")
    if not isinstance(K, CompactNet) or K.dim != 1:
        raise DimensionError("K must be a planar CompactNet")
    if isinstance(f, str):
        f = parse(f, 1)
    require_holomorphic(f, assume_holomorphic)
    ev, _ = evaluator(f, 1)
    target = ev(K.points)
    gamma = build_contour(K, margin=margin, cell=cell)
    delta = float(margin) / 4 if delta0 is None else float(delta0)
    history = []
    best = math.inf
    for step in range(max_halvings + 1):
        try:
            P = partition(gamma, delta)
        except ResourceBudgetError as exc:
            raise ConvergenceError(
                f"no approximant within {eps:g}: {exc} (best {best:.3e} at delta={2 * delta:g})", best_error=best
            ) from exc
        R = riemann_sum_rational(f, P)
        err = float(np.max(np.abs(target - R.evaluate(K.points))))
        history.append((delta, len(P), err))
        best = min(best, err)
        if err < eps:
            return RungeResult(R, err, delta, gamma, history)
        if step < max_halvings:
            delta /= 2
    raise ConvergenceError(
        f"no approximant within {eps:g} after {max_halvings} halvings (best {best:.3e})", best_error=best
    )
