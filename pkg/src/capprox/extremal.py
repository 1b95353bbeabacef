"""Lower estimates of the Siciak extremal function and the pluricomplex Green function.

For a polynomial ``p`` of degree ``d >= 1``::

    g_p(z) = |p(z)|^(1/d)   if max_K |p| <= 1,   else 0,

and the estimate of ``Phi_K(z)`` is the largest ``g_p`` over a finite
family. Every value returned here is a lower estimate: the supremum over
all polynomials is not computable. Norms are taken over the net points,
which can overstate the estimate by roughly ``L_p h``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from . import _parallel
from .compactset import CompactNet
from .errors import ArgumentError, DimensionError, UndefinedResultError
from .numeric import FamilySpec, Polynomial, as_points, family_matrix, monomial_matrix, row_degrees

FEASIBILITY_TOL = 1e-12
_CHUNK = 4096
LABEL = "lower estimate"


@dataclass
class ExtremalEstimate:
    """A lower estimate together with the polynomial attaining it.

    For ``kind == "green"`` the value is ``log`` of the Siciak estimate
    stored in ``phi``.
    """

    value: float
    witness: Polynomial
    family: dict
    normalized: bool
    kind: str = "siciak"
    label: str = LABEL
    phi: float = None
    extra: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)

    def to_json(self):
        return {
            "kind": self.kind,
            "label": self.label,
            "value": _json_float(self.value),
            "phi": _json_float(self.phi if self.phi is not None else self.value),
            "normalized": self.normalized,
            "family": self.family,
            "witness": None if self.witness is None else self.witness.to_json(),
        }


def _json_float(x):
    return "inf" if math.isinf(x) and x > 0 else float(x)


def _norm_on(K, p):
    return float(np.max(np.abs(p.evaluate(K.points))))


def g_p(p, K, z):
    """``|p(z)|^(1/deg p)`` when ``max_K |p| <= 1`` (up to 1e-12), else 0."""
    if not isinstance(p, Polynomial):
        raise ArgumentError("g_p needs a Polynomial")
    if p.degree < 1:
        raise ArgumentError("g_p needs a polynomial of degree >= 1")
    if p.dim != K.dim:
        raise DimensionError("polynomial and K dimensions differ")
    pts, single = as_points(z, K.dim)
    if not single:
        raise DimensionError("g_p takes a single point")
    if _norm_on(K, p) > 1 + FEASIBILITY_TOL:
        return 0.0
    return float(abs(p.evaluate(pts)[0]) ** (1.0 / p.degree))


def _scores(absz, norms, deg, normalize):
    with np.errstate(divide="ignore", invalid="ignore"):
        if normalize:
            ratio = np.where(norms > 0, absz / np.where(norms > 0, norms, 1.0), np.where(absz > 0, np.inf, 0.0))
            return ratio ** (1.0 / deg)
        return np.where(norms <= 1 + FEASIBILITY_TOL, absz ** (1.0 / deg), 0.0)


def siciak(K, z, family, normalize=False):
    """Lower estimate of ``Phi_K(z)``: the largest ``g_p`` over ``family``.

    With ``normalize`` each ``p`` is first divided by ``max_K |p|`` so it
    sits on the boundary of the feasible set; a polynomial vanishing on the
    net but not at ``z`` then gives ``inf``. Ties go to the first family
    member. Constants in the family are ignored.
    """
    if not isinstance(K, CompactNet):
        raise ArgumentError("K must be a CompactNet")
    pts, single = as_points(z, K.dim)
    if not single:
        raise DimensionError("siciak takes a single point")
    monos, C, desc = family_matrix(family, K.dim)
    deg = row_degrees(monos, C)
    keep = deg >= 1
    if not np.any(keep):
        raise ArgumentError("family has no polynomial of degree >= 1")
    C, deg = C[keep], deg[keep]
    VK = monomial_matrix(K.points, monos)
    Vz = monomial_matrix(pts, monos)

    def one(rng):
        Cc = C[rng[0]:rng[1]]
        norms = np.abs(np.einsum("nt,pt->np", VK, Cc, optimize=False)).max(axis=0)
        absz = np.abs(np.einsum("nt,pt->np", Vz, Cc, optimize=False))[0]
        s = _scores(absz, norms, deg[rng[0]:rng[1]], normalize)
        i = int(np.argmax(s))
        return s[i], rng[0] + i, norms[i]

    best, best_i, best_norm = -1.0, -1, None
    ranges = _parallel.chunks(len(C), _CHUNK)
    for val, i, nrm in _parallel.ordered_map(one, ranges):
        if val > best:
            best, best_i, best_norm = float(val), i, float(nrm)
    if best > 0:
        witness = Polynomial.from_coefficients(K.dim, monos, C[best_i])
        if normalize and best_norm > 0:
            witness = witness / best_norm
    else:
        witness = None
    return ExtremalEstimate(best, witness, desc, bool(normalize), extra={"family_size": int(len(C))})


def green(K, z, family, normalize=False):
    """``log`` of the Siciak lower estimate (``inf`` when that is ``inf``).

    Values below 0 are reported as they are; a zero estimate (every
    polynomial rejected) raises `UndefinedResultError`.
    """
    est = siciak(K, z, family, normalize)
    if est.value == 0:
        raise UndefinedResultError("every polynomial in the family was rejected; the Green estimate is undefined")
    value = math.inf if math.isinf(est.value) else math.log(est.value)
    return ExtremalEstimate(value, est.witness, est.family, est.normalized, "green", LABEL, est.value, est.extra)


# common families ---------------------------------------------------------------

def monomial_family(max_degree, dim=1):
    """``z_j^k`` for ``k = 1 .. max_degree`` and every variable ``j``."""
    out = []
    for k in range(1, int(max_degree) + 1):
        for j in range(dim):
            alpha = [0] * dim
            alpha[j] = k
            out.append(Polynomial.monomial(alpha))
    return out


def chebyshev_family(max_degree, a=-1.0, b=1.0):
    """Chebyshev polynomials ``T_1 .. T_max_degree`` adapted to the segment ``[a, b]``."""
    a, b = complex(a), complex(b)
    if a == b:
        raise ArgumentError("degenerate segment")
    # affine map of [a, b] onto [-1, 1]: w = (2 z - a - b) / (b - a)
    scale, shift = 2 / (b - a), -(a + b) / (b - a)
    lin = Polynomial.from_univariate([shift, scale])
    out = []
    for k in range(1, int(max_degree) + 1):
        coeffs = npcheb.cheb2poly([0] * k + [1])
        p = Polynomial.constant(0)
        for c in coeffs[::-1]:
            p = p * lin + float(c)
        out.append(p)
    return out


FAMILIES = ("monomial", "chebyshev", "rational")


def make_family(kind, max_degree, dim=1, height=1, segment=(-1, 1)):
    if kind == "monomial":
        return monomial_family(max_degree, dim)
    if kind == "chebyshev":
        if dim != 1:
            raise DimensionError("Chebyshev families are one-variable")
        return chebyshev_family(max_degree, *segment)
    if kind == "rational":
        return FamilySpec(dim, max_degree, height)
    raise ArgumentError(f"unknown family {kind!r}; choose from {FAMILIES}")
