"""Numerics on finite nets of compact sets in C^n.

Runge-type rational approximation from Cauchy Riemann sums, Taylor and
Laurent coefficients by torus quadrature, grid approximations of
polynomially and rationally convex hulls, lower estimates of the Siciak
extremal function, and random compact sets over finite sample spaces.
"""

from .compactset import CompactNet, circle, disk, hausdorff, image, make_net, segment, union
from .contour import PolygonalContour, build_contour, cauchy_eval, partition
from .errors import (
    ArgumentError, CapproxError, ConvergenceError, DimensionError, MeasurabilityError, NumericError,
    PoleProximityError, SelectionError,
)
from .extremal import green, siciak
from .funcparser import parse, to_rational
from .hulls import CandidateGrid, poly_hull, rational_hull
from .numeric import FamilySpec, Polynomial, RationalFunction
from .randomness import FiniteSampleSpace, RandomCompactSet, RandomFunctionTable, is_measurable, select_uniform
from .runge import PartialFractionRational, approximate
from .series import coeff, laurent_table, taylor_table

__version__ = "0.1.0"
