import math

import numpy as np
import pytest

from capprox.compactset import disk
from capprox.errors import ArgumentError, ConvergenceError, PoleProximityError
from capprox.funcparser import parse
from capprox.series import (
    SWAP, SeriesTable, coeff, compact_convergence_check, homogeneous_sum, laurent_table, negative_vanishing_check,
    rotation, rotation_uniqueness_check, shifted, taylor_table,
)


def test_coeff_examples():
    assert abs(coeff("exp(z)", 5, 1.0, 64) - 1 / 120) < 1e-12
    assert abs(coeff("1/(z*(1-z))", -1, 0.5, 256) - 1) < 1e-10
    f = parse("1/(z1*z2)", 2)
    assert abs(coeff(f, (-1, -1), (0.5, 0.5), 64) - 1) < 1e-10
    assert abs(coeff(f, (0, 0), (0.5, 0.5), 64)) < 1e-10


def test_coeff_pole_on_torus():
    with pytest.raises(PoleProximityError):
        coeff("1/(z-1)", 0, 1.0, 64)


def test_taylor_examples():
    t = taylor_table("z^2", 3, 1.0, 64)
    assert abs(t[(2,)] - 1) < 1e-12
    assert all(abs(c) < 1e-12 for nu, c in t.entries.items() if nu != (2,))
    t2 = taylor_table(parse("exp(z1+z2)", 2), 2, 1.0, 64)
    assert abs(t2[(1, 1)] - 1) < 1e-10
    t3 = taylor_table("3-2i", 2, 1.0, 16)
    assert abs(t3[(0,)] - (3 - 2j)) < 1e-12 and all(abs(t3[(k,)]) < 1e-12 for k in (1, 2))


def test_homogeneous_sum_examples():
    t = taylor_table("exp(z)", 6, 1.0, 64)
    p = homogeneous_sum(t, 2)
    for k, c in enumerate([1, 1, 0.5]):
        assert abs(p.coeff((k,)) - c) < 1e-12
    assert homogeneous_sum(t, 0).degree == 0
    with pytest.raises(ArgumentError):
        homogeneous_sum(t, 7)


def test_geometric_tail():
    K = disk(0, 0.5, 0.02)
    t = taylor_table("1/(1-z)", 12, 0.9, 128)
    ev = parse("1/(1-z)")
    for m in range(1, 10):
        err = np.max(np.abs(ev.evaluate(K.points) - homogeneous_sum(t, m).evaluate(K.points)))
        assert err == pytest.approx(2 * 0.5 ** (m + 1), rel=0.10)


def test_convergence_check_examples():
    K = disk(0, 1, 0.05)
    t = taylor_table("exp(z)", 20, 1.0, 64)
    assert compact_convergence_check("exp(z)", t, K, 1e-6).degree <= 12
    assert compact_convergence_check("exp(z)", t, K, 10.0).degree == 0
    t2 = taylor_table("1/(1-z)", 40, 0.999, 128)
    with pytest.raises(ConvergenceError):
        compact_convergence_check("1/(1-z)", t2, disk(0, 0.999, 0.05), 1e-6)


def test_convergence_check_monotone_in_eps():
    K = disk(0, 1, 0.05)
    t = taylor_table("exp(z)", 20, 1.0, 64)
    ms = [compact_convergence_check("exp(z)", t, K, eps).degree for eps in (1e-10, 1e-8, 1e-6, 1e-3, 1e-1)]
    assert ms == sorted(ms, reverse=True)


def test_convergence_check_requires_polydisc():
    t = taylor_table("exp(z)", 5, 0.5, 64)
    with pytest.raises(ArgumentError):
        compact_convergence_check("exp(z)", t, disk(0, 1, 0.1), 1e-3)


def test_negative_vanishing_examples():
    assert negative_vanishing_check(parse("exp(z1)*z2", 2), 3, 1.0, 64) < 1e-10
    assert negative_vanishing_check("1/z", 1, 1.0, 64) >= 1 - 1e-12
    assert negative_vanishing_check("1+z-3*z^4", 3, 1.0, 64) < 1e-12


def test_rotation_examples():
    f = parse("z1^2", 2)
    assert rotation_uniqueness_check(f, np.eye(2), 2, 1.0) < 1e-12
    assert rotation_uniqueness_check(f, SWAP, 2, 1.0) < 1e-10
    g = parse("exp(z1+z2)", 2)
    for m in range(4):
        assert rotation_uniqueness_check(g, rotation(math.pi / 4), m, 1.0) < 1e-8


def test_trapezoid_exactness():
    # Laurent polynomial with |nu| < m/2
    t = laurent_table("2*z^-3 + z^-1 - i + 4*z^2 + z^7", 7, 1.3, 16)
    expect = {-3: 2, -1: 1, 0: -1j, 2: 4, 7: 1}
    for k in range(-7, 8):
        assert abs(t[(k,)] - expect.get(k, 0)) < 1e-12


def test_radius_independence():
    for nu in range(6):
        assert abs(coeff("exp(z)/(z-3)", nu, 0.5) - coeff("exp(z)/(z-3)", nu, 2.0)) < 1e-9


def test_linearity():
    a = coeff("exp(z)", 3, 1.0, 64)
    b = coeff("sin(z)", 3, 1.0, 64)
    c = coeff("2*exp(z) - 3*sin(z)", 3, 1.0, 64)
    assert abs(c - (2 * a - 3 * b)) < 1e-14


def test_laurent_partial_fraction_oracle():
    t = laurent_table("1/(z*(1-z))", 5, 0.5, 256)
    assert abs(t[(-1,)] - 1) < 1e-10
    for k in range(6):
        assert abs(t[(k,)] - 1) < 1e-10


def test_shifted_expansion():
    # expansion of exp about a = 1 has coefficients e/k!
    g = shifted("exp(z)", 1.0)
    for k in range(5):
        assert abs(coeff(g, k, 1.0, 64) - math.e / math.factorial(k)) < 1e-12


def test_node_count_bounds():
    with pytest.raises(ArgumentError):
        coeff("z", 0, 1.0, 4)
    with pytest.raises(ArgumentError):
        taylor_table("z", 10, 1.0, 8)


def test_table_json():
    t = laurent_table("1/z + z", 2, 1.0, 16)
    u = SeriesTable.from_json(t.to_json())
    assert u.entries == t.entries and u.radii == t.radii
