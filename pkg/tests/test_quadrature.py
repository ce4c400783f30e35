import math

import numpy as np
import pytest

from tracelab.quadrature import (
    circle_rule,
    fubini_study_volume,
    gauss_legendre,
    simplex_rule,
    sphere_rule,
    sphere_rule_size,
)


def test_gauss_legendre_polynomial_exactness():
    x, w = gauss_legendre(8, 0.0, 1.0)
    for p in range(16):
        assert abs(np.dot(w, x**p) - 1.0 / (p + 1)) < 1e-14


def test_gauss_legendre_interval_transform():
    x, w = gauss_legendre(12, -2.0, 5.0)
    assert abs(w.sum() - 7.0) < 1e-13
    assert abs(np.dot(w, np.exp(x)) - (math.exp(5) - math.exp(-2))) < 1e-9


def test_circle_rule_trig_exactness():
    t, w = circle_rule(9)
    # integrates e^{i m t} exactly to 2*pi*delta_{m,0} for |m| < 9
    for m in range(-8, 9):
        val = np.dot(w, np.exp(1j * m * t))
        assert abs(val - (2.0 * np.pi if m == 0 else 0.0)) < 1e-13


@pytest.mark.parametrize("d", [1, 2, 3])
def test_simplex_rule_volume(d):
    _, w = simplex_rule(d, 6)
    assert abs(w.sum() - 1.0 / math.factorial(d)) < 1e-14


@pytest.mark.parametrize(
    "d,alpha",
    [(1, (3,)), (2, (2, 1)), (2, (0, 4)), (3, (1, 1, 2))],
)
def test_simplex_rule_monomials(d, alpha):
    # int_simplex t^alpha dt = prod(alpha_i!) / (|alpha| + d)!
    nodes, w = simplex_rule(d, 2 * sum(alpha) + 2)
    val = np.dot(w, np.prod(nodes**np.array(alpha), axis=1))
    ref = np.prod([math.factorial(a) for a in alpha]) / math.factorial(sum(alpha) + d)
    assert abs(val - ref) < 1e-14


@pytest.mark.parametrize("d", [1, 2])
def test_sphere_rule_monomial_norms(d):
    k = 3
    z, w = sphere_rule(d, 2 * k + 1, 2 * k + 1)
    for alpha in [(k,) + (0,) * d, (1,) * (d + 1) if d + 1 <= k else (k,) + (0,) * d]:
        alpha = np.array(alpha[: d + 1])
        kk = alpha.sum()
        vals = np.prod(np.abs(z) ** (2 * alpha), axis=1)
        ref = (
            np.pi**d
            * np.prod([math.factorial(a) for a in alpha])
            / math.factorial(kk + d)
        )
        assert abs(np.dot(w, vals) - ref) < 1e-14


def test_sphere_rule_total_mass():
    for d in (1, 2):
        _, w = sphere_rule(d, 5, 3)
        assert abs(w.sum() - np.pi**d / math.factorial(d)) < 1e-13


def test_sphere_rule_size_matches():
    z, w = sphere_rule(1, 7, 6)
    assert sphere_rule_size(1, 7, 6) == len(w) == len(z)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_fubini_study_volume(d):
    assert abs(fubini_study_volume(d) - np.pi**d / math.factorial(d)) < 1e-9
