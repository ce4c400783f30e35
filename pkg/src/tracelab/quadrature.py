"""Quadrature rules used throughout the laboratory.

Everything here is standard numerical machinery: Gauss-Legendre rules on
intervals, a stick-breaking tensor rule on the simplex, a moment-coordinate
product rule on the odd sphere S^{2d+1} (exact for torus-symmetric polynomial
integrands at finite degree), and an affine-chart radial rule for the
Fubini-Study volume.  The sphere rule carries the measure normalised so that
the total mass of S^{2d+1} is pi^d/d!; the simplex rule carries plain Lebesgue
measure.
"""

from __future__ import annotations

import math

import numpy as np

# ----------------------------------------------------------------------------
# interval rules
# ----------------------------------------------------------------------------


def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0):
    """Gauss-Legendre nodes and weights transformed to the interval [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (b - a) * (x + 1.0) + a
    weights = 0.5 * (b - a) * w
    return nodes, weights


def circle_rule(n: int):
    """Uniform angles and weights integrating 2*pi-periodic functions.

    Exact for trigonometric polynomials e^{i m phi} with |m| < n.
    """
    angles = 2.0 * np.pi * np.arange(n) / n
    weights = np.full(n, 2.0 * np.pi / n)
    return angles, weights


# ----------------------------------------------------------------------------
# simplex rule (stick-breaking map from the cube)
# ----------------------------------------------------------------------------


def simplex_rule(d: int, degree: int):
    """Nodes and weights on the open simplex {t_i > 0, sum t_i < 1} in R^d.

    Exact (up to rounding) for all polynomials of total degree <= ``degree``.
    Uses the stick-breaking substitution t_1 = s_1, t_i = s_i * prod_{j<i}
    (1 - s_j), whose Jacobian is polynomial, so tensor Gauss-Legendre on the
    cube is exact at finite order.

    Returns
    -------
    nodes : ndarray, shape (m, d)
    weights : ndarray, shape (m,)   (sums to 1/d!)
    """
    if d < 0:
        raise ValueError("dimension must be nonnegative")
    if d == 0:
        return np.zeros((1, 0)), np.ones(1)
    # per-variable polynomial degree after substitution is <= degree + d
    n1 = (degree + d) // 2 + 2
    s, ws = gauss_legendre(n1, 0.0, 1.0)
    grids = np.meshgrid(*([s] * d), indexing="ij")
    wgrids = np.meshgrid(*([ws] * d), indexing="ij")
    weights = np.ones_like(grids[0])
    for wg in wgrids:
        weights = weights * wg
    nodes = np.empty(grids[0].shape + (d,))
    remaining = np.ones_like(grids[0])
    for i in range(d):
        nodes[..., i] = grids[i] * remaining
        remaining = remaining * (1.0 - grids[i])
        if d - 1 - i > 0:  # stick-breaking Jacobian factor
            weights = weights * (1.0 - grids[i]) ** (d - 1 - i)
    return nodes.reshape(-1, d), weights.reshape(-1)


# ----------------------------------------------------------------------------
# sphere rule in moment coordinates
# ----------------------------------------------------------------------------


def sphere_rule(d: int, t_degree: int, phase_degree: int):
    """Product rule on S^{2d+1} in coordinates z_j = sqrt(t_j) e^{i phi_j}.

    The carried measure is the invariant one with total mass pi^d/d! (the
    volume of the unit circle bundle under the conventions of the geometry
    module); in moment coordinates its density is 2^{-d}/(2*pi) with respect
    to dt_1..dt_d dphi_0..dphi_d.

    Exact for integrands of the form (polynomial of degree <= t_degree in the
    moment variables |z_j|^2) times (trigonometric monomials of degree <=
    phase_degree in each angle).

    Returns
    -------
    z : complex ndarray, shape (m, d+1) — points on the unit sphere
    w : ndarray, shape (m,) — weights summing to pi^d/d!
    """
    n_phi = phase_degree + 1
    t_nodes, t_w = simplex_rule(d, t_degree)
    slack = 1.0 - t_nodes.sum(axis=1)
    t_full = np.concatenate([t_nodes, slack[:, None]], axis=1)  # (mt, d+1)

    angles = [2.0 * np.pi * np.arange(n_phi) / n_phi for _ in range(d + 1)]
    phase_grids = np.meshgrid(*angles, indexing="ij")
    phases = np.stack([g.reshape(-1) for g in phase_grids], axis=1)  # (mp, d+1)

    root_t = np.sqrt(t_full)
    z = root_t[:, None, :] * np.exp(1j * phases[None, :, :])
    z = z.reshape(-1, d + 1)
    w_angle = (2.0 * np.pi / n_phi) ** (d + 1)
    w = (2.0 ** (-d) / (2.0 * np.pi)) * t_w[:, None] * w_angle
    w = np.broadcast_to(w, (t_w.size, phases.shape[0])).reshape(-1)
    return z, w.copy()


def sphere_rule_size(d: int, t_degree: int, phase_degree: int) -> int:
    n1 = (t_degree + d) // 2 + 2
    return (n1**d) * (phase_degree + 1) ** (d + 1)


# ----------------------------------------------------------------------------
# Fubini-Study volume oracle (affine chart)
# ----------------------------------------------------------------------------


def fubini_study_volume(d: int, n: int = 200) -> float:
    """Volume of projective d-space by radial quadrature in an affine chart.

    Integrates the affine-chart volume density (1 + |zeta|^2)^{-(d+1)} over
    C^d: the angular part is the exact unit-sphere area of S^{2d-1} and the
    radial integral is evaluated numerically after the compactifying
    substitution u = t/(1-t).  Independent of the moment-coordinate route, so
    it serves as the normalisation oracle (expected value: pi^d/d!).
    """
    if d == 0:
        return 1.0
    t, w = gauss_legendre(n, 0.0, 1.0)
    u = t / (1.0 - t)
    jac = 1.0 / (1.0 - t) ** 2
    radial = np.sum(w * jac * u ** (d - 1) * (1.0 + u) ** (-(d + 1)))
    sphere_area = 2.0 * math.pi**d / math.factorial(d - 1)
    return 0.5 * sphere_area * radial
