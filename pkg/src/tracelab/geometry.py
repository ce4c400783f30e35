"""Geometry of the weighted projective models.

The base manifold is projective d-space with the Fubini-Study structure
normalised so that vol = pi^d/d!, carrying the torus Hamiltonian

    f([z]) = sum_i w_i |z_i|^2 / ||z||^2,   w_i positive integers.

All concrete computation happens upstairs on the unit sphere S^{2d+1} in
C^{d+1} (the unit circle bundle of the dual tautological line).  Points are
plain complex ndarrays of shape (..., d+1); the last axis is the homogeneous
coordinate.  A projective point is such a vector up to phase.

The one-parameter group generated by the contact lift of the Hamiltonian
field acts by coordinate phases.  Its exact representation is *calibrated*,
not assumed: `calibrate` integrates the explicitly assembled contact field
(an ODE solve) and selects the sign/shift convention that reproduces it.  On
these models the calibrated flow is z -> exp(-i*tau*diag(w)) z.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    CalibrationError,
    ChartError,
    CleanLocusError,
    PeriodError,
    UncalibratedModelError,
)

_FIX_TOL = 1e-9  # phase tolerance deciding membership of a fixed locus


# ----------------------------------------------------------------------------
# model
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProjectiveModel:
    """Weighted projective model: dimension, weights, lift convention.

    ``lift_sign``/``lift_shift`` encode the calibrated representation of the
    lifted flow, z -> exp(i * lift_sign * tau * (w_j + lift_shift)) z_j.  They
    are ``None`` until `calibrate` has run (or explicit values were supplied).
    """

    dim: int
    weights: tuple
    lift_sign: int | None = None
    lift_shift: float | None = None

    @property
    def calibrated(self) -> bool:
        return self.lift_sign is not None and self.lift_shift is not None

    @property
    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


def make_model(weights, calibration="auto", rng=None) -> ProjectiveModel:
    """Build (and by default calibrate) a weighted projective model.

    Parameters
    ----------
    weights : sequence of positive ints, length d+1
    calibration : "auto" | "none" | {"lift_sign": +-1, "lift_shift": float}
    """
    ws = tuple(int(w) for w in weights)
    if len(ws) < 2 or any(w <= 0 for w in ws):
        raise ValueError("weights must be >= 2 strictly positive integers")
    model = ProjectiveModel(dim=len(ws) - 1, weights=ws)
    if calibration == "auto":
        return calibrate(model, rng=rng)
    if calibration == "none":
        return model
    if isinstance(calibration, dict):
        sign = int(calibration["lift_sign"])
        if sign not in (-1, 1):
            raise ValueError("lift_sign must be +-1")
        return replace(model, lift_sign=sign, lift_shift=float(calibration["lift_shift"]))
    raise ValueError(f"unrecognised calibration value: {calibration!r}")


def random_sphere_point(model: ProjectiveModel, rng) -> np.ndarray:
    z = rng.normal(size=model.dim + 1) + 1j * rng.normal(size=model.dim + 1)
    return z / np.linalg.norm(z)


def check_sphere_point(z: np.ndarray, tol: float = 1e-12) -> None:
    err = abs(np.linalg.norm(z) - 1.0)
    if err > tol:
        raise ValueError(f"point is off the unit sphere by {err:.2e}")


# ----------------------------------------------------------------------------
# Hamiltonian, contact field, flows
# ----------------------------------------------------------------------------


def hamiltonian(model: ProjectiveModel, z: np.ndarray) -> np.ndarray:
    """Weight quotient f = sum w_i |z_i|^2 / ||z||^2; batched over leading axes."""
    z = np.asarray(z)
    t = np.abs(z) ** 2
    return (t * model.weight_array).sum(axis=-1) / t.sum(axis=-1)


def contact_field(model: ProjectiveModel, z: np.ndarray) -> np.ndarray:
    """Value of the contact lift of the Hamiltonian field at sphere points.

    Assembled from its two defining pieces: the horizontal lift of the
    Hamiltonian field of f (the ambient Hamiltonian field -i(diag(w) - f)z of
    the weight quotient, which is tangent to the sphere and already
    horizontal) minus f times the vertical circle generator iz.  The flow
    representation is *not* used here; this field is what `calibrate`
    integrates to fix that representation.
    """
    z = np.asarray(z)
    f = hamiltonian(model, z)[..., None]
    horizontal = -1j * (model.weight_array * z - f * z)
    vertical = 1j * z
    return horizontal - f * vertical


def vertical_pairing(z: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Pairing of a tangent vector with the connection form Im(z_bar . dz)."""
    return np.imag((np.conj(z) * v).sum(axis=-1))


def calibrate(model: ProjectiveModel, rng=None, tol: float = 1e-8) -> ProjectiveModel:
    """Fix the lift convention by integrating the contact field.

    Solves dz/dtau = contact_field(z) from a few random sphere points over
    tau in [0, 1] and compares the endpoints against the candidate phase
    representations exp(i*sign*tau*(w + shift)) for sign in {-1,+1} and shift
    in {-1, 0, +1}.  The unique candidate within ``tol`` wins.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    starts = [random_sphere_point(model, rng) for _ in range(3)]
    w = model.weight_array

    def rhs(_tau, y):
        z = y[: model.dim + 1] + 1j * y[model.dim + 1 :]
        v = contact_field(model, z)
        return np.concatenate([v.real, v.imag])

    endpoints = []
    for z0 in starts:
        y0 = np.concatenate([z0.real, z0.imag])
        sol = solve_ivp(rhs, (0.0, 1.0), y0, rtol=1e-11, atol=1e-12, dense_output=False)
        if not sol.success:
            raise CalibrationError(f"contact-field integration failed: {sol.message}")
        yT = sol.y[:, -1]
        endpoints.append(yT[: model.dim + 1] + 1j * yT[model.dim + 1 :])

    scores = {}
    for sign, shift in itertools.product((-1, 1), (-1.0, 0.0, 1.0)):
        err = 0.0
        for z0, zT in zip(starts, endpoints):
            cand = np.exp(1j * sign * (w + shift)) * z0
            err = max(err, float(np.abs(cand - zT).max()))
        scores[(sign, shift)] = err
    ranked = sorted(scores.items(), key=lambda kv: kv[1])
    (best, best_err), (_, runner_up) = ranked[0], ranked[1]
    if best_err > tol:
        raise CalibrationError(
            f"no lift convention reproduces the integrated flow (best err {best_err:.2e})"
        )
    if runner_up < 10 * tol:
        raise CalibrationError("lift calibration is ambiguous between two conventions")
    return replace(model, lift_sign=best[0], lift_shift=best[1])


def _require_calibrated(model: ProjectiveModel) -> None:
    if not model.calibrated:
        raise UncalibratedModelError("uncalibrated model: run calibrate() first")


def flow_phases(model: ProjectiveModel, tau: float) -> np.ndarray:
    """Per-coordinate phases of the lifted flow at time tau."""
    _require_calibrated(model)
    return np.exp(1j * model.lift_sign * tau * (model.weight_array + model.lift_shift))


def flow_sphere(model: ProjectiveModel, tau: float, z: np.ndarray) -> np.ndarray:
    """Lifted flow on the unit sphere (batched)."""
    return flow_phases(model, tau) * np.asarray(z)


def flow_projective(model: ProjectiveModel, tau: float, z: np.ndarray) -> np.ndarray:
    """Hamiltonian flow downstairs, acting on homogeneous representatives.

    Identical phase action; the result is a representative of the flowed
    projective point (compare with `projective_distance`, not equality).
    """
    return flow_sphere(model, tau, z)


def projective_distance(z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
    """Geodesic Fubini-Study distance: arccos of the correlation modulus."""
    z1 = np.asarray(z1)
    z2 = np.asarray(z2)
    n1 = np.sqrt((np.abs(z1) ** 2).sum(axis=-1))
    n2 = np.sqrt((np.abs(z2) ** 2).sum(axis=-1))
    corr = np.abs((np.conj(z1) * z2).sum(axis=-1)) / (n1 * n2)
    return np.arccos(np.clip(corr, -1.0, 1.0))


def sphere_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Geodesic distance on the unit sphere (real part of the correlation)."""
    corr = np.real((np.conj(x) * y).sum(axis=-1))
    return np.arccos(np.clip(corr, -1.0, 1.0))


# ----------------------------------------------------------------------------
# periods and fixed loci
# ----------------------------------------------------------------------------


def periods(model: ProjectiveModel, tau_max: float):
    """All periods of the lifted flow in (0, tau_max], with isolation flags.

    A time tau is a period when some coordinate phase returns to 1, i.e.
    tau*(w_i + shift) is a multiple of 2*pi.  The rational structure is kept
    exact with fractions; returned values are floats.
    """
    _require_calibrated(model)
    if tau_max <= 0:
        raise ValueError("tau_max must be positive")
    effective = [abs(w + model.lift_shift) for w in model.weights]
    if any(e == 0 for e in effective):
        raise PeriodError("a coordinate is flow-inert; every time is a period")
    fracs = set()
    for e in effective:
        ef = Fraction(e).limit_denominator(10**6)
        k = 1
        while float(2.0 * np.pi * k / e) <= tau_max * (1 + 1e-12):
            fracs.add(Fraction(k, 1) / ef)
            k += 1
    taus = sorted(float(2.0 * np.pi * fr) for fr in fracs)
    if not taus:
        raise PeriodError("no periods in range")
    extended = [0.0] + taus + [taus[-1] + min_period_spacing(model)]
    out = []
    for i, t in enumerate(taus, start=1):
        gap = min(t - extended[i - 1], extended[i + 1] - t)
        out.append((t, bool(gap > 1e-9)))
    return out


def min_period_spacing(model: ProjectiveModel) -> float:
    """A lower bound for the spacing of the period set (exact for one weight)."""
    _require_calibrated(model)
    effective = [abs(w + model.lift_shift) for w in model.weights]
    return 2.0 * np.pi / max(effective) / max(effective)


def period_gap(model: ProjectiveModel, tau0: float) -> float:
    """Distance from tau0 to the nearest other period (0 counts as one)."""
    horizon = abs(tau0) + 4.0 * np.pi
    pts = [0.0] + [t for t, _ in periods(model, horizon)]
    others = [t for t in pts if abs(t - tau0) > 1e-9]
    return min(abs(tau0 - t) for t in others)


@dataclass(frozen=True)
class FixedComponent:
    """One connected component of the fixed locus at a period tau0.

    ``index_set`` holds the coordinates spanning the component; ``f_j`` is its
    complex dimension; ``normal_angles`` are the rotation angles of the
    inverse-time flow differential on the normal lines; ``c_value`` is
    det(id - that differential).  ``m_only`` components are fixed downstairs
    (common nontrivial phase) but not on the sphere bundle, and are excluded
    from trace predictions.  ``f_range`` brackets the Hamiltonian on the
    component.
    """

    tau0: float
    index_set: tuple
    f_j: int
    normal_angles: np.ndarray
    c_value: complex
    f_range: tuple
    m_only: bool = False

    @property
    def normal_dim(self) -> int:
        return len(self.normal_angles)


def fixed_components(model: ProjectiveModel, tau0: float, tol: float = _FIX_TOL):
    """Connected components of the fixed locus at time tau0.

    The component fixed on the sphere bundle (phase exactly 1) comes first
    when present; components fixed only downstairs follow, flagged ``m_only``.
    Raises PeriodError when tau0 fixes nothing upstairs, CleanLocusError when
    a normal angle degenerates.
    """
    _require_calibrated(model)
    phases = flow_phases(model, tau0)
    angles = np.mod(np.angle(phases), 2.0 * np.pi)

    def angdist(a, b):
        return abs((a - b + np.pi) % (2.0 * np.pi) - np.pi)

    groups: list[list[int]] = []
    for i in range(model.dim + 1):
        for g in groups:
            if angdist(angles[i], angles[g[0]]) < tol:
                g.append(i)
                break
        else:
            groups.append([i])

    out = []
    x_group = None
    for g in groups:
        if angdist(angles[g[0]], 0.0) < tol:
            x_group = g
    if x_group is None:
        raise PeriodError(f"tau0={tau0!r} is not a period of the lifted flow")

    weights = model.weight_array
    for g in groups:
        rest = [j for j in range(model.dim + 1) if j not in g]
        # angle of the inverse-time differential relative to the component
        rel = np.array([np.angle(np.conj(phases[j] / phases[g[0]])) for j in rest])
        units = np.exp(1j * rel)
        if rest and np.min(np.abs(1.0 - units)) <= 10 * np.finfo(float).eps:
            raise CleanLocusError("fixed locus not clean: unit normal phase")
        c_value = complex(np.prod(1.0 - units)) if rest else complex(1.0)
        sub = weights[g]
        out.append(
            FixedComponent(
                tau0=float(tau0),
                index_set=tuple(g),
                f_j=len(g) - 1,
                normal_angles=np.mod(rel, 2.0 * np.pi),
                c_value=c_value,
                f_range=(float(sub.min()), float(sub.max())),
                m_only=(g is not x_group),
            )
        )
    out.sort(key=lambda comp: (comp.m_only, comp.index_set))
    return out


# ----------------------------------------------------------------------------
# adapted charts
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HeisenbergChart:
    """Adapted chart at a fixed-locus point of the sphere bundle.

    The map is the great-circle chart

        point(theta, v) = e^{i theta} ( cos|v| * center + sin|v| * xi(v)/|v| )

    with xi(v) the tangent vector with coordinates v in the unitary frame.
    The frame rows split as (tangent-to-fixed-locus, normal): the first
    ``n_tangent`` rows span the fixed directions, the remaining rows the
    normal ones.  Radial distances are exact: the projective distance from
    the center to point(0, v) equals |v| for |v| <= pi/2.
    """

    center: np.ndarray
    frame: np.ndarray  # (d, d+1), rows orthonormal, all orthogonal to center
    n_tangent: int
    tau0: float

    @property
    def dim(self) -> int:
        return self.frame.shape[0]

    @property
    def normal_dim(self) -> int:
        return self.dim - self.n_tangent

    def point(self, theta, v) -> np.ndarray:
        """Chart map; v has shape (d,) or (m, d) complex, theta scalar or (m,)."""
        v = np.asarray(v, dtype=complex)
        single = v.ndim == 1
        vv = v[None, :] if single else v
        r = np.linalg.norm(vv, axis=-1)
        xi = vv @ self.frame
        base = np.cos(r)[:, None] * self.center + np.sinc(r / np.pi)[:, None] * xi
        th = np.asarray(theta, dtype=float)
        phase = np.exp(1j * th)
        out = phase * base if th.ndim == 0 else phase[:, None] * base
        return out[0] if single else out

    def normal_point(self, u, theta: float = 0.0) -> np.ndarray:
        """Chart point displaced along the normal factor only."""
        u = np.asarray(u, dtype=complex)
        single = u.ndim == 1
        uu = u[None, :] if single else u
        v = np.zeros(uu.shape[:-1] + (self.dim,), dtype=complex)
        v[..., self.n_tangent :] = uu
        out = self.point(theta, v)
        return out[0] if single else out

    def coords(self, y: np.ndarray):
        """Inverse chart: (theta, v) with point(theta, v) = y, |v| < pi/2."""
        c = np.vdot(self.center, y)
        theta = float(np.angle(c))
        r = float(np.arccos(np.clip(abs(c), -1.0, 1.0)))
        if r < 1e-14:
            return theta, np.zeros(self.dim, dtype=complex)
        eta = (np.exp(-1j * theta) * y - np.cos(r) * self.center) / np.sin(r)
        v = r * (self.frame.conj() @ eta)
        return theta, v


def heisenberg_chart(model: ProjectiveModel, x0: np.ndarray, tau0: float) -> HeisenbergChart:
    """Adapted chart at x0 for the period tau0 (x0 must be fixed upstairs)."""
    _require_calibrated(model)
    x0 = np.asarray(x0, dtype=complex)
    check_sphere_point(x0, tol=1e-10)
    if np.abs(flow_sphere(model, tau0, x0) - x0).max() > 1e-9:
        raise ChartError("chart center is not on the fixed locus of this period")
    phases = flow_phases(model, tau0)
    fixed_idx = [i for i in range(model.dim + 1) if abs(phases[i] - 1.0) < _FIX_TOL]
    normal_idx = [i for i in range(model.dim + 1) if i not in fixed_idx]

    rows = []
    # tangent block: coordinate directions inside the component, minus x0
    for i in fixed_idx:
        e = np.zeros(model.dim + 1, dtype=complex)
        e[i] = 1.0
        v = e - np.vdot(x0, e) * x0
        for r in rows:
            v = v - np.vdot(r, v) * r
        nv = np.linalg.norm(v)
        if nv > 1e-10:
            rows.append(v / nv)
    n_tangent = len(rows)
    if n_tangent != len(fixed_idx) - 1:
        raise ChartError("degenerate tangent frame at chart center")
    for j in normal_idx:
        e = np.zeros(model.dim + 1, dtype=complex)
        e[j] = 1.0
        # x0 is supported on fixed_idx, so this is e_j up to rounding
        v = e - np.vdot(x0, e) * x0
        for r in rows:
            v = v - np.vdot(r, v) * r
        rows.append(v / np.linalg.norm(v))
    frame = np.array(rows)
    return HeisenbergChart(center=x0, frame=frame, n_tangent=n_tangent, tau0=float(tau0))


def flow_differential_normal(
    model: ProjectiveModel,
    component: FixedComponent,
    x0: np.ndarray,
    h: float = 1e-5,
) -> np.ndarray:
    """Matrix of the inverse-time flow differential on the normal space.

    Computed by Richardson-extrapolated central differences of the chart
    representation of the flow — no weight bookkeeping enters.  The result is
    unitary to ~1e-8 and satisfies det(id - A) = component.c_value.
    """
    if component.m_only:
        raise CleanLocusError("normal differential requested on a base-only component")
    chart = heisenberg_chart(model, x0, component.tau0)
    c = chart.normal_dim
    if c == 0:
        return np.zeros((0, 0), dtype=complex)

    def image(u: np.ndarray) -> np.ndarray:
        y = flow_sphere(model, -component.tau0, chart.normal_point(u))
        _, v = chart.coords(y)
        return v[chart.n_tangent :]

    A = np.zeros((c, c), dtype=complex)
    for a in range(c):
        e = np.zeros(c, dtype=complex)

        def deriv(step: float) -> np.ndarray:
            e[a] = step
            plus = image(e)
            e[a] = -step
            minus = image(e)
            e[a] = 0.0
            return (plus - minus) / (2.0 * step)

        d1, d2 = deriv(h), deriv(h / 2.0)
        dx = (4.0 * d2 - d1) / 3.0
        # holomorphy check along the imaginary direction

        def ideriv(step: float) -> np.ndarray:
            e[a] = 1j * step
            plus = image(e)
            e[a] = -1j * step
            minus = image(e)
            e[a] = 0.0
            return (plus - minus) / (2.0 * step)

        i1, i2 = ideriv(h), ideriv(h / 2.0)
        dy = (4.0 * i2 - i1) / 3.0
        if np.abs(dy - 1j * dx).max() > 1e-6:
            raise CleanLocusError("flow differential is not complex-linear on the normal space")
        A[:, a] = dx

    if np.abs(A.conj().T @ A - np.eye(c)).max() > 1e-8:
        raise CleanLocusError("normal differential failed the unitarity check")
    det_err = abs(np.linalg.det(np.eye(c) - A) - component.c_value)
    if det_err > 1e-6 * max(1.0, abs(component.c_value)):
        raise CleanLocusError(f"det(id - A) disagrees with the component value by {det_err:.2e}")
    return A
