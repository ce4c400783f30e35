"""Closed-form asymptotic predictions and their independent numerical oracles.

Four families live here:

* the universal quadratic off-diagonal phase `psi2` and the local leading
  term `predict_local` for the scaled diagonal kernel at a fixed-locus point;
* the global per-component leading term `predict_global_component`, with the
  Hamiltonian integral over the component computed by simplex quadrature;
* the Gaussian normal integral over C^c with its closed form
  pi^c/det(id - A), checked against tensor Gauss-Legendre quadrature in
  eigen-rotated coordinates and against a whitened quasi-Monte Carlo
  estimate;
* the truncated-phase stationary point check (closed-form critical point,
  gradient residual, finite-difference Hessian determinant).

Higher-order expansion coefficients are never symbolic inputs: `fit_expansion`
recovers them as least-squares numbers from scan reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import (
    CleanLocusError,
    DegenerateDirectionError,
    FitError,
    QuadratureError,
)
from .geometry import (
    FixedComponent,
    HeisenbergChart,
    ProjectiveModel,
    contact_field,
    flow_differential_normal,
    hamiltonian,
)
from .quadrature import gauss_legendre, simplex_rule
from .reports import ScanReport
from .windows import Window


# ----------------------------------------------------------------------------
# psi2 and the local prediction
# ----------------------------------------------------------------------------


def psi2(u, w) -> complex | np.ndarray:
    """Quadratic off-diagonal phase i*Im<u,w> - 0.5*||u-w||^2.

    Accepts vectors of equal length, batched over leading axes.  The real
    part is always <= 0 and psi2(u, u) = 0.
    """
    u = np.asarray(u, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if u.shape[-1] != w.shape[-1]:
        raise ValueError("psi2 arguments must have equal dimension")
    herm = (u * np.conj(w)).sum(axis=-1)
    sq = (np.abs(u - w) ** 2).sum(axis=-1)
    return 1j * herm.imag - 0.5 * sq


@dataclass(frozen=True, eq=False)
class LocalPrediction:
    """Inputs of the local leading term at a fixed-locus point.

    ``f_center`` is the Hamiltonian value at the base point, ``normal_map``
    the unitary matrix of the inverse-time flow differential on the normal
    space, ``chi_tau0`` the window value at the period.
    """

    tau0: float
    f_center: float
    dim: int
    f_j: int
    normal_map: np.ndarray
    chi_tau0: float

    @property
    def normal_dim(self) -> int:
        return self.normal_map.shape[0]


def local_prediction(
    model: ProjectiveModel,
    component: FixedComponent,
    x0: np.ndarray,
    window: Window,
) -> LocalPrediction:
    """Assemble the local-prediction data at x0 on the given component."""
    A = flow_differential_normal(model, component, x0)
    return LocalPrediction(
        tau0=component.tau0,
        f_center=float(hamiltonian(model, x0)),
        dim=model.dim,
        f_j=component.f_j,
        normal_map=A,
        chi_tau0=float(window.value(component.tau0)),
    )


def predict_local(pred: LocalPrediction, u, lam) -> np.ndarray:
    """Leading term of the scaled diagonal kernel at normal displacement u.

    Value:  2*pi * e^{-i lam tau0} / f^{d+1} * (lam/pi)^d
            * exp(psi2(A u, u)/f) * chi(tau0),
    batched over lam.  The modulus decays in u like a Gaussian whose rate is
    controlled by the spectral gap of id - A.
    """
    A = pred.normal_map
    c = pred.normal_dim
    u = np.asarray(u, dtype=complex)
    if u.shape[-1:] != (c,):
        raise ValueError(f"u must have normal dimension {c}")
    if u.ndim > 1 and np.ndim(lam) != 0:
        raise ValueError("batched u requires scalar lam")
    if c and abs(np.linalg.det(np.eye(c) - A)) < 1e-12:
        raise CleanLocusError("locus not clean: id - A is singular")
    lam = np.asarray(lam, dtype=float)
    f = pred.f_center
    gauss = np.exp(psi2(u @ A.T, u) / f) if c else 1.0
    return (
        2.0
        * np.pi
        * np.exp(-1j * lam * pred.tau0)
        / f ** (pred.dim + 1)
        * (lam / np.pi) ** pred.dim
        * gauss
        * pred.chi_tau0
    )


# ----------------------------------------------------------------------------
# global (per-component) prediction
# ----------------------------------------------------------------------------


def component_f_integral(model: ProjectiveModel, component: FixedComponent, degree: int = 120):
    """integral over the component of f^{-(f_j+1)} against its volume form.

    In moment coordinates the component's Fubini-Study measure is uniform
    with density pi^{f_j} on the sub-simplex spanned by its weights, so the
    integral reduces to simplex quadrature of a smooth positive rational
    function.  A refinement step certifies convergence.
    """
    if component.m_only:
        raise CleanLocusError("trace predictions exclude base-only components")
    sub = model.weight_array[list(component.index_set)]
    fj = component.f_j
    if fj == 0:
        return 1.0 / float(sub[0])

    def quad(deg):
        nodes, wts = simplex_rule(fj, deg)
        slack = 1.0 - nodes.sum(axis=1)
        fvals = nodes @ sub[:-1] + slack * sub[-1]
        return float(np.pi**fj * (wts * fvals ** (-(fj + 1))).sum())

    a, b = quad(degree), quad(degree + 24)
    if abs(a - b) > 1e-11 * abs(b):
        raise QuadratureError(f"component integral not converged: {abs(a - b):.2e}")
    return b


def predict_global_component(
    component: FixedComponent,
    window: Window,
    lam,
    f_integral: float | None = None,
    model: ProjectiveModel | None = None,
) -> np.ndarray:
    """Leading term of the component's contribution to the smoothed trace.

    2*pi e^{-i lam tau0} (lam/pi)^{f_j} chi(tau0)/c_value * f_integral;
    the integral is computed on demand when a model is supplied.
    """
    if component.m_only:
        raise CleanLocusError("trace predictions exclude base-only components")
    if f_integral is None:
        if model is None:
            raise ValueError("need f_integral or a model to compute it")
        f_integral = component_f_integral(model, component)
    lam = np.asarray(lam, dtype=float)
    chi = float(window.value(component.tau0))
    return (
        2.0
        * np.pi
        * np.exp(-1j * lam * component.tau0)
        * (lam / np.pi) ** component.f_j
        * chi
        / component.c_value
        * f_integral
    )


# ----------------------------------------------------------------------------
# Gaussian normal integral
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianIntegralResult:
    closed_form: complex
    quadrature: complex
    quadrature_rel_error: float
    qmc: complex | None
    qmc_rel_error: float | None

    @property
    def rel_error(self) -> float:
        return self.quadrature_rel_error


def gaussian_normal_integral(
    A: np.ndarray,
    nodes_cap: int = 1400,
    qmc_log2: int = 16,
    qmc_scrambles: int = 4,
    seed: int = 0,
    with_qmc: bool | None = None,
    rng=None,
) -> GaussianIntegralResult:
    """Closed form pi^c/det(id-A) for the normal Gaussian integral, with oracles.

    The integral of exp(psi2(Av, v)) over C^c.  The quadrature oracle
    diagonalises the unitary matrix (complex Schur form), rotates coordinates
    (Lebesgue-invariant), and evaluates a literal 2-d tensor Gauss-Legendre
    integral of the psi2 integrand on each eigenline; for c = 1 no rotation
    happens at all.  A whitened scrambled-Sobol QMC estimate (Cholesky of the
    realified quadratic form, inverse-normal map) is recorded alongside for
    c <= 4; it is less accurate than the quadrature and kept as a second,
    structurally different cross-check.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    c = A.shape[0]
    if c == 0:
        return GaussianIntegralResult(1.0 + 0j, 1.0 + 0j, 0.0, None, None)
    det = np.linalg.det(np.eye(c) - A)
    if abs(det) < 1e-10:
        raise CleanLocusError("non-clean matrix: det(id - A) vanishes")
    rng = np.random.default_rng(seed) if rng is None else rng
    for _ in range(20):
        v = rng.normal(size=c) + 1j * rng.normal(size=c)
        r = psi2(A @ v, v).real
        if r > -1e-12 * np.linalg.norm(v) ** 2:
            raise CleanLocusError("integral not absolutely convergent: psi2 real part degenerate")
    closed = np.pi**c / det

    # --- tensor quadrature in eigen-rotated coordinates ---
    T, U = schur(A, output="complex")
    eigs = np.diag(T)
    if np.abs(A - (U * eigs) @ U.conj().T).max() > 1e-10:
        raise QuadratureError("eigen-rotation failed (matrix not normal?)")
    quadrature = 1.0 + 0.0j
    for mu in eigs:
        quadrature *= _line_integral(complex(mu), nodes_cap)
    rel_q = abs(quadrature - closed) / abs(closed)

    # --- whitened QMC estimate ---
    if with_qmc is None:
        with_qmc = c <= 4
    qmc_val = qmc_rel = None
    if with_qmc:
        qmc_val = _whitened_qmc(A, qmc_log2, qmc_scrambles, seed)
        qmc_rel = abs(qmc_val - closed) / abs(closed)
    return GaussianIntegralResult(complex(closed), complex(quadrature), float(rel_q), qmc_val, qmc_rel)


def _line_integral(mu: complex, nodes_cap: int) -> complex:
    """2-d Gauss-Legendre integral of exp(psi2(mu*v, v)) over one complex line."""
    decay = 1.0 - mu.real  # = 0.5*|mu-1|^2 + ... >= (1-cos phi), the Gaussian rate
    if decay <= 0:
        raise CleanLocusError("non-clean matrix: eigenline without decay")
    R = math.sqrt(82.0 / decay)
    freq = abs(mu.imag) * R * R
    n = min(int(0.45 * freq) + 90, nodes_cap)
    x, w = gauss_legendre(n, -R, R)
    X, Y = np.meshgrid(x, x, indexing="ij")
    V = (X + 1j * Y).reshape(-1, 1)
    vals = np.exp(psi2(mu * V, V))
    return complex(vals.reshape(n, n).dot(w).dot(w))


def _whitened_qmc(A: np.ndarray, log2_n: int, scrambles: int, seed: int) -> complex:
    c = A.shape[0]
    B = A - np.eye(c)
    G = B.conj().T @ B
    M = np.block([[G.real, -G.imag], [G.imag, G.real]])
    L = np.linalg.cholesky(M)
    Linv_T = np.linalg.inv(L).T
    norm = (2.0 * np.pi) ** c / math.sqrt(np.linalg.det(M))
    estimates = []
    for s in range(scrambles):
        eng = qmc.Sobol(2 * c, scramble=True, seed=seed + 7919 * s)
        Y = ndtri(np.clip(eng.random(2**log2_n), 1e-15, 1.0 - 1e-15))
        Uu = Y @ Linv_T.T
        V = Uu[:, :c] + 1j * Uu[:, c:]
        phase = np.einsum("ij,jk,ik->i", np.conj(V), A, V).imag
        estimates.append(np.exp(1j * phase).mean())
    return complex(np.mean(estimates) * norm)


# ----------------------------------------------------------------------------
# stationary point of the truncated phase
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class StationaryCheck:
    pairing: float
    seed_point: np.ndarray
    refined_point: np.ndarray
    grad_norm_at_seed: float
    hessian_det: complex
    expected_det: float

    @property
    def det_rel_error(self) -> float:
        return abs(self.hessian_det - self.expected_det) / abs(self.expected_det)


def _horizontal_frame(x0: np.ndarray) -> np.ndarray:
    """Deterministic unitary frame of the orthogonal complement of x0."""
    n = x0.size
    rows = []
    for i in range(n):
        e = np.zeros(n, dtype=complex)
        e[i] = 1.0
        v = e - np.vdot(x0, e) * x0
        for r in rows:
            v = v - np.vdot(r, v) * r
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            rows.append(v / nv)
    if len(rows) != n - 1:
        raise ValueError("frame construction failed")
    return np.array(rows)


def covector_pairing(model: ProjectiveModel, x0: np.ndarray, omega: np.ndarray) -> float:
    """Pairing of the contact field with a covector (omega_0, omega_horizontal).

    omega has length 1 + 2d: the vertical component omega_0 followed by the
    real coordinates of the horizontal covector in the standard frame.  At a
    flow-fixed x0 the field is purely vertical and the pairing is
    -f(x0)*omega_0.
    """
    d = model.dim
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (1 + 2 * d,):
        raise ValueError(f"omega must have length {1 + 2*d}")
    f = float(hamiltonian(model, x0))
    field = contact_field(model, x0)
    horizontal = field + f * (1j * x0)  # remove the vertical part
    frame = _horizontal_frame(x0)
    coords = frame.conj() @ horizontal
    pairing = -f * omega[0]
    pairing += float(np.dot(coords.real, omega[1::2]) + np.dot(coords.imag, omega[2::2]))
    return pairing


def _phase_gradient(point: np.ndarray, omega0: float, q: float) -> np.ndarray:
    theta, t, tau, r = point
    return np.array(
        [
            -r * omega0 + t * np.exp(1j * theta),
            1j * (1.0 - np.exp(1j * theta)),
            -r * q - 1.0,
            -theta * omega0 - tau * q,
        ],
        dtype=complex,
    )


def _phase_hessian_analytic(point: np.ndarray, omega0: float, q: float) -> np.ndarray:
    theta, t, tau, r = point
    e = np.exp(1j * theta)
    H = np.zeros((4, 4), dtype=complex)
    H[0, 0] = 1j * t * e
    H[0, 1] = H[1, 0] = e
    H[0, 3] = H[3, 0] = -omega0
    H[2, 3] = H[3, 2] = -q
    return H


def stationary_point_check(
    model: ProjectiveModel,
    x0: np.ndarray,
    omega: np.ndarray,
    fd_step: float = 3e-6,
) -> StationaryCheck:
    """Verify the closed-form stationary point of the truncated trace phase.

    The phase in the variables (theta, t, tau, r) is

        Psi = -r*theta*omega_0 - tau*r*q + i*t*(1 - e^{i theta}) - tau,

    with q the contact/covector pairing at x0 (the quadratic-in-tau remainder
    is dropped; the closed form is stated for this truncation).  The check
    confirms the gradient vanishes at (0, -omega_0/q, 0, -1/q), refines by
    Newton, and compares the finite-difference Hessian determinant against
    q^2 (the lambda-normalised closed form).
    """
    omega = np.asarray(omega, dtype=float)
    q = covector_pairing(model, x0, omega)
    if q >= 0:
        raise DegenerateDirectionError("degenerate direction: pairing must be negative")
    omega0 = float(omega[0])
    seed = np.array([0.0, -omega0 / q, 0.0, -1.0 / q], dtype=complex)
    grad0 = _phase_gradient(seed, omega0, q)
    point = seed.copy()
    for _ in range(8):
        g = _phase_gradient(point, omega0, q)
        if np.linalg.norm(g) < 1e-14:
            break
        point = point - np.linalg.solve(_phase_hessian_analytic(point, omega0, q), g)

    # finite-difference Hessian with one Richardson step
    def fd_hessian(h: float) -> np.ndarray:
        H = np.zeros((4, 4), dtype=complex)
        for j in range(4):
            step = np.zeros(4, dtype=complex)
            step[j] = h
            H[:, j] = (
                _phase_gradient(point + step, omega0, q)
                - _phase_gradient(point - step, omega0, q)
            ) / (2.0 * h)
        return H

    H1, H2 = fd_hessian(fd_step), fd_hessian(fd_step / 2.0)
    H = (4.0 * H2 - H1) / 3.0
    return StationaryCheck(
        pairing=q,
        seed_point=seed.real,
        refined_point=point,
        grad_norm_at_seed=float(np.linalg.norm(grad0)),
        hessian_det=complex(np.linalg.det(H)),
        expected_det=q * q,
    )


# ----------------------------------------------------------------------------
# expansion fitting
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray
    residuals: np.ndarray  # rms residual after fitting 0..n terms
    measured_slope: float
    half_powers: bool

    @property
    def leading(self) -> complex:
        return complex(self.coefficients[0]) if self.coefficients.size else 0j


def fit_expansion(scan, half_powers: bool = True, n_terms: int = 3) -> FitResult:
    """Least-squares correction coefficients of an exact/predicted ratio scan.

    Fits ratio - 1 = sum_{j=1..n} c_j * grid^{-j/2} (or grid^{-j} when
    ``half_powers`` is false).  Accepts a ScanReport (uses its grid/ratios)
    or a (grid, ratios) pair.  Returns the coefficients at the largest order
    together with the rms residual after each order and the measured log-log
    slope of |ratio - 1| (the empirical first-correction exponent).
    """
    if isinstance(scan, ScanReport):
        grid, ratios = scan.grid, scan.ratios
    else:
        grid, ratios = scan
        grid = np.asarray(grid, dtype=float)
        ratios = np.asarray(ratios, dtype=complex)
    if grid.size < n_terms + 2:
        raise FitError("ill-conditioned fit: not enough grid points")
    y = ratios - 1.0
    step = 0.5 if half_powers else 1.0
    powers = -step * np.arange(1, n_terms + 1)
    V = grid[:, None] ** powers
    if np.linalg.cond(V) > 1e12:
        raise FitError("ill-conditioned fit: Vandermonde condition number too large")
    residuals = [float(np.sqrt(np.mean(np.abs(y) ** 2)))]
    coeffs = np.zeros(0, dtype=complex)
    for n in range(1, n_terms + 1):
        coeffs, *_ = np.linalg.lstsq(V[:, :n], y, rcond=None)
        res = y - V[:, :n] @ coeffs
        residuals.append(float(np.sqrt(np.mean(np.abs(res) ** 2))))
        if residuals[-1] > 2.0 * residuals[-2] + 1e-15:
            raise FitError("ill-conditioned fit: residual grew when adding a term")
    good = np.abs(y) > 0
    if good.sum() >= 2:
        slope = float(np.polyfit(np.log(grid[good]), np.log(np.abs(y[good])), 1)[0])
    else:
        slope = float("nan")
    return FitResult(
        coefficients=coeffs,
        residuals=np.array(residuals),
        measured_slope=slope,
        half_powers=half_powers,
    )
