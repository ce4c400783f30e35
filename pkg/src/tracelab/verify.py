"""Acceptance suite: eleven numbered criteria with measured tolerances.

Each criterion is a standalone function taking the shared resources and
returning a CriterionResult; ``run_all`` executes them in order, prints one
pass/fail line per criterion, and writes a JSON manifest.  Exit code is
nonzero when any criterion fails.

Criterion 8's slope clause is *expected* to fail on every model this
laboratory can build: the time-tau0 flow element acts as -1 on the chart's
normal directions while fixing the base point and commuting with the kernel,
so the diagonal is exactly even in u and no odd fractional-power term exists
to fit.  The suite reports that failure honestly rather than weakening the
check; the even-part and u=0 clauses still run.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from pathlib import Path

import numpy as np

from .asymptotics import (
    fit_expansion,
    gaussian_normal_integral,
    local_prediction,
    predict_global_component,
    predict_local,
    psi2,
    stationary_point_check,
)
from .geometry import fixed_components, heisenberg_chart, make_model
from .oracles import poisson_trace
from .quadrature import fubini_study_volume, gauss_legendre
from .smoothing import (
    negative_lambda_scan,
    offlocus_decay_scan,
    parity_split,
    scaled_diagonal_scan,
    smoothed_kernel_diagonal,
    smoothed_trace,
)
from .spectral import eigendata, multi_indices, szego_diagonal, toeplitz_matrix
from .windows import Window

K_MAX_VERIFY = 660  # covers kernel scans to lambda = 600 at 1e-10 tail tolerance
SIGMA = 0.15


@dataclasses.dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    measured: dict
    tolerance: str
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        nums = ", ".join(f"{k}={v:.3g}" for k, v in self.measured.items())
        return f"[{self.index:2d}/11] {status} {self.name}: {nums} ({self.seconds:.1f}s)"


class _Shared:
    """Lazily built resources shared between criteria."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.model = make_model((1, 2))
        self._pkg = None
        self._chart = None

    @property
    def pkg(self):
        if self._pkg is None:
            self._pkg = eigendata(self.model, K_MAX_VERIFY)
        return self._pkg

    @property
    def chart(self):
        if self._chart is None:
            comp = self.x_component(np.pi)
            x0 = np.zeros(2, dtype=complex)
            x0[comp.index_set[0]] = 1.0
            self._chart = heisenberg_chart(self.model, x0, np.pi)
        return self._chart

    def x_component(self, tau0):
        return [c for c in fixed_components(self.model, tau0) if not c.m_only][0]


def _random_sphere_point(rng, n):
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return z / np.linalg.norm(z)


# ----------------------------------------------------------------------------


def crit_01_spectral_structure(sh: _Shared) -> CriterionResult:
    """Quadrature-assembled operators are diagonal with affine eigenvalue law."""
    t0 = time.time()
    model = sh.model
    off_max = 0.0
    rows, vals = [], []
    for k in range(61):
        op = toeplitz_matrix(model, k, route="quadrature")
        n = op.shape[0]
        if n > 1:
            off = op - np.diag(np.diag(op))
            off_max = max(off_max, float(np.abs(off).max()))
        alphas = multi_indices(model.dim, k)
        rows.append(alphas)
        vals.append(np.diag(op).real)
    design = np.vstack(rows).astype(float)
    design = np.column_stack([design, np.ones(len(design))])
    coeffs, *_ = np.linalg.lstsq(design, np.concatenate(vals), rcond=None)
    resid = float(np.abs(design @ coeffs - np.concatenate(vals)).max())
    dt = time.time() - t0
    return CriterionResult(
        1,
        "spectral structure (k <= 60, quadrature route)",
        off_max < 1e-8 and resid < 1e-8 and dt < 60.0,
        {"off_diag_max": off_max, "affine_residual": resid, "runtime_s": dt},
        "off-diag < 1e-8, residual < 1e-8, runtime < 60 s",
        detail=f"affine law coefficients {np.round(coeffs, 12).tolist()}",
        seconds=dt,
    )


def crit_02_normalization_anchors(sh: _Shared) -> CriterionResult:
    """Section dimensions, Szego diagonal constancy, Fubini-Study volumes."""
    t0 = time.time()
    rng = np.random.default_rng(sh.seed + 2)
    dims_ok = all(
        len(multi_indices(1, k)) == math.comb(k + 1, 1) for k in range(61)
    ) and all(len(multi_indices(2, k)) == math.comb(k + 2, 2) for k in range(21))
    szego_dev = 0.0
    for model, k in ((sh.model, 40), (make_model((1, 1, 2)), 12)):
        pkg = eigendata(model, k)
        pts = np.array([_random_sphere_point(rng, model.dim + 1) for _ in range(50)])
        diag = szego_diagonal(pkg, k, pts)
        szego_dev = max(szego_dev, float(np.abs(diag / diag.mean() - 1.0).max()))
    vol_err = 0.0
    for d in (1, 2):
        vol_err = max(
            vol_err,
            abs(fubini_study_volume(d) - np.pi**d / math.factorial(d)),
        )
    dt = time.time() - t0
    return CriterionResult(
        2,
        "normalization anchors (dims, Szego diagonal, volumes)",
        dims_ok and szego_dev < 1e-6 and vol_err < 1e-8,
        {"szego_rel_dev": szego_dev, "volume_abs_err": vol_err, "dims_exact": float(dims_ok)},
        "dims exact, Szego < 1e-6 rel, vol < 1e-8 (d = 1, 2)",
        seconds=dt,
    )


def crit_03_negative_lambda(sh: _Shared) -> CriterionResult:
    """Smoothed trace decays super-polynomially as lambda -> -infinity."""
    t0 = time.time()
    win = Window("gaussian", 0.0, SIGMA)
    at50 = abs(smoothed_trace(sh.pkg, win, -50.0).value)
    rep = negative_lambda_scan(sh.pkg, win, np.geomspace(-200.0, -20.0, 12))
    slope = rep.fits.get("decay_exponent", 0.0)
    dt = time.time() - t0
    return CriterionResult(
        3,
        "negative-lambda decay",
        at50 < 1e-8 and slope < -6.0,
        {"abs_at_-50": at50, "loglog_slope": slope},
        "|trace(-50)| < 1e-8, slope < -6 on [-200, -20]",
        seconds=dt,
    )


def crit_04_global_trace_trivial_period(sh: _Shared) -> CriterionResult:
    """Trace at tau0 = 0 matches pi*lambda with a 1 + c/lambda correction."""
    t0 = time.time()
    win = Window("gaussian", 0.0, SIGMA)
    grid = np.linspace(150.0, 400.0, 26)
    exact = np.array([smoothed_trace(sh.pkg, win, float(l)).value for l in grid])
    ratios = exact / (np.pi * grid * win.center_value)
    in_band = float(np.abs(ratios - 1.0).max())
    fit = fit_expansion((grid, ratios), half_powers=False, n_terms=1)
    cross = abs(
        smoothed_trace(sh.pkg, win, 300.5).value - poisson_trace((1, 2), win, 300.5)
    ) / abs(poisson_trace((1, 2), win, 300.5))
    dt = time.time() - t0
    return CriterionResult(
        4,
        "global trace, trivial period (tau0 = 0)",
        in_band < 0.05 and fit.residuals[-1] < 1e-3,
        {
            "max_ratio_dev": in_band,
            "fit_residual": fit.residuals[-1],
            "c_coefficient": fit.leading.real,
            "poisson_rel": cross,
        },
        "ratio in [0.95, 1.05] on [150, 400], 1 + c/lambda residual < 1e-3",
        detail="denominator pi*lambda*chi(0) from the lattice-density oracle",
        seconds=dt,
    )


def crit_05_global_trace_pi_period(sh: _Shared) -> CriterionResult:
    """Oscillatory trace component at tau0 = pi has the predicted magnitude."""
    t0 = time.time()
    win = Window("gaussian", np.pi, SIGMA)
    target = (np.pi / 2.0) * win.value(np.pi)
    rel_mag = 0.0
    rel_poisson = 0.0
    for lam in (299.75, 300.25, 300.5, 301.0):
        val = smoothed_trace(sh.pkg, win, lam).value
        rel_mag = max(rel_mag, abs(abs(val) - target) / target)
        ref = poisson_trace((1, 2), win, lam)
        rel_poisson = max(rel_poisson, abs(val - ref) / abs(ref))
    dt = time.time() - t0
    return CriterionResult(
        5,
        "global trace, nontrivial period (tau0 = pi)",
        rel_mag < 0.10 and rel_poisson < 0.01,
        {"magnitude_rel_err": rel_mag, "poisson_rel_err": rel_poisson},
        "|trace| vs (pi/2) chi(pi) < 10%, Poisson cross-check < 1%",
        seconds=dt,
    )


def crit_06_local_scaling(sh: _Shared) -> CriterionResult:
    """Scaled diagonal matches the local prediction with half-power ladder."""
    t0 = time.time()
    win = Window("gaussian", np.pi, SIGMA)
    chart = sh.chart
    grid = np.geomspace(100.0, 560.0, 12)
    i300 = int(np.argmin(np.abs(grid - 300.0)))
    reports = {}
    for uval in (0.0, 0.5, 1.0):
        u = np.array([uval], dtype=complex)
        reports[uval] = scaled_diagonal_scan(sh.pkg, win, chart, u, grid)
    ratio_dev = max(abs(abs(rep.ratios[i300]) - 1.0) for rep in reports.values())
    comp = sh.x_component(np.pi)
    pred = local_prediction(sh.model, comp, chart.center, win)
    profile_err = 0.0
    s0 = abs(reports[0.0].exact[i300])
    for uval in (0.5, 1.0):
        u = np.array([uval], dtype=complex)
        expected = math.exp(psi2(pred.normal_map @ u, u).real / pred.f_center)
        got = abs(reports[uval].exact[i300]) / s0
        profile_err = max(profile_err, abs(got / expected - 1.0))
    fit = fit_expansion(reports[0.0], half_powers=True, n_terms=2)
    slope = fit.measured_slope
    rung_dist = abs(slope - round(2.0 * slope) / 2.0)
    ladder_ok = slope < -0.35 and rung_dist < 0.15
    dt = time.time() - t0
    return CriterionResult(
        6,
        "local scaling at x0 = [0:1]",
        ratio_dev < 0.10 and profile_err < 0.10 and ladder_ok,
        {
            "ratio_dev_300": ratio_dev,
            "gaussian_profile_rel": profile_err,
            "correction_slope": slope,
            "halfpower_rung_dist": rung_dist,
        },
        "ratio -> 1 (10% at 300), u-profile 10%, slope on the lambda^{-1/2} ladder",
        detail="odd rungs vanish by parity; measured slope sits on an integer rung",
        seconds=dt,
    )


def crit_07_offlocus_decay(sh: _Shared) -> CriterionResult:
    """Fixed-distance suppression and shrinking-radius super-polynomial decay."""
    t0 = time.time()
    win = Window("gaussian", np.pi, SIGMA)
    chart = sh.chart
    pt = chart.normal_point(np.array([0.5 + 0j]))
    val, _ = smoothed_kernel_diagonal(sh.pkg, win, 300.0, pt[None, :])
    fixed_ratio = float(abs(val[0]) / (300.0 / np.pi) ** sh.model.dim)
    rep = offlocus_decay_scan(
        sh.pkg, win, chart, C=1.3, lambda_grid=np.geomspace(75.0, 600.0, 12)
    )
    slope = rep.fits.get("decay_exponent", 0.0)
    dt = time.time() - t0
    return CriterionResult(
        7,
        "off-locus decay",
        fixed_ratio < 1e-6 and slope < -5.0,
        {"fixed_dist_ratio": fixed_ratio, "shrinking_slope": slope},
        "|S|/(lambda/pi)^d < 1e-6 at fixed distance, scan exponent < -5",
        detail="scan at distance 2C lambda^{-7/18}, C = 1.3, extended precision",
        seconds=dt,
    )


def crit_08_parity(sh: _Shared) -> CriterionResult:
    """Odd part vanishes at u = 0; the odd/even slope clause cannot pass."""
    t0 = time.time()
    win = Window("gaussian", np.pi, SIGMA)
    chart = sh.chart
    _, odd0 = parity_split(sh.pkg, win, chart, np.array([0.0 + 0j]), 300.0)
    vanishes = odd0 == 0.0
    grid = np.geomspace(100.0, 560.0, 8)
    u = np.array([0.7 + 0j])
    ratios = []
    for lam in grid:
        ev, od = parity_split(sh.pkg, win, chart, u, float(lam))
        ratios.append(abs(od) / abs(ev))
    ratios = np.array(ratios)
    if (ratios > 0).all():
        slope = float(np.polyfit(np.log(grid), np.log(ratios), 1)[0])
        slope_ok = abs(slope + 0.5) < 0.1
    else:
        slope = float("nan")
        slope_ok = False
    dt = time.time() - t0
    return CriterionResult(
        8,
        "parity structure of the scaled diagonal",
        bool(vanishes and slope_ok),
        {"odd_at_0": float(abs(odd0)), "max_odd_over_even": float(ratios.max()), "slope": slope},
        "odd(0) exactly 0; |odd/even| slope -1/2 +- 0.1",
        detail=(
            "u = 0 clause passes; the slope clause fails structurally: a torus "
            "element (the time-pi flow itself) fixes x0, commutes with the "
            "kernel, and acts as -1 on the normal line, so S(u) = S(-u) "
            "exactly and the odd part is identically zero — no slope exists "
            "to fit on weighted projective models"
        ),
        seconds=dt,
    )


def crit_09_gaussian_integral(sh: _Shared) -> CriterionResult:
    """Closed form pi^c/det(id - A) against quadrature and QMC oracles."""
    t0 = time.time()
    rng = np.random.default_rng(sh.seed + 9)
    worst = {1: 0.0, 2: 0.0, 3: 0.0, 4: 0.0}
    worst_qmc = 0.0
    for c in (1, 2, 3, 4):
        for _ in range(20):
            g = rng.normal(size=(c, c)) + 1j * rng.normal(size=(c, c))
            Q = np.linalg.qr(g)[0]
            phases = rng.uniform(0.2, 2.0 * np.pi - 0.2, size=c)
            A = (Q * np.exp(1j * phases)) @ Q.conj().T
            res = gaussian_normal_integral(A, seed=sh.seed, qmc_log2=15, qmc_scrambles=3)
            worst[c] = max(worst[c], res.quadrature_rel_error)
            if res.qmc_rel_error is not None:
                worst_qmc = max(worst_qmc, res.qmc_rel_error)
    ok = worst[1] < 1e-5 and worst[2] < 1e-5 and worst[3] < 1e-3 and worst[4] < 1e-3
    dt = time.time() - t0
    return CriterionResult(
        9,
        "Gaussian normal integral closed form",
        ok,
        {
            "rel_c1": worst[1],
            "rel_c2": worst[2],
            "rel_c3": worst[3],
            "rel_c4": worst[4],
            "qmc_worst": worst_qmc,
        },
        "20 random A per c: < 1e-5 (c = 1, 2), < 1e-3 (c = 3, 4)",
        detail="scored against rotated tensor quadrature; whitened QMC recorded",
        seconds=dt,
    )


def crit_10_stationary_phase(sh: _Shared) -> CriterionResult:
    """Closed-form critical point and Hessian determinant of the trace phase."""
    t0 = time.time()
    rng = np.random.default_rng(sh.seed + 10)
    x_fixed = sh.chart.center
    worst_grad = 0.0
    worst_det = 0.0
    count = 0
    while count < 20:
        x0 = x_fixed if count < 10 else _random_sphere_point(rng, 2)
        omega = np.concatenate([[rng.uniform(0.2, 2.0)], rng.normal(size=2)])
        try:
            chk = stationary_point_check(sh.model, x0, omega)
        except Exception:
            continue
        worst_grad = max(worst_grad, chk.grad_norm_at_seed)
        worst_det = max(worst_det, chk.det_rel_error)
        count += 1
    dt = time.time() - t0
    return CriterionResult(
        10,
        "stationary point of the trace phase",
        worst_grad < 1e-10 and worst_det < 1e-6,
        {"grad_at_seed": worst_grad, "hessian_det_rel": worst_det},
        "gradient < 1e-10, det vs pairing^2 < 1e-6, 20 admissible covectors",
        seconds=dt,
    )


def crit_11_local_global_consistency(sh: _Shared) -> CriterionResult:
    """Integrating the local prediction over the normal slice gives the global term."""
    t0 = time.time()
    lam = 300.5
    worst = 0.0
    details = []
    for weights in ((1, 2), (1, 1, 2)):
        model = make_model(weights)
        win = Window("gaussian", np.pi, SIGMA)
        comp = [c for c in fixed_components(model, np.pi) if not c.m_only][0]
        x0 = np.zeros(model.dim + 1, dtype=complex)
        x0[comp.index_set[0]] = 1.0
        pred = local_prediction(model, comp, x0, win)
        num = _slice_integral(pred, lam) * lam ** (-pred.normal_dim)
        ref = predict_global_component(comp, win, lam, model=model)
        rel = abs(num - ref) / abs(ref)
        worst = max(worst, float(rel))
        details.append(f"w={weights}: rel={rel:.2e}")
    dt = time.time() - t0
    return CriterionResult(
        11,
        "local -> global consistency",
        worst < 1e-4,
        {"worst_rel": worst},
        "normal-slice integral of predict_local vs predict_global < 1e-4",
        detail="; ".join(details),
        seconds=dt,
    )


def _slice_integral(pred, lam: float) -> complex:
    """Numerically integrate predict_local(u, lam) over the normal slice C^c.

    Rotates to the eigenlines of the normal map (Lebesgue-invariant) where
    the integrand factorises, and evaluates literal 2-d tensor quadrature of
    predict_local itself on each line.
    """
    from scipy.linalg import schur

    A = pred.normal_map
    c = pred.normal_dim
    base = complex(predict_local(pred, np.zeros(c, dtype=complex), lam))
    if c == 0:
        return base
    T, U = schur(A, output="complex")
    total = base
    f = pred.f_center
    for j in range(c):
        mu = complex(T[j, j])
        decay = (1.0 - mu.real) / f
        R = math.sqrt(82.0 / decay)
        n = min(int(0.45 * abs(mu.imag) * R * R / f) + 90, 1400)
        x, w = gauss_legendre(n, -R, R)
        X, Y = np.meshgrid(x, x, indexing="ij")
        pts = np.outer((X + 1j * Y).ravel(), U[:, j])
        vals = predict_local(pred, pts, lam) / base
        total *= complex(vals.reshape(n, n).dot(w).dot(w))
    return total


# ----------------------------------------------------------------------------


CRITERIA = (
    crit_01_spectral_structure,
    crit_02_normalization_anchors,
    crit_03_negative_lambda,
    crit_04_global_trace_trivial_period,
    crit_05_global_trace_pi_period,
    crit_06_local_scaling,
    crit_07_offlocus_decay,
    crit_08_parity,
    crit_09_gaussian_integral,
    crit_10_stationary_phase,
    crit_11_local_global_consistency,
)


def run_all(out_dir=None, seed: int = 0, echo=print):
    """Run all acceptance criteria; return (results, manifest, exit_code)."""
    sh = _Shared(seed=seed)
    results = []
    for fn in CRITERIA:
        res = fn(sh)
        results.append(res)
        echo(res.line())
    all_passed = bool(all(r.passed for r in results))
    for r in results:
        r.passed = bool(r.passed)
        r.measured = {k: float(v) for k, v in r.measured.items()}
    manifest = {
        "criteria": [dataclasses.asdict(r) for r in results],
        "all_passed": all_passed,
        "n_passed": int(sum(r.passed for r in results)),
        "seed": seed,
        "k_max": K_MAX_VERIFY,
        "artifacts": [],
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "verify_manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
        manifest["artifacts"] = ["verify_manifest.json"]
    return results, manifest, 0 if all_passed else 1
