import numpy as np
import pytest

from tracelab.errors import CoverageError
from tracelab.geometry import fixed_components, heisenberg_chart, make_model
from tracelab.smoothing import (
    integrate_diagonal,
    negative_lambda_scan,
    offlocus_decay_scan,
    parity_split,
    scaled_diagonal_scan,
    smoothed_kernel_diagonal,
    smoothed_trace,
    spectral_tail_bound,
)
from tracelab.spectral import SpectralPackage, eigendata
from tracelab.windows import Window


@pytest.fixture(scope="module")
def model12():
    return make_model((1, 2))


@pytest.fixture(scope="module")
def pkg(model12):
    return eigendata(model12, 460)


@pytest.fixture(scope="module")
def chart(model12):
    x0 = np.array([0.0, 1.0 + 0j])
    return heisenberg_chart(model12, x0, np.pi)


WIN = Window("gaussian", np.pi, 0.15)


def test_toy_trace_is_window_transform():
    toy = SpectralPackage.from_eigenvalues([5.0])
    win = Window("bump", 0.8, 0.5)
    for lam in (2.0, 5.0, 7.25, -3.0):
        res = smoothed_trace(toy, win, lam)
        assert res.value == complex(win.fourier(lam - 5.0))
        assert res.tail_bound == 0.0


def test_trace_linearity_in_spectrum():
    win = Window("gaussian", 0.0, 0.5)
    a = SpectralPackage.from_eigenvalues([1.0, 4.0])
    b = SpectralPackage.from_eigenvalues([2.5])
    ab = SpectralPackage.from_eigenvalues([1.0, 4.0, 2.5])
    lam = 3.1
    total = smoothed_trace(a, win, lam).value + smoothed_trace(b, win, lam).value
    assert abs(smoothed_trace(ab, win, lam).value - total) < 1e-15


def test_trace_translation_covariance(pkg):
    # integer spectrum: shifting the window center by 2*pi multiplies the
    # trace by e^{-2*pi*i*lambda}
    lam = 200.5
    base = smoothed_trace(pkg, Window("gaussian", np.pi, 0.15), lam).value
    shifted = smoothed_trace(pkg, Window("gaussian", 3 * np.pi, 0.15), lam).value
    assert abs(shifted - np.exp(-2j * np.pi * lam) * base) < 1e-12 * abs(base)


def test_coverage_refusal(pkg):
    win = Window("gaussian", 0.0, 0.15)
    with pytest.raises(CoverageError):
        smoothed_trace(pkg, win, float(pkg.coverage_max) + 5.0)
    # far inside coverage the bound is tiny
    assert spectral_tail_bound(pkg, win, 200.0) < 1e-30


def test_fubini_diagonal_integrates_to_trace(model12):
    small = eigendata(model12, 24)
    win = Window("gaussian", np.pi, 0.8)
    lam = 12.3
    tr = smoothed_trace(small, win, lam, tail_tol=1e-8).value
    iv = integrate_diagonal(small, win, lam, tail_tol=1e-8)
    assert abs(iv - tr) < 1e-6 * abs(tr)


def test_scaled_diagonal_scan_converges(pkg, chart):
    grid = np.geomspace(120.0, 400.0, 8)
    rep = scaled_diagonal_scan(pkg, WIN, chart, np.array([0.5 + 0j]), grid)
    mags = np.abs(rep.ratios)
    assert np.all(np.abs(mags - 1.0) < 0.05)
    assert np.abs(mags[-1] - 1.0) < np.abs(mags[0] - 1.0)  # improving in lambda
    # phase of the ratio is flat zero once the leading phase is divided out
    assert np.abs(np.angle(rep.ratios)).max() < 1e-10


def test_scan_u_zero_matches_plain_diagonal(pkg, chart):
    grid = np.array([250.0])
    rep = scaled_diagonal_scan(pkg, WIN, chart, np.array([0.0 + 0j]), grid)
    direct, _ = smoothed_kernel_diagonal(pkg, WIN, 250.0, chart.center[None, :])
    assert abs(rep.exact[0] - direct[0]) < 1e-12 * abs(direct[0])


def test_scan_precision_paths_agree(pkg, chart):
    grid = np.geomspace(150.0, 300.0, 4)
    a = scaled_diagonal_scan(pkg, WIN, chart, np.array([0.3 + 0j]), grid, precision="double")
    b = scaled_diagonal_scan(pkg, WIN, chart, np.array([0.3 + 0j]), grid, precision="longdouble")
    assert np.abs(a.exact - b.exact).max() < 1e-9 * np.abs(a.exact).max()


def test_offlocus_scan_decays(pkg, chart):
    rep = offlocus_decay_scan(pkg, WIN, chart, 1.0, np.geomspace(80.0, 380.0, 8))
    mags = np.abs(rep.ratios)
    assert mags[-1] < mags[0]
    assert rep.fits["decay_exponent"] < -1.0
    assert rep.meta["precision"] == "longdouble"


def test_negative_lambda_scan(pkg):
    win = Window("gaussian", 0.0, 0.3)
    rep = negative_lambda_scan(pkg, win, np.geomspace(-120.0, -10.0, 9))
    assert abs(smoothed_trace(pkg, win, -50.0).value) < 1e-8
    assert rep.fits["decay_exponent"] < -6.0
    with pytest.raises(ValueError):
        negative_lambda_scan(pkg, win, np.array([-5.0, 5.0]))


def test_parity_split_reconstruction(pkg, chart):
    u = np.array([0.4 + 0j])
    lam = 260.0
    even, odd = parity_split(pkg, WIN, chart, u, lam)
    plus, _ = smoothed_kernel_diagonal(
        pkg, WIN, lam, chart.normal_point(u / np.sqrt(lam))[None, :]
    )
    assert abs((even + odd) - plus[0]) < 1e-12 * abs(plus[0])
    # structural evenness on torus models: the odd part is exactly zero
    assert odd == 0.0


def test_kernel_diagonal_positive_at_center(pkg, chart):
    # with a window centered at a period the on-locus diagonal is large
    vals, bound = smoothed_kernel_diagonal(pkg, WIN, 300.0, chart.center[None, :])
    assert abs(vals[0]) > 10.0
    assert bound < 1e-10
