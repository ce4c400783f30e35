import math

import numpy as np
import pytest

from tracelab.asymptotics import (
    component_f_integral,
    fit_expansion,
    gaussian_normal_integral,
    local_prediction,
    predict_global_component,
    predict_local,
    psi2,
    stationary_point_check,
)
from tracelab.errors import CleanLocusError, DegenerateDirectionError, FitError
from tracelab.geometry import fixed_components, make_model
from tracelab.windows import Window


@pytest.fixture(scope="module")
def model12():
    return make_model((1, 2))


@pytest.fixture(scope="module")
def comp12(model12):
    return [c for c in fixed_components(model12, np.pi) if not c.m_only][0]


def test_psi2_hand_values():
    assert psi2(np.array([1.0 + 0j]), np.array([1j])) == pytest.approx(-1.0 - 1.0j)
    assert psi2(np.array([2.0 + 1j]), np.array([2.0 + 1j])) == 0.0
    u = np.array([3.0 + 0j, 4.0j])
    assert psi2(u, np.zeros(2, dtype=complex)) == pytest.approx(-12.5)  # -||u||^2/2


def test_psi2_conjugate_symmetry():
    rng = np.random.default_rng(11)
    for _ in range(20):
        u = rng.normal(size=3) + 1j * rng.normal(size=3)
        w = rng.normal(size=3) + 1j * rng.normal(size=3)
        assert abs(psi2(u, w) - np.conj(psi2(w, u))) < 1e-14


def test_psi2_real_part_nonpositive():
    rng = np.random.default_rng(12)
    u = rng.normal(size=(100, 2)) + 1j * rng.normal(size=(100, 2))
    w = rng.normal(size=(100, 2)) + 1j * rng.normal(size=(100, 2))
    assert np.all(psi2(u, w).real <= 0)


def test_gaussian_integral_halfturn_lines():
    res = gaussian_normal_integral(np.array([[-1.0 + 0j]]))
    assert abs(res.closed_form - np.pi / 2) < 1e-14
    assert res.quadrature_rel_error < 1e-12
    res2 = gaussian_normal_integral(-np.eye(2, dtype=complex))
    assert abs(res2.closed_form - np.pi**2 / 4) < 1e-13
    assert res2.quadrature_rel_error < 1e-12


def test_gaussian_integral_random_unitaries():
    """Closed form vs quadrature for 20 random A with eigenvalue gap > 0.1."""
    rng = np.random.default_rng(13)
    for c in (1, 2):
        for _ in range(10):
            g = rng.normal(size=(c, c)) + 1j * rng.normal(size=(c, c))
            Q = np.linalg.qr(g)[0]
            A = (Q * np.exp(1j * rng.uniform(0.21, 2 * np.pi - 0.21, size=c))) @ Q.conj().T
            res = gaussian_normal_integral(A, with_qmc=False)
            assert res.quadrature_rel_error < 1e-5


def test_gaussian_integral_rejects_non_clean():
    with pytest.raises(CleanLocusError):
        gaussian_normal_integral(np.eye(2, dtype=complex))


def test_gaussian_integral_c0_is_one():
    res = gaussian_normal_integral(np.zeros((0, 0), dtype=complex))
    assert res.closed_form == 1.0


def test_local_prediction_phase_coherence(model12, comp12):
    win = Window("gaussian", np.pi, 0.15)
    x0 = np.array([0.0, 1.0 + 0j])
    pred = local_prediction(model12, comp12, x0, win)
    for lam in (10.0, 101.25, 333.5):
        val = complex(predict_local(pred, np.zeros(1, dtype=complex), lam))
        want = (-lam * np.pi) % (2 * np.pi)
        got = np.angle(val) % (2 * np.pi)
        assert min(abs(got - want), 2 * np.pi - abs(got - want)) < 1e-10


def test_predict_local_frame_invariance(model12, comp12):
    """Rotating the normal frame leaves the prediction invariant."""
    win = Window("gaussian", np.pi, 0.15)
    x0 = np.array([0.0, 1.0 + 0j])
    pred = local_prediction(model12, comp12, x0, win)
    rng = np.random.default_rng(14)
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
    u = np.array([0.37 - 0.21j])
    # a unitary change of normal frame maps (A, u) -> (V A V^H, V u)
    import dataclasses

    rotated = dataclasses.replace(pred, normal_map=phase * pred.normal_map * np.conj(phase))
    a = predict_local(pred, u, 250.0)
    b = predict_local(rotated, phase * u, 250.0)
    assert abs(a - b) < 1e-12 * abs(a)


def test_component_f_integrals(model12):
    comp_pi = [c for c in fixed_components(model12, np.pi) if not c.m_only][0]
    assert abs(component_f_integral(model12, comp_pi) - 0.5) < 1e-14
    comp_0 = [c for c in fixed_components(model12, 0.0) if not c.m_only][0]
    # pi * int_0^1 (2 - t)^{-2} dt = pi/2
    assert abs(component_f_integral(model12, comp_0) - np.pi / 2) < 1e-12


def test_predict_global_values(model12):
    win = Window("gaussian", np.pi, 0.15)
    comp_pi = [c for c in fixed_components(model12, np.pi) if not c.m_only][0]
    lam = 300.5
    val = predict_global_component(comp_pi, win, lam, model=model12)
    ref = (np.pi / 2) * np.exp(-1j * np.pi * lam)
    assert abs(val - ref) < 1e-12
    win0 = Window("gaussian", 0.0, 0.15)
    comp_0 = [c for c in fixed_components(model12, 0.0) if not c.m_only][0]
    val0 = predict_global_component(comp_0, win0, lam, model=model12)
    assert abs(val0 - np.pi * lam) < 1e-9


def test_stationary_point_check(model12):
    x0 = np.array([0.0, 1.0 + 0j])
    chk = stationary_point_check(model12, x0, np.array([1.0, 0.0, 0.0]))
    assert chk.pairing == -2.0  # -f(x0) * omega_0
    assert chk.grad_norm_at_seed < 1e-12
    assert np.allclose(chk.seed_point, [0.0, 0.5, 0.0, 0.5])
    assert chk.det_rel_error < 1e-6
    with pytest.raises(DegenerateDirectionError):
        stationary_point_check(model12, x0, np.array([-1.0, 0.0, 0.0]))


def test_fit_expansion_recovers_synthetic_ladder():
    grid = np.geomspace(50.0, 2000.0, 20)
    ratios = 1.0 + 3.0 / np.sqrt(grid) - 0.8 / grid
    fit = fit_expansion((grid, ratios), half_powers=True, n_terms=2)
    assert abs(fit.coefficients[0] - 3.0) < 1e-9
    assert abs(fit.coefficients[1] + 0.8) < 1e-7
    assert fit.residuals[-1] < 1e-10
    assert fit.residuals[0] > fit.residuals[-1]
    assert abs(fit.measured_slope + 0.5) < 0.02


def test_fit_expansion_integer_ladder():
    grid = np.geomspace(100.0, 1000.0, 15)
    ratios = 1.0 + 2.0 / grid
    fit = fit_expansion((grid, ratios), half_powers=False, n_terms=1)
    assert abs(fit.coefficients[0] - 2.0) < 1e-10


def test_fit_expansion_needs_points():
    with pytest.raises(FitError):
        fit_expansion((np.array([10.0, 20.0]), np.array([1.0, 1.0])), n_terms=3)
