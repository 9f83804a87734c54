import numpy as np
import pytest

from liqhorizon import ImpactParams, model1
from liqhorizon.params import check_condition_13

# frozen from a 40-digit mpmath evaluation of the closed forms
THETA0_DET = 140.93654128229749
ZETA = -0.93271243936870395
XI_M1 = 144.33756729740644


def test_det_solution_boundaries(params):
    d = model1.det_solution(params)
    assert d.inventory[0] == pytest.approx(100.0, rel=1e-15)
    assert abs(d.inventory[-1]) < 1e-12
    assert d.terminal_inventory == 0.0
    assert d.rate[0] == pytest.approx(THETA0_DET, rel=1e-12)


def test_coefficients(params):
    co = model1.coefficients(params)
    assert co.zeta == pytest.approx(ZETA, rel=1e-13)
    assert co.xi_m1 == pytest.approx(XI_M1, rel=1e-13)
    assert co.kappa == pytest.approx(np.sqrt(0.1 * 0.04 / 0.003), rel=1e-15)
    assert -1 < co.zeta < 0


def test_terminal_coefficient_exact(params):
    assert model1.dp_coefficient_c(params, params.T) == -params.phi
    a, b, c = model1.dp_coefficients(params, np.linspace(0, 1, 5))
    assert np.all(a == 0) and np.all(b == 0)
    with pytest.raises(ValueError):
        model1.dp_coefficient_c(params, 1.5)


def test_value_u_examples(params):
    assert model1.value_u(params, 0.3, 0.0) == 0.0
    assert model1.value_u(params, 1.0, 100.0) == pytest.approx(-1000.0, rel=1e-15)
    assert model1.value_u(params.with_(T=1.5), 0.5, 100.0) > model1.value_u(params, 0.5, 100.0)


def test_dp_trajectory_start_and_closed_form_terminal(params):
    dp = model1.dp_trajectory(params)
    assert dp.inventory[0] == pytest.approx(100.0, rel=1e-14)
    assert dp.terminal_inventory == pytest.approx(dp.inventory[-1], rel=1e-10)
    assert dp.constrained


def test_terminal_inventory_vanishes_with_penalty(params):
    xs = [model1.dp_terminal_inventory(params.with_(phi=phi)) for phi in (1, 10, 100, 1000, 1e6)]
    assert all(b < a for a, b in zip(xs, xs[1:]))
    assert xs[-1] < 1e-6


def test_convergence_report_ladder(params):
    rows = model1.convergence_report(params, [1, 10, 100, 1000])
    gaps = [r.sup_gap_X for r in rows]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert 1e-5 < rows[-1].sup_gap_X < 1e-3 and 1e-5 < rows[-1].sup_gap_theta < 1e-3
    with pytest.raises(ValueError):
        model1.convergence_report(params, [10, 1])


def test_budget_invariants(params):
    det = model1.det_solution(params)
    dt = det.times[1] - det.times[0]
    assert abs(np.trapezoid(det.rate, det.times) - params.Q) / params.Q <= 10 * dt**2
    dp = model1.dp_trajectory(params)
    used = np.trapezoid(dp.rate, dp.times)
    assert abs(used - (params.Q - dp.terminal_inventory)) / params.Q <= 10 * dt**2


def test_positivity_and_monotone_coefficient(params):
    assert np.all(model1.det_solution(params).rate > 0)
    dp = model1.dp_trajectory(params)
    assert np.all(dp.rate >= 0)
    assert np.all(np.diff(dp.value_coeff) < 0)
    assert np.all(2 * dp.value_coeff + params.eta <= 0)
    assert np.all(np.diff(dp.inventory) <= 0)


def test_riccati_residual_second_order(params):
    def resid(n):
        t = np.linspace(0, 1, n + 1)
        c = model1.dp_coefficient_c(params, t)
        h = t[1] - t[0]
        dc = (c[2:] - c[:-2]) / (2 * h)
        rhs = params.gamma * params.sigma**2 - (2 * c[1:-1] + params.eta) ** 2 / (4 * params.nu)
        return np.max(np.abs(dc - rhs))
    r1, r2 = resid(2000), resid(4000)
    assert 3.5 < r1 / r2 < 4.5


def test_det_free_of_permanent_impact(params):
    a = model1.det_solution(params.with_(eta=0.001))
    b = model1.det_solution(params.with_(eta=0.01))
    assert np.array_equal(a.inventory, b.inventory) and np.array_equal(a.rate, b.rate)


def test_unconstrained_flag():
    p = ImpactParams(phi=0.001)
    assert not check_condition_13(p)
    assert not model1.dp_trajectory(p).constrained


def test_custom_grid_validation(params):
    with pytest.raises(ValueError):
        model1.det_solution(params, [0.0, 0.5, 0.4])
    with pytest.raises(ValueError):
        model1.det_solution(params, [0.0, 2.0])
