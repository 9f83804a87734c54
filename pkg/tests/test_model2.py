import math

import numpy as np
import pytest

from liqhorizon import HazardSpec, ImpactParams, model1, model2
from liqhorizon.errors import NumericalError

# frozen from 40-digit mpmath evaluations
ALPHA_M2 = 5.8949130612757980
XI_HAT = 28.272964322665698


def test_survival_examples():
    h = HazardSpec.constant(1.0)
    assert model2.survival_probability(h, 0.0) == 1.0
    assert model2.survival_probability(h, 1.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert np.all(model2.survival_probability(HazardSpec.constant(0.0), np.linspace(0, 1, 5)) == 1.0)


def test_density_and_point_mass():
    h = HazardSpec.constant(1.0)
    assert model2.termination_density(h, 0.0) == pytest.approx(1.0)
    assert model2.horizon_point_mass(h, 1.0) == pytest.approx(math.exp(-1), rel=1e-15)
    tab = HazardSpec.tabulated([0, 0.5, 1.0], [0.2, 3.0, 1.0])
    t = np.linspace(0, 1, 20001)
    total = np.trapezoid(model2.termination_density(tab, t), t) + model2.horizon_point_mass(tab, 1.0)
    assert total == pytest.approx(1.0, abs=1e-7)


def test_tabulated_cumulative_exact_for_linear():
    tab = HazardSpec.tabulated([0.0, 1.0], [0.0, 2.0])
    assert tab.cumulative(1.0) == pytest.approx(1.0, rel=1e-15)
    assert tab.cumulative(0.5) == pytest.approx(0.25, rel=1e-15)


def test_hazard_validation(tmp_path):
    with pytest.raises(ValueError):
        HazardSpec.constant(-1.0)
    with pytest.raises(ValueError):
        HazardSpec.tabulated([0.0, 0.5, 0.5], [1, 1, 1])
    f = tmp_path / "h.csv"
    f.write_text("t,l\n0,1\n0.6,1\n0.4,2\n1,1\n")
    with pytest.raises(ValueError, match="row 4"):
        HazardSpec.from_csv(f)
    f.write_text("t,l\n0,1\n1,2\n")
    h = HazardSpec.from_csv(f)
    assert h.covers(1.0) and not h.covers(2.0)


def test_coefficients(params):
    co = model2.Model2Coefficients.from_params(params, 1.0)
    assert co.alpha_m2 == pytest.approx(ALPHA_M2, rel=1e-13)
    assert co.xi_hat == pytest.approx(XI_HAT, rel=1e-13)


def test_det_const_hazard(params):
    d = model2.det_solution_const_hazard(params, 1.0)
    assert d.inventory[0] == pytest.approx(100.0, rel=1e-15)
    assert abs(d.inventory[-1]) < 1e-12
    gap = model2.det_solution_const_hazard(params, 0.0)
    ref = model1.det_solution(params)
    assert np.max(np.abs(gap.inventory - ref.inventory)) <= 1e-12
    with pytest.raises(ValueError):
        model2.det_solution_const_hazard(params, -0.5)


def test_bvp_matches_closed_forms(params):
    num0 = model2.det_bvp_solve(params, HazardSpec.constant(0.0), 1001)
    ref0 = model1.det_solution(params, num0.times)
    assert np.max(np.abs(num0.inventory - ref0.inventory)) / params.Q <= 1e-5
    num1 = model2.det_bvp_solve(params, HazardSpec.constant(1.0), 1001)
    ref1 = model2.det_solution_const_hazard(params, 1.0, num1.times)
    assert np.max(np.abs(num1.inventory - ref1.inventory)) / params.Q <= 1e-5
    assert num1.inventory[0] == params.Q and num1.inventory[-1] == 0.0
    with pytest.raises(ValueError):
        model2.det_bvp_solve(params, HazardSpec.constant(1.0), 2)


def test_tilde_c(params):
    t = np.linspace(0, 1, 1001)
    assert model2.tilde_c_const_hazard(params, 1.0, 1.0) == -params.phi
    assert np.max(np.abs(model2.tilde_c_const_hazard(params, 0.0, t) - model1.dp_coefficient_c(params, t))) <= 1e-12


def test_riccati_oracles(params):
    tab = model2.riccati_solve(params, HazardSpec.constant(1.0), 1000)
    assert np.max(np.abs(tab.c_tilde - model2.tilde_c_const_hazard(params, 1.0, tab.times))) <= 1e-8
    tab0 = model2.riccati_solve(params, HazardSpec.constant(0.0), 1000)
    assert np.max(np.abs(tab0.c_tilde - model1.dp_coefficient_c(params, tab0.times))) <= 1e-8


def test_riccati_one_step_euler_consistency(params):
    lam, dt = 1.0, 1e-5
    p1 = params.with_(T=dt)
    tab = model2.riccati_solve(p1, HazardSpec.constant(lam), 1)
    phi = params.phi
    slope = lam * (-phi) + params.gamma * params.sigma**2 + phi * lam - (params.eta - 2 * phi) ** 2 / (4 * params.nu)
    assert tab.c_tilde[0] == pytest.approx(-phi - dt * slope, abs=1e-7)


def test_riccati_blowup_aborts():
    # a huge penalty with no risk term: c explodes relative to phi under a large negative hazard proxy
    p = ImpactParams(phi=1e-9, nu=1e-6, T=50.0)
    with pytest.raises(NumericalError):
        model2.riccati_solve(p, HazardSpec.constant(50.0), 10)


def test_dp_m2(params):
    dp = model2.dp_trajectory_m2(params, 1.0)
    assert dp.inventory[0] == pytest.approx(100.0, rel=1e-14)
    assert np.all(dp.rate >= 0) and np.all(np.diff(dp.value_coeff) < 0)
    assert np.all(2 * dp.value_coeff[:-1] + params.eta < 0)
    assert np.trapezoid(dp.rate, dp.times) <= params.Q
    assert dp.rate[0] > model2.dp_trajectory_m2(params, 0.0).rate[0]
    rates = [model2.dp_trajectory_m2(params, lam).rate[0] for lam in (0, 0.5, 1, 2)]
    assert all(b >= a for a, b in zip(rates, rates[1:]))


def test_dp_m2_converges_to_det(params):
    # the equivalent problem carries phi in its running cost, so compare at equal phi
    gaps = []
    for phi in (0.1, 1.0, 10.0):
        q = params.with_(phi=phi)
        det = model2.det_solution_const_hazard(q, 1.0)
        gaps.append(np.max(np.abs(model2.dp_trajectory_m2(q, 1.0).inventory - det.inventory)))
    assert all(b < a for a, b in zip(gaps, gaps[1:])) and gaps[-1] < 1e-9


def test_det_const_hazard_large_penalty_finite(params):
    d = model2.det_solution_const_hazard(params.with_(phi=1e6), 1.0)
    assert np.all(np.isfinite(d.inventory)) and np.all(np.isfinite(d.rate))


def test_dp_trajectory_hazard_matches_closed_form(params):
    num = model2.dp_trajectory_hazard(params, HazardSpec.constant(1.0), 1000)
    ref = model2.dp_trajectory_m2(params, 1.0, num.times)
    assert np.max(np.abs(num.inventory - ref.inventory)) < 1e-3


def test_discounted_objective_equals_value(params):
    h = HazardSpec.constant(1.0)
    grid = np.linspace(0, 1, 20001)
    dp = model2.dp_trajectory_m2(params, 1.0, grid)
    v = model2.discounted_objective(params, h, dp)
    assert v == pytest.approx(model2.tilde_c_const_hazard(params, 1.0, 0.0) * params.Q**2, rel=1e-6)


def test_reduction_residual_second_order(params):
    h = HazardSpec.tabulated([0.0, 1.0], [0.5, 2.0])
    r = [np.max(np.abs(model2.reduction_residual(params, h, model2.riccati_solve(params, h, n)))) for n in (2000, 4000)]
    assert 3.4 < r[0] / r[1] < 4.6
