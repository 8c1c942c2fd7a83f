import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pushsafe.errors import DegenerateGeometry, InvalidInput, NegativeThrust
from pushsafe.model import (
    ALPHA_TOL_DEG,
    OperationPoint,
    VehicleParams,
    contact_force,
    contact_force_slope,
    ee_orientation,
    equilibrium_grid,
    equilibrium_residuals,
    lever_arms,
    rotor_pair_thrusts,
    solve_equilibrium,
    sweep_curves,
    total_thrust,
)


@st.composite
def operation_points(draw, min_alpha=1.0):
    beta0 = draw(st.floats(min_value=min_alpha + 0.01, max_value=90.0))
    phi0 = draw(st.floats(min_value=0.0, max_value=beta0 - min_alpha))
    return OperationPoint(beta0, phi0)


def linear_oracle(op, params):
    """Solve the force and moment balance as a linear system in (f_e, T_sum, tau)."""
    b, p = math.radians(op.beta0), math.radians(op.phi0)
    l_Ge, l_e = lever_arms(op, params)
    A = np.array([
        [-math.cos(b), math.cos(p), 0.0],
        [-math.sin(b), math.sin(p), 0.0],
        [-l_e, 0.0, 1.0],
    ])
    rhs = np.array([params.G_t, 0.0, -params.link_weight * l_Ge])
    f_e, T_sum, tau = np.linalg.solve(A, rhs)
    return f_e, T_sum, T_sum / 4 - tau / (4 * params.r_arm), T_sum / 4 + tau / (4 * params.r_arm)


def test_default_weight(params):
    assert params.G_t == pytest.approx(21.56)


def test_vehicle_params_reject_nonpositive():
    with pytest.raises(InvalidInput):
        VehicleParams(m_b=0.0)
    with pytest.raises(InvalidInput):
        VehicleParams(g=float("nan"))


@pytest.mark.parametrize("beta0,phi0", [(0.0, 0.0), (91.0, 10.0), (30.0, 30.0), (30.0, -1.0), (math.nan, 1.0)])
def test_operation_point_domain(beta0, phi0):
    with pytest.raises(InvalidInput):
        OperationPoint(beta0, phi0)


def test_from_signed_normalises_and_rejects_mixed_signs():
    op = OperationPoint.from_signed(-60.0, -15.0)
    assert (op.beta0, op.phi0, op.alpha0) == (60.0, 15.0, 45.0)
    with pytest.raises(InvalidInput):
        OperationPoint.from_signed(-60.0, 15.0)


def test_ee_points_along_surface_normal():
    assert ee_orientation(OperationPoint(60, 15)).phi_e == 60


def test_zero_roll_pushes_nothing(params):
    op = OperationPoint(45.0, 0.0)
    assert contact_force(op, params) == 0.0
    assert total_thrust(op, params) == pytest.approx(params.G_t)


def test_vertical_wall_values(params):
    # f_e = G_t tan(phi) and T_sum = G_t / cos(phi) for a vertical wall
    op = OperationPoint(90.0, 20.0)
    assert contact_force(op, params) == pytest.approx(params.G_t * math.tan(math.radians(20)))
    assert total_thrust(op, params) == pytest.approx(params.G_t / math.cos(math.radians(20)))


def test_reference_outer_thrust(params):
    # at small roll the link weight still outweighs the contact moment, so T_in > T_out
    op = OperationPoint(90.0, 12.0)
    T_in, T_out = rotor_pair_thrusts(op, params)
    assert T_out == pytest.approx(5.4187, abs=1e-3)
    assert T_in > T_out
    assert 2 * (T_in + T_out) == pytest.approx(total_thrust(op, params), rel=1e-14)


def test_degenerate_geometry(params):
    with pytest.raises(DegenerateGeometry):
        contact_force(OperationPoint(30.0, 30.0 - ALPHA_TOL_DEG / 2), params)
    contact_force(OperationPoint(30.0, 30.0 - ALPHA_TOL_DEG), params)


def test_strict_negative_inner_thrust():
    # a long first link on a small frame: the contact moment outgrows the inner pair
    heavy = VehicleParams(r_arm=0.02, b_1=0.5)
    op = OperationPoint(90.0, 60.0)
    T_in, _ = rotor_pair_thrusts(op, heavy)
    assert T_in < 0
    with pytest.raises(NegativeThrust):
        rotor_pair_thrusts(op, heavy, strict=True)


@settings(max_examples=200, deadline=None)
@given(operation_points())
def test_closed_form_matches_linear_solve(op):
    params = VehicleParams()
    sol = solve_equilibrium(op, params)
    f_e, T_sum, T_in, T_out = linear_oracle(op, params)
    scale = params.G_t + T_sum
    assert abs(sol.f_e - f_e) <= 1e-10 * scale
    assert abs(sol.T_sum - T_sum) <= 1e-10 * scale
    assert abs(sol.T_in - T_in) <= 1e-9 * scale
    assert abs(sol.T_out - T_out) <= 1e-9 * scale


@settings(max_examples=200, deadline=None)
@given(operation_points())
def test_residuals_vanish(op):
    params = VehicleParams()
    sol = solve_equilibrium(op, params)
    r = equilibrium_residuals(op, params, sol)
    assert max(abs(v) for v in r) <= 1e-10 * (params.G_t + sol.T_sum + sol.f_e)
    assert 2 * (sol.T_in + sol.T_out) == pytest.approx(sol.T_sum, rel=1e-12)


def test_residuals_expose_inconsistent_pairs(params):
    op = OperationPoint(60.0, 15.0)
    sol = solve_equilibrium(op, params)
    bad = sol.__class__(**{**sol.__dict__, "T_out": sol.T_in})
    assert abs(equilibrium_residuals(op, params, bad)[2]) > 1e-3


@settings(max_examples=100, deadline=None)
@given(operation_points(min_alpha=2.0))
def test_monotone_in_roll(op):
    params = VehicleParams()
    nxt = OperationPoint(op.beta0, min(op.phi0 + 0.5, op.beta0 - 1.5))
    if nxt.phi0 <= op.phi0:
        return
    assert contact_force(nxt, params) > contact_force(op, params)
    assert total_thrust(nxt, params) > total_thrust(op, params)
    assert rotor_pair_thrusts(nxt, params)[1] > rotor_pair_thrusts(op, params)[1]


@settings(max_examples=100, deadline=None)
@given(operation_points())
def test_total_thrust_at_least_weight(op):
    assert total_thrust(op) >= VehicleParams().G_t * (1 - 1e-12)


@settings(max_examples=100, deadline=None)
@given(operation_points(min_alpha=3.0))
def test_slope_matches_finite_difference(op):
    h = 1e-4
    phi = max(op.phi0, h)
    lo, hi = OperationPoint(op.beta0, phi - h), OperationPoint(op.beta0, phi + h)
    fd = (contact_force(hi) - contact_force(lo)) / (2 * h)
    assert contact_force_slope(OperationPoint(op.beta0, phi)) == pytest.approx(fd, rel=1e-6)


def test_sign_symmetry(params):
    a = solve_equilibrium(OperationPoint.from_signed(-80.0, -10.0), params)
    b = solve_equilibrium(OperationPoint(80.0, 10.0), params)
    assert a == b


def test_grid_matches_scalar(params):
    betas = np.array([10.0, 45.0, 90.0])
    phis = np.array([3.0, 20.0, 60.0])
    grid = equilibrium_grid(betas, phis, params)
    for i, (b, p) in enumerate(zip(betas, phis)):
        sol = solve_equilibrium(OperationPoint(b, p), params)
        assert grid["f_e"][i] == pytest.approx(sol.f_e, rel=1e-14)
        assert grid["T_out"][i] == pytest.approx(sol.T_out, rel=1e-14)


def test_sweep_curves_layout(params):
    rows = sweep_curves([90.0], 1.0, params)
    assert len(rows) == 90
    assert rows[0].phi0 == 0.0 and rows[-1].phi0 == 89.0
    rows = sweep_curves([10.0, 30.0], 5.0, params)
    assert [r.phi0 for r in rows if r.beta0 == 10.0] == [0.0, 5.0]
    assert sweep_curves([], 1.0) == []
    with pytest.raises(InvalidInput):
        sweep_curves([30.0], 0.0)
