import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import oracles
from driftslice.constants import SystemConstants
from driftslice.models import IndependentParams, JointParams, contact_cdf
from driftslice.physics import sir_success_probability
from driftslice.planner import (
    NetworkPlanner,
    PlanningDecision,
    closed_form_given_rho,
    comm_capacity,
    cost,
    d_max,
    d_max_uncapped,
    expected_devices,
    feasibility,
    plan,
    rho_grid,
    rho_min,
    sensing_capacities,
    sensing_demand,
)

K = SystemConstants()
models = st.one_of(
    st.builds(JointParams, st.floats(3e-6, 6e-5), st.floats(0.5, 12), st.floats(1, 10)),
    st.builds(lambda lam, ratio: IndependentParams(lam, lam * ratio), st.floats(3e-6, 6e-5), st.floats(0.5, 12)),
)


def test_expected_devices():
    lam = 10 / K.A_0
    assert expected_devices(lam, K) == pytest.approx(10.000454, rel=1e-7)
    assert expected_devices(1e-14, K) == pytest.approx(1.0, abs=1e-6)
    grid = np.logspace(-8, -3, 50)
    assert np.all(np.diff(expected_devices(grid, K)) > 0)
    with pytest.raises(ValueError):
        expected_devices(0.0, K)


def test_comm_capacity():
    lam = 2e-5
    assert comm_capacity(1.0, 100, lam, K) == pytest.approx(15 * 100 / expected_devices(lam, K))
    # E[N^I] = 10 exactly would need lambda*A_0 slightly below 10; check the formula directly
    lam10 = 9.99954 / K.A_0
    assert expected_devices(lam10, K) == pytest.approx(10.0, abs=1e-4)
    assert comm_capacity(0.5, 100, lam10, K) == pytest.approx(750 / 5.5, rel=1e-4)
    with pytest.raises(ValueError):
        comm_capacity(0.0, 1, lam, K)


def test_sensing_demand_examples():
    assert sensing_demand(IndependentParams(2e-5, 0.0), K) == 0.0
    far = JointParams(2e-5, 5.5, 0.01)
    assert sensing_demand(far, K) == pytest.approx(expected_devices(2e-5, K) * 5.5)
    lam = 13 / K.A_0
    e_ni = 13 / (1 - math.exp(-13))
    hand = e_ni * (1 - math.exp(-100 / 32)) * 5.5
    assert sensing_demand(JointParams(lam, 5.5, 4.0), K) == pytest.approx(hand, rel=1e-6)


def test_d_max_examples():
    assert d_max(1, 0.5, 2e-5, K) == pytest.approx(3.110, abs=5e-4)
    assert d_max_uncapped(16, 0.5, 2e-5, K) == pytest.approx(2 * d_max_uncapped(1, 0.5, 2e-5, K))
    assert d_max(1e9, 0.5, 2e-5, K) == K.D_hat
    assert d_max(1, 1.0, 2e-5, K) == K.D_hat
    assert d_max(0, 0.5, 2e-5, K) == 0.0
    with pytest.raises(ValueError):
        d_max(1, 0.5, 0.0, K)


def test_d_max_invariant_to_gain_and_frequency():
    other = K.replace(G_0=3.0, f_s=28e9)
    assert d_max_uncapped(3, 0.7, 1e-5, other) == pytest.approx(d_max_uncapped(3, 0.7, 1e-5, K), rel=1e-12)


def test_sensing_capacities_examples():
    m = JointParams(2e-5, 5.5, 4.0)
    c = sensing_capacities(PlanningDecision(5.0, 1.0, 10, 0, 3, 6e9), m, K)
    assert c.N_I_bar == 0
    assert c.N_A_bar == pytest.approx(min(3 / 0.05, 1e-3 * 1000 * 6e9 / 1e8))
    c0 = sensing_capacities(PlanningDecision(5.0, 0.5, 10, 1, 0, 0.0), m, K)
    assert c0.N_A_bar == 0
    assert c0.N_I_bar == min(contact_cdf(m, 5.0) * 5.5, 10.0, 20.0)
    assert K.tau * K.T * K.F_e_I / K.C_0 == pytest.approx(20.0)


def test_rho_min_example():
    assert rho_min(IndependentParams(2e-5, 5.5 * 2e-5), K) == pytest.approx(0.725)
    assert rho_min(JointParams(2e-5, 50, 4.0), K) == pytest.approx(0.0)


def test_closed_form_rho_one():
    m = JointParams(2e-5, 5.5, 4.0)
    out = closed_form_given_rho(1.0, m, K)
    assert out["X_s_I"] == 0
    assert out["X_s_A"] == pytest.approx(0.05 * sensing_demand(m, K))
    assert out["F_e_A"] == pytest.approx(out["X_s_A"] * 1e8 / (0.05 * 1e-3 * 1000))


def test_closed_form_below_minimum():
    with pytest.raises(ValueError):
        closed_form_given_rho(0.5, IndependentParams(2e-5, 1.1e-4), K)


@given(models, st.floats(0.0, 1.0))
def test_round_trip_identity(model, frac):
    lo = rho_min(model, K)
    rho = lo + (1 - lo) * frac
    assume(1e-3 < 1 - rho and rho > lo + 1e-6)
    x = closed_form_given_rho(rho, model, K)["X_s_I"]
    assume(x > 0)
    D = d_max_uncapped(x, rho, model.lambda_I, K)
    e1 = model.mu_U if isinstance(model, JointParams) else model.lambda_U / model.lambda_I
    assert contact_cdf(model, D) == pytest.approx((1 - rho) / (K.rho_hat_s * e1), rel=1e-9)
    if x >= 1:
        assert sir_success_probability(D, model.lambda_I, rho, x, K) == pytest.approx(K.P_hat, rel=1e-9)


def test_cost_examples():
    z = cost(PlanningDecision(0.0, 1.0, 0, 0, 0, 0.0), K)
    assert z.Z == pytest.approx(3e6)
    d = PlanningDecision(4.0, 0.9, 100, 2, 3, 5e9)
    z = cost(d, K)
    assert z.Z_c_A == 3 * 100 * 15e3 and z.Z_s_I == 2e6 and z.Z_s_A == 3 * 4 * 1e6 and z.Z_e_A == 1.5e10
    assert z.Z == pytest.approx(z.Z_c_A + z.Z_s_I + z.Z_s_A + 1e-3 * z.Z_e_A)
    k0 = K.replace(xi=0.0)
    assert cost(d, k0).Z == cost(PlanningDecision(4.0, 0.9, 100, 2, 3, 0.0), k0).Z


def test_rho_grid():
    g = rho_grid(0.725, 1e-3)
    assert g[0] == 1.0 and g[-1] == pytest.approx(0.725)
    assert rho_grid(0.0, 0.25).min() == pytest.approx(0.25)


@settings(max_examples=60, deadline=None)
@given(models)
def test_plan_feasible_and_rounded(model):
    planner = NetworkPlanner(K)
    d = planner.plan(model)
    assert all(feasibility(d, model, K).values())
    for name in ("X_c_A", "X_s_I", "X_s_A"):
        assert getattr(d, name) == math.ceil(planner.relaxed_[name] - 1e-9)
    assert 0 <= d.D_max <= K.D_hat
    # relaxed solution satisfies the three reduction conditions
    relaxed = planner.relaxed_
    assert d.rho_c >= rho_min(model, K) - 1e-12
    assert relaxed["F_e_A"] == pytest.approx(relaxed["X_s_A"] * K.C_0 / (K.rho_hat_s * K.tau * K.T))


@settings(max_examples=30, deadline=None)
@given(models, st.floats(1.0, 3.0))
def test_plan_monotone_in_rate_requirement(model, factor):
    more_rate = K.replace(R_hat=K.R_hat * factor)
    assert cost(plan(model, more_rate), more_rate).Z >= cost(plan(model, K), K).Z - 1e-6


@given(st.floats(3e-6, 6e-5), st.floats(1, 10), st.floats(0.5, 12), st.floats(1.0, 3.0), st.floats(0, 1))
def test_ap_share_monotone_in_demand(lam, sigma, mu, factor, frac):
    small, big = JointParams(lam, mu, sigma), JointParams(lam, mu * factor, sigma)
    lo = rho_min(small, K)
    rho = lo + (1 - lo) * frac
    assume(rho > 0)
    a = closed_form_given_rho(rho, small, K)["X_s_A"]
    b = closed_form_given_rho(rho, big, K)["X_s_A"]
    assert b >= a - 1e-12


def test_more_targets_per_device_can_lower_cost():
    # larger E[N_I1] shrinks the radius each device needs, which can outweigh the extra demand
    lam = 4.465e-5
    sparse, dense = IndependentParams(lam, 0.5 * lam), IndependentParams(lam, lam)
    assert cost(plan(dense, K), K).Z < cost(plan(sparse, K), K).Z


def test_plan_matches_brute_force_small():
    p = {"lambda_I": 1.5e-5, "mu_U": 5.5, "sigma_U": 4.0}
    _, z_star = oracles.brute_force_plan("joint", p, K, rho_step=0.01)
    z = cost(plan(JointParams(**p), K), K).Z
    assert z <= 1.02 * z_star


def test_decision_validation():
    with pytest.raises(ValueError):
        PlanningDecision(1.0, 0.0, 1, 1, 1, 1.0)
    with pytest.raises(ValueError):
        PlanningDecision(1.0, 0.5, -1, 1, 1, 1.0)
