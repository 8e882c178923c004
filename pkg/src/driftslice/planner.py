"""Closed-form demand/capacity estimates and the single-variable planner.

Given a spatial model, the optimal communication share ``rho_c`` is found
by grid search; for each candidate ``rho_c`` the remaining decision
variables follow in closed form.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .constants import SystemConstants
from .models import IndependentParams, JointParams, contact_cdf, expected_targets_nearest
from .validation import check_positive, check_rho

DEFAULT_CONSTANTS = SystemConstants()


@dataclass(frozen=True)
class PlanningDecision:
    D_max: float
    rho_c: float
    X_c_A: int
    X_s_I: int
    X_s_A: int
    F_e_A: float

    def __post_init__(self):
        check_rho(self.rho_c)
        for name in ("X_c_A", "X_s_I", "X_s_A"):
            value = getattr(self, name)
            if value < 0 or int(value) != value:
                raise ValueError(f"{name} must be a non-negative integer, got {value}")
        if self.F_e_A < 0 or self.D_max < 0:
            raise ValueError("F_e_A and D_max must be non-negative")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CapacityBreakdown:
    R_bar: float
    E_NI: float
    E_NU: float
    N_I_bar: float
    N_A_bar: float
    t_proc_device: float
    t_proc_ap: float


@dataclass(frozen=True)
class CostBreakdown:
    Z_c_A: float
    Z_s_I: float
    Z_s_A: float
    Z_e_A: float
    Z: float


# -- demand and capacity ---------------------------------------------------

def expected_devices(lambda_I, constants: SystemConstants = DEFAULT_CONSTANTS):
    """E[N^I] given at least one device in the coverage area."""
    lam = np.asarray(lambda_I, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("lambda_I must be positive")
    x = lam * constants.A_0
    out = x / -np.expm1(-x)
    return float(out) if out.ndim == 0 else out


def comm_capacity(rho_c, X_c_A, lambda_I, constants: SystemConstants = DEFAULT_CONSTANTS):
    """Lower bound on a device's expected rate (bits/slot)."""
    rho = np.asarray(rho_c, dtype=float)
    if np.any((rho <= 0) | (rho > 1)):
        raise ValueError("rho_c must lie in (0, 1]")
    if np.any(np.asarray(X_c_A) < 0):
        raise ValueError("X_c_A must be non-negative")
    e_ni = expected_devices(lambda_I, constants)
    out = rho * constants.R_0 * np.asarray(X_c_A, float) / (1.0 + (e_ni - 1.0) * rho)
    return float(out) if out.ndim == 0 else out


def sensing_demand(model, constants: SystemConstants = DEFAULT_CONSTANTS) -> float:
    """Expected number of targets in the RoIs of one AP's devices."""
    if model.lambda_I <= 0:
        return 0.0
    return (
        expected_devices(model.lambda_I, constants)
        * contact_cdf(model, constants.D_hat)
        * expected_targets_nearest(model)
    )


def range_scale(lambda_I, constants: SystemConstants = DEFAULT_CONSTANTS):
    """(sigma_bar * (-ln P_hat) / (gamma_hat_s * phi_I^2 * lambda_I))^(1/4)."""
    k = constants
    return (k.sigma_bar * -math.log(k.P_hat) / (k.gamma_hat_s * k.phi_I**2 * lambda_I)) ** 0.25


def d_max_uncapped(X_s_I, rho_c, lambda_I, constants: SystemConstants = DEFAULT_CONSTANTS):
    """Largest device-target distance meeting the SIR requirement (no RoI cap)."""
    check_positive(lambda_I, "lambda_I")
    rho_c = check_rho(rho_c)
    if X_s_I < 0:
        raise ValueError("X_s_I must be non-negative")
    if X_s_I == 0:
        return 0.0
    if rho_c == 1.0:
        return math.inf
    return range_scale(lambda_I, constants) * (X_s_I / (1.0 - rho_c)) ** 0.25


def d_max(X_s_I, rho_c, lambda_I, constants: SystemConstants = DEFAULT_CONSTANTS) -> float:
    """SIR-limited on-device subregion radius, capped at the RoI radius."""
    return min(d_max_uncapped(X_s_I, rho_c, lambda_I, constants), constants.D_hat)


def sensing_capacities(decision: PlanningDecision, model,
                       constants: SystemConstants = DEFAULT_CONSTANTS,
                       radius: float | None = None) -> CapacityBreakdown:
    """Per-device and per-AP sensing capacity of ``decision`` under ``model``.

    ``radius`` overrides the on-device subregion radius (defaults to the
    decision's ``D_max``).
    """
    k = constants
    radius = decision.D_max if radius is None else radius
    e1 = expected_targets_nearest(model)
    n_i = min(contact_cdf(model, radius) * e1, (1.0 - decision.rho_c) / k.rho_hat_s, k.device_compute_cap)
    n_a = min(decision.X_s_A / k.rho_hat_s, k.tau * k.T * decision.F_e_A / k.C_0)
    return CapacityBreakdown(
        R_bar=comm_capacity(decision.rho_c, decision.X_c_A, model.lambda_I, k),
        E_NI=expected_devices(model.lambda_I, k),
        E_NU=sensing_demand(model, k),
        N_I_bar=n_i,
        N_A_bar=n_a,
        t_proc_device=n_i * k.C_0 / k.F_e_I,
        t_proc_ap=n_a * k.C_0 / decision.F_e_A if decision.F_e_A > 0 else 0.0,
    )


# -- single-variable reduction --------------------------------------------

def rho_min(model, constants: SystemConstants = DEFAULT_CONSTANTS) -> float:
    """Smallest admissible rho_c: 1 - rho_hat_s * min(E[N_I1], device compute cap)."""
    return 1.0 - constants.rho_hat_s * min(expected_targets_nearest(model), constants.device_compute_cap)


def _log_term(rho, model, constants):
    """ln[1 - (1 - rho) / (rho_hat_s * E[N_I1])] written per model family."""
    k = constants
    if isinstance(model, IndependentParams):
        arg = 1.0 - (1.0 - rho) / k.rho_hat_s * model.lambda_I / model.lambda_U
    else:
        arg = 1.0 - (1.0 - rho) / k.rho_hat_s / model.mu_U
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(arg > 0, np.log(np.where(arg > 0, arg, 1.0)), -np.inf)


def closed_form_given_rho(rho_c, model, constants: SystemConstants = DEFAULT_CONSTANTS) -> dict:
    """Relaxed optimal (X_c_A, X_s_I, X_s_A, F_e_A) for fixed ``rho_c``.

    Vectorized over ``rho_c``.  Raises when any ``rho_c`` is below
    :func:`rho_min` (the on-device equality has no solution there).
    """
    k = constants
    rho = np.asarray(rho_c, dtype=float)
    if np.any((rho <= 0) | (rho > 1)):
        raise ValueError("rho_c must lie in (0, 1]")
    lower = rho_min(model, k)
    if np.any(rho < lower - 1e-12):
        raise ValueError(f"rho_c below its minimum {lower:.6g}")
    e_ni = expected_devices(model.lambda_I, k)
    theta4 = range_scale(model.lambda_I, k) ** 4
    log_term = _log_term(rho, model, k)
    one_minus = 1.0 - rho
    with np.errstate(invalid="ignore"):
        if isinstance(model, IndependentParams):
            x_s_i = one_minus / (theta4 * math.pi**2 * model.lambda_I**2) * log_term**2
        elif isinstance(model, JointParams):
            x_s_i = 4.0 * one_minus * model.sigma_U**4 / theta4 * log_term**2
        else:
            raise TypeError(f"unsupported model {type(model).__name__}")
    x_s_i = np.where(one_minus == 0, 0.0, x_s_i)
    x_c_a = k.R_hat / k.R_0 * (1.0 / rho + e_ni - 1.0)
    x_s_a = k.rho_hat_s * np.maximum(sensing_demand(model, k) - e_ni * one_minus / k.rho_hat_s, 0.0)
    f_e_a = x_s_a * k.C_0 / (k.rho_hat_s * k.tau * k.T)
    out = {"X_c_A": x_c_a, "X_s_I": x_s_i, "X_s_A": x_s_a, "F_e_A": f_e_a}
    if rho.ndim == 0:
        out = {key: float(v) for key, v in out.items()}
    return out


def cost(decision, constants: SystemConstants = DEFAULT_CONSTANTS) -> CostBreakdown:
    """Overall resource consumption of a decision (works on arrays too)."""
    k = constants
    get = decision.get if isinstance(decision, dict) else lambda name: getattr(decision, name)
    z_c = k.L * np.asarray(get("X_c_A"), float) * k.B_c0
    z_si = np.asarray(get("X_s_I"), float) * k.B_s0
    z_sa = k.L * (k.X_hat_s_A + np.asarray(get("X_s_A"), float)) * k.B_s0
    z_e = k.L * np.asarray(get("F_e_A"), float)
    z = k.omega * (z_c + z_si + z_sa) + k.xi * z_e
    if np.ndim(z) == 0:
        return CostBreakdown(float(z_c), float(z_si), float(z_sa), float(z_e), float(z))
    return CostBreakdown(z_c, z_si, z_sa, z_e, z)


def _ceil(x):
    # guard against values like 3.0000000000004 from floating point
    return np.ceil(np.asarray(x, float) - 1e-9).clip(min=0)


def rho_grid(lower: float, step: float) -> np.ndarray:
    """Grid ``1, 1 - step, ...`` down to (and including) ``lower``."""
    lower = max(lower, step)
    n = int(math.floor((1.0 - lower) / step + 1e-9))
    return 1.0 - step * np.arange(n + 1)


def feasibility(decision: PlanningDecision, model, constants: SystemConstants = DEFAULT_CONSTANTS) -> dict:
    """Check the rate, sensing-capacity and SIR constraints under ``model``."""
    cap = sensing_capacities(decision, model, constants)
    limit = d_max_uncapped(decision.X_s_I, decision.rho_c, model.lambda_I, constants)
    return {
        "rate": cap.R_bar >= constants.R_hat * (1 - 1e-12),
        "sensing": cap.N_A_bar + cap.E_NI * cap.N_I_bar >= cap.E_NU * (1 - 1e-12) - 1e-12,
        "sir": decision.D_max <= limit * (1 + 1e-12),
    }


class NetworkPlanner(BaseEstimator):
    """Grid search over ``rho_c`` with closed-form remaining variables.

    Parameters
    ----------
    constants : SystemConstants
    grid_step : float
        Spacing of the ``rho_c`` grid.
    """

    def __init__(self, constants=DEFAULT_CONSTANTS, grid_step=1e-3):
        self.constants = constants
        self.grid_step = grid_step

    def candidates(self, model) -> dict:
        """Relaxed and rounded candidates with costs for every grid point."""
        k = self.constants
        grid = rho_grid(rho_min(model, k), self.grid_step)
        relaxed = closed_form_given_rho(grid, model, k)
        rounded = {name: _ceil(relaxed[name]) for name in ("X_c_A", "X_s_I", "X_s_A")}
        rounded["F_e_A"] = rounded["X_s_A"] * k.C_0 / (k.rho_hat_s * k.tau * k.T)
        z = cost(rounded, k).Z
        z = np.where(np.isfinite(relaxed["X_s_I"]), z, np.inf)
        return {"rho_c": grid, "relaxed": relaxed, "rounded": rounded, "Z": z}

    def plan(self, model) -> PlanningDecision:
        k = self.constants
        cand = self.candidates(model)
        j = int(np.argmin(cand["Z"]))
        rho = float(cand["rho_c"][j])
        r = {name: float(v[j]) for name, v in cand["rounded"].items()}
        self.relaxed_ = {name: float(v[j]) for name, v in cand["relaxed"].items()}
        return PlanningDecision(
            D_max=d_max(r["X_s_I"], rho, model.lambda_I, k),
            rho_c=rho,
            X_c_A=int(r["X_c_A"]),
            X_s_I=int(r["X_s_I"]),
            X_s_A=int(r["X_s_A"]),
            F_e_A=r["F_e_A"],
        )

    def fit(self, model, y=None):
        self.decision_ = self.plan(model)
        return self


def plan(model, constants: SystemConstants = DEFAULT_CONSTANTS, grid_step: float = 1e-3) -> PlanningDecision:
    return NetworkPlanner(constants, grid_step).plan(model)
