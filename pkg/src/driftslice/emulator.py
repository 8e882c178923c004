"""Emulation-based evaluation of candidate planning decisions.

Historical snapshots become deterministic slice instances; a decision is
scored by how far its capacities sit from the demands measured on them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .constants import SystemConstants
from .geometry import PointPattern
from .models import SnapshotSummary, summarize
from .planner import DEFAULT_CONSTANTS, PlanningDecision, comm_capacity, d_max
from .validation import check_is_fitted


@dataclass
class EmulationInstance:
    devices: PointPattern
    targets: PointPattern

    @property
    def n_devices(self) -> int:
        return len(self.devices)

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    @property
    def region(self):
        return self.devices.region


@dataclass(frozen=True)
class EvaluationResult:
    delta_c: float
    delta_s: float

    @property
    def delta(self) -> float:
        return 0.5 * (self.delta_c + self.delta_s)


def build_instances(snapshots) -> list[EmulationInstance]:
    """One instance per collected snapshot, point sets copied."""
    snapshots = list(snapshots)
    if not snapshots:
        raise ValueError("no snapshots to build instances from")
    out = []
    for s in snapshots:
        if s.n_devices < 1:
            raise ValueError("every instance needs at least one device")
        out.append(
            EmulationInstance(
                PointPattern(s.devices.points.copy(), s.region),
                PointPattern(s.targets.points.copy(), s.region),
            )
        )
    return out


class DecisionEmulator(BaseEstimator):
    """Scores decisions against a fixed set of emulation instances.

    ``fit`` precomputes the nearest-device assignment of every target so
    that evaluating many decisions is cheap.
    """

    def __init__(self, constants=DEFAULT_CONSTANTS):
        self.constants = constants

    def fit(self, instances, y=None):
        if isinstance(instances, SnapshotSummary):
            self.summary_ = instances
        else:
            instances = list(instances)
            if not instances:
                raise ValueError("no emulation instances")
            self.summary_ = summarize(instances)
        s = self.summary_
        if np.any(s.n_devices < 1):
            raise ValueError("every instance needs at least one device")
        self.lambda_I_ = s.total_devices / s.total_area
        self.n_instances_ = len(s.n_devices)
        return self

    def comm_gap(self, decision: PlanningDecision) -> float:
        check_is_fitted(self, "summary_")
        k = self.constants
        r_bar = comm_capacity(decision.rho_c, decision.X_c_A, self.lambda_I_, k)
        return abs(r_bar - k.R_hat) / k.R_hat

    def sensing_counts(self, decision: PlanningDecision) -> dict:
        """Instance-averaged device count, per-device monitored targets and demand."""
        check_is_fitted(self, "summary_")
        k = self.constants
        s = self.summary_
        radius = min(decision.D_max, d_max(decision.X_s_I, decision.rho_c, self.lambda_I_, k))
        near = s.target_device[s.target_dist <= radius]
        per_device = np.bincount(near, minlength=s.total_devices).astype(float)
        cap = min((1.0 - decision.rho_c) / k.rho_hat_s, k.device_compute_cap)
        monitored = np.minimum(per_device, cap)
        return {
            "E_NI": s.total_devices / self.n_instances_,
            "N_I_bar": float(monitored.sum()) / s.total_devices,
            "N_U_bar": float(np.count_nonzero(s.target_dist <= k.D_hat)) / self.n_instances_,
            "N_A_bar": min(decision.X_s_A / k.rho_hat_s, k.tau * k.T * decision.F_e_A / k.C_0),
        }

    def sensing_gap(self, decision: PlanningDecision) -> float:
        c = self.sensing_counts(decision)
        if c["N_U_bar"] == 0:
            return 0.0
        return abs(c["N_U_bar"] - (c["N_A_bar"] + c["E_NI"] * c["N_I_bar"])) / c["N_U_bar"]

    def evaluate(self, decision: PlanningDecision) -> EvaluationResult:
        return EvaluationResult(self.comm_gap(decision), self.sensing_gap(decision))


def emulate_comm_gap(decision, instances, constants: SystemConstants = DEFAULT_CONSTANTS) -> float:
    return DecisionEmulator(constants).fit(instances).comm_gap(decision)


def emulate_sensing_gap(decision, instances, constants: SystemConstants = DEFAULT_CONSTANTS) -> float:
    return DecisionEmulator(constants).fit(instances).sensing_gap(decision)


def evaluate(decision, instances, constants: SystemConstants = DEFAULT_CONSTANTS) -> EvaluationResult:
    return DecisionEmulator(constants).fit(instances).evaluate(decision)
