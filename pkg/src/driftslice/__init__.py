"""Digital-twin based network slicing for cooperative sensing and communication under model drift."""

from .constants import SystemConstants
from .drift import DriftDetector, DriftFlags, MapeTracker, detect_drift, mape
from .emulator import DecisionEmulator, EmulationInstance, EvaluationResult, build_instances, evaluate
from .geometry import HexRegion, PointPattern, Snapshot, assign_nearest, sample_ppp, sample_thomas
from .harness import (
    SCHEMES,
    HarnessConfig,
    PlanningLoop,
    WindowMetrics,
    actual_satisfaction,
    emit_csv,
    load_config,
    read_csv,
    run_experiment,
    run_window,
)
from .models import (
    IndependentModel,
    IndependentParams,
    JointModel,
    JointParams,
    contact_cdf,
    fit_independent,
    fit_joint,
    summarize,
)
from .physics import echo_power, interference_cdf, interferer_power, sir_success_probability
from .planner import NetworkPlanner, PlanningDecision, closed_form_given_rho, cost, d_max, plan
from .predictor import LSTMForecaster, ParamSeries, PredictorBank
from .scenario import ScenarioConfig, drift_schedule, generate_snapshot, generate_window, params_at

__version__ = "0.1.0"

__all__ = [
    "SCHEMES", "DecisionEmulator", "DriftDetector", "DriftFlags", "EmulationInstance",
    "EvaluationResult", "HarnessConfig", "HexRegion", "IndependentModel", "IndependentParams",
    "JointModel", "JointParams", "LSTMForecaster", "MapeTracker", "NetworkPlanner", "ParamSeries",
    "PlanningDecision", "PlanningLoop", "PointPattern", "PredictorBank", "ScenarioConfig",
    "Snapshot", "SystemConstants", "WindowMetrics", "actual_satisfaction", "assign_nearest",
    "build_instances", "closed_form_given_rho", "contact_cdf", "cost", "d_max", "detect_drift",
    "drift_schedule", "echo_power", "emit_csv", "evaluate", "fit_independent", "fit_joint",
    "generate_snapshot", "generate_window", "interference_cdf", "interferer_power", "load_config",
    "mape", "params_at", "plan", "read_csv", "run_experiment", "run_window", "sample_ppp",
    "sample_thomas", "sir_success_probability", "summarize",
]
