"""Per-window planning loop, benchmark schemes and experiment driver."""
from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .constants import CONSTANT_KEYS, SystemConstants
from .drift import DriftDetector, DriftFlags, absolute_percentage_errors, select_models
from .emulator import DecisionEmulator
from .models import PARAM_NAMES, JointParams, params_from_vector, reference_values, summarize
from .planner import (
    CostBreakdown,
    NetworkPlanner,
    PlanningDecision,
    comm_capacity,
    cost,
    d_max,
    sensing_capacities,
    sensing_demand,
)
from .predictor import ParamSeries, PredictorBank
from .scenario import ScenarioConfig, generate_window

log = logging.getLogger(__name__)

SCHEMES = ("dt_adaptive", "joint", "independent", "joint_ideal", "independent_ideal")
SCHEME_MODEL = {
    "joint": "joint",
    "joint_ideal": "joint",
    "independent": "independent",
    "independent_ideal": "independent",
    "dt_adaptive": "joint",
}
MODEL_PARAMS = {"joint": ("lambda_I", "mu_U", "sigma_U"), "independent": ("lambda_I", "lambda_U")}

CSV_COLUMNS = (
    "run", "window", "scheme", "sat_comm", "sat_sens", "sat_avg", "Z", "Z_cA", "Z_sI", "Z_sA",
    "Z_eA", "mape_lI", "mape_lU", "mape_mU", "mape_sU", "H_S", "H_D", "chosen_model", "rho_c",
    "X_cA", "X_sI", "X_sA", "F_eA", "D_max",
)
_INT_COLUMNS = {"run", "window", "H_S", "H_D", "X_cA", "X_sI", "X_sA"}
_STR_COLUMNS = {"scheme", "chosen_model"}
_MAPE_COLUMNS = dict(zip(PARAM_NAMES, ("mape_lI", "mape_lU", "mape_mU", "mape_sU")))


@dataclass(frozen=True)
class HarnessConfig:
    constants: SystemConstants = field(default_factory=SystemConstants)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    schemes: tuple = SCHEMES
    K_0: int = 10
    K_1: int = 3
    theta_abs: float = 0.15
    theta_rel: float = 3.0
    hidden_size: int = 16
    max_epochs: int = 400
    target_mape: float = 0.02
    learning_rate: float = 0.01
    predictor_seed: int = 0
    grid_step: float = 1e-3
    retrain_span: int = 40
    bootstrap_windows: int | None = None
    independent_roi: bool = True
    n_jobs: int = 1

    def __post_init__(self):
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ValueError(f"unknown scheme(s): {', '.join(sorted(unknown))}")
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        if self.retrain_span < 2 * self.K_0:
            raise ValueError("retrain_span must be at least 2*K_0")
        if self.bootstrap < 2 * self.K_0 - 1:
            raise ValueError("bootstrap must leave at least 2*K_0 reference values")
        if self.bootstrap >= self.scenario.windows:
            raise ValueError("bootstrap covers every window")

    @property
    def bootstrap(self) -> int:
        """Last bootstrap window; windows 1..bootstrap are excluded from aggregates."""
        return 2 * self.K_0 if self.bootstrap_windows is None else self.bootstrap_windows

    def replace(self, **changes) -> "HarnessConfig":
        scen = {k: changes.pop(k) for k in list(changes) if k in ScenarioConfig.__dataclass_fields__}
        const = {k: changes.pop(k) for k in list(changes) if k in SystemConstants.__dataclass_fields__}
        out = replace(self, **changes)
        if scen:
            out = replace(out, scenario=replace(out.scenario, **scen))
        if const:
            out = replace(out, constants=replace(out.constants, **const))
        return out

    @classmethod
    def from_mapping(cls, mapping) -> "HarnessConfig":
        """Flat mapping whose keys mirror the constant, scenario and harness fields."""
        own = {f.name: f for f in fields(cls) if f.name not in ("constants", "scenario")}
        const, scen, kwargs = {}, {}, {}
        for key, value in mapping.items():
            if key in CONSTANT_KEYS:
                const[key] = value
            elif key in ScenarioConfig.__dataclass_fields__:
                scen[key] = value
            elif key in own:
                if key == "schemes":
                    value = tuple(value.split(",")) if isinstance(value, str) else tuple(value)
                elif own[key].type == "int":
                    value = int(value)
                elif own[key].type == "float":
                    value = float(value)
                elif own[key].type == "bool":
                    value = bool(value)
                elif value is not None:
                    value = int(value)
                kwargs[key] = value
            else:
                raise KeyError(f"unknown configuration key {key!r}")
        return cls(
            constants=SystemConstants.from_mapping(const),
            scenario=ScenarioConfig.from_mapping(scen),
            **kwargs,
        )


def load_config(path) -> HarnessConfig:
    import yaml

    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a flat key/value mapping")
    return HarnessConfig.from_mapping(data)


@dataclass
class WindowMetrics:
    run: int
    window: int
    scheme: str
    sat_comm: float
    sat_sens: float
    cost: CostBreakdown
    mape: dict
    flags: DriftFlags
    chosen_model: str
    decision: PlanningDecision

    @property
    def sat_avg(self) -> float:
        return 0.5 * (self.sat_comm + self.sat_sens)

    def to_row(self) -> dict:
        d = self.decision
        row = {
            "run": self.run, "window": self.window, "scheme": self.scheme,
            "sat_comm": self.sat_comm, "sat_sens": self.sat_sens, "sat_avg": self.sat_avg,
            "Z": self.cost.Z, "Z_cA": self.cost.Z_c_A, "Z_sI": self.cost.Z_s_I,
            "Z_sA": self.cost.Z_s_A, "Z_eA": self.cost.Z_e_A,
        }
        for name, col in _MAPE_COLUMNS.items():
            row[col] = self.mape[name]
        row.update(
            H_S=self.flags.H_S, H_D=self.flags.H_D, chosen_model=self.chosen_model,
            rho_c=d.rho_c, X_cA=d.X_c_A, X_sI=d.X_s_I, X_sA=d.X_s_A, F_eA=d.F_e_A, D_max=d.D_max,
        )
        return row


def actual_satisfaction(decision: PlanningDecision, reference: JointParams,
                        constants: SystemConstants) -> tuple[float, float, float]:
    """(comm, sensing, average) satisfaction against end-of-window reference fits.

    The on-device radius is the deployed ``D_max`` shrunk, if needed, to what
    the SIR requirement allows at the reference device intensity.
    """
    k = constants
    comm = min(1.0, comm_capacity(decision.rho_c, decision.X_c_A, reference.lambda_I, k) / k.R_hat)
    demand = sensing_demand(reference, k)
    if demand <= 0:
        sens = 1.0
    else:
        radius = min(decision.D_max, d_max(decision.X_s_I, decision.rho_c, reference.lambda_I, k))
        cap = sensing_capacities(decision, reference, k, radius=radius)
        sens = min(1.0, (cap.N_A_bar + cap.E_NI * cap.N_I_bar) / demand)
    return comm, sens, 0.5 * (comm + sens)


def choose_decision(flags: DriftFlags, candidates: dict, emulator: DecisionEmulator | None):
    """Case 1 keeps the joint decision; Case 2 picks the smaller emulated gap.

    Returns (chosen model name, decision, {model: EvaluationResult}).
    """
    if not flags.any or emulator is None:
        return "joint", candidates["joint"], {}
    scores = {name: emulator.evaluate(dec) for name, dec in candidates.items()}
    if scores["independent"].delta < scores["joint"].delta:
        return "independent", candidates["independent"], scores
    return "joint", candidates["joint"], scores


class PlanningLoop:
    """State of one simulation run; call :meth:`run_window` for k = 1, 2, ..."""

    def __init__(self, config: HarnessConfig, run: int = 0):
        self.config = config
        self.run = run
        k = config.constants
        self.planner = NetworkPlanner(k, config.grid_step)
        self.roi = k.D_hat if config.independent_roi else None
        self.series = ParamSeries()
        bank_kwargs = dict(lookback=config.K_0, hidden_size=config.hidden_size,
                           max_epochs=config.max_epochs, target_mape=config.target_mape,
                           learning_rate=config.learning_rate, random_state=config.predictor_seed)
        self.static_bank = PredictorBank(**bank_kwargs)
        self.adaptive_bank: PredictorBank | None = None
        self.detector = DriftDetector(config.K_1, config.theta_abs, config.theta_rel).reset()
        self.retraining: set = set()
        self.adaptive_predictions: list = []
        self.flag_history: list = []
        self.summary = summarize(generate_window(0, config.scenario, k, run))
        self.series.append(0, reference_values(self.summary, self.roi))
        self.adaptive_predictions.append(None)
        self.next_window = 1

    # -- predictions ------------------------------------------------------
    def _last_values(self) -> dict:
        return {p: self.series.reference[p][-1] for p in PARAM_NAMES}

    def _static_predictions(self, k: int) -> dict:
        if k <= self.config.bootstrap:
            return self._last_values()
        if k == self.config.bootstrap + 1:
            self.static_bank.train(self.series)
            self.adaptive_bank = self.static_bank.copy()
        return self.static_bank.predict(self.series)

    def _adaptive_step(self, k: int) -> tuple[dict, DriftFlags, frozenset]:
        cfg = self.config
        if k <= cfg.bootstrap + 1:
            preds = self._static_predictions(k) if k > cfg.bootstrap else self._last_values()
            return preds, DriftFlags(), frozenset()
        prev_pred = self.adaptive_predictions[-1]
        prev_ref = {p: self.series.reference[p][-1] for p in PARAM_NAMES}
        flags, new = self.detector.update(k - 1, prev_pred, prev_ref)
        model_set = select_models(flags, self.detector.active)
        self.retraining = set(model_set.retrain)
        if self.retraining:
            span = self.series.history(PARAM_NAMES[0])
            start = max(0, len(span) - cfg.retrain_span)
            self.adaptive_bank.train(self.series, sorted(self.retraining), start=start)
        return self.adaptive_bank.predict(self.series), flags, model_set.members

    # -- one window -------------------------------------------------------
    def run_window(self, k: int | None = None) -> list[WindowMetrics]:
        cfg = self.config
        const = cfg.constants
        k = self.next_window if k is None else k
        if k != self.next_window:
            raise ValueError(f"windows must run in order; expected {self.next_window}, got {k}")
        summary_k = summarize(generate_window(k, cfg.scenario, const, self.run))
        ref_k = reference_values(summary_k, self.roi)
        static = self._static_predictions(k) if {"joint", "independent"} & set(cfg.schemes) else None
        if "dt_adaptive" in cfg.schemes:
            adaptive, flags, members = self._adaptive_step(k)
        else:
            adaptive, flags, members = None, DriftFlags(), frozenset({"joint"})
        self.flag_history.append(flags)

        ref_joint = JointParams(ref_k["lambda_I"], ref_k["mu_U"], ref_k["sigma_U"])
        emulator = None
        out = []
        for scheme in cfg.schemes:
            if scheme.endswith("_ideal"):
                preds, mape_src = ref_k, None
            elif scheme == "dt_adaptive":
                preds, mape_src = adaptive, adaptive
            else:
                preds, mape_src = static, static
            scheme_flags = flags if scheme == "dt_adaptive" else DriftFlags()
            if scheme == "dt_adaptive":
                candidates = {"joint": self.planner.plan(params_from_vector("joint", preds))}
                if scheme_flags.any:
                    candidates["independent"] = self.planner.plan(params_from_vector("independent", preds))
                    if emulator is None:
                        emulator = DecisionEmulator(const).fit(self.summary)
                chosen, decision, _ = choose_decision(scheme_flags, candidates, emulator)
            else:
                chosen = SCHEME_MODEL[scheme]
                decision = self.planner.plan(params_from_vector(chosen, preds))
            comm, sens, _ = actual_satisfaction(decision, ref_joint, const)
            if mape_src is None:
                ape = {p: 0.0 for p in PARAM_NAMES}
            else:
                ape = {p: float(absolute_percentage_errors([mape_src[p]], [ref_k[p]])[0]) for p in PARAM_NAMES}
            out.append(WindowMetrics(self.run, k, scheme, comm, sens, cost(decision, const), ape,
                                     scheme_flags, chosen, decision))

        self.series.append(k, ref_k, static)
        self.adaptive_predictions.append(adaptive)
        self.summary = summary_k
        self.next_window = k + 1
        return out


def run_window(state: PlanningLoop, k: int) -> list[WindowMetrics]:
    return state.run_window(k)


def simulate_run(config: HarnessConfig, run: int) -> dict:
    """All windows of one run.  Returns metric rows and the parameter series."""
    loop = PlanningLoop(config, run)
    rows = []
    for k in range(1, config.scenario.windows + 1):
        rows.extend(m.to_row() for m in loop.run_window(k))
    param_rows = []
    for j, (k, p, ref, pred) in enumerate(loop.series.rows()):
        adaptive = loop.adaptive_predictions[j // len(PARAM_NAMES)]
        param_rows.append({
            "run": run, "window": k, "parameter": p, "reference": ref,
            "predicted": "" if pred is None else pred,
            "predicted_adaptive": "" if adaptive is None else adaptive[p],
        })
    return {"rows": rows, "params": param_rows}


def sliding_mean(values, width: int = 20) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if len(values) < width:
        return np.empty(0)
    c = np.cumsum(np.r_[0.0, values])
    return (c[width:] - c[:-width]) / width


def modeling_error(rows, width: int = 20) -> list[dict]:
    """Width-``width`` sliding mean of each scheme's model-parameter MAPE per run."""
    out = []
    keyed = {}
    for r in rows:
        keyed.setdefault((r["run"], r["scheme"]), []).append(r)
    for (run, scheme), rs in sorted(keyed.items()):
        rs.sort(key=lambda r: r["window"])
        cols = [_MAPE_COLUMNS[p] for p in MODEL_PARAMS[SCHEME_MODEL[scheme]]]
        per_window = [float(np.mean([r[c] for c in cols])) for r in rs]
        smooth = sliding_mean(per_window, width)
        for j, v in enumerate(smooth):
            out.append({"run": run, "scheme": scheme, "window": rs[j + width - 1]["window"], "modeling_error": v})
    return out


def aggregate(rows, config: HarnessConfig, after: int | None = None) -> dict:
    """Per-scheme means over non-bootstrap windows (optionally only windows > ``after``)."""
    start = config.bootstrap if after is None else max(after, config.bootstrap)
    out = {}
    for scheme in config.schemes:
        rs = [r for r in rows if r["scheme"] == scheme and r["window"] > start]
        if not rs:
            continue
        out[scheme] = {
            "sat_comm": float(np.mean([r["sat_comm"] for r in rs])),
            "sat_sens": float(np.mean([r["sat_sens"] for r in rs])),
            "sat_avg": float(np.mean([r["sat_avg"] for r in rs])),
            "Z": float(np.mean([r["Z"] for r in rs])),
            "joint_utilization": float(np.mean([r["chosen_model"] == "joint" for r in rs])),
            "windows": len(rs),
        }
    return out


def run_experiment(config: HarnessConfig) -> dict:
    """Every run of ``config``; runs may execute in parallel processes."""
    runs = range(config.scenario.runs)
    if config.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=config.n_jobs) as pool:
            results = list(pool.map(simulate_run, [config] * len(runs), runs))
    else:
        results = [simulate_run(config, r) for r in runs]
    rows = [row for res in results for row in res["rows"]]
    params = [row for res in results for row in res["params"]]
    return {
        "rows": rows,
        "params": params,
        "modeling_error": modeling_error(rows),
        "aggregate": aggregate(rows, config),
        "aggregate_post_drift": aggregate(rows, config, after=config.scenario.switch_windows[0]),
    }


# -- CSV ---------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def emit_csv(rows, path, columns=CSV_COLUMNS) -> None:
    """Write ``rows`` (dicts) with an exact header; floats keep full precision."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in columns])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_csv(path) -> list[dict]:
    """Parse a metrics CSV written by :func:`emit_csv` back to typed rows."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row = {}
            for key, value in raw.items():
                if key in _STR_COLUMNS:
                    row[key] = value
                elif key in _INT_COLUMNS:
                    row[key] = int(value)
                else:
                    row[key] = float(value)
            rows.append(row)
    return rows


def write_outputs(result: dict, out_dir) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "metrics": os.path.join(out_dir, "metrics.csv"),
        "params": os.path.join(out_dir, "parameters.csv"),
        "modeling_error": os.path.join(out_dir, "modeling_error.csv"),
        "summary": os.path.join(out_dir, "summary.csv"),
    }
    emit_csv(result["rows"], paths["metrics"])
    emit_csv(result["params"], paths["params"],
             ("run", "window", "parameter", "reference", "predicted", "predicted_adaptive"))
    emit_csv(result["modeling_error"], paths["modeling_error"], ("run", "scheme", "window", "modeling_error"))
    summary = []
    for period, agg in (("all", result["aggregate"]), ("post_drift", result["aggregate_post_drift"])):
        for scheme, vals in agg.items():
            summary.append({"period": period, "scheme": scheme, **vals})
    emit_csv(summary, paths["summary"],
             ("period", "scheme", "sat_comm", "sat_sens", "sat_avg", "Z", "joint_utilization", "windows"))
    return paths


def config_as_dict(config: HarnessConfig) -> dict:
    d = {k: v for k, v in asdict(config).items() if k not in ("constants", "scenario")}
    d.update(config.constants.to_dict())
    d.update(config.scenario.to_dict())
    return d
