"""Prediction-error based drift detection and model-set selection."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .models import PARAM_NAMES

EPS = 1e-12

# parameter -> models that use it
SHARED = "lambda_I"
INDEPENDENT_ONLY = ("lambda_U",)
JOINT_ONLY = ("mu_U", "sigma_U")


def absolute_percentage_errors(predicted, reference) -> np.ndarray:
    predicted = np.asarray(predicted, dtype=float).ravel()
    reference = np.asarray(reference, dtype=float).ravel()
    if predicted.shape != reference.shape:
        raise ValueError(f"length mismatch: {predicted.shape[0]} vs {reference.shape[0]}")
    return np.abs(predicted - reference) / np.maximum(np.abs(reference), EPS)


def mape(predicted, reference) -> float:
    errors = absolute_percentage_errors(predicted, reference)
    if errors.size == 0:
        raise ValueError("empty input")
    return float(errors.mean())


@dataclass(frozen=True)
class DriftFlags:
    H_S: int = 0
    H_D: int = 0

    @property
    def any(self) -> bool:
        return bool(self.H_S or self.H_D)


@dataclass(frozen=True)
class ModelSet:
    members: frozenset
    retrain: frozenset = frozenset()

    def __post_init__(self):
        if not self.members:
            raise ValueError("model set cannot be empty")


def flags_from_verdicts(verdicts: dict) -> DriftFlags:
    """Map per-parameter degradation verdicts to (H_S, H_D).

    The shared device intensity marks both models; ``lambda_U`` only the
    independent one; ``mu_U``/``sigma_U`` only the joint one.
    """
    shared = bool(verdicts.get(SHARED, False))
    h_s = shared or any(verdicts.get(p, False) for p in INDEPENDENT_ONLY)
    h_d = shared or any(verdicts.get(p, False) for p in JOINT_ONLY)
    return DriftFlags(int(h_s), int(h_d))


def select_models(flags: DriftFlags, triggered=()) -> ModelSet:
    if not flags.any:
        return ModelSet(frozenset({"joint"}))
    return ModelSet(frozenset({"joint", "independent"}), frozenset(triggered))


@dataclass
class MapeTracker:
    """Per-window absolute percentage errors for each tracked parameter.

    A parameter is degraded when the mean error over the last ``K_1`` windows
    exceeds ``max(theta_abs, theta_rel * baseline)``.  The baseline is the
    median error over the windows before that span, held at its running
    maximum so that a zero-error window can never create a drift verdict.
    """

    K_1: int = 3
    theta_abs: float = 0.15
    theta_rel: float = 3.0
    names: tuple = PARAM_NAMES
    errors: dict = field(default_factory=dict)
    windows: list = field(default_factory=list)
    _baseline: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in self.names:
            self.errors.setdefault(name, [])
            self._baseline.setdefault(name, 0.0)

    def append(self, k: int, predicted: dict, reference: dict) -> None:
        self.windows.append(k)
        for name in self.names:
            ape = absolute_percentage_errors([predicted[name]], [reference[name]])[0]
            self.errors[name].append(float(ape))
            hist = self.errors[name]
            if len(hist) > self.K_1:
                median = float(np.median(hist[: -self.K_1]))
                self._baseline[name] = max(self._baseline[name], median)

    def threshold(self, name: str) -> float:
        return max(self.theta_abs, self.theta_rel * self._baseline[name])

    def recent(self, name: str) -> float:
        return float(np.mean(self.errors[name][-self.K_1 :]))

    def verdicts(self) -> dict:
        out = {}
        for name in self.names:
            if len(self.errors[name]) < self.K_1:
                out[name] = False
            else:
                out[name] = self.recent(name) > self.threshold(name)
        return out


def detect_drift(tracker: MapeTracker) -> DriftFlags:
    """Flags from the tracker's current verdicts; (0, 0) with short history."""
    return flags_from_verdicts(tracker.verdicts())


class DriftDetector(BaseEstimator):
    """Stateful detector used inside the planning loop.

    A triggered parameter stays active until its verdict has been clear for
    ``K_1`` consecutive windows; flags are computed from the active set.
    """

    def __init__(self, K_1=3, theta_abs=0.15, theta_rel=3.0, names=PARAM_NAMES):
        self.K_1 = K_1
        self.theta_abs = theta_abs
        self.theta_rel = theta_rel
        self.names = names

    def reset(self):
        self.tracker_ = MapeTracker(self.K_1, self.theta_abs, self.theta_rel, tuple(self.names))
        self.active_ = {}
        return self

    def update(self, k: int, predicted: dict, reference: dict):
        """Record window ``k`` and return (flags, newly triggered parameters)."""
        if not hasattr(self, "tracker_"):
            self.reset()
        self.tracker_.append(k, predicted, reference)
        verdicts = self.tracker_.verdicts()
        new = set()
        for name, bad in verdicts.items():
            if bad:
                if name not in self.active_:
                    new.add(name)
                self.active_[name] = 0
            elif name in self.active_:
                self.active_[name] += 1
                if self.active_[name] >= self.K_1:
                    del self.active_[name]
        self.verdicts_ = verdicts
        flags = flags_from_verdicts({name: True for name in self.active_})
        return flags, new

    @property
    def active(self) -> frozenset:
        return frozenset(getattr(self, "active_", {}))
