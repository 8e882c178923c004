"""Independent (two PPPs) and joint (Thomas cluster) spatial models.

Both models are fitted by maximum likelihood from collected snapshots and
expose the two quantities the planner needs: the CDF of the distance from a
target to its nearest device and the expected number of targets closest to a
device.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .geometry import assign_nearest
from .validation import check_is_fitted, check_snapshots

PARAM_NAMES = ("lambda_I", "lambda_U", "mu_U", "sigma_U")


@dataclass(frozen=True)
class IndependentParams:
    lambda_I: float
    lambda_U: float

    kind = "independent"
    names = ("lambda_I", "lambda_U")

    def __post_init__(self):
        if self.lambda_I < 0 or self.lambda_U < 0:
            raise ValueError("intensities must be non-negative")

    def as_dict(self) -> dict:
        return {"lambda_I": self.lambda_I, "lambda_U": self.lambda_U}


@dataclass(frozen=True)
class JointParams:
    lambda_I: float
    mu_U: float
    sigma_U: float

    kind = "joint"
    names = ("lambda_I", "mu_U", "sigma_U")

    def __post_init__(self):
        if self.lambda_I < 0 or self.mu_U < 0 or self.sigma_U < 0:
            raise ValueError("joint model parameters must be non-negative")

    def as_dict(self) -> dict:
        return {"lambda_I": self.lambda_I, "mu_U": self.mu_U, "sigma_U": self.sigma_U}


@dataclass
class SnapshotSummary:
    """Sufficient statistics of a batch of snapshots.

    ``target_dist``/``target_device`` hold, for every target, the distance to
    and the global index of its nearest device (devices numbered across
    snapshots in order).
    """

    total_area: float
    n_devices: np.ndarray
    n_targets: np.ndarray
    target_dist: np.ndarray
    target_device: np.ndarray

    @property
    def total_devices(self) -> int:
        return int(self.n_devices.sum())

    @property
    def total_targets(self) -> int:
        return int(self.n_targets.sum())


def summarize(snapshots) -> SnapshotSummary:
    snapshots = check_snapshots(snapshots)
    n_dev = np.array([s.n_devices for s in snapshots], dtype=int)
    n_tgt = np.array([s.n_targets for s in snapshots], dtype=int)
    dists, owners = [], []
    offset = 0
    for s, nd in zip(snapshots, n_dev):
        if s.n_targets:
            if nd == 0:
                raise ValueError("a snapshot with targets must contain at least one device")
            idx, d = assign_nearest(s.targets.points, s.devices.points)
            dists.append(d)
            owners.append(idx + offset)
        offset += nd
    return SnapshotSummary(
        total_area=float(sum(s.region.area for s in snapshots)),
        n_devices=n_dev,
        n_targets=n_tgt,
        target_dist=np.concatenate(dists) if dists else np.empty(0),
        target_device=np.concatenate(owners) if owners else np.empty(0, int),
    )


def _as_summary(data) -> SnapshotSummary:
    return data if isinstance(data, SnapshotSummary) else summarize(data)


def fit_independent(snapshots, roi_radius: float | None = None) -> IndependentParams:
    """Poisson MLEs: count over observed area.

    With ``roi_radius=None`` targets are observed over the whole coverage
    area.  With a radius, only targets within that distance of their nearest
    device are observed and the observation area is the nominal RoI area
    (devices x pi r^2, overlaps and boundary clipping ignored).
    """
    s = _as_summary(snapshots)
    lambda_I = s.total_devices / s.total_area
    if roi_radius is None:
        lambda_U = s.total_targets / s.total_area
    elif s.total_devices == 0:
        lambda_U = 0.0
    else:
        seen = int(np.count_nonzero(s.target_dist <= roi_radius))
        lambda_U = seen / (s.total_devices * math.pi * roi_radius**2)
    return IndependentParams(lambda_I, lambda_U)


def fit_joint(snapshots) -> JointParams:
    """Thomas-process MLEs with cluster membership by nearest device."""
    if not isinstance(snapshots, SnapshotSummary):
        check_snapshots(snapshots, require_devices=True)
    s = _as_summary(snapshots)
    if s.total_devices == 0 or np.any(s.n_devices < 1):
        raise ValueError("every snapshot must contain at least one device")
    lambda_I = s.total_devices / s.total_area
    mu_U = s.total_targets / s.total_devices
    sigma_U = math.sqrt(float(np.sum(s.target_dist**2)) / (2.0 * s.total_targets)) if s.total_targets else 0.0
    return JointParams(lambda_I, mu_U, sigma_U)


def contact_cdf(model, d):
    """P{distance from a target to its nearest device <= d}."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    if isinstance(model, IndependentParams):
        out = -np.expm1(-math.pi * model.lambda_I * d**2)
    elif isinstance(model, JointParams):
        if model.sigma_U == 0:
            out = (d > 0).astype(float)
        else:
            out = -np.expm1(-(d**2) / (2.0 * model.sigma_U**2))
    else:
        raise TypeError(f"unsupported model {type(model).__name__}")
    return float(out) if out.ndim == 0 else out


def contact_quantile_sq(model, p):
    """Squared distance at which ``contact_cdf`` reaches ``p`` (inverse CDF)."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        log_tail = np.log1p(-p)
    if isinstance(model, IndependentParams):
        return -log_tail / (math.pi * model.lambda_I)
    return -2.0 * model.sigma_U**2 * log_tail


def expected_targets_nearest(model) -> float:
    """Expected number of targets closer to a device than to any other."""
    if isinstance(model, IndependentParams):
        if model.lambda_I <= 0:
            raise ValueError("lambda_I must be positive under the independent model")
        return model.lambda_U / model.lambda_I
    if isinstance(model, JointParams):
        return model.mu_U
    raise TypeError(f"unsupported model {type(model).__name__}")


def params_from_vector(kind: str, values: dict):
    if kind == "joint":
        return JointParams(values["lambda_I"], values["mu_U"], values["sigma_U"])
    if kind == "independent":
        return IndependentParams(values["lambda_I"], values["lambda_U"])
    raise ValueError(f"unknown model kind {kind!r}")


class IndependentModel(BaseEstimator):
    """Estimator wrapper around :func:`fit_independent`.

    Parameters
    ----------
    roi_radius : float or None
        Observation radius for targets around devices; ``None`` observes the
        whole coverage area.
    """

    def __init__(self, roi_radius=None):
        self.roi_radius = roi_radius

    def fit(self, snapshots, y=None):
        self.params_ = fit_independent(snapshots, self.roi_radius)
        return self

    def contact_cdf(self, d):
        check_is_fitted(self, "params_")
        return contact_cdf(self.params_, d)

    def expected_targets_nearest(self) -> float:
        check_is_fitted(self, "params_")
        return expected_targets_nearest(self.params_)


class JointModel(BaseEstimator):
    """Estimator wrapper around :func:`fit_joint`."""

    def fit(self, snapshots, y=None):
        self.params_ = fit_joint(snapshots)
        return self

    def contact_cdf(self, d):
        check_is_fitted(self, "params_")
        return contact_cdf(self.params_, d)

    def expected_targets_nearest(self) -> float:
        check_is_fitted(self, "params_")
        return expected_targets_nearest(self.params_)


def reference_values(summary: SnapshotSummary, roi_radius: float | None) -> dict:
    """All four reference parameters of one window, keyed by ``PARAM_NAMES``."""
    ind = fit_independent(summary, roi_radius)
    joint = fit_joint(summary)
    return {"lambda_I": joint.lambda_I, "lambda_U": ind.lambda_U, "mu_U": joint.mu_U, "sigma_U": joint.sigma_U}
