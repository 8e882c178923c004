"""Hexagonal coverage areas, point-process sampling and nearest-device lookup."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .validation import check_nonnegative, check_random_state

SQRT3 = math.sqrt(3.0)


class PlanarPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class HexRegion:
    """Flat-topped regular hexagon; one vertex lies on the +x axis."""

    center: PlanarPoint = PlanarPoint(0.0, 0.0)
    side: float = 500.0

    def __post_init__(self):
        if not (self.side > 0 and math.isfinite(self.side)):
            raise ValueError(f"hexagon side must be positive, got {self.side}")
        object.__setattr__(self, "center", PlanarPoint(*map(float, self.center)))

    @property
    def area(self) -> float:
        return 3.0 * SQRT3 * self.side**2 / 2.0

    @property
    def vertices(self) -> np.ndarray:
        angles = np.arange(6) * math.pi / 3.0
        return np.column_stack(
            [self.center.x + self.side * np.cos(angles), self.center.y + self.side * np.sin(angles)]
        )

    def contains(self, points) -> np.ndarray:
        """Vectorized containment; boundary points count as inside."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        dx = np.abs(pts[:, 0] - self.center.x)
        dy = np.abs(pts[:, 1] - self.center.y)
        tol = 1e-9 * self.side
        half_height = SQRT3 / 2.0 * self.side
        return (dy <= half_height + tol) & (SQRT3 * dx + dy <= SQRT3 * self.side + tol)

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` i.i.d. uniform points by rejection from the bounding box."""
        out = np.empty((n, 2))
        filled = 0
        half_height = SQRT3 / 2.0 * self.side
        while filled < n:
            need = n - filled
            batch = int(need / 0.75) + 8
            cand = np.column_stack(
                [
                    rng.uniform(-self.side, self.side, batch) + self.center.x,
                    rng.uniform(-half_height, half_height, batch) + self.center.y,
                ]
            )
            cand = cand[self.contains(cand)][:need]
            out[filled : filled + len(cand)] = cand
            filled += len(cand)
        return out


@dataclass
class PointPattern:
    points: np.ndarray
    region: HexRegion

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point coordinates must be finite")

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class Snapshot:
    """Device and target locations collected in one interval under one AP."""

    devices: PointPattern
    targets: PointPattern
    window_index: int = 0
    interval_index: int = 1
    ap_index: int = 1
    # per-device type labels when known (scenario data); not used by fitting
    device_types: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.devices.region != self.targets.region:
            raise ValueError("devices and targets must share one region")

    @property
    def region(self) -> HexRegion:
        return self.devices.region

    @property
    def n_devices(self) -> int:
        return len(self.devices)

    @property
    def n_targets(self) -> int:
        return len(self.targets)


def point_in_hex(p, region: HexRegion) -> bool:
    return bool(region.contains(np.asarray(p, dtype=float))[0])


def sample_ppp(intensity: float, region: HexRegion, rng=None) -> PointPattern:
    """Homogeneous Poisson point process restricted to ``region``."""
    check_nonnegative(intensity, "intensity")
    rng = check_random_state(rng)
    n = rng.poisson(intensity * region.area)
    return PointPattern(region.sample_uniform(n, rng), region)


def sample_thomas(lambda_I: float, mu_U: float, sigma_U: float, region: HexRegion, rng=None):
    """Thomas cluster process with devices as parents.

    Offsets that would leave the hexagon are redrawn, so every cluster keeps
    its Poisson count and all targets stay inside ``region``.

    Returns
    -------
    devices, targets : PointPattern
    labels : ndarray of int
        Index of the parent device of each target.
    """
    check_nonnegative(lambda_I, "lambda_I")
    check_nonnegative(mu_U, "mu_U")
    check_nonnegative(sigma_U, "sigma_U")
    rng = check_random_state(rng)
    devices = sample_ppp(lambda_I, region, rng)
    counts = rng.poisson(mu_U, size=len(devices))
    labels = np.repeat(np.arange(len(devices)), counts)
    parents = devices.points[labels]
    targets = parents + rng.normal(0.0, sigma_U, size=parents.shape) if sigma_U > 0 else parents.copy()
    bad = ~region.contains(targets)
    while bad.any():
        idx = np.flatnonzero(bad)
        targets[idx] = parents[idx] + rng.normal(0.0, sigma_U, size=(len(idx), 2))
        bad[idx] = ~region.contains(targets[idx])
    return devices, PointPattern(targets, region), labels


def nearest_device(target, devices: PointPattern | np.ndarray) -> tuple[int, float]:
    """Index of and distance to the closest device; ties go to the lowest index."""
    pts = devices.points if isinstance(devices, PointPattern) else np.asarray(devices, float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("device list is empty")
    d = np.hypot(pts[:, 0] - target[0], pts[:, 1] - target[1])
    i = int(np.argmin(d))
    return i, float(d[i])


def assign_nearest(targets: np.ndarray, devices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized nearest-device assignment for one snapshot.

    Brute force below a few thousand pairs so the lowest-index tie rule holds
    exactly; KD-tree above that.
    """
    targets = np.asarray(targets, float).reshape(-1, 2)
    devices = np.asarray(devices, float).reshape(-1, 2)
    if len(devices) == 0:
        if len(targets):
            raise ValueError("device list is empty")
        return np.empty(0, int), np.empty(0)
    if len(targets) * len(devices) <= 4096:
        diff = targets[:, None, :] - devices[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        idx = np.argmin(dist, axis=1) if len(targets) else np.empty(0, int)
        return idx, dist[np.arange(len(targets)), idx]
    dist, idx = cKDTree(devices).query(targets)
    return idx.astype(int), dist
