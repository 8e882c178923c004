"""Synthetic non-stationary device/target scenario.

Devices follow a PPP; each device draws a Poisson number of targets which
are placed in its RoI by thinning.  Type-I devices keep a candidate at
distance ``r`` with probability ``r / D_hat`` (targets pushed outward),
type-II devices with ``1 - r / D_hat`` (targets pulled inward).  The share
of type-I devices ``nu`` switches on a schedule; device intensity and the
mean target count follow rectified cosines.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .constants import SystemConstants
from .geometry import HexRegion, PointPattern, Snapshot
from .validation import check_random_state


def drift_schedule(frequency: int, windows: int) -> list[int]:
    """Windows after which ``nu`` switches; ``frequency`` must be odd."""
    frequency = int(frequency)
    if frequency < 1 or frequency % 2 == 0:
        raise ValueError(f"drift frequency must be an odd positive integer, got {frequency}")
    return [math.ceil(windows * i / (frequency + 1)) for i in range(1, frequency + 1)]


@dataclass(frozen=True)
class ScenarioConfig:
    """Ground-truth dynamics.

    ``device_density`` is the peak device intensity in devices/km^2 and
    ``mean_targets`` the peak mean number of targets per RoI; both oscillate
    between ``p_min_frac`` times the peak and the peak.
    """

    device_density: float = 15.0
    mean_targets: float = 5.5
    angular_frequency: float = math.pi / 8
    p_min_frac: float = 0.3
    nu_low: float = 0.1
    nu_high: float = 0.7
    drift_frequency: int = 1
    windows: int = 400
    runs: int = 5
    seed: int = 0
    random_phases: bool = True

    def __post_init__(self):
        if self.device_density <= 0 or self.mean_targets <= 0:
            raise ValueError("intensities must be positive")
        if not 0 < self.p_min_frac <= 1:
            raise ValueError("p_min_frac must lie in (0, 1]")
        if self.windows < 2 or self.runs < 1:
            raise ValueError("need at least two windows and one run")
        for s in self.switch_windows:
            if not 1 <= s < self.windows:
                raise ValueError(f"switch window {s} outside [1, {self.windows})")

    @property
    def base_lambda_I(self) -> float:
        """Peak device intensity in devices/m^2."""
        return self.device_density * 1e-6

    @property
    def switch_windows(self) -> list[int]:
        return drift_schedule(self.drift_frequency, self.windows)

    def phases(self, run: int) -> tuple[float, float]:
        if not self.random_phases:
            return 0.0, 0.0
        rng = np.random.default_rng([self.seed, run, 2**31 - 1])
        a, b = rng.uniform(0.0, math.pi, size=2)
        return float(a), float(b)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, mapping) -> "ScenarioConfig":
        names = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            if key not in names:
                raise KeyError(f"unknown scenario key {key!r}")
            ftype = names[key].type
            kwargs[key] = int(value) if ftype == "int" else bool(value) if ftype == "bool" else float(value)
        return cls(**kwargs)


def _rectified(peak, k, omega, phase, p_min_frac):
    low = p_min_frac * peak
    return low + (peak - low) * abs(math.cos(omega * k + phase))


def nu_at(k: int, config: ScenarioConfig) -> float:
    """Type-I share in window ``k`` (alternates at each switch point)."""
    passed = sum(1 for s in config.switch_windows if k > s)
    return config.nu_high if passed % 2 else config.nu_low


def params_at(k: int, config: ScenarioConfig, phases=(0.0, 0.0)) -> tuple[float, float, float]:
    """(device intensity per m^2, mean targets per device, nu) in window ``k``."""
    if k < 0:
        raise ValueError("window index must be non-negative")
    lam = _rectified(config.base_lambda_I, k, config.angular_frequency, phases[0], config.p_min_frac)
    mean_targets = _rectified(config.mean_targets, k, config.angular_frequency, phases[1], config.p_min_frac)
    return lam, mean_targets, nu_at(k, config)


def _place_targets(centers, types, D_hat, region, rng):
    """Thinning placement; ``types`` is True for type-I owners."""
    n = len(centers)
    out = np.empty((n, 2))
    pending = np.arange(n)
    while len(pending):
        m = len(pending)
        r = D_hat * np.sqrt(rng.random(m))
        theta = rng.uniform(0.0, 2.0 * math.pi, m)
        keep_prob = np.where(types[pending], r / D_hat, 1.0 - r / D_hat)
        cand = centers[pending] + np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        ok = (rng.random(m) < keep_prob) & region.contains(cand)
        out[pending[ok]] = cand[ok]
        pending = pending[~ok]
    return out


def generate_batch(n_snapshots: int, lambda_I: float, mean_targets: float, nu: float,
                   region: HexRegion, D_hat: float, rng=None):
    """Generate ``n_snapshots`` independent snapshots at fixed parameters.

    Returns a list of ``(devices, targets, types)`` arrays per snapshot.
    """
    rng = check_random_state(rng)
    counts = rng.poisson(lambda_I * region.area, size=n_snapshots)
    empty = counts == 0
    while empty.any():
        counts[empty] = rng.poisson(lambda_I * region.area, size=int(empty.sum()))
        empty = counts == 0
    total = int(counts.sum())
    devices = region.sample_uniform(total, rng)
    types = rng.random(total) < nu
    per_device = rng.poisson(mean_targets, size=total)
    owners = np.repeat(np.arange(total), per_device)
    targets = _place_targets(devices[owners], types[owners], D_hat, region, rng)
    dev_split = np.cumsum(counts)[:-1]
    tgt_counts = np.add.reduceat(per_device, np.r_[0, dev_split]) if total else np.zeros(n_snapshots, int)
    tgt_split = np.cumsum(tgt_counts)[:-1]
    return list(zip(np.split(devices, dev_split), np.split(targets, tgt_split), np.split(types, dev_split)))


def generate_snapshot(params, region: HexRegion, rng=None, D_hat: float = 10.0, **meta) -> Snapshot:
    """One snapshot at ``params = (lambda_I, mean_targets, nu)``."""
    lam, mean_targets, nu = params
    dev, tgt, types = generate_batch(1, lam, mean_targets, nu, region, D_hat, rng)[0]
    return Snapshot(PointPattern(dev, region), PointPattern(tgt, region), device_types=types, **meta)


def generate_window(k: int, config: ScenarioConfig, constants: SystemConstants, run: int = 0,
                    region: HexRegion | None = None) -> list[Snapshot]:
    """All snapshots collected in window ``k`` of ``run`` (every M_0-th interval, every AP)."""
    region = region or HexRegion(side=constants.r_0)
    rng = np.random.default_rng([config.seed, run, k])
    params = params_at(k, config, config.phases(run))
    intervals = range(constants.M_0, constants.M + 1, constants.M_0)
    meta = [(m, l) for m in intervals for l in range(1, constants.L + 1)]
    batch = generate_batch(len(meta), *params, region, constants.D_hat, rng)
    return [
        Snapshot(PointPattern(dev, region), PointPattern(tgt, region), k, m, l, device_types=types)
        for (dev, tgt, types), (m, l) in zip(batch, meta)
    ]
