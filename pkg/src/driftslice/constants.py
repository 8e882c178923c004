"""System constants for the cooperative ISAC planning problem.

All fields are stored in linear SI units.  Decibel quantities are only
accepted at the configuration boundary (``from_mapping``) and converted
once there.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Mapping


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


# keys accepted in config files whose values are in dB and the linear field they set
_DB_KEYS = {
    "P_s_dBm": ("P_s", dbm_to_watts),
    "gamma_hat_s_dB": ("gamma_hat_s", db_to_linear),
    "G_0_dBi": ("G_0", db_to_linear),
}


@dataclass(frozen=True)
class SystemConstants:
    """Constants of one AP coverage area and the planning problem.

    Defaults reproduce the simulation table of the reference setup; ``G_0``,
    ``f_s``, ``R_0`` and ``X_hat_s_A`` are not listed there and use
    plausible mid-band values.
    """

    r_0: float = 500.0  # hexagon side, m
    L: int = 3  # number of APs
    D_hat: float = 10.0  # RoI radius, m
    tau: float = 1e-3  # slot duration, s
    T: int = 1000  # slots per sensing interval
    M: int = 500  # sensing intervals per planning window
    M_0: int = 10  # data collection period, intervals
    B_c0: float = 15e3  # Hz per subcarrier
    B_s0: float = 1e6  # Hz per sensing band
    R_0: float = 15.0  # bits/slot per subcarrier
    R_hat: float = 1000.0  # bits/slot required per device
    rho_hat_s: float = 0.05  # tracking attempts per target per slot
    gamma_hat_s: float = 100.0  # SIR threshold (20 dB)
    P_hat: float = 0.95
    C_0: float = 1e8  # CPU cycles per target
    F_e_I: float = 2e9  # device CPU, cycles/s
    X_hat_s_A: int = 1  # search bands per AP
    P_s: float = 0.1  # W (20 dBm)
    phi_I: float = math.pi / 6
    G_0: float = 10.0 ** 0.75  # 7.5 dBi
    f_s: float = 3.5e9  # Hz
    c: float = 3e8  # m/s
    sigma_bar: float = 0.5  # mean RCS, m^2
    omega: float = 1.0  # cost per Hz
    xi: float = 1e-3  # cost per cycle/s

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            low_ok = value >= 0 if f.name in ("omega", "xi") else value > 0
            if not (isinstance(value, (int, float)) and math.isfinite(value) and low_ok):
                raise ValueError(f"constant {f.name} must be positive and finite, got {value!r}")
        if not self.P_hat < 1.0:
            raise ValueError("P_hat must lie in (0, 1)")
        if self.rho_hat_s > 1.0:
            raise ValueError("rho_hat_s must lie in (0, 1]")

    @property
    def A_0(self) -> float:
        """Hexagon area in m^2."""
        return 3.0 * math.sqrt(3.0) * self.r_0**2 / 2.0

    @property
    def G_m(self) -> float:
        """In-beam antenna gain of the sectorized device pattern."""
        return 2.0 * math.pi * self.G_0 / self.phi_I

    @property
    def device_compute_cap(self) -> float:
        """Targets a device can process per interval, tau*T*F_e_I/C_0."""
        return self.tau * self.T * self.F_e_I / self.C_0

    @property
    def snapshots_per_window(self) -> int:
        return (self.M // self.M_0) * self.L

    def replace(self, **changes) -> "SystemConstants":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "SystemConstants":
        """Build from a flat mapping; unknown keys raise ``KeyError``.

        Keys ending in ``_dB``/``_dBm``/``_dBi`` listed in the module table are
        converted to linear units.
        """
        names = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            if key in _DB_KEYS:
                target, conv = _DB_KEYS[key]
                kwargs[target] = conv(float(value))
            elif key in names:
                kwargs[key] = int(value) if names[key].type == "int" else float(value)
            else:
                raise KeyError(f"unknown system constant {key!r}")
        return cls(**kwargs)


CONSTANT_KEYS = frozenset(f.name for f in fields(SystemConstants)) | frozenset(_DB_KEYS)
