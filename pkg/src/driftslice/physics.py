"""Sensing-link physics: echo power and the strongest-interferer CDF."""
from __future__ import annotations

import math

import numpy as np

from .constants import SystemConstants
from .validation import check_rho

FOUR_PI = 4.0 * math.pi


def echo_power(D, constants: SystemConstants):
    """Monostatic radar-equation echo power (W) from a target at distance ``D``."""
    D = np.asarray(D, dtype=float)
    if np.any(D <= 0) or not np.all(np.isfinite(D)):
        raise ValueError("distance must be positive and finite")
    k = constants
    p = k.P_s * k.G_m**2 * k.c**2 * k.sigma_bar / (FOUR_PI**3 * k.f_s**2 * D**4)
    return float(p) if p.ndim == 0 else p


def interferer_power(r, constants: SystemConstants):
    """One-way received power (W) from an in-beam interferer at distance ``r``."""
    k = constants
    return k.P_s * k.G_m**2 * k.c**2 / (FOUR_PI * k.f_s * np.asarray(r, dtype=float)) ** 2


def _interference_scale(lambda_I, rho_c, X_s_I, constants: SystemConstants) -> float:
    k = constants
    co_band = lambda_I * (1.0 - rho_c) / X_s_I
    return co_band * k.phi_I**2 / FOUR_PI * k.P_s * k.G_m**2 * k.c**2 / (FOUR_PI * k.f_s) ** 2


def interference_cdf(i_s, lambda_I: float, rho_c: float, X_s_I: float, constants: SystemConstants):
    """P{I_s <= i_s} for the nearest co-band, mutually in-beam sensing device."""
    rho_c = check_rho(rho_c)
    if X_s_I < 1:
        raise ValueError("X_s_I must be at least one band")
    if lambda_I < 0:
        raise ValueError("lambda_I must be non-negative")
    i_s = np.asarray(i_s, dtype=float)
    if np.any(i_s <= 0):
        raise ValueError("interference level must be positive")
    out = np.exp(-_interference_scale(lambda_I, rho_c, X_s_I, constants) / i_s)
    return float(out) if out.ndim == 0 else out


def sir_success_probability(D, lambda_I, rho_c, X_s_I, constants: SystemConstants):
    """P{gamma_s >= gamma_hat_s} for a target at distance ``D``."""
    return interference_cdf(
        echo_power(D, constants) / constants.gamma_hat_s, lambda_I, rho_c, X_s_I, constants
    )
