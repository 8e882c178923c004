"""Input validation helpers shared by the estimators."""
from __future__ import annotations

import math
import numbers

import numpy as np


def check_random_state(seed) -> np.random.Generator:
    """Turn ``seed`` into a ``numpy.random.Generator``.

    Accepts None, an int, a ``SeedSequence`` or an existing Generator (returned
    as is, so callers can share one stream).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise ValueError(f"{seed!r} cannot be used to seed a numpy Generator")


def check_nonnegative(value, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite non-negative number, got {value}")
    return value


def check_positive(value, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a finite positive number, got {value}")
    return value


def check_rho(rho_c) -> float:
    rho_c = float(rho_c)
    if not 0.0 < rho_c <= 1.0:
        raise ValueError(f"rho_c must lie in (0, 1], got {rho_c}")
    return rho_c


def check_snapshots(snapshots, require_devices: bool = False) -> list:
    snapshots = list(snapshots)
    if not snapshots:
        raise ValueError("at least one snapshot is required")
    if require_devices and any(s.n_devices < 1 for s in snapshots):
        raise ValueError("every snapshot must contain at least one device")
    return snapshots


def check_is_fitted(estimator, attributes) -> None:
    from sklearn.exceptions import NotFittedError

    if isinstance(attributes, str):
        attributes = [attributes]
    if not all(hasattr(estimator, a) for a in attributes):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; call 'fit' first."
        )
