"""One-step-ahead forecasting of model parameters across planning windows.

Each parameter gets its own single-layer LSTM (numpy, trained by full-batch
BPTT with Adam).  Inputs are min-max scaled over the training span.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .models import PARAM_NAMES
from .validation import check_random_state

EPS = 1e-12


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


class LSTMForecaster(BaseEstimator):
    """Single-input LSTM that maps the last ``lookback`` values to the next one.

    Parameters
    ----------
    lookback : int
        Number of past windows fed to the network (K_0).
    hidden_size : int
    learning_rate : float
        Adam step size.
    max_epochs : int
    target_mape : float
        Training stops early once the in-sample one-step MAPE drops below this.
    random_state : int or None
    """

    def __init__(self, lookback=10, hidden_size=16, learning_rate=0.01, max_epochs=400,
                 target_mape=0.02, random_state=0):
        self.lookback = lookback
        self.hidden_size = hidden_size
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.target_mape = target_mape
        self.random_state = random_state

    # -- parameters -------------------------------------------------------
    def _init_weights(self, rng):
        H = self.hidden_size
        bound = 1.0 / np.sqrt(H)
        w = {
            "Wx": rng.uniform(-bound, bound, (1, 4 * H)),
            "Wh": rng.uniform(-bound, bound, (H, 4 * H)),
            "b": np.zeros(4 * H),
            "Wy": rng.uniform(-bound, bound, (H, 1)),
            "by": np.zeros(1),
        }
        w["b"][H : 2 * H] = 1.0  # forget-gate bias
        return w

    # -- core -------------------------------------------------------------
    def _forward(self, w, X):
        """X has shape (batch, steps).  Returns output (batch,) and a cache."""
        H = self.hidden_size
        B, K = X.shape
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        cache = []
        for t in range(K):
            z = X[:, t : t + 1] * w["Wx"] + h @ w["Wh"] + w["b"]
            i = _sigmoid(z[:, :H])
            f = _sigmoid(z[:, H : 2 * H])
            g = np.tanh(z[:, 2 * H : 3 * H])
            o = _sigmoid(z[:, 3 * H :])
            c_prev, h_prev = c, h
            c = f * c_prev + i * g
            tc = np.tanh(c)
            h = o * tc
            cache.append((h_prev, c_prev, i, f, g, o, tc))
        y = (h @ w["Wy"])[:, 0] + w["by"][0]
        return y, (X, cache, h)

    def _loss_and_grads(self, w, X, target):
        y, (X, cache, h_last) = self._forward(w, X)
        B = len(target)
        err = y - target
        loss = float(np.mean(err**2))
        dy = (2.0 / B) * err[:, None]
        grads = {k: np.zeros_like(v) for k, v in w.items()}
        grads["Wy"] = h_last.T @ dy
        grads["by"] = dy.sum(axis=0)
        dh = dy @ w["Wy"].T
        dc = np.zeros_like(dh)
        for t in reversed(range(X.shape[1])):
            h_prev, c_prev, i, f, g, o, tc = cache[t]
            do = dh * tc
            dc = dc + dh * o * (1.0 - tc**2)
            di = dc * g
            dg = dc * i
            df = dc * c_prev
            dz = np.concatenate(
                [di * i * (1 - i), df * f * (1 - f), dg * (1 - g**2), do * o * (1 - o)], axis=1
            )
            grads["Wx"] += X[:, t : t + 1].T @ dz
            grads["Wh"] += h_prev.T @ dz
            grads["b"] += dz.sum(axis=0)
            dh = dz @ w["Wh"].T
            dc = dc * f
        return loss, grads

    # -- scaling ----------------------------------------------------------
    def _scale(self, v):
        return (np.asarray(v, float) - self.offset_) / self.scale_

    def _unscale(self, v):
        return np.asarray(v, float) * self.scale_ + self.offset_

    def _windows(self, series):
        K = self.lookback
        idx = np.arange(len(series) - K)[:, None] + np.arange(K)
        return series[idx], series[K:]

    # -- public API -------------------------------------------------------
    def fit(self, series, y=None):
        series = np.asarray(series, dtype=float).ravel()
        if len(series) < 2 * self.lookback:
            raise ValueError(
                f"need at least {2 * self.lookback} reference values to train, got {len(series)}"
            )
        if not np.all(np.isfinite(series)):
            raise ValueError("series contains non-finite values")
        lo, hi = float(series.min()), float(series.max())
        self.offset_ = lo
        self.scale_ = hi - lo if hi > lo else max(abs(lo), 1.0)
        rng = check_random_state(self.random_state)
        self.weights_ = self._init_weights(rng)
        self.n_epochs_ = self._train(self._scale(series), self.max_epochs)
        return self

    def partial_fit(self, series, epochs=None):
        """Continue training from the current weights (scaling kept)."""
        if not hasattr(self, "weights_"):
            return self.fit(series)
        series = np.asarray(series, dtype=float).ravel()
        if len(series) <= self.lookback:
            raise ValueError("series shorter than the lookback")
        self.n_epochs_ = self._train(self._scale(series), epochs or self.max_epochs)
        return self

    def _train(self, scaled, epochs):
        X, target = self._windows(scaled)
        w = self.weights_
        m = {k: np.zeros_like(v) for k, v in w.items()}
        v = {k: np.zeros_like(v) for k, v in w.items()}
        b1, b2, lr = 0.9, 0.999, self.learning_rate
        true = self._unscale(target)
        denom = np.maximum(np.abs(true), EPS)
        epoch = 0
        for epoch in range(1, epochs + 1):
            _, grads = self._loss_and_grads(w, X, target)
            for k in w:
                m[k] = b1 * m[k] + (1 - b1) * grads[k]
                v[k] = b2 * v[k] + (1 - b2) * grads[k] ** 2
                mhat = m[k] / (1 - b1**epoch)
                vhat = v[k] / (1 - b2**epoch)
                w[k] -= lr * mhat / (np.sqrt(vhat) + 1e-8)
            if epoch % 25 == 0:
                pred = self._unscale(self._forward(w, X)[0])
                if np.mean(np.abs(pred - true) / denom) < self.target_mape:
                    break
        self.training_mape_ = float(np.mean(np.abs(self._unscale(self._forward(w, X)[0]) - true) / denom))
        return epoch

    def predict_next(self, history) -> float:
        """Forecast the value following ``history`` (needs >= lookback values).

        Falls back to the last observed value when the model is untrained.
        """
        history = np.asarray(history, dtype=float).ravel()
        if len(history) < self.lookback:
            raise ValueError(f"need {self.lookback} past values, got {len(history)}")
        if not hasattr(self, "weights_"):
            return max(float(history[-1]), EPS)
        x = self._scale(history[-self.lookback :])[None, :]
        value = float(self._unscale(self._forward(self.weights_, x)[0])[0])
        if not np.isfinite(value):
            value = float(history[-1])
        return max(value, EPS)

    def predict(self, X):
        """Batch forecast; each row of ``X`` is a lookback-length history."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.predict_next(row) for row in X])


@dataclass
class ParamSeries:
    """Reference and predicted values per parameter, indexed by window."""

    windows: list = field(default_factory=list)
    reference: dict = field(default_factory=lambda: {p: [] for p in PARAM_NAMES})
    predicted: dict = field(default_factory=lambda: {p: [] for p in PARAM_NAMES})

    def append(self, k: int, reference: dict, predicted: dict | None = None) -> None:
        self.windows.append(k)
        for p in PARAM_NAMES:
            self.reference[p].append(float(reference[p]))
            self.predicted[p].append(None if predicted is None else float(predicted[p]))

    def history(self, name: str) -> np.ndarray:
        return np.asarray(self.reference[name], dtype=float)

    def __len__(self) -> int:
        return len(self.windows)

    def rows(self):
        """(window, parameter, reference, predicted) tuples for CSV export."""
        for j, k in enumerate(self.windows):
            for p in PARAM_NAMES:
                yield k, p, self.reference[p][j], self.predicted[p][j]


class PredictorBank:
    """One forecaster per parameter plus the shared configuration."""

    def __init__(self, lookback=10, hidden_size=16, max_epochs=400, target_mape=0.02,
                 learning_rate=0.01, random_state=0, names=PARAM_NAMES):
        self.names = tuple(names)
        self.lookback = lookback
        self.forecasters = {
            name: LSTMForecaster(lookback, hidden_size, learning_rate, max_epochs, target_mape,
                                 random_state=None if random_state is None else random_state + j)
            for j, name in enumerate(self.names)
        }
        # parameters that temporarily use last-value prediction (after drift)
        self.fallback: set = set()

    def train(self, series: ParamSeries, names=None, start: int = 0) -> None:
        for name in names or self.names:
            self.forecasters[name].fit(series.history(name)[start:])
            self.fallback.discard(name)

    def is_trained(self, name) -> bool:
        return hasattr(self.forecasters[name], "weights_")

    def predict(self, series: ParamSeries) -> dict:
        out = {}
        for name in self.names:
            hist = series.history(name)
            if name in self.fallback or len(hist) < self.lookback:
                out[name] = max(float(hist[-1]), EPS)
            else:
                out[name] = self.forecasters[name].predict_next(hist)
        return out

    def copy(self) -> "PredictorBank":
        import copy

        return copy.deepcopy(self)


def train_predictor(series, lookback=10, hidden_size=16, max_epochs=400, target_mape=0.02,
                    random_state=0) -> LSTMForecaster:
    return LSTMForecaster(lookback, hidden_size, max_epochs=max_epochs, target_mape=target_mape,
                          random_state=random_state).fit(series)


def predict_params(state: LSTMForecaster, history) -> float:
    return state.predict_next(history)
