"""Linear detectors: logistic regression and a Pegasos linear SVM."""

from __future__ import annotations

import numpy as np


def _standardize_fit(X: np.ndarray):
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    return mean, std


class LogisticRegression:
    kind = "logistic-regression"

    def __init__(self, epochs: int = 500, learning_rate: float = 0.1, l2: float = 1e-4):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.l2 = l2
        self.weights = None
        self.bias = 0.0
        self.mean = self.std = None

    def fit(self, X, y, seed: int = 0):
        # full-batch gradient descent from zero weights: the seed has no effect
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        self.mean, self.std = _standardize_fit(X)
        Z = (X - self.mean) / self.std
        n, d = Z.shape
        w = np.zeros(d)
        b = 0.0
        for _ in range(self.epochs):
            p = 1.0 / (1.0 + np.exp(-(Z @ w + b)))
            err = p - y
            w -= self.learning_rate * (Z.T @ err / n + self.l2 * w)
            b -= self.learning_rate * err.mean()
        self.weights, self.bias = w, float(b)
        return self

    def decision_function(self, X):
        Z = (np.asarray(X, dtype=float) - self.mean) / self.std
        return Z @ self.weights + self.bias

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(np.int64)

    def get_state(self):
        return {"epochs": self.epochs, "learning_rate": self.learning_rate, "l2": self.l2,
                "weights": self.weights.tolist(), "bias": self.bias,
                "mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_state(cls, state):
        m = cls(state["epochs"], state["learning_rate"], state["l2"])
        m.weights = np.asarray(state["weights"], dtype=float)
        m.bias = float(state["bias"])
        m.mean = np.asarray(state["mean"], dtype=float)
        m.std = np.asarray(state["std"], dtype=float)
        return m


class LinearSVM:
    """Pegasos: stochastic sub-gradient descent on the regularised hinge loss.

    A constant feature is appended to carry the bias; it is regularised like
    the other weights, as in the original algorithm.
    """

    kind = "linear-svm"

    def __init__(self, lam: float = 1e-4, epochs: int = 20):
        self.lam = lam
        self.epochs = epochs
        self.weights = None
        self.mean = self.std = None

    def fit(self, X, y, seed: int = 0):
        X = np.asarray(X, dtype=float)
        self.mean, self.std = _standardize_fit(X)
        Z = np.hstack([(X - self.mean) / self.std, np.ones((X.shape[0], 1))])
        y = np.where(np.asarray(y) > 0, 1.0, -1.0)
        rng = np.random.default_rng(seed)
        n, d = Z.shape
        w = np.zeros(d)
        radius = 1.0 / np.sqrt(self.lam)
        t = 0
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                t += 1
                eta = 1.0 / (self.lam * t)
                margin = y[i] * (Z[i] @ w)
                w *= 1.0 - eta * self.lam
                if margin < 1.0:
                    w += eta * y[i] * Z[i]
                norm = np.linalg.norm(w)
                if norm > radius:
                    w *= radius / norm
        self.weights = w
        return self

    def decision_function(self, X):
        Z = (np.asarray(X, dtype=float) - self.mean) / self.std
        return Z @ self.weights[:-1] + self.weights[-1]

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(np.int64)

    def get_state(self):
        return {"lam": self.lam, "epochs": self.epochs, "weights": self.weights.tolist(),
                "mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_state(cls, state):
        m = cls(state["lam"], state["epochs"])
        m.weights = np.asarray(state["weights"], dtype=float)
        m.mean = np.asarray(state["mean"], dtype=float)
        m.std = np.asarray(state["std"], dtype=float)
        return m
