"""CART decision tree with Gini impurity.

Ties between candidate splits go to the lowest column index (then the
lowest threshold), so an exact copy of a column appended to the matrix can
never change the fitted tree.
"""

from __future__ import annotations

import numpy as np


def _best_split(X, y):
    """Return (impurity, feature, threshold) of the best split, or None."""
    n = y.shape[0]
    pos = int(y.sum())
    parent = n - (pos * pos + (n - pos) ** 2) / n  # n * gini
    best = None
    for j in range(X.shape[1]):
        col = X[:, j]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        if xs[0] == xs[-1]:
            continue
        cum_pos = np.cumsum(y[order])
        # candidate cut after position i where xs[i] < xs[i+1]
        cuts = np.flatnonzero(xs[:-1] < xs[1:])
        n_left = cuts + 1.0
        n_right = n - n_left
        p_left = cum_pos[cuts].astype(float)
        p_right = pos - p_left
        imp = (n_left - (p_left ** 2 + (n_left - p_left) ** 2) / n_left
               + n_right - (p_right ** 2 + (n_right - p_right) ** 2) / n_right)
        k = int(np.argmin(imp))
        if best is None or imp[k] < best[0]:
            c = cuts[k]
            best = (float(imp[k]), j, (float(xs[c]) + float(xs[c + 1])) / 2.0)
    if best is None or not best[0] < parent - 1e-12:
        return None
    return best


class DecisionTree:
    kind = "decision-tree"

    def __init__(self, max_depth: int = 10, min_samples_split: int = 2):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        # parallel node arrays; feature -1 marks a leaf
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[int] = []

    def _new_node(self, y) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(int(2 * int(y.sum()) > y.shape[0]))
        return len(self.feature) - 1

    def fit(self, X, y, seed: int = 0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []
        root = self._new_node(y)
        stack = [(root, np.arange(X.shape[0]), 0)]
        while stack:
            node, idx, depth = stack.pop()
            ys = y[idx]
            pos = int(ys.sum())
            if depth >= self.max_depth or idx.shape[0] < self.min_samples_split or pos in (0, idx.shape[0]):
                continue
            split = _best_split(X[idx], ys)
            if split is None:
                continue
            _, j, thr = split
            go_left = X[idx, j] <= thr
            li, ri = idx[go_left], idx[~go_left]
            self.feature[node] = j
            self.threshold[node] = thr
            self.left[node] = self._new_node(y[li])
            self.right[node] = self._new_node(y[ri])
            stack.append((self.right[node], ri, depth + 1))
            stack.append((self.left[node], li, depth + 1))
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left, right = np.asarray(self.left), np.asarray(self.right)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            active = feature[node] >= 0
            if not active.any():
                break
            r, nd = rows[active], node[active]
            go_left = X[r, feature[nd]] <= threshold[nd]
            node[r] = np.where(go_left, left[nd], right[nd])
        return np.asarray(self.value, dtype=np.int64)[node]

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def get_state(self):
        return {"max_depth": self.max_depth, "min_samples_split": self.min_samples_split,
                "feature": self.feature, "threshold": self.threshold,
                "left": self.left, "right": self.right, "value": self.value}

    @classmethod
    def from_state(cls, state):
        m = cls(state["max_depth"], state["min_samples_split"])
        for key in ("feature", "threshold", "left", "right", "value"):
            setattr(m, key, list(state[key]))
        return m
