"""Isolation forest (Liu, Ting and Zhou) over event-count vectors."""

from __future__ import annotations

import math

import numpy as np

EULER_GAMMA = 0.5772156649015329


def average_path_length(n) -> float:
    """c(n): mean path length of an unsuccessful BST search over n points."""
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    return 2.0 * (math.log(n - 1) + EULER_GAMMA) - 2.0 * (n - 1) / n


class IsolationForest:
    kind = "isolation-forest"

    def __init__(self, n_trees: int = 100, subsample: int = 256, threshold: float = 0.5):
        self.n_trees = n_trees
        self.subsample = subsample
        self.threshold = threshold
        self.trees: list[dict] = []
        self.sample_size = 0

    def _grow(self, X, rng, limit):
        tree = {"feature": [], "split": [], "left": [], "right": [], "size": []}

        def new(size):
            for key, val in (("feature", -1), ("split", 0.0), ("left", -1), ("right", -1), ("size", size)):
                tree[key].append(val)
            return len(tree["feature"]) - 1

        root = new(X.shape[0])
        stack = [(root, X, 0)]
        while stack:
            node, part, depth = stack.pop()
            if depth >= limit or part.shape[0] <= 1:
                continue
            lo, hi = part.min(axis=0), part.max(axis=0)
            candidates = np.flatnonzero(hi > lo)
            if candidates.size == 0:
                continue
            j = int(candidates[rng.integers(candidates.size)])
            s = float(rng.uniform(lo[j], hi[j]))
            mask = part[:, j] < s
            tree["feature"][node] = j
            tree["split"][node] = s
            left, right = new(int(mask.sum())), new(int((~mask).sum()))
            tree["left"][node], tree["right"][node] = left, right
            stack.append((right, part[~mask], depth + 1))
            stack.append((left, part[mask], depth + 1))
        return tree

    def fit(self, X, y=None, seed: int = 0):
        X = np.asarray(X, dtype=float)
        rng = np.random.default_rng(seed)
        n = X.shape[0]
        self.sample_size = min(self.subsample, n)
        limit = math.ceil(math.log2(max(self.sample_size, 2)))
        self.trees = []
        for _ in range(self.n_trees):
            idx = rng.choice(n, size=self.sample_size, replace=False)
            self.trees.append(self._grow(X[np.sort(idx)], rng, limit))
        return self

    def path_lengths(self, X) -> np.ndarray:
        """Mean (over trees) adjusted path length h(x) of every row."""
        X = np.asarray(X, dtype=float)
        total = np.zeros(X.shape[0])
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            feature = np.asarray(tree["feature"])
            split = np.asarray(tree["split"])
            left, right = np.asarray(tree["left"]), np.asarray(tree["right"])
            node = np.zeros(X.shape[0], dtype=np.int64)
            depth = np.zeros(X.shape[0])
            while True:
                active = feature[node] >= 0
                if not active.any():
                    break
                r, nd = rows[active], node[active]
                go_left = X[r, feature[nd]] < split[nd]
                node[r] = np.where(go_left, left[nd], right[nd])
                depth[r] += 1
            adjust = np.array([average_path_length(s) for s in tree["size"]])
            total += depth + adjust[node]
        return total / max(len(self.trees), 1)

    def score_samples(self, X) -> np.ndarray:
        """Anomaly score s(x) = 2 ** (-E[h(x)] / c(sample_size)), in (0, 1]."""
        c = average_path_length(self.sample_size)
        if c == 0:
            return np.full(np.asarray(X).shape[0], 0.5)
        return 2.0 ** (-self.path_lengths(X) / c)

    def predict(self, X):
        return (self.score_samples(X) >= self.threshold).astype(np.int64)

    def get_state(self):
        return {"n_trees": self.n_trees, "subsample": self.subsample, "threshold": self.threshold,
                "sample_size": self.sample_size, "trees": self.trees}

    @classmethod
    def from_state(cls, state):
        m = cls(state["n_trees"], state["subsample"], state["threshold"])
        m.sample_size = state["sample_size"]
        m.trees = state["trees"]
        return m
