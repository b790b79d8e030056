"""Training, prediction and persistence for every detector kind."""

from __future__ import annotations

import json
import re
import shlex
import subprocess
import time
from dataclasses import dataclass, field

import numpy as np

from .. import formats
from ..grouping import LABEL_NAMES
from .features import FeatureMatrix
from .iforest import IsolationForest
from .linear import LinearSVM, LogisticRegression
from .tree import DecisionTree

MODEL_KINDS = ("logistic-regression", "linear-svm", "decision-tree", "isolation-forest")
SUPERVISED = {"logistic-regression", "linear-svm", "decision-tree"}
_ALIASES = {"lr": "logistic-regression", "svm": "linear-svm", "dt": "decision-tree",
            "tree": "decision-tree", "if": "isolation-forest", "iforest": "isolation-forest"}
_SINGLE = re.compile(r"^single-event\((?P<event>[^()]+)\)$")

_CLASSES = {
    "logistic-regression": LogisticRegression,
    "linear-svm": LinearSVM,
    "decision-tree": DecisionTree,
    "isolation-forest": IsolationForest,
}


class TrainingError(ValueError):
    pass


def canonical_kind(kind: str) -> str:
    kind = _ALIASES.get(kind, kind)
    if kind in _CLASSES or kind == "external" or _SINGLE.match(kind):
        return kind
    raise ValueError(f"unknown model kind {kind!r}")


class SingleEventRule:
    """Flags a group as anomalous iff it contains the given event at least once."""

    def __init__(self, event_id: str):
        self.event_id = event_id
        self.kind = f"single-event({event_id})"
        self.column = None

    def fit(self, X, y=None, seed: int = 0, column_ids=()):
        self.column = list(column_ids).index(self.event_id) if self.event_id in column_ids else None
        return self

    def predict(self, X):
        X = np.asarray(X)
        if self.column is None:
            return np.zeros(X.shape[0], dtype=np.int64)
        return (X[:, self.column] > 0).astype(np.int64)

    def get_state(self):
        return {"event_id": self.event_id, "column": self.column}

    @classmethod
    def from_state(cls, state):
        m = cls(state["event_id"])
        m.column = state["column"]
        return m


class ExternalDetector:
    """Delegates prediction to a subprocess.

    The command receives a groups file on stdin (event order inside a group
    is reconstructed from counts) and must print one label per line,
    ``normal``/``anomalous`` or ``0``/``1``.
    """

    kind = "external"

    def __init__(self, command: str, timeout: float | None = None):
        self.command = command
        self.timeout = timeout
        self.column_ids: tuple[str, ...] = ()

    def fit(self, X, y=None, seed: int = 0, column_ids=()):
        self.column_ids = tuple(column_ids)
        return self

    def predict(self, X):
        X = np.asarray(X)
        lines = [formats.header("groups"), f"#events {' '.join(self.column_ids)}", f"#split 0"]
        for r, row in enumerate(X):
            events = " ".join(e for e, c in zip(self.column_ids, row) for _ in range(int(c)))
            lines.append(f"{r}\t{LABEL_NAMES[0]}\t{events}")
        proc = subprocess.run(shlex.split(self.command), input="\n".join(lines) + "\n",
                              capture_output=True, text=True, timeout=self.timeout, check=True)
        out = [s.strip() for s in proc.stdout.splitlines() if s.strip()]
        if len(out) != X.shape[0]:
            raise RuntimeError(f"external detector returned {len(out)} labels for {X.shape[0]} groups")
        return np.array([1 if s in ("1", "anomalous", "anomaly") else 0 for s in out], dtype=np.int64)

    def get_state(self):
        return {"command": self.command, "timeout": self.timeout}

    @classmethod
    def from_state(cls, state):
        return cls(state["command"], state.get("timeout"))


@dataclass
class Model:
    kind: str
    column_ids: tuple[str, ...]
    seed: int
    estimator: object
    params: dict = field(default_factory=dict)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    def dumps(self) -> str:
        body = {"kind": self.kind, "column_ids": list(self.column_ids), "seed": self.seed,
                "params": self.params, "state": self.estimator.get_state()}
        return formats.header("model") + "\n" + json.dumps(body, sort_keys=True) + "\n"

    @classmethod
    def load(cls, path) -> "Model":
        body = json.loads("\n".join(formats.open_artifact(path, "model")))
        kind = body["kind"]
        state = body["state"]
        if kind in _CLASSES:
            est = _CLASSES[kind].from_state(state)
        elif kind == "external":
            est = ExternalDetector.from_state(state)
            est.column_ids = tuple(body["column_ids"])
        else:
            est = SingleEventRule.from_state(state)
        return cls(kind, tuple(body["column_ids"]), body["seed"], est, body["params"])


def _make(kind: str, params: dict):
    if kind in _CLASSES:
        return _CLASSES[kind](**params)
    if kind == "external":
        return ExternalDetector(**params)
    return SingleEventRule(_SINGLE.match(kind).group("event"))


def train(model_kind: str, features: FeatureMatrix, seed: int = 0, **params) -> Model:
    """Fit a detector on a training slice.

    Supervised kinds refuse single-class data. ``single-event(E)`` needs no
    training: it is the rule "anomalous iff count(E) > 0".
    """
    kind = canonical_kind(model_kind)
    if len(features) == 0:
        raise TrainingError("training slice is empty")
    if kind in SUPERVISED:
        n_pos = int(features.labels.sum())
        if n_pos == 0:
            raise TrainingError(f"{kind} needs both classes; training slice has no anomalous groups")
        if n_pos == len(features):
            raise TrainingError(f"{kind} needs both classes; training slice has no normal groups")
    est = _make(kind, params)
    if kind == "external" or kind.startswith("single-event"):
        est.fit(features.rows, features.labels, seed=seed, column_ids=features.column_ids)
    else:
        est.fit(features.rows, features.labels, seed=seed)
    return Model(kind, tuple(features.column_ids), seed, est, dict(params))


def predict(model: Model, features: FeatureMatrix) -> tuple[np.ndarray, float]:
    """Label every row; returns (labels, wall-clock milliseconds of the pass)."""
    if features.rows.shape[1] != len(model.column_ids):
        raise ValueError(f"feature width {features.rows.shape[1]} does not match "
                         f"the model's {len(model.column_ids)} columns")
    start = time.perf_counter()
    labels = model.estimator.predict(features.rows)
    elapsed = (time.perf_counter() - start) * 1000.0
    return np.asarray(labels, dtype=np.int64), elapsed


def time_inference(model: Model, groups, repeats: int = 5) -> float:
    """Best-of-*repeats* milliseconds to featurise *groups* and predict them.

    This covers the whole inference path from event groups to labels, so it
    shrinks when fewer log lines reach the detector.
    """
    from .features import count_groups

    best = float("inf")
    for _ in range(max(repeats, 1)):
        start = time.perf_counter()
        X = count_groups(groups, model.column_ids)
        model.estimator.predict(X)
        best = min(best, (time.perf_counter() - start) * 1000.0)
    return best
