"""Appear graph: how many groups each pair of events shares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grouping import LabeledDataset
from .mi import presence_matrix


@dataclass(frozen=True)
class AppearGraph:
    nodes: tuple[str, ...]
    weights: np.ndarray  # symmetric int matrix; diagonal = groups containing the event

    def weight(self, a: str, b: str) -> int:
        return int(self.weights[self.nodes.index(a), self.nodes.index(b)])

    def edges(self):
        n = len(self.nodes)
        for i in range(n):
            for j in range(i + 1, n):
                if self.weights[i, j]:
                    yield self.nodes[i], self.nodes[j], int(self.weights[i, j])

    def normalized_rows(self) -> np.ndarray:
        """Each row divided by its diagonal (zero rows stay zero)."""
        diag = np.diag(self.weights).astype(float)
        safe = np.where(diag > 0, diag, 1.0)
        return self.weights / safe[:, None]

    def merge(self, other: "AppearGraph") -> "AppearGraph":
        if other.nodes != self.nodes:
            raise ValueError("can only merge graphs over the same nodes")
        return AppearGraph(self.nodes, self.weights + other.weights)


def build_appear_graph(dataset: LabeledDataset, events) -> AppearGraph:
    """Presence-based co-occurrence counts over *events* (multiplicity ignored)."""
    events = tuple(events)
    ids = list(dataset.event_ids)
    pres = presence_matrix(dataset)
    sub = pres[:, [ids.index(e) for e in events]].astype(np.int64)
    return AppearGraph(events, sub.T @ sub)
