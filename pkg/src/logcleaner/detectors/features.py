"""Event-count featurisation of labeled datasets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grouping import LabeledDataset


@dataclass(frozen=True)
class FeatureMatrix:
    rows: np.ndarray  # (n_groups, n_events) integer counts
    column_ids: tuple[str, ...]
    labels: np.ndarray  # (n_groups,) 0 normal / 1 anomalous

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.column_ids):
            raise ValueError("row width must equal the number of column ids")
        if self.rows.shape[0] != self.labels.shape[0]:
            raise ValueError("labels must align with rows")

    def __len__(self):
        return self.rows.shape[0]

    def slice(self, start: int | None, stop: int | None) -> "FeatureMatrix":
        return FeatureMatrix(self.rows[start:stop], self.column_ids, self.labels[start:stop])

    def columns(self, ids) -> "FeatureMatrix":
        pos = {c: i for i, c in enumerate(self.column_ids)}
        idx = [pos[c] for c in ids]
        return FeatureMatrix(self.rows[:, idx], tuple(ids), self.labels)


def _base_counts(dataset: LabeledDataset) -> np.ndarray:
    cached = dataset._shared.get("counts")
    if cached is not None:
        return cached
    col = {e: i for i, e in enumerate(dataset.all_event_ids)}
    base = dataset.base.groups
    counts = np.zeros((len(base), len(col)), dtype=np.int64)
    for r, g in enumerate(base):
        for e in g.events:
            counts[r, col[e]] += 1
    counts.setflags(write=False)
    dataset._shared["counts"] = counts
    return counts


def featurize(dataset: LabeledDataset) -> FeatureMatrix:
    """Count matrix of the dataset view; excluded events are dropped columns."""
    counts = _base_counts(dataset)
    if dataset.excluded:
        keep = [i for i, e in enumerate(dataset.all_event_ids) if e not in dataset.excluded]
        counts = counts[:, keep]
    labels = np.asarray(dataset.labels, dtype=np.int64)
    return FeatureMatrix(counts, dataset.event_ids, labels)


def split(features: FeatureMatrix, split_point: int) -> tuple[FeatureMatrix, FeatureMatrix]:
    return features.slice(None, split_point), features.slice(split_point, None)


def count_groups(groups, column_ids) -> np.ndarray:
    """Count matrix built straight from group event lists (no caching).

    Unknown events are ignored, so groups from an unreduced stream can be
    scored by a model trained on fewer columns.
    """
    col = {e: i for i, e in enumerate(column_ids)}
    out = np.zeros((len(groups), len(col)), dtype=np.int64)
    for r, g in enumerate(groups):
        row = out[r]
        for e in g.events:
            j = col.get(e)
            if j is not None:
                row[j] += 1
    return out
