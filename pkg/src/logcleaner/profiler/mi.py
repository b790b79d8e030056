"""Mutual information between an event's presence and the anomaly label."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..grouping import LabeledDataset


@dataclass(frozen=True)
class MIScore:
    event_id: str
    mi: float  # nats
    # presence_counts[present][label]: rows absent/present, columns normal/anomalous
    presence_counts: tuple[tuple[int, int], tuple[int, int]]


def mi_from_counts(table, miller_madow: bool = False) -> float:
    """Plug-in MI (nats) of a 2x2 contingency table; 0*log(0) terms are 0.

    With *miller_madow* the entropy bias correction
    ``((Kx - 1) + (Ky - 1) - (Kxy - 1)) / 2N`` is added, K being the number of
    occupied cells/margins; the corrected value may be negative.
    """
    t = np.asarray(table, dtype=float)
    n = t.sum()
    if n <= 0:
        return 0.0
    row = t.sum(axis=1)
    col = t.sum(axis=0)
    mi = 0.0
    for i in range(2):
        for j in range(2):
            c = t[i, j]
            if c > 0:
                mi += (c / n) * math.log(c * n / (row[i] * col[j]))
    mi = max(mi, 0.0)  # plug-in MI is non-negative; clears -1e-17 rounding
    if miller_madow:
        kx = int((row > 0).sum())
        ky = int((col > 0).sum())
        kxy = int((t > 0).sum())
        mi += ((kx - 1) + (ky - 1) - (kxy - 1)) / (2.0 * n)
    return mi


def presence_table(presence, labels) -> tuple[tuple[int, int], tuple[int, int]]:
    presence = np.asarray(presence, dtype=bool)
    labels = np.asarray(labels, dtype=bool)
    return ((int(np.sum(~presence & ~labels)), int(np.sum(~presence & labels))),
            (int(np.sum(presence & ~labels)), int(np.sum(presence & labels))))


def presence_matrix(dataset: LabeledDataset) -> np.ndarray:
    """Boolean (groups x events) matrix over ``dataset.event_ids``."""
    from ..detectors.features import featurize

    return featurize(dataset).rows > 0


def mutual_information(dataset: LabeledDataset, event: str, miller_madow: bool = False) -> MIScore:
    if len(dataset) < 1:
        raise ValueError("mutual information needs at least one group")
    col = dataset.event_ids.index(event)
    presence = presence_matrix(dataset)[:, col]
    table = presence_table(presence, dataset.labels)
    return MIScore(event, mi_from_counts(table, miller_madow), table)


def all_mutual_information(dataset: LabeledDataset, events=None, miller_madow: bool = False) -> dict[str, MIScore]:
    ids = list(dataset.event_ids)
    pres = presence_matrix(dataset)
    labels = dataset.labels
    out = {}
    for e in (events if events is not None else ids):
        table = presence_table(pres[:, ids.index(e)], labels)
        out[e] = MIScore(e, mi_from_counts(table, miller_madow), table)
    return out
