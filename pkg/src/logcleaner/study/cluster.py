"""Clustering-based reduction: score each event alone, keep the useful cluster."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import formats
from ..detectors import fit_and_score
from ..grouping import LabeledDataset
from .kmeans import kmeans
from .retry import ReductionTrace, retry_reduce

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SingleEventScore:
    event_id: str
    precision: float
    recall: float
    f1: float


def single_event_scores(dataset: LabeledDataset, model_kind: str, seed: int = 0,
                        workers: int = 1, **params) -> list[SingleEventScore]:
    """Score a model trained on groups that keep only one event each."""

    def score(event):
        m = fit_and_score(dataset.restrict([event]), model_kind, seed, **params)
        return SingleEventScore(event, m.precision, m.recall, m.f1)

    events = list(dataset.event_ids)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(score, events))
    return [score(e) for e in events]


def relevant_events(scores: list[SingleEventScore], seed: int = 0, n_init: int = 50,
                    max_iter: int = 100) -> list[str]:
    """Split events into two k-means clusters over (P, R, F1); keep the better one.

    The relevant cluster is the one whose centroid has the higher F1, then
    precision, then recall. Fewer than two distinct points means there is
    nothing to separate, and every event counts as relevant.
    """
    X = np.array([[s.precision, s.recall, s.f1] for s in scores], dtype=float)
    if len(scores) < 2 or len(np.unique(X, axis=0)) < 2:
        log.warning("degenerate clustering input; treating all %d events as relevant", len(scores))
        return [s.event_id for s in scores]
    result = kmeans(X, 2, n_init=n_init, max_iter=max_iter, seed=seed)
    c = result.centroids
    keys = [(c[i, 2], c[i, 0], c[i, 1]) for i in range(2)]
    best = 0 if keys[0] >= keys[1] else 1
    return [s.event_id for s, lab in zip(scores, result.labels) if lab == best]


def cluster_reduce(dataset: LabeledDataset, model_kind: str, alpha: float = 0.02, seed: int = 0,
                   order: str = "frequency-desc", workers: int = 1, **params):
    """Returns (scores, relevant events, trace of the retry pass over them)."""
    if len(dataset.event_ids) < 2:
        raise ValueError("cluster_reduce needs at least two events")
    scores = single_event_scores(dataset, model_kind, seed, workers, **params)
    relevant = relevant_events(scores, seed)
    keep = set(relevant)
    irrelevant = [e for e in dataset.event_ids if e not in keep]
    trace = retry_reduce(dataset.restrict(relevant), model_kind, alpha, order, seed, **params)
    trace.pre_removed = {e: "irrelevant" for e in irrelevant}
    trace.all_events = tuple(dataset.event_ids)
    return scores, relevant, trace


def save_scores(path, scores: list[SingleEventScore], relevant) -> None:
    keep = set(relevant)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        formats.write_lines(fh, "scores", (
            f"{s.event_id}\t{s.precision!r}\t{s.recall!r}\t{s.f1!r}\t"
            f"{'relevant' if s.event_id in keep else 'irrelevant'}" for s in scores))
