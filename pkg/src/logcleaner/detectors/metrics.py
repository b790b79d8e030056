"""Precision / recall / F1 of the anomaly class."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EvalMetrics:
    precision: float
    recall: float
    f1: float
    inference_millis: float = 0.0
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def from_counts(tp: int, fp: int, fn: int, tn: int = 0, inference_millis: float = 0.0) -> EvalMetrics:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return EvalMetrics(precision, recall, f1_score(precision, recall), inference_millis, tp, fp, fn, tn)


def evaluate(predicted, truth, inference_millis: float = 0.0) -> EvalMetrics:
    """Score *predicted* against *truth*; zero denominators give 0, never NaN."""
    predicted = np.asarray(predicted, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if predicted.shape != truth.shape:
        raise ValueError(f"length mismatch: {predicted.shape[0]} predictions vs {truth.shape[0]} labels")
    tp = int(np.sum(predicted & truth))
    fp = int(np.sum(predicted & ~truth))
    fn = int(np.sum(~predicted & truth))
    tn = int(np.sum(~predicted & ~truth))
    return from_counts(tp, fp, fn, tn, inference_millis)
