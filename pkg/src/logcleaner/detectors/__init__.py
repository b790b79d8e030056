"""Anomaly detectors over event-count features."""

from .features import FeatureMatrix, featurize, split
from .metrics import EvalMetrics, evaluate, f1_score, from_counts
from .models import MODEL_KINDS, Model, TrainingError, canonical_kind, predict, time_inference, train

__all__ = ["FeatureMatrix", "featurize", "split", "EvalMetrics", "evaluate", "f1_score",
           "from_counts", "MODEL_KINDS", "Model", "TrainingError", "canonical_kind",
           "predict", "train", "time_inference", "fit_and_score"]


def fit_and_score(dataset, model_kind: str, seed: int = 0, **params) -> EvalMetrics:
    """Train on the dataset's chronological train prefix, score on the rest."""
    feats = featurize(dataset)
    train_part, test_part = split(feats, dataset.split_point)
    model = train(model_kind, train_part, seed, **params)
    labels, millis = predict(model, test_part)
    return evaluate(labels, test_part.labels, millis)
