"""Empirical-study reductions (retry and clustering based) and event taxonomy."""

from .categorize import ANTI, DUPLICATIVE, KEY, EventCategory, categorize_events
from .cluster import SingleEventScore, cluster_reduce, relevant_events, single_event_scores
from .kmeans import kmeans
from .retry import ReductionTrace, Step, candidate_order, retry_reduce

__all__ = ["ANTI", "DUPLICATIVE", "KEY", "EventCategory", "categorize_events",
           "SingleEventScore", "cluster_reduce", "relevant_events", "single_event_scores",
           "kmeans", "ReductionTrace", "Step", "candidate_order", "retry_reduce"]
