"""Offline profiling: which events can be dropped from the log stream."""

from .graph import AppearGraph, build_appear_graph
from .mi import MIScore, all_mutual_information, mi_from_counts, mutual_information
from .optics import OpticsResult, cosine_distances, optics
from .pipeline import (ProfileConfig, ReducedEventSet, ablation, anti_event_filter,
                       document_frequencies, duplicative_separator, profile, tfidf_filter,
                       tfidf_weights)

__all__ = ["AppearGraph", "build_appear_graph", "MIScore", "all_mutual_information",
           "mi_from_counts", "mutual_information", "OpticsResult", "cosine_distances", "optics",
           "ProfileConfig", "ReducedEventSet", "ablation", "anti_event_filter",
           "document_frequencies", "duplicative_separator", "profile", "tfidf_filter",
           "tfidf_weights"]
