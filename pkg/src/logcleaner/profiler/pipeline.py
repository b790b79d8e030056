"""Profiling pipeline: sporadic filter, anti-event optimizer, duplicative-event separator."""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .. import formats
from ..grouping import LabeledDataset
from .graph import AppearGraph, build_appear_graph
from .mi import MIScore, all_mutual_information, presence_matrix
from .optics import cosine_distances, optics

log = logging.getLogger(__name__)

ANTI_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ProfileConfig:
    cutoff: float = 0.1
    theta_anti: float = 0.0
    theta_dup: int = 2
    xi: float = 0.05
    use_tfidf: bool = True
    use_anti: bool = True
    use_dup: bool = True
    miller_madow: bool = False
    whitelist: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.cutoff <= 1.0:
            raise ValueError("cutoff must be in [0, 1]")
        if self.theta_dup < 2:
            raise ValueError("theta_dup must be >= 2")
        if not 0.0 < self.xi < 1.0:
            raise ValueError("xi must be in (0, 1)")


@dataclass
class ReducedEventSet:
    events: tuple[str, ...]  # every event, in template order
    removed: dict[str, str]  # event -> "sporadic" | "anti" | "dup:<representative>"
    outliers: tuple[str, ...] = ()
    templates: dict[str, str] = field(default_factory=dict)
    thresholds: dict[str, str] = field(default_factory=dict)
    version: str = formats.VERSION

    @property
    def retained(self) -> tuple[str, ...]:
        return tuple(e for e in self.events if e not in self.removed)

    def reason(self, event: str) -> str:
        r = self.removed.get(event)
        if r is None:
            return "retained"
        return "duplicative" if r.startswith("dup:") else r

    def reason_counts(self) -> dict[str, int]:
        counts = {"sporadic": 0, "anti": 0, "duplicative": 0}
        for e in self.removed:
            counts[self.reason(e)] += 1
        return counts

    def _body(self) -> list[str]:
        th = " ".join(f"{k}={v}" for k, v in sorted(self.thresholds.items()))
        lines = [f"#thresholds {th}".rstrip(), f"#outliers {' '.join(self.outliers)}".rstrip()]
        for e in self.events:
            lines.append(f"{e}\t{self.removed.get(e, 'retained')}\t{self.templates.get(e, '')}")
        return lines

    def content_hash(self) -> str:
        text = "\n".join([formats.header("reduced")] + self._body()) + "\n"
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def dumps(self) -> str:
        lines = [formats.header("reduced")] + self._body() + [f"#hash {self.content_hash()}"]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "ReducedEventSet":
        """Parse and verify a reduced event set; a hash mismatch raises ArtifactError."""
        events, removed, templates, thresholds, outliers = [], {}, {}, {}, ()
        stored = None
        for line in formats.open_artifact(path, "reduced"):
            if line.startswith("#hash"):
                stored = line.split(maxsplit=1)[1].strip() if " " in line else ""
            elif line.startswith("#thresholds"):
                for item in line.split()[1:]:
                    k, _, v = item.partition("=")
                    thresholds[k] = v
            elif line.startswith("#outliers"):
                outliers = tuple(line.split()[1:])
            elif line:
                if stored is not None:
                    raise formats.ArtifactError(f"{path}: content after the #hash trailer")
                try:
                    e, status, text = line.split("\t", 2)
                except ValueError:
                    raise formats.ArtifactError(f"{path}: bad event line {line!r}") from None
                events.append(e)
                templates[e] = text
                if status != "retained":
                    if status not in ("sporadic", "anti") and not status.startswith("dup:"):
                        raise formats.ArtifactError(f"{path}: unknown status {status!r}")
                    removed[e] = status
        res = cls(tuple(events), removed, outliers, templates, thresholds)
        if stored is None:
            raise formats.ArtifactError(f"{path}: missing #hash trailer")
        if stored != res.content_hash():
            raise formats.ArtifactError(f"{path}: content hash mismatch")
        return res

    def line_reduction(self, event_stream) -> float:
        """Fraction of lines whose event was removed (unmatched lines are kept)."""
        total = dropped = 0
        for e in event_stream:
            total += 1
            if e is not None and e in self.removed:
                dropped += 1
        return dropped / total if total else 0.0

    @property
    def event_reduction(self) -> float:
        return len(self.removed) / len(self.events) if self.events else 0.0


def document_frequencies(dataset: LabeledDataset) -> dict[str, float]:
    pres = presence_matrix(dataset)
    n = max(pres.shape[0], 1)
    return {e: float(pres[:, i].sum()) / n for i, e in enumerate(dataset.event_ids)}


def tfidf_weights(dataset: LabeledDataset) -> dict[str, float]:
    """Corpus-level tf-idf per event (reported only; the cutoff uses document frequency)."""
    df = document_frequencies(dataset)
    tf = dict.fromkeys(dataset.event_ids, 0)
    total = 0
    for g in dataset.groups:
        for e in g.events:
            tf[e] += 1
            total += 1
    n = len(dataset)
    out = {}
    for e in dataset.event_ids:
        docs = df[e] * n
        out[e] = (tf[e] / total if total else 0.0) * (math.log(n / docs) if docs else 0.0)
    return out


def tfidf_filter(dataset: LabeledDataset, cutoff: float = 0.1, whitelist=()) -> tuple[list[str], list[str]]:
    """Split events into (kept, sporadic) by group-level document frequency < cutoff."""
    if not 0.0 <= cutoff <= 1.0:
        raise ValueError("cutoff must be in [0, 1]")
    keep_always = set(whitelist)
    df = document_frequencies(dataset)
    kept, sporadic = [], []
    for e in dataset.event_ids:
        (sporadic if df[e] < cutoff and e not in keep_always else kept).append(e)
    return kept, sporadic


def anti_event_filter(dataset: LabeledDataset, candidates, theta_anti: float = 0.0,
                      mi_scores: dict[str, MIScore] | None = None, miller_madow: bool = False,
                      whitelist=()) -> tuple[list[str], list[str]]:
    """Split candidates into (relevant, anti) by MI <= theta_anti."""
    candidates = list(candidates)
    if mi_scores is None:
        mi_scores = all_mutual_information(dataset, candidates, miller_madow)
    keep_always = set(whitelist)
    relevant, anti = [], []
    for e in candidates:
        if mi_scores[e].mi <= theta_anti + ANTI_TOLERANCE and e not in keep_always:
            anti.append(e)
        else:
            relevant.append(e)
    return relevant, anti


def _drop_unrelated(labels, weights, min_size):
    """Move cluster members that share no group with any other member to noise.

    xi extraction on a handful of points can sweep an event that co-occurs
    with nothing into its neighbour's cluster. Such an event carries
    information no other event does, so it belongs with the outliers.
    """
    labels = labels.copy()
    for label in sorted(set(labels.tolist()) - {-1}):
        members = np.flatnonzero(labels == label)
        for i in members:
            if not any(weights[i, j] for j in members if j != i):
                labels[i] = -1
        if np.count_nonzero(labels == label) < min_size:
            labels[labels == label] = -1
    return labels


def duplicative_separator(graph: AppearGraph, mi_scores, theta_dup: int = 2, xi: float = 0.05,
                          whitelist=()):
    """Cluster events by co-occurrence and keep one per cluster.

    Rows of the appear graph are normalised by their diagonal and compared
    with cosine distance. OPTICS noise points are outliers and always kept.
    Returns ``(retained, {removed: representative}, outliers)``.
    """
    if theta_dup < 2:
        raise ValueError("theta_dup must be >= 2")
    nodes = list(graph.nodes)
    if not nodes:
        return [], {}, []
    if isinstance(mi_scores, dict):
        mi = {e: (s.mi if isinstance(s, MIScore) else float(s)) for e, s in mi_scores.items()}
    else:
        mi = {s.event_id: s.mi for s in mi_scores}
    result = optics(cosine_distances(graph.normalized_rows()), theta_dup, xi)
    labels = _drop_unrelated(result.labels, graph.weights, theta_dup)
    keep_always = set(whitelist)
    removed: dict[str, str] = {}
    outliers = [e for e, lab in zip(nodes, labels) if lab < 0]
    for label in sorted(set(labels.tolist()) - {-1}):
        members = [i for i, lab in enumerate(labels) if lab == label]
        rep = min(members, key=lambda i: (-mi[nodes[i]], i))
        for i in members:
            if i != rep and nodes[i] not in keep_always:
                removed[nodes[i]] = nodes[rep]
    retained = [e for e in nodes if e not in removed]
    return retained, removed, outliers


def profile(dataset: LabeledDataset, config: ProfileConfig | None = None,
            templates: dict[str, str] | None = None) -> ReducedEventSet:
    """Run the enabled stages in order and assemble the reduced event set."""
    config = config or ProfileConfig()
    events = list(dataset.event_ids)
    removed: dict[str, str] = {}
    candidates = events
    if config.use_tfidf:
        candidates, sporadic = tfidf_filter(dataset, config.cutoff, config.whitelist)
        removed.update((e, "sporadic") for e in sporadic)
    mi_scores = all_mutual_information(dataset, candidates, config.miller_madow)
    if config.use_anti and candidates:
        candidates, anti = anti_event_filter(dataset, candidates, config.theta_anti, mi_scores,
                                             whitelist=config.whitelist)
        removed.update((e, "anti") for e in anti)
    outliers: list[str] = []
    if config.use_dup and candidates:
        graph = build_appear_graph(dataset, candidates)
        _, dups, outliers = duplicative_separator(graph, mi_scores, config.theta_dup, config.xi,
                                                  config.whitelist)
        removed.update((e, f"dup:{rep}") for e, rep in dups.items())
    thresholds = {
        "cutoff": repr(config.cutoff) if config.use_tfidf else "off",
        "theta_anti": repr(config.theta_anti) if config.use_anti else "off",
        "theta_dup": str(config.theta_dup) if config.use_dup else "off",
        "xi": repr(config.xi),
        "miller_madow": str(config.miller_madow).lower(),
    }
    if config.whitelist:
        thresholds["whitelist"] = ",".join(config.whitelist)
    res = ReducedEventSet(tuple(events), removed, tuple(outliers), dict(templates or {}), thresholds)
    log.info("profile: %d events -> %d retained (%s)", len(events), len(res.retained), res.reason_counts())
    return res


def ablation(dataset: LabeledDataset, config: ProfileConfig | None = None) -> list[tuple[str, ReducedEventSet]]:
    """Cumulative stage rows: none, +tfidf, +anti, +dup."""
    config = config or ProfileConfig()
    base = dict(cutoff=config.cutoff, theta_anti=config.theta_anti, theta_dup=config.theta_dup,
                xi=config.xi, miller_madow=config.miller_madow, whitelist=config.whitelist)
    rows = [("none", ProfileConfig(use_tfidf=False, use_anti=False, use_dup=False, **base)),
            ("+tfidf", ProfileConfig(use_tfidf=True, use_anti=False, use_dup=False, **base)),
            ("+anti", ProfileConfig(use_tfidf=True, use_anti=True, use_dup=False, **base)),
            ("+dup", ProfileConfig(use_tfidf=True, use_anti=True, use_dup=True, **base))]
    return [(name, profile(dataset, cfg)) for name, cfg in rows]
