"""Retry-based event reduction.

Events are removed one at a time; after each removal the detector is
retrained and tested on the reduced groups. A removal is undone when

    f1 < (1 - alpha) * f1_max

and otherwise kept. ``f1_max`` starts at the baseline F1 and is raised to
the F1 observed after an accepted removal whenever that is higher.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .. import formats
from ..detectors import EvalMetrics, TrainingError, fit_and_score
from ..grouping import LabeledDataset

log = logging.getLogger(__name__)

ORDERS = ("frequency-desc", "frequency-asc", "id")


@dataclass(frozen=True)
class Step:
    event_id: str
    action: str  # "removed" or "reinstated"
    f1_before: float
    metrics: EvalMetrics

    @property
    def delta_f1(self) -> float:
        return self.metrics.f1 - self.f1_before


@dataclass
class ReductionTrace:
    alpha: float
    model_kind: str
    baseline: EvalMetrics
    all_events: tuple[str, ...]
    steps: list[Step] = field(default_factory=list)
    f1_max_history: list[float] = field(default_factory=list)
    surviving_events: tuple[str, ...] = ()
    final: EvalMetrics | None = None
    # events dropped before the retry loop, with the reason (e.g. "irrelevant")
    pre_removed: dict[str, str] = field(default_factory=dict)

    @property
    def removed_events(self) -> list[str]:
        return [s.event_id for s in self.steps if s.action == "removed"]

    def is_sound(self) -> bool:
        """Final F1 within alpha of the baseline, or f1_max climbed past it."""
        final = self.final.f1 if self.final is not None else self.baseline.f1
        if final >= (1 - self.alpha) * self.baseline.f1 - 1e-12:
            return True
        hist = self.f1_max_history
        return all(b >= a for a, b in zip(hist, hist[1:])) and hist[-1] > self.baseline.f1

    def save(self, path) -> None:
        def m(x: EvalMetrics):
            return f"{x.precision!r}\t{x.recall!r}\t{x.f1!r}"

        lines = [f"#alpha {self.alpha!r}", f"#model {self.model_kind}",
                 f"#events {' '.join(self.all_events)}",
                 f"#baseline\t{m(self.baseline)}",
                 f"#final\t{m(self.final or self.baseline)}",
                 f"#f1_max {' '.join(repr(v) for v in self.f1_max_history)}",
                 f"#surviving {' '.join(self.surviving_events)}"]
        for e, reason in self.pre_removed.items():
            lines.append(f"#pre_removed\t{e}\t{reason}")
        for s in self.steps:
            lines.append(f"{s.event_id}\t{s.action}\t{s.f1_before!r}\t{m(s.metrics)}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            formats.write_lines(fh, "trace", lines)

    @classmethod
    def load(cls, path) -> "ReductionTrace":
        meta, steps, pre = {}, [], {}

        def metrics(parts):
            p, r, f = (float(x) for x in parts)
            return EvalMetrics(p, r, f)

        for line in formats.open_artifact(path, "trace"):
            if line.startswith("#pre_removed"):
                _, e, reason = line.split("\t")
                pre[e] = reason
            elif line.startswith("#baseline") or line.startswith("#final"):
                parts = line.split("\t")
                meta[parts[0][1:]] = metrics(parts[1:])
            elif line.startswith("#"):
                key, _, value = line[1:].partition(" ")
                meta[key] = value
            elif line:
                e, action, before, *rest = line.split("\t")
                steps.append(Step(e, action, float(before), metrics(rest)))
        return cls(alpha=float(meta["alpha"]), model_kind=meta["model"], baseline=meta["baseline"],
                   all_events=tuple(meta["events"].split()), steps=steps,
                   f1_max_history=[float(v) for v in meta["f1_max"].split()],
                   surviving_events=tuple(meta["surviving"].split()), final=meta["final"],
                   pre_removed=pre)


def event_frequencies(dataset: LabeledDataset) -> dict[str, int]:
    freq = dict.fromkeys(dataset.event_ids, 0)
    for g in dataset.groups:
        for e in g.events:
            freq[e] += 1
    return freq


def candidate_order(dataset: LabeledDataset, order: str = "frequency-desc") -> list[str]:
    ids = list(dataset.event_ids)
    if order == "id":
        return ids
    freq = event_frequencies(dataset)
    pos = {e: i for i, e in enumerate(ids)}
    if order == "frequency-desc":
        return sorted(ids, key=lambda e: (-freq[e], pos[e]))
    if order == "frequency-asc":
        return sorted(ids, key=lambda e: (freq[e], pos[e]))
    raise ValueError(f"unknown order {order!r}; choose from {ORDERS}")


def retry_reduce(dataset: LabeledDataset, model_kind: str, alpha: float = 0.02,
                 order: str = "frequency-desc", seed: int = 0, passes: int = 1,
                 candidates: list[str] | None = None, **params) -> ReductionTrace:
    """Greedy one-at-a-time removal with the degradation test above.

    *candidates* limits which events are tried (default: all events of the
    view, in *order*). Every retrain uses the same *seed*. With ``passes >
    1`` the loop repeats over the still-retained candidates until a pass
    removes nothing.
    """
    if not 0 <= alpha < 1:
        raise ValueError("alpha must be in [0, 1)")
    try:
        baseline = fit_and_score(dataset, model_kind, seed, **params)
    except TrainingError as exc:
        raise TrainingError(f"baseline training failed: {exc}") from exc
    trace = ReductionTrace(alpha, model_kind, baseline, tuple(dataset.event_ids))
    f1_max = baseline.f1
    trace.f1_max_history.append(f1_max)
    current = dataset
    current_f1 = baseline.f1
    order_list = candidate_order(dataset, order)
    if candidates is not None:
        wanted = set(candidates)
        order_list = [e for e in order_list if e in wanted]
    for _ in range(max(passes, 1)):
        removed_this_pass = 0
        for event in order_list:
            if event in current.excluded:
                continue
            trial = current.without(event)
            metrics = fit_and_score(trial, model_kind, seed, **params)
            if metrics.f1 < (1 - alpha) * f1_max:
                trace.steps.append(Step(event, "reinstated", current_f1, metrics))
                continue
            trace.steps.append(Step(event, "removed", current_f1, metrics))
            current, current_f1 = trial, metrics.f1
            removed_this_pass += 1
            if metrics.f1 > f1_max:
                f1_max = metrics.f1
            trace.f1_max_history.append(f1_max)
        if removed_this_pass == 0:
            break
    trace.surviving_events = current.event_ids
    trace.final = fit_and_score(current, model_kind, seed, **params) if trace.removed_events else baseline
    log.info("retry %s alpha=%s: %d/%d events survive, F1 %.4f -> %.4f", model_kind, alpha,
             len(trace.surviving_events), len(trace.all_events), baseline.f1, trace.final.f1)
    return trace
