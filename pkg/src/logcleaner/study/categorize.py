"""Sorting events into key-, anti- and duplicative-events from a reduction trace."""

from __future__ import annotations

from dataclasses import dataclass

from .. import formats
from .retry import ReductionTrace

KEY, ANTI, DUPLICATIVE = "key-event", "anti-event", "duplicative-event"


@dataclass(frozen=True)
class EventCategory:
    event_id: str
    category: str
    evidence: str


def categorize_events(trace: ReductionTrace, epsilon: float = 0.005) -> list[EventCategory]:
    """One category per event of the trace.

    An accepted removal that raised F1 by more than *epsilon* marks an
    anti-event; any other accepted removal (the change stayed within the
    alpha tolerance) marks a duplicative-event. Events that were reinstated
    or never removed are key-events. Events discarded before the loop as
    irrelevant count as anti-events.
    """
    last: dict[str, object] = {}
    for step in trace.steps:
        last[step.event_id] = step
    out = []
    for e in trace.all_events:
        if e in trace.pre_removed:
            out.append(EventCategory(e, ANTI, f"pre-removed: {trace.pre_removed[e]}"))
            continue
        step = last.get(e)
        if step is None:
            out.append(EventCategory(e, KEY, "never removed"))
        elif step.action == "removed":
            d = step.delta_f1
            cat = ANTI if d > epsilon else DUPLICATIVE
            out.append(EventCategory(e, cat, f"delta_f1={d:+.4f}"))
        else:
            out.append(EventCategory(e, KEY, f"reinstated, delta_f1={step.delta_f1:+.4f}"))
    return out


def save_categories(path, categories: list[EventCategory]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        formats.write_lines(fh, "categories", (f"{c.event_id}\t{c.category}\t{c.evidence}" for c in categories))


def load_categories(path) -> list[EventCategory]:
    out = []
    for line in formats.open_artifact(path, "categories"):
        if line and not line.startswith("#"):
            e, cat, ev = line.split("\t", 2)
            out.append(EventCategory(e, cat, ev))
    return out
