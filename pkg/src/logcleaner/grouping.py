"""Organising the event stream into labeled event groups."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable

from . import formats
from .ingest import LabelSource, LogRecord

log = logging.getLogger(__name__)

NORMAL, ANOMALOUS = 0, 1
LABEL_NAMES = {NORMAL: "normal", ANOMALOUS: "anomalous"}
_LABEL_VALUES = {v: k for k, v in LABEL_NAMES.items()}

HDFS_BLOCK_PATTERN = r"blk_-?\d+"


@dataclass(frozen=True)
class EventGroup:
    group_id: str
    events: tuple[str, ...]
    label: int
    line_indices: tuple[int, ...] = ()

    def __post_init__(self):
        if self.line_indices and len(self.line_indices) != len(self.events):
            raise ValueError("events and line_indices must align")


class LabeledDataset:
    """Immutable list of groups over a known event vocabulary.

    ``excluded`` holds event ids hidden from this view; :meth:`without`
    returns a new view sharing the underlying groups, so retry loops never
    copy the data.
    """

    def __init__(self, groups: Iterable[EventGroup], event_ids: Iterable[str],
                 split_point: int | None = None, excluded: frozenset = frozenset(),
                 unlabeled: int = 0, dropped: int = 0):
        self._groups = tuple(groups)
        self.all_event_ids = tuple(event_ids)
        self.excluded = frozenset(excluded)
        self.unlabeled = unlabeled
        self.dropped = dropped
        n = len(self._groups)
        self.split_point = default_split(n) if split_point is None else split_point
        if not 0 <= self.split_point <= n:
            raise ValueError(f"split_point {self.split_point} outside [0, {n}]")
        unknown = self.excluded - set(self.all_event_ids)
        if unknown:
            raise KeyError(f"unknown event id(s): {sorted(unknown)}")
        self._view = None
        self._shared: dict = {}  # caches shared by every view of these groups

    # -- views -------------------------------------------------------------
    def _derive(self, excluded) -> "LabeledDataset":
        ds = LabeledDataset.__new__(LabeledDataset)
        ds._groups = self._groups
        ds.all_event_ids = self.all_event_ids
        ds.excluded = frozenset(excluded)
        ds.unlabeled, ds.dropped = self.unlabeled, self.dropped
        ds.split_point = self.split_point
        ds._view = None
        ds._shared = self._shared
        return ds

    def without(self, *events: str) -> "LabeledDataset":
        missing = set(events) - set(self.all_event_ids)
        if missing:
            raise KeyError(f"unknown event id(s): {sorted(missing)}")
        return self._derive(self.excluded | set(events))

    def restrict(self, keep: Iterable[str]) -> "LabeledDataset":
        """View keeping only the events in *keep* (others excluded)."""
        keep = set(keep)
        missing = keep - set(self.all_event_ids)
        if missing:
            raise KeyError(f"unknown event id(s): {sorted(missing)}")
        return self._derive(set(self.all_event_ids) - keep)

    def with_split(self, split_point: int) -> "LabeledDataset":
        ds = self._derive(self.excluded)
        if not 0 <= split_point <= len(self._groups):
            raise ValueError("split_point out of range")
        ds.split_point = split_point
        return ds

    @property
    def base(self) -> "LabeledDataset":
        return self._derive(())

    @property
    def event_ids(self) -> tuple[str, ...]:
        return tuple(e for e in self.all_event_ids if e not in self.excluded)

    @property
    def groups(self) -> tuple[EventGroup, ...]:
        if not self.excluded:
            return self._groups
        if self._view is None:
            ex = self.excluded
            view = []
            for g in self._groups:
                if g.line_indices:
                    pairs = [(e, i) for e, i in zip(g.events, g.line_indices) if e not in ex]
                    view.append(EventGroup(g.group_id, tuple(p[0] for p in pairs), g.label,
                                           tuple(p[1] for p in pairs)))
                else:
                    view.append(EventGroup(g.group_id, tuple(e for e in g.events if e not in ex), g.label))
            self._view = tuple(view)
        return self._view

    def __len__(self):
        return len(self._groups)

    @property
    def labels(self) -> list[int]:
        return [g.label for g in self._groups]

    def anomaly_ratio(self, part: str = "all") -> float:
        labels = self.labels
        if part == "train":
            labels = labels[: self.split_point]
        elif part == "test":
            labels = labels[self.split_point:]
        return sum(labels) / len(labels) if labels else 0.0

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (self.groups == other.groups and self.event_ids == other.event_ids
                and self.split_point == other.split_point)

    def __hash__(self):
        return hash((self.groups, self.event_ids, self.split_point))

    # -- persistence -------------------------------------------------------
    def save(self, path) -> None:
        lines = [f"#events {' '.join(self.event_ids)}", f"#split {self.split_point}"]
        for g in self.groups:
            row = f"{g.group_id}\t{LABEL_NAMES[g.label]}\t{' '.join(g.events)}"
            if g.line_indices:
                row += "\t" + " ".join(map(str, g.line_indices))
            lines.append(row)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            formats.write_lines(fh, "groups", lines)

    @classmethod
    def load(cls, path) -> "LabeledDataset":
        groups, event_ids, split = [], None, None
        for line in formats.open_artifact(path, "groups"):
            if line.startswith("#events"):
                event_ids = line.split()[1:]
            elif line.startswith("#split"):
                split = int(line.split()[1])
            elif line:
                try:
                    gid, label, events, *rest = line.split("\t", 3)
                    idx = tuple(int(i) for i in rest[0].split()) if rest else ()
                    groups.append(EventGroup(gid, tuple(events.split()), _LABEL_VALUES[label], idx))
                except (ValueError, KeyError):
                    raise formats.ArtifactError(f"{path}: bad group line {line!r}") from None
        if event_ids is None:
            seen = {}
            for g in groups:
                for e in g.events:
                    seen.setdefault(e, None)
            event_ids = list(seen)
        return cls(groups, event_ids, split)


def default_split(n_groups: int, ratio: float = 0.8) -> int:
    """Chronological train/test boundary, keeping both parts non-empty when possible."""
    if n_groups < 2:
        return n_groups
    return min(max(int(n_groups * ratio), 1), n_groups - 1)


def group_by_session(events: Iterable[tuple[str, LogRecord]], labels: LabelSource,
                     key_pattern: str = HDFS_BLOCK_PATTERN, event_ids: Iterable[str] | None = None,
                     split_ratio: float = 0.8) -> LabeledDataset:
    """One group per distinct session key, ordered by first appearance.

    A record mentioning several keys contributes to each of them. Records
    with no key are dropped and counted in ``dataset.dropped``.
    """
    regex = re.compile(key_pattern)
    sessions: dict[str, tuple[list, list]] = {}
    vocab: dict[str, None] = {}
    dropped = 0
    for event_id, rec in events:
        if event_id is not None:
            vocab.setdefault(event_id, None)
        keys = list(dict.fromkeys(regex.findall(rec.content)))
        if not keys:
            dropped += 1
            continue
        if event_id is None:
            continue
        for key in keys:
            evs, lines = sessions.setdefault(key, ([], []))
            evs.append(event_id)
            lines.append(rec.line_index)
    before = labels.missing
    groups = [EventGroup(key, tuple(evs), labels.label_for(key), tuple(lines))
              for key, (evs, lines) in sessions.items()]
    unlabeled = labels.missing - before
    if unlabeled:
        log.warning("%d session(s) missing from the label table; treated as normal", unlabeled)
    if dropped:
        log.info("%d record(s) carried no session key and were dropped", dropped)
    ids = list(event_ids) if event_ids is not None else list(vocab)
    return LabeledDataset(groups, ids, default_split(len(groups), split_ratio),
                          unlabeled=unlabeled, dropped=dropped)


def group_fixed(events: Iterable[tuple[str, LogRecord]], window_size: int, labels: LabelSource,
                event_ids: Iterable[str] | None = None, split_ratio: float = 0.8) -> LabeledDataset:
    """Consecutive non-overlapping windows of *window_size* lines.

    The final partial window is kept. A window is anomalous iff any member
    line is anomalous.
    """
    if window_size < 1:
        raise ValueError("window_size must be >= 1")
    groups = []
    vocab: dict[str, None] = {}
    evs: list[str] = []
    lines: list[int] = []
    label = NORMAL

    def flush():
        groups.append(EventGroup(str(len(groups)), tuple(evs), label, tuple(lines)))

    for event_id, rec in events:
        vocab.setdefault(event_id, None)
        evs.append(event_id)
        lines.append(rec.line_index)
        label = max(label, labels.label_for(rec.line_index))
        if len(evs) == window_size:
            flush()
            evs, lines, label = [], [], NORMAL
    if evs:
        flush()
    ids = list(event_ids) if event_ids is not None else list(vocab)
    return LabeledDataset(groups, ids, default_split(len(groups), split_ratio))


def remove_event(dataset: LabeledDataset, event: str) -> LabeledDataset:
    """Drop every occurrence of *event*; labels and group count are kept."""
    return dataset.without(event)
