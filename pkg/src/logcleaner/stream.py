"""Online filtering of raw log lines against a reduced event set."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from . import formats
from .ingest import LOG_FORMATS, LogRecord, _split_line, compile_format
from .profiler.pipeline import ReducedEventSet
from .templates import TemplateSet

log = logging.getLogger(__name__)


class FilterError(RuntimeError):
    pass


@dataclass
class FilterStats:
    lines_in: int = 0
    lines_out: int = 0
    lines_dropped: int = 0
    lines_unmatched: int = 0
    drops: dict = field(default_factory=lambda: {"sporadic": 0, "anti": 0, "duplicative": 0})
    events_total: int = 0
    events_removed: int = 0
    reloads: int = 0
    reload_errors: int = 0

    @property
    def lines_reduction_pct(self) -> float:
        return 100.0 * self.lines_dropped / self.lines_in if self.lines_in else 0.0

    @property
    def events_reduction_pct(self) -> float:
        return 100.0 * self.events_removed / self.events_total if self.events_total else 0.0

    def as_text(self) -> str:
        items = [("lines_in", self.lines_in), ("lines_out", self.lines_out),
                 ("lines_dropped", self.lines_dropped), ("lines_unmatched", self.lines_unmatched)]
        items += [(f"dropped_{k}", v) for k, v in self.drops.items()]
        items += [("events_total", self.events_total), ("events_removed", self.events_removed),
                  ("events_reduction_pct", f"{self.events_reduction_pct:.2f}"),
                  ("lines_reduction_pct", f"{self.lines_reduction_pct:.2f}"),
                  ("reloads", self.reloads), ("reload_errors", self.reload_errors)]
        return "\n".join([formats.header("stats")] + [f"{k}={v}" for k, v in items]) + "\n"

    @classmethod
    def parse(cls, text: str) -> dict[str, str]:
        lines = text.splitlines()
        formats.check_header(lines[0], "stats")
        return dict(line.split("=", 1) for line in lines[1:] if "=" in line)


class _Active:
    """Immutable snapshot of the set a line is filtered against."""

    __slots__ = ("reduced", "reasons")

    def __init__(self, reduced: ReducedEventSet):
        self.reduced = reduced
        self.reasons = {e: reduced.reason(e) for e in reduced.removed}


class StreamFilter:
    """Drops lines whose event was removed; unmatched lines pass through (fail-open).

    :meth:`reload` may be called from another thread. The active set is a
    single reference read once per line, so no line ever sees a mix of the
    old and new sets.
    """

    def __init__(self, reduced: ReducedEventSet, templates: TemplateSet,
                 signal_file: str | None = None):
        self.templates = templates
        self._check_compatible(reduced)
        self._active = _Active(reduced)
        self.stats = FilterStats()
        self._set_event_counts(reduced)
        self.signal_file = signal_file
        self._signal_mtime = self._mtime(signal_file)
        self.last_error: str | None = None

    @classmethod
    def from_paths(cls, reduced_path, templates_path, signal_file=None) -> "StreamFilter":
        try:
            reduced = ReducedEventSet.load(reduced_path)
        except (OSError, formats.ArtifactError) as exc:
            raise FilterError(f"refusing to start: {exc}") from exc
        return cls(reduced, TemplateSet.load(templates_path), signal_file)

    @property
    def reduced(self) -> ReducedEventSet:
        return self._active.reduced

    def _check_compatible(self, reduced: ReducedEventSet) -> None:
        unknown = [e for e in reduced.events if e not in self.templates]
        if unknown:
            raise FilterError(f"reduced set names events missing from the templates: {unknown[:5]}")

    def _set_event_counts(self, reduced):
        self.stats.events_total = len(reduced.events)
        self.stats.events_removed = len(reduced.removed)

    @staticmethod
    def _mtime(path):
        try:
            if not path:
                return None
            st = os.stat(path)
            return (st.st_mtime_ns, st.st_ino, st.st_size)
        except OSError:
            return None

    def reload(self, reduced_path) -> bool:
        """Swap in a new reduced set; on any problem keep the old one and return False."""
        try:
            reduced = ReducedEventSet.load(reduced_path)
            self._check_compatible(reduced)
        except (OSError, formats.ArtifactError, FilterError) as exc:
            self.stats.reload_errors += 1
            self.last_error = str(exc)
            log.error("reload of %s rejected, keeping current set: %s", reduced_path, exc)
            return False
        self._active = _Active(reduced)
        self._set_event_counts(reduced)
        self.stats.reloads += 1
        self.last_error = None
        log.info("reloaded reduced set from %s (%d retained)", reduced_path, len(reduced.retained))
        return True

    def _poll_signal(self):
        mtime = self._mtime(self.signal_file)
        if mtime is None or mtime == self._signal_mtime:
            return
        self._signal_mtime = mtime
        try:
            with open(self.signal_file, encoding="utf-8") as fh:
                target = fh.read().strip()
        except OSError as exc:
            log.error("cannot read signal file: %s", exc)
            return
        if target:
            self.reload(target)

    def keep(self, content: str) -> bool:
        """Decide one line and update the counters."""
        if self.signal_file:
            self._poll_signal()
        active = self._active
        st = self.stats
        st.lines_in += 1
        event = self.templates.match(content)
        if event is None:
            st.lines_unmatched += 1
            st.lines_out += 1
            return True
        reason = active.reasons.get(event)
        if reason is None:
            st.lines_out += 1
            return True
        st.lines_dropped += 1
        st.drops[reason] += 1
        return False

    def filter_records(self, records: Iterable[LogRecord]) -> Iterator[LogRecord]:
        for rec in records:
            if self.keep(rec.content):
                yield rec

    def filter_lines(self, lines: Iterable[str], fmt: str = "generic",
                     pattern: str | None = None) -> Iterator[str]:
        """Filter raw lines (newline-terminated or not), yielding them unchanged."""
        regex, names = compile_format(pattern or LOG_FORMATS[fmt])
        for line in lines:
            _, _, content = _split_line(line.rstrip("\r\n"), regex, names, fmt)
            if self.keep(content):
                yield line


def filter_stream(records: Iterable[LogRecord], reduced: ReducedEventSet,
                  templates: TemplateSet) -> tuple[list[LogRecord], FilterStats]:
    """Filter a finite record stream; returns (kept records, stats)."""
    flt = StreamFilter(reduced, templates)
    out = list(flt.filter_records(records))
    return out, flt.stats


def request_reload(signal_file, reduced_path) -> None:
    """Validate *reduced_path* and point a running filter's signal file at it."""
    ReducedEventSet.load(reduced_path)
    tmp = f"{signal_file}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(os.path.abspath(reduced_path) + "\n")
    os.replace(tmp, signal_file)
