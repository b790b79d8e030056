"""Reading raw log files and label sources.

Header layouts follow the loghub conventions. A layout is written as a
format string such as ``"<Date> <Time> <Pid> <Level> <Component>: <Content>"``
and compiled into a regular expression; ``<Content>`` must be the last field.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from typing import Iterator

log = logging.getLogger(__name__)

LOG_FORMATS = {
    "hdfs": "<Date> <Time> <Pid> <Level> <Component>: <Content>",
    "bgl": "<Label> <Timestamp> <Date> <Node> <Time> <NodeRepeat> <Type> <Component> <Level> <Content>",
    "thunderbird": "<Label> <Timestamp> <Date> <User> <Month> <Day> <Time> <Location> <Component>: <Content>",
    "generic": "<Content>",
}

# fields joined (in this order) into LogRecord.timestamp_text
_TIMESTAMP_FIELDS = {
    "hdfs": ("Date", "Time"),
    "bgl": ("Timestamp",),
    "thunderbird": ("Timestamp",),
}

THUNDERBIRD_DEFAULT_PREFIX = 100_000


class IngestError(Exception):
    """Fatal problem reading a log or label file."""


@dataclass(frozen=True)
class LogRecord:
    line_index: int
    timestamp_text: str
    header_fields: tuple[tuple[str, str], ...]
    content: str

    def field(self, name: str, default: str | None = None) -> str | None:
        for key, value in self.header_fields:
            if key == name:
                return value
        return default


@dataclass
class LabelSource:
    kind: str  # "per-line-prefix" or "per-session-table"
    data: dict = field(default_factory=dict)
    missing: int = 0  # sessions looked up but absent from the table

    def label_for(self, key) -> int:
        try:
            return self.data[key]
        except KeyError:
            if self.kind == "per-line-prefix":
                raise
            self.missing += 1
            return 0


def compile_format(fmt: str) -> tuple[re.Pattern, list[str]]:
    """Turn a loghub-style ``<Field>`` format string into a regex."""
    names: list[str] = []
    pattern = ""
    for i, piece in enumerate(re.split(r"(<[^<>]+>)", fmt)):
        if i % 2 == 0:
            pattern += re.sub(r" +", r"\\s+", re.escape(piece).replace(r"\ ", " "))
        else:
            name = piece[1:-1]
            names.append(name)
            if name == "Content":
                pattern += r"(?P<Content>.*?)"
            else:
                pattern += f"(?P<{name}>\\S+?)"
    if not names or names[-1] != "Content":
        raise ValueError(f"format must end with <Content>: {fmt!r}")
    return re.compile("^" + pattern + "$"), names


def _split_line(line: str, regex: re.Pattern, names: list[str], family: str):
    m = regex.match(line)
    if m is None or not m.group("Content"):
        return "", (), line
    fields = tuple((n, m.group(n)) for n in names if n != "Content")
    ts = " ".join(m.group(n) for n in _TIMESTAMP_FIELDS.get(family, ()) if n in names)
    return ts, fields, m.group("Content")


def read_records(path, fmt: str = "generic", pattern: str | None = None,
                 limit: int | None = None) -> Iterator[LogRecord]:
    """Yield one LogRecord per physical line of *path*, in file order.

    *fmt* selects a built-in layout; *pattern* overrides it with a custom
    format string. Lines the layout does not match come back with empty
    header fields and the whole line as content. *limit* truncates to a
    line-count prefix (the Thunderbird desk-scale policy).
    """
    if pattern is None:
        try:
            pattern = LOG_FORMATS[fmt]
        except KeyError:
            raise IngestError(f"unknown log format {fmt!r}") from None
    regex, names = compile_format(pattern)
    try:
        fh = open(path, encoding="utf-8", errors="replace", newline="\n")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    with fh:
        for idx, raw in enumerate(_physical_lines(fh)):
            if limit is not None and idx >= limit:
                break
            ts, fields, content = _split_line(raw, regex, names, fmt)
            yield LogRecord(idx, ts, fields, content)


def _physical_lines(fh) -> Iterator[str]:
    # same line count as `wc -l`, plus a final unterminated line if present
    for line in fh:
        yield line.rstrip("\r\n")


def line_labels(records) -> LabelSource:
    """Per-line labels from the alert-tag field of BGL/Thunderbird records."""
    data = {}
    for rec in records:
        tag = rec.field("Label")
        if tag is None:
            tag = rec.content.split(" ", 1)[0] if not rec.header_fields else "-"
        data[rec.line_index] = 0 if tag == "-" else 1
    return LabelSource("per-line-prefix", data)


_SESSION_LABELS = {"normal": 0, "anomaly": 1, "anomalous": 1, "0": 0, "1": 1}


def read_labels(path, kind: str) -> LabelSource:
    """Load a label source.

    ``per-session-table`` reads a CSV with header ``BlockId,Label``;
    ``per-line-prefix`` reads the first whitespace token of every line of a
    raw log file ("-" means normal, anything else anomalous).
    """
    if kind == "per-line-prefix":
        data = {}
        try:
            with open(path, encoding="utf-8", errors="replace", newline="\n") as fh:
                for idx, line in enumerate(_physical_lines(fh)):
                    tag = line.split(" ", 1)[0]
                    data[idx] = 0 if tag == "-" else 1
        except OSError as exc:
            raise IngestError(f"cannot read {path}: {exc}") from exc
        return LabelSource(kind, data)
    if kind != "per-session-table":
        raise IngestError(f"unknown label kind {kind!r}")
    data = {}
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"BlockId", "Label"} <= set(reader.fieldnames):
                raise IngestError(f"{path}: expected header BlockId,Label")
            for row in reader:
                key = row["BlockId"].strip()
                if key in data:
                    raise IngestError(f"{path}: duplicate session key {key}")
                value = _SESSION_LABELS.get(row["Label"].strip().lower())
                if value is None:
                    raise IngestError(f"{path}: unknown label {row['Label']!r} for {key}")
                data[key] = value
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    return LabelSource(kind, data)
