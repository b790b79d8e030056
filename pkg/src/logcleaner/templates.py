"""Event template mining and matching.

The miner is a fixed-depth prefix tree in the style of Drain: records are
bucketed by token count, then by their first few tokens, and inside a leaf a
record joins the most similar existing template or starts a new one.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from . import formats
from .ingest import LogRecord

WILDCARD = "[*]"
_HAS_DIGIT = re.compile(r"\d")


@dataclass(frozen=True)
class MinerConfig:
    depth: int = 4
    sim_threshold: float = 0.5
    max_children: int = 100

    def __post_init__(self):
        if self.depth < 3:
            raise ValueError("depth must be >= 3")
        if not 0.0 <= self.sim_threshold <= 1.0:
            raise ValueError("sim_threshold must be in [0, 1]")
        if self.max_children < 2:
            raise ValueError("max_children must be >= 2")

    def as_dict(self) -> dict:
        return {"depth": self.depth, "sim_threshold": self.sim_threshold,
                "max_children": self.max_children}


@dataclass
class EventTemplate:
    event_id: str
    tokens: list[str]
    support_count: int = 0

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    @property
    def n_wildcards(self) -> int:
        return sum(1 for t in self.tokens if WILDCARD in t)


def tokenize(content: str) -> list[str]:
    tokens = content.split()
    return tokens if tokens else [""]


def mask(tokens: list[str]) -> list[str]:
    return [WILDCARD if _HAS_DIGIT.search(t) else t for t in tokens]


def _token_pattern(token: str) -> re.Pattern | None:
    if token == WILDCARD or WILDCARD not in token:
        return None
    parts = [re.escape(p) for p in token.split(WILDCARD)]
    return re.compile("^" + ".*?".join(parts) + "$")


class TemplateSet:
    """Ordered collection of templates plus a read-only matching index."""

    def __init__(self, templates: Iterable[EventTemplate] = (), miner_config: dict | None = None):
        self.templates: list[EventTemplate] = list(templates)
        self.miner_config = dict(miner_config or {})
        self._by_id = {t.event_id: t for t in self.templates}
        if len(self._by_id) != len(self.templates):
            raise ValueError("duplicate event ids in template set")
        self._index = None

    def __len__(self):
        return len(self.templates)

    def __iter__(self):
        return iter(self.templates)

    def __contains__(self, event_id):
        return event_id in self._by_id

    def __getitem__(self, event_id) -> EventTemplate:
        return self._by_id[event_id]

    @property
    def event_ids(self) -> list[str]:
        return [t.event_id for t in self.templates]

    def _build_index(self):
        index: dict[int, list] = {}
        for order, tpl in enumerate(self.templates):
            checks = []
            for pos, tok in enumerate(tpl.tokens):
                if tok == WILDCARD:
                    continue
                checks.append((pos, tok, _token_pattern(tok)))
            index.setdefault(len(tpl.tokens), []).append((tpl.n_wildcards, order, tpl.event_id, checks))
        for bucket in index.values():
            bucket.sort(key=lambda item: (item[0], item[1]))
        self._index = index

    def match(self, content: str | LogRecord) -> str | None:
        """Return the event id whose literals agree with the content, else None.

        When several templates fit, the most specific one (fewest wildcards)
        wins, ties going to the earlier template.
        """
        if isinstance(content, LogRecord):
            content = content.content
        if self._index is None:
            self._build_index()
        tokens = tokenize(content)
        for _, _, event_id, checks in self._index.get(len(tokens), ()):
            for pos, tok, pat in checks:
                got = tokens[pos]
                if pat is None:
                    if got != tok:
                        break
                elif not pat.match(got):
                    break
            else:
                return event_id
        return None

    def save(self, path) -> None:
        cfg = " ".join(f"{k}={v}" for k, v in sorted(self.miner_config.items()))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            formats.write_lines(fh, "templates",
                                ([f"#config {cfg}"] if cfg else [])
                                + [f"{t.event_id}\t{t.support_count}\t{t.text}" for t in self.templates])

    @classmethod
    def load(cls, path) -> "TemplateSet":
        templates, config = [], {}
        for line in formats.open_artifact(path, "templates"):
            if line.startswith("#config"):
                for item in line.split()[1:]:
                    k, _, v = item.partition("=")
                    config[k] = _number(v)
                continue
            if not line:
                continue
            try:
                event_id, count, text = line.split("\t", 2)
                templates.append(EventTemplate(event_id, text.split(" "), int(count)))
            except ValueError:
                raise formats.ArtifactError(f"{path}: bad template line {line!r}") from None
        return cls(templates, config)


class _Node:
    __slots__ = ("children", "clusters")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.clusters: list[EventTemplate] = []


class TemplateMiner:
    """Incremental fixed-depth tree miner; feed records with :meth:`add`."""

    def __init__(self, config: MinerConfig | None = None):
        self.config = config or MinerConfig()
        self._root = _Node()
        self._templates: list[EventTemplate] = []

    def _leaf(self, tokens: list[str]) -> _Node:
        node = self._root.children.setdefault(str(len(tokens)), _Node())
        for tok in tokens[: self.config.depth - 2]:
            if tok in node.children:
                node = node.children[tok]
            elif tok != WILDCARD and len(node.children) < self.config.max_children - 1:
                node = node.children.setdefault(tok, _Node())
            else:
                node = node.children.setdefault(WILDCARD, _Node())
        return node

    @staticmethod
    def _similarity(template: list[str], tokens: list[str]) -> tuple[float, int]:
        same = sum(1 for a, b in zip(template, tokens) if a != WILDCARD and a == b)
        return same / len(tokens), sum(1 for a in template if a == WILDCARD)

    def add(self, content: str) -> str:
        tokens = mask(tokenize(content))
        leaf = self._leaf(tokens)
        best, best_key = None, None
        for cluster in leaf.clusters:
            key = self._similarity(cluster.tokens, tokens)
            if best_key is None or key > best_key:
                best, best_key = cluster, key
        if best is None or best_key[0] < self.config.sim_threshold:
            best = EventTemplate(f"E{len(self._templates)}", list(tokens), 0)
            self._templates.append(best)
            leaf.clusters.append(best)
        else:
            best.tokens = [a if a == b else WILDCARD for a, b in zip(best.tokens, tokens)]
        best.support_count += 1
        return best.event_id

    def template_set(self) -> TemplateSet:
        return TemplateSet([EventTemplate(t.event_id, list(t.tokens), t.support_count)
                            for t in self._templates], self.config.as_dict())


def mine_events(records: Iterable[LogRecord], config: MinerConfig | None = None):
    """Mine *records* and return ``(TemplateSet, [(event_id, record), ...])``."""
    miner = TemplateMiner(config)
    events = [(miner.add(rec.content), rec) for rec in records]
    return miner.template_set(), events


def mine(records: Iterable[LogRecord], config: MinerConfig | None = None) -> TemplateSet:
    return mine_events(records, config)[0]


def load_parsed(path) -> tuple[TemplateSet, list[str]]:
    """Read a loghub "structured" CSV (LineId, EventId[, EventTemplate]).

    Event ids are kept as written in the file; loghub's ``<*>`` placeholder
    becomes ``[*]``.
    """
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        cols = set(reader.fieldnames or ())
        missing = {"LineId", "EventId"} - cols
        if missing:
            raise formats.ArtifactError(f"{path}: missing column(s) {', '.join(sorted(missing))}")
        has_template = "EventTemplate" in cols
        for row in reader:
            rows.append((int(row["LineId"]), row["EventId"], row.get("EventTemplate") if has_template else None))
    rows.sort(key=lambda r: r[0])
    templates: dict[str, EventTemplate] = {}
    stream = []
    for _, event_id, text in rows:
        tpl = templates.get(event_id)
        if tpl is None:
            tokens = tokenize(text.replace("<*>", WILDCARD)) if text else [event_id]
            tpl = templates[event_id] = EventTemplate(event_id, tokens, 0)
        tpl.support_count += 1
        stream.append(event_id)
    return TemplateSet(templates.values(), {"source": "parsed"}), stream


def _number(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def save_events(path, events: Iterable[tuple[int, str | None]]) -> None:
    """Write the per-line event stream: ``line_index<TAB>event_id``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        formats.write_lines(fh, "events", (f"{i}\t{e if e is not None else '-'}" for i, e in events))


def load_events(path) -> Iterator[tuple[int, str | None]]:
    for line in formats.open_artifact(path, "events"):
        if not line or line.startswith("#"):
            continue
        idx, _, event_id = line.partition("\t")
        yield int(idx), (None if event_id == "-" else event_id)
