"""Tables summarising one or more work directories.

Reports read artifact files only; nothing is retrained.
"""

from __future__ import annotations

import csv
import glob
import io
import os
import re
from dataclasses import dataclass, field

from . import formats
from .profiler.pipeline import ReducedEventSet
from .study.retry import ReductionTrace
from .templates import load_events

ABLATION_STAGES = (("none", ()), ("+tfidf", ("sporadic",)), ("+anti", ("sporadic", "anti")),
                   ("+dup", ("sporadic", "anti", "duplicative")))


def read_metrics(path) -> dict[str, str]:
    out = {}
    for line in formats.open_artifact(path, "metrics"):
        if line and not line.startswith("#"):
            key, _, value = line.partition("\t")
            out[key] = value
    return out


def write_metrics(path, values: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        formats.write_lines(fh, "metrics", (f"{k}\t{v}" for k, v in values.items()))


@dataclass
class Workdir:
    name: str
    path: str
    event_stream: list = field(default_factory=list)
    reduced: ReducedEventSet | None = None
    traces: dict = field(default_factory=dict)  # (model, method, alpha) -> trace
    metrics: dict = field(default_factory=dict)  # (model, variant) -> dict
    timing: dict = field(default_factory=dict)  # (model, variant) -> dict


def _check_versions(paths) -> None:
    seen = {}
    for p in paths:
        kind, version = formats.read_kind(p)
        if version != formats.VERSION:
            raise formats.ArtifactError(f"{p}: {kind} artifact has version {version}, expected {formats.VERSION}")
        seen.setdefault(version, p)
    if len(seen) > 1:
        raise formats.ArtifactError(f"mixed artifact versions: {sorted(seen)}")


def load_workdir(path, name: str | None = None) -> Workdir:
    files = sorted(glob.glob(os.path.join(path, "*.tsv")) + glob.glob(os.path.join(path, "*.txt")))
    files = [f for f in files if not os.path.basename(f).startswith("report")]
    _check_versions(files)
    if name is None:
        name = os.path.basename(os.path.abspath(path))
        cfg = os.path.join(path, "config.txt")
        if os.path.exists(cfg):
            from .config import RunConfig

            name = RunConfig.load(cfg).dataset
    wd = Workdir(name, path)
    events = os.path.join(path, "events.tsv")
    if os.path.exists(events):
        wd.event_stream = [e for _, e in load_events(events)]
    reduced = os.path.join(path, "reduced.tsv")
    if os.path.exists(reduced):
        wd.reduced = ReducedEventSet.load(reduced)
    for f in files:
        base = os.path.basename(f)
        m = re.match(r"trace\.(.+)\.(retry|cluster)\.a([0-9.]+)\.tsv$", base)
        if m:
            wd.traces[(m.group(1), m.group(2), float(m.group(3)))] = ReductionTrace.load(f)
            continue
        m = re.match(r"(metrics|timing)\.(.+?)(\.reduced)?\.tsv$", base)
        if m:
            target = wd.metrics if m.group(1) == "metrics" else wd.timing
            target[(m.group(2), "w" if m.group(3) else "w/o")] = read_metrics(f)
    return wd


def _pct(x: float) -> str:
    return f"{100.0 * x:.2f}%"


def _line_share(stream, events) -> float:
    events = set(events)
    if not stream:
        return 0.0
    return sum(1 for e in stream if e is not None and e in events) / len(stream)


def study_reduction_rows(wds: list[Workdir]) -> list[list[str]]:
    """Events% / lines% removed per model and alpha (retry or cluster study)."""
    keys = sorted({(m, meth, a) for wd in wds for (m, meth, a) in wd.traces})
    rows = []
    for model, method, alpha in keys:
        for measure in ("events", "lines"):
            row = [model, method, f"{alpha:g}", measure]
            for wd in wds:
                tr = wd.traces.get((model, method, alpha))
                if tr is None:
                    row.append("-")
                    continue
                gone = set(tr.all_events) - set(tr.surviving_events)
                if measure == "events":
                    row.append(_pct(len(gone) / len(tr.all_events) if tr.all_events else 0.0))
                else:
                    row.append(_pct(_line_share(wd.event_stream, gone)))
            rows.append(row)
    return rows


def logcleaner_reduction_rows(wds: list[Workdir]) -> list[list[str]]:
    rows = []
    for measure in ("events", "lines"):
        row = [measure]
        for wd in wds:
            r = wd.reduced
            if r is None:
                row.append("-")
            elif measure == "events":
                row.append(_pct(r.event_reduction))
            else:
                row.append(_pct(r.line_reduction(wd.event_stream)))
        rows.append(row)
    return rows


def metric_rows(wds: list[Workdir]) -> list[list[str]]:
    models = sorted({m for wd in wds for (m, _) in wd.metrics})
    rows = []
    for model in models:
        for variant in ("w/o", "w"):
            row = [model, variant]
            for wd in wds:
                m = wd.metrics.get((model, variant))
                if m is None:
                    row += ["-", "-", "-"]
                else:
                    row += [f"{float(m[k]):.3f}" for k in ("precision", "recall", "f1")]
            rows.append(row)
    return rows


def timing_rows(wds: list[Workdir]) -> list[list[str]]:
    models = sorted({m for wd in wds for (m, _) in wd.timing})
    rows = []
    for model in models:
        for variant in ("w/o", "w"):
            row = [model, variant]
            for wd in wds:
                t = wd.timing.get((model, variant))
                row.append("-" if t is None else f"{float(t['end_to_end_millis']):.2f}")
            rows.append(row)
    return rows


def ablation_rows(wds: list[Workdir]) -> list[list[str]]:
    """Cumulative stage rows, read from the removal reasons of reduced.tsv."""
    rows = []
    for stage, reasons in ABLATION_STAGES:
        row = [stage]
        for wd in wds:
            r = wd.reduced
            if r is None:
                row += ["-", "-"]
                continue
            gone = [e for e in r.removed if r.reason(e) in reasons]
            row.append(_pct(len(gone) / len(r.events) if r.events else 0.0))
            row.append(_pct(_line_share(wd.event_stream, gone)))
        rows.append(row)
    return rows


def _format_table(title, header, rows) -> str:
    cells = [header] + rows
    widths = [max(len(str(r[i])) for r in cells) for i in range(len(header))]
    out = [title, "-" * len(title)]
    for k, r in enumerate(cells):
        out.append("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip())
        if k == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"


def build_report(wds: list[Workdir]) -> dict[str, tuple[str, list[str], list[list[str]]]]:
    names = [wd.name for wd in wds]
    return {
        "study_reduction": ("Data volume reduction by study method",
                            ["model", "method", "alpha", "measure"] + names, study_reduction_rows(wds)),
        "logcleaner_reduction": ("Data volume reduced by the profiler",
                                 ["measure"] + names, logcleaner_reduction_rows(wds)),
        "metrics": ("Detection before (w/o) and after (w) reduction",
                    ["model", "variant"] + [f"{n}:{k}" for n in names for k in ("P", "R", "F1")],
                    metric_rows(wds)),
        "inference_time": ("Inference time (ms, featurise + predict)",
                           ["model", "variant"] + names, timing_rows(wds)),
        "ablation": ("Ablation (cumulative stages)",
                     ["stage"] + [f"{n}:{k}" for n in names for k in ("events", "lines")],
                     ablation_rows(wds)),
    }


def render_text(tables) -> str:
    return "\n".join(_format_table(title, header, rows) for title, header, rows in tables.values())


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_report(workdirs, out_dir) -> str:
    wds = [load_workdir(p) for p in workdirs]
    tables = build_report(wds)
    os.makedirs(out_dir, exist_ok=True)
    text = render_text(tables)
    with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    for key, (_, header, rows) in tables.items():
        with open(os.path.join(out_dir, f"report.{key}.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write(render_csv(header, rows))
    return text
