"""``logcleaner`` command line.

Every stage reads and writes fixed file names inside ``--workdir``::

    mine     -> templates.tsv, events.tsv, config.txt
    group    -> groups.tsv
    train    -> model.<kind>[.reduced].txt
    eval     -> metrics.<kind>[.reduced].tsv, timing.<kind>[.reduced].tsv
    study    -> trace.<kind>.<method>.a<alpha>.tsv, categories.*.tsv, scores.*.tsv
    profile  -> reduced.tsv, profile.scores.tsv
    filter   -> filtered stream (stdout or --out), stats block (stderr or --stats)
    report   -> report.txt, report.<table>.csv

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import os
import signal
import sys

from . import formats
from .config import ConfigError, RunConfig
from .detectors import (Model, TrainingError, canonical_kind, evaluate, featurize, predict,
                        split, time_inference, train)
from .grouping import LabeledDataset, group_by_session, group_fixed
from .ingest import IngestError, line_labels, read_labels, read_records
from .profiler import ProfileConfig, all_mutual_information, document_frequencies, profile, tfidf_weights
from .profiler.pipeline import ReducedEventSet
from .report import write_metrics, write_report
from .stream import FilterError, StreamFilter, request_reload
from .study import categorize_events, cluster_reduce, retry_reduce
from .study.categorize import save_categories
from .study.cluster import save_scores
from .templates import (MinerConfig, TemplateSet, load_events, load_parsed, mine_events,
                        save_events)

log = logging.getLogger("logcleaner")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _path(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.workdir, name)


def _safe(kind: str) -> str:
    return kind.replace("(", "-").replace(")", "")


def _require(path: str) -> str:
    if not os.path.exists(path):
        raise FileNotFoundError(f"missing input {path}; run the upstream stage first")
    return path


def _load_dataset(cfg: RunConfig) -> LabeledDataset:
    return LabeledDataset.load(_require(_path(cfg, "groups.tsv")))


def _reduced_view(cfg: RunConfig, ds: LabeledDataset, reduced_path: str | None) -> LabeledDataset:
    if not reduced_path:
        return ds
    reduced = ReducedEventSet.load(_require(reduced_path))
    return ds.restrict([e for e in reduced.retained if e in ds.all_event_ids])


# -- commands --------------------------------------------------------------

def cmd_mine(cfg: RunConfig, args) -> int:
    os.makedirs(cfg.workdir, exist_ok=True)
    if cfg.parsed:
        templates, stream = load_parsed(_require(cfg.parsed))
        events = list(enumerate(stream))
    else:
        if not cfg.log:
            raise UsageError("mine needs --log (or --parsed)")
        records = read_records(_require(cfg.log), cfg.dataset, cfg.pattern or None, cfg.line_limit)
        miner = MinerConfig(cfg.miner_depth, cfg.miner_sim, cfg.miner_max_children)
        templates, pairs = mine_events(records, miner)
        events = [(rec.line_index, e) for e, rec in pairs]
    templates.save(_path(cfg, "templates.tsv"))
    save_events(_path(cfg, "events.tsv"), events)
    cfg.save(_path(cfg, "config.txt"))
    print(f"mined {len(templates)} templates from {len(events)} lines")
    return EXIT_OK


def cmd_group(cfg: RunConfig, args) -> int:
    if not cfg.log:
        raise UsageError("group needs --log to read session keys and line labels")
    templates = TemplateSet.load(_require(_path(cfg, "templates.tsv")))
    stream = dict(load_events(_require(_path(cfg, "events.tsv"))))
    records = list(read_records(_require(cfg.log), cfg.dataset, cfg.pattern or None, cfg.line_limit))
    pairs = [(stream.get(r.line_index), r) for r in records if r.line_index in stream]
    if cfg.window_size is None:
        if not cfg.labels:
            raise UsageError("session grouping needs --labels (BlockId,Label table)")
        labels = read_labels(_require(cfg.labels), "per-session-table")
        ds = group_by_session(pairs, labels, cfg.key_pattern, templates.event_ids, cfg.split_ratio)
        if ds.unlabeled:
            print(f"warning: {ds.unlabeled} session(s) missing from {cfg.labels}; labeled normal",
                  file=sys.stderr)
    else:
        labels = read_labels(cfg.labels, "per-line-prefix") if cfg.labels else line_labels(records)
        ds = group_fixed([(e, r) for e, r in pairs if e is not None], cfg.window_size, labels,
                         templates.event_ids, cfg.split_ratio)
    ds.save(_path(cfg, "groups.tsv"))
    print(f"{len(ds)} groups (anomaly ratio train {ds.anomaly_ratio('train'):.4f}, "
          f"test {ds.anomaly_ratio('test'):.4f})")
    return EXIT_OK


def cmd_train(cfg: RunConfig, args) -> int:
    ds = _reduced_view(cfg, _load_dataset(cfg), args.reduced)
    train_part, _ = split(featurize(ds), ds.split_point)
    model = train(cfg.model, train_part, cfg.seed)
    suffix = ".reduced" if args.reduced else ""
    out = _path(cfg, f"model.{_safe(model.kind)}{suffix}.txt")
    model.save(out)
    print(f"trained {model.kind} on {len(train_part)} groups -> {out}")
    return EXIT_OK


def cmd_eval(cfg: RunConfig, args) -> int:
    kind = canonical_kind(cfg.model)
    suffix = ".reduced" if args.reduced else ""
    model = Model.load(_require(_path(cfg, f"model.{_safe(kind)}{suffix}.txt")))
    ds = _reduced_view(cfg, _load_dataset(cfg), args.reduced)
    _, test_part = split(featurize(ds), ds.split_point)
    labels, millis = predict(model, test_part)
    m = evaluate(labels, test_part.labels, millis)
    write_metrics(_path(cfg, f"metrics.{_safe(kind)}{suffix}.tsv"), {
        "model": kind, "variant": "w" if args.reduced else "w/o", "n_test": len(test_part),
        "precision": repr(m.precision), "recall": repr(m.recall), "f1": repr(m.f1),
        "tp": m.tp, "fp": m.fp, "fn": m.fn, "tn": m.tn})
    # wall-clock numbers live apart from the metrics so reruns stay byte-identical
    e2e = time_inference(model, ds.groups[ds.split_point:], repeats=args.repeats)
    write_metrics(_path(cfg, f"timing.{_safe(kind)}{suffix}.tsv"), {
        "model": kind, "inference_millis": f"{millis:.4f}", "end_to_end_millis": f"{e2e:.4f}"})
    print(f"{kind}{' (reduced)' if args.reduced else ''}: P={m.precision:.3f} R={m.recall:.3f} "
          f"F1={m.f1:.3f} inference={millis:.2f}ms")
    return EXIT_OK


def _line_fraction(cfg: RunConfig, removed: set) -> float | None:
    path = _path(cfg, "events.tsv")
    if not os.path.exists(path):
        return None
    stream = [e for _, e in load_events(path)]
    return sum(1 for e in stream if e in removed) / len(stream) if stream else 0.0


def cmd_study(cfg: RunConfig, args) -> int:
    ds = _load_dataset(cfg)
    kind = canonical_kind(cfg.model)
    for alpha in cfg.alphas:
        tag = f"{_safe(kind)}.{args.method}.a{alpha:g}"
        if args.method == "retry":
            trace = retry_reduce(ds, kind, alpha, cfg.order, cfg.seed, cfg.passes)
        else:
            scores, relevant, trace = cluster_reduce(ds, kind, alpha, cfg.seed, cfg.order, cfg.workers)
            save_scores(_path(cfg, f"scores.{tag}.tsv"), scores, relevant)
        trace.save(_path(cfg, f"trace.{tag}.tsv"))
        save_categories(_path(cfg, f"categories.{tag}.tsv"), categorize_events(trace, cfg.epsilon))
        removed = set(trace.all_events) - set(trace.surviving_events)
        lines = _line_fraction(cfg, removed)
        events_pct = 100.0 * len(removed) / len(trace.all_events) if trace.all_events else 0.0
        lines_txt = f"{100.0 * lines:.2f}%" if lines is not None else "n/a"
        print(f"{args.method} {kind} alpha={alpha:g}: events {events_pct:.2f}% lines {lines_txt} "
              f"F1 {trace.baseline.f1:.3f} -> {trace.final.f1:.3f} sound={trace.is_sound()}")
    return EXIT_OK


def _profile_config(cfg: RunConfig, args) -> ProfileConfig:
    return ProfileConfig(cutoff=cfg.cutoff, theta_anti=cfg.theta_anti, theta_dup=cfg.theta_dup, xi=cfg.xi,
                         use_tfidf=not args.no_tfidf, use_anti=not args.no_anti, use_dup=not args.no_dup,
                         miller_madow=cfg.miller_madow, whitelist=cfg.whitelist_ids)


def cmd_profile(cfg: RunConfig, args) -> int:
    ds = _load_dataset(cfg)
    if cfg.profile_on == "train":
        ds = LabeledDataset(ds.groups[: ds.split_point], ds.all_event_ids)
    templates = TemplateSet.load(_require(_path(cfg, "templates.tsv")))
    texts = {t.event_id: t.text for t in templates}
    reduced = profile(ds, _profile_config(cfg, args), texts)
    reduced.save(_path(cfg, "reduced.tsv"))
    df = document_frequencies(ds)
    tfidf = tfidf_weights(ds)
    mi = all_mutual_information(ds, miller_madow=cfg.miller_madow)
    with open(_path(cfg, "profile.scores.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        formats.write_lines(fh, "scores", (
            f"{e}\t{df[e]!r}\t{tfidf[e]!r}\t{mi[e].mi!r}\t{reduced.removed.get(e, 'retained')}"
            for e in ds.event_ids))
    counts = reduced.reason_counts()
    lines = _line_fraction(cfg, set(reduced.removed))
    lines_txt = f"{100.0 * lines:.2f}%" if lines is not None else "n/a"
    print(f"retained {len(reduced.retained)}/{len(reduced.events)} events "
          f"(sporadic {counts['sporadic']}, anti {counts['anti']}, duplicative {counts['duplicative']}); "
          f"lines reduced {lines_txt}")
    return EXIT_OK


def cmd_filter(cfg: RunConfig, args) -> int:
    reduced_path = args.reduced or _path(cfg, "reduced.tsv")
    templates_path = args.templates or _path(cfg, "templates.tsv")
    flt = StreamFilter.from_paths(_require(reduced_path), _require(templates_path), args.signal_file)

    def dump(*_):
        sys.stderr.write(flt.stats.as_text())
        sys.stderr.flush()

    if hasattr(signal, "SIGUSR1"):
        signal.signal(signal.SIGUSR1, dump)
    src = open(args.input, encoding="utf-8", errors="replace", newline="\n") if args.input else sys.stdin
    dst = open(args.output, "w", encoding="utf-8", newline="\n") if args.output else sys.stdout
    try:
        for line in flt.filter_lines(src, cfg.dataset, cfg.pattern or None):
            dst.write(line if line.endswith("\n") else line + "\n")
    finally:
        if args.input:
            src.close()
        if args.output:
            dst.close()
    if args.stats:
        with open(args.stats, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(flt.stats.as_text())
    else:
        dump()
    return EXIT_OK


def cmd_reload(cfg: RunConfig, args) -> int:
    request_reload(args.signal_file, _require(args.reduced))
    print(f"reload requested: {args.reduced}")
    return EXIT_OK


def cmd_report(cfg: RunConfig, args) -> int:
    dirs = args.workdirs or [cfg.workdir]
    out = args.out or (dirs[0] if len(dirs) == 1 else cfg.workdir)
    text = write_report(dirs, out)
    print(text, end="")
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--workdir")
    common.add_argument("--dataset", choices=("hdfs", "bgl", "thunderbird", "generic"))
    common.add_argument("--log")
    common.add_argument("--labels")
    common.add_argument("--parsed", help="loghub structured CSV instead of mining")
    common.add_argument("--pattern", help="custom <Field> header layout")
    common.add_argument("--limit", type=int, help="only read this many lines")
    common.add_argument("--window", help="'session' or a fixed window size")
    common.add_argument("--model")
    common.add_argument("--seed", type=int)
    common.add_argument("--alpha", help="degradation tolerance; comma list for a sweep")
    common.add_argument("--order", choices=("frequency-desc", "frequency-asc", "id"))
    common.add_argument("--cutoff", type=float)
    common.add_argument("--theta-anti", type=float, dest="theta_anti")
    common.add_argument("--theta-dup", type=int, dest="theta_dup")
    common.add_argument("--xi", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="logcleaner", description="Log event reduction for anomaly detection.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("mine", parents=[common], help="mine event templates").set_defaults(func=cmd_mine)
    sub.add_parser("group", parents=[common], help="build labeled event groups").set_defaults(func=cmd_group)
    p = sub.add_parser("train", parents=[common], help="train a detector")
    p.add_argument("--reduced", help="train on the events retained by this reduced set")
    p.set_defaults(func=cmd_train)
    p = sub.add_parser("eval", parents=[common], help="evaluate a trained detector")
    p.add_argument("--reduced")
    p.add_argument("--repeats", type=int, default=5, help="timing repetitions (best is kept)")
    p.set_defaults(func=cmd_eval)
    p = sub.add_parser("study", parents=[common], help="retry/cluster reduction study")
    p.add_argument("--method", choices=("retry", "cluster"), default="retry")
    p.set_defaults(func=cmd_study)
    p = sub.add_parser("profile", parents=[common], help="build the reduced event set")
    p.add_argument("--no-tfidf", action="store_true")
    p.add_argument("--no-anti", action="store_true")
    p.add_argument("--no-dup", action="store_true")
    p.set_defaults(func=cmd_profile)
    p = sub.add_parser("filter", parents=[common], help="filter a log stream")
    p.add_argument("--reduced")
    p.add_argument("--templates")
    p.add_argument("--in", dest="input", help="input file (default stdin)")
    p.add_argument("--out", dest="output", help="output file (default stdout)")
    p.add_argument("--stats", help="write the stats block here instead of stderr")
    p.add_argument("--signal-file", help="watched between lines; holds the path of a new reduced set")
    p.set_defaults(func=cmd_filter)
    p = sub.add_parser("reload", parents=[common], help="hot-swap a running filter's reduced set")
    p.add_argument("--reduced", required=True)
    p.add_argument("--signal-file", required=True)
    p.set_defaults(func=cmd_reload)
    p = sub.add_parser("report", parents=[common], help="render tables from artifacts")
    p.add_argument("workdirs", nargs="*")
    p.add_argument("--out", help="directory for report files (default: the single workdir, else --workdir)")
    p.set_defaults(func=cmd_report)
    return parser


_FLAG_KEYS = ("workdir", "dataset", "log", "labels", "parsed", "pattern", "limit", "window", "model",
              "seed", "alpha", "order", "cutoff", "theta_anti", "theta_dup", "xi")


def resolve_config(args, environ=None) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = RunConfig.load(args.config, cfg)
    cfg = cfg.with_env(environ)
    return cfg.updated({k: getattr(args, k, None) for k in _FLAG_KEYS})


def main(argv=None, environ=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args, environ)
        return args.func(cfg, args)
    except (ConfigError, UsageError) as exc:
        print(f"logcleaner: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, IngestError, formats.ArtifactError, TrainingError, FilterError, ValueError,
            KeyError) as exc:
        print(f"logcleaner: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
