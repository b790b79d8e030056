import os
import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logcleaner.ingest import LogRecord
from logcleaner.profiler import ReducedEventSet
from logcleaner.stream import FilterError, FilterStats, StreamFilter, filter_stream, request_reload
from logcleaner.templates import EventTemplate, TemplateSet

TEMPLATES = TemplateSet([
    EventTemplate("E0", "Served block [*] to [*]".split(), 0),
    EventTemplate("E1", "Receiving block [*]".split(), 0),
    EventTemplate("E2", "Deleting block [*] file [*]".split(), 0),
    EventTemplate("E3", "Verification succeeded for [*]".split(), 0),
])
VOCAB = ["Served block blk_1 to /10.0.0.1", "Receiving block blk_2", "Deleting block blk_3 file /x",
         "Verification succeeded for blk_4"]
LINE_EVENT = dict(zip(VOCAB, ["E0", "E1", "E2", "E3"]))


def recs(lines):
    return [LogRecord(i, "", (), line) for i, line in enumerate(lines)]


def reduced(removed):
    return ReducedEventSet(("E0", "E1", "E2", "E3"), dict(removed))


def test_anti_line_dropped_with_reason():
    kept, stats = filter_stream(recs(["Served block blk_9 to /1.1.1.1"]), reduced({"E0": "anti"}), TEMPLATES)
    assert kept == [] and stats.drops["anti"] == 1


def test_novel_line_passes():
    kept, stats = filter_stream(recs(["totally novel"]), reduced({"E0": "anti"}), TEMPLATES)
    assert len(kept) == 1 and stats.lines_unmatched == 1


def test_empty_retained_set_emits_only_unmatched():
    everything = {e: "anti" for e in TEMPLATES.event_ids}
    lines = VOCAB * 3 + ["novel one", "novel two"]
    _, stats = filter_stream(recs(lines), reduced(everything), TEMPLATES)
    assert stats.lines_out == stats.lines_unmatched == 2


def test_replay_matches_profiler_prediction():
    rng = np.random.default_rng(0)
    lines = [VOCAB[i] for i in rng.integers(0, 4, 500)]
    r = reduced({"E1": "sporadic", "E3": "dup:E0"})
    _, stats = filter_stream(recs(lines), r, TEMPLATES)
    predicted = 100.0 * r.line_reduction([LINE_EVENT[x] for x in lines])
    assert stats.lines_reduction_pct == pytest.approx(predicted)


vocab_lines = st.sampled_from(VOCAB + ["novel a", "unknown event 7", ""])


@settings(max_examples=300, deadline=None)
@given(st.lists(vocab_lines, max_size=60), st.sets(st.sampled_from(["E0", "E1", "E2", "E3"])))
def test_conservation_subsequence_idempotence(lines, removed):
    r = reduced({e: "anti" for e in removed})
    out, stats = filter_stream(recs(lines), r, TEMPLATES)
    assert stats.lines_in == stats.lines_out + stats.lines_dropped == len(lines)
    it = iter(recs(lines))
    assert all(any(o == x for x in it) for o in out)  # subsequence
    again, stats2 = filter_stream(out, r, TEMPLATES)
    assert again == out and stats2.lines_dropped == 0
    assert sum(stats.drops.values()) == stats.lines_dropped


def test_stats_text_round_trip():
    _, stats = filter_stream(recs(VOCAB), reduced({"E0": "anti"}), TEMPLATES)
    parsed = FilterStats.parse(stats.as_text())
    assert parsed["lines_in"] == "4" and parsed["dropped_anti"] == "1"
    assert parsed["lines_reduction_pct"] == "25.00"


@pytest.fixture
def saved(tmp_path):
    def _save(name, removed):
        p = tmp_path / name
        reduced(removed).save(p)
        return str(p)
    return _save


def test_reload_identical_changes_nothing(saved):
    path = saved("a.tsv", {"E0": "anti"})
    flt = StreamFilter(ReducedEventSet.load(path), TEMPLATES)
    before = [flt.keep(x) for x in VOCAB]
    assert flt.reload(path)
    assert [flt.keep(x) for x in VOCAB] == before


def test_reload_retaining_more_never_emits_less(saved):
    rng = np.random.default_rng(1)
    lines = [VOCAB[i] for i in rng.integers(0, 4, 300)]
    small = saved("s.tsv", {"E0": "anti", "E1": "anti", "E2": "sporadic"})
    large = saved("l.tsv", {"E0": "anti"})
    flt = StreamFilter(ReducedEventSet.load(small), TEMPLATES)
    out1 = sum(flt.keep(x) for x in lines)
    flt.reload(large)
    out2 = sum(flt.keep(x) for x in lines)
    assert out2 >= out1


def test_corrupt_reload_keeps_old_set(saved, tmp_path):
    good = saved("g.tsv", {"E0": "anti"})
    bad = tmp_path / "bad.tsv"
    bad.write_text(open(good).read().replace("anti", "sporadic"))
    flt = StreamFilter(ReducedEventSet.load(good), TEMPLATES)
    assert not flt.reload(str(bad))
    assert flt.stats.reload_errors == 1
    assert flt.keep(VOCAB[0]) is False and flt.reduced.removed == {"E0": "anti"}


def test_refuses_to_start_on_bad_hash(saved, tmp_path):
    good = saved("g.tsv", {"E0": "anti"})
    text = open(good).read().replace("anti", "sporadic")
    open(good, "w").write(text)
    tpl = tmp_path / "t.tsv"
    TEMPLATES.save(tpl)
    with pytest.raises(FilterError, match="refusing to start"):
        StreamFilter.from_paths(good, str(tpl))


def test_unknown_events_rejected():
    with pytest.raises(FilterError):
        StreamFilter(ReducedEventSet(("E9",), {}), TEMPLATES)


def test_signal_file_triggers_reload(saved, tmp_path):
    first = saved("a.tsv", {"E0": "anti"})
    second = saved("b.tsv", {"E1": "anti"})
    sig = str(tmp_path / "reload.signal")
    flt = StreamFilter(ReducedEventSet.load(first), TEMPLATES, signal_file=sig)
    assert flt.keep(VOCAB[0]) is False
    request_reload(sig, second)
    assert flt.keep(VOCAB[0]) is True
    assert flt.keep(VOCAB[1]) is False
    assert flt.stats.reloads == 1


def test_request_reload_validates(tmp_path):
    bad = tmp_path / "x.tsv"
    bad.write_text("garbage\n")
    sig = tmp_path / "sig"
    with pytest.raises(Exception):
        request_reload(str(sig), str(bad))
    assert not sig.exists()


def test_concurrent_reload_never_mixes_sets(saved):
    a = saved("a.tsv", {"E0": "anti", "E1": "anti"})
    b = saved("b.tsv", {"E2": "anti", "E3": "anti"})
    flt = StreamFilter(ReducedEventSet.load(a), TEMPLATES)
    stop = threading.Event()

    def flip():
        i = 0
        while not stop.is_set():
            flt.reload(b if i % 2 == 0 else a)
            i += 1

    t = threading.Thread(target=flip)
    t.start()
    try:
        for _ in range(2000):
            active = flt._active
            decisions = [active.reasons.get(LINE_EVENT[x]) is None for x in VOCAB]
            assert decisions in ([False, False, True, True], [True, True, False, False])
            flt.keep(VOCAB[0])
    finally:
        stop.set()
        t.join()
    st_ = flt.stats
    assert st_.lines_in == st_.lines_out + st_.lines_dropped


def test_filter_lines_keeps_raw_text():
    flt = StreamFilter(reduced({"E1": "anti"}), TEMPLATES)
    raw = ["081109 203615 148 INFO dfs.DataNode: Receiving block blk_2\n",
           "081109 203615 148 INFO dfs.DataNode: Served block blk_1 to /10.0.0.1\n"]
    assert list(flt.filter_lines(raw, "hdfs")) == raw[1:]
