import subprocess

import pytest

from conftest import BGL_LOG, HDFS_LABELS, HDFS_LOG
from logcleaner.ingest import IngestError, line_labels, read_labels, read_records


def test_bgl_line_splits_alert_tag_and_content(write):
    path = write("bgl.log", "- 1117838570 2005.06.03 R02-M1-N0-C:J12-U11 2005-06-03-15.42.50.675872 "
                            "R02-M1-N0-C:J12-U11 RAS KERNEL INFO instruction cache parity error corrected\n")
    (rec,) = read_records(path, "bgl")
    assert rec.field("Label") == "-"
    assert rec.content == "instruction cache parity error corrected"
    assert rec.line_index == 0


def test_empty_file_gives_no_records(write):
    assert list(read_records(write("e.log", ""), "hdfs")) == []


def test_three_lines_indexed_from_zero(write):
    recs = list(read_records(write("g.log", "a 1\nb 2\nc 3\n"), "generic"))
    assert [r.line_index for r in recs] == [0, 1, 2]


def test_unparseable_line_keeps_whole_text(write):
    (rec,) = read_records(write("h.log", "not an hdfs line\n"), "hdfs")
    assert rec.header_fields == ()
    assert rec.content == "not an hdfs line"


def test_custom_pattern(write):
    path = write("c.log", "2024-01-01 WARN disk full on /dev/sda1\n")
    (rec,) = read_records(path, pattern="<Date> <Level> <Content>")
    assert rec.field("Level") == "WARN"
    assert rec.content == "disk full on /dev/sda1"


def test_limit_truncates(write):
    path = write("l.log", "".join(f"x {i}\n" for i in range(10)))
    assert len(list(read_records(path, "generic", limit=4))) == 4


@pytest.mark.parametrize("path", [HDFS_LOG, BGL_LOG])
def test_record_count_matches_wc(path):
    wc = int(subprocess.run(["wc", "-l", path], capture_output=True, text=True).stdout.split()[0])
    assert len(list(read_records(path, "generic"))) == wc


def test_line_index_strictly_increases():
    idx = [r.line_index for r in read_records(HDFS_LOG, "hdfs")]
    assert all(b > a for a, b in zip(idx, idx[1:]))


def test_session_table(write):
    path = write("lab.csv", "BlockId,Label\nblk_1,Anomaly\nblk_2,Normal\n")
    src = read_labels(path, "per-session-table")
    assert len(src.data) == 2
    assert src.label_for("blk_1") == 1 and src.label_for("blk_2") == 0


def test_session_table_duplicate_is_fatal(write):
    path = write("lab.csv", "BlockId,Label\nblk_1,Anomaly\nblk_1,Normal\n")
    with pytest.raises(IngestError):
        read_labels(path, "per-session-table")


def test_unknown_session_counts_missing(write):
    src = read_labels(write("lab.csv", "BlockId,Label\nblk_1,Normal\n"), "per-session-table")
    assert src.label_for("blk_9") == 0
    assert src.missing == 1


def test_line_prefix_labels(write):
    body = "".join(f"{tag} 1117838570 2005.06.03 R02 2005-06-03-15.42.50.675872 R02 RAS KERNEL INFO m\n"
                   for tag in ("-", "-", "KERNDTLB"))
    path = write("b.log", body)
    src = read_labels(path, "per-line-prefix")
    assert [src.label_for(i) for i in range(3)] == [0, 0, 1]
    assert line_labels(read_records(path, "bgl")).data == src.data


def test_line_prefix_labels_match_hand_count():
    # 50-line excerpt, counted by splitting on the first space directly
    with open(BGL_LOG, encoding="utf-8") as fh:
        head = [next(fh) for _ in range(50)]
    expected = [0 if line.split(" ", 1)[0] == "-" else 1 for line in head]
    src = line_labels(read_records(BGL_LOG, "bgl", limit=50))
    assert [src.label_for(i) for i in range(50)] == expected
    assert len(src.data) == 50


def test_hdfs_label_table_loads():
    src = read_labels(HDFS_LABELS, "per-session-table")
    assert set(src.data.values()) == {0, 1}
