"""Synthetic corpora with known ground truth.

Used to build the bundled fixtures and as generator oracles in the test
suite: every function documents exactly what it plants.
"""

from __future__ import annotations

import csv

import numpy as np

from .grouping import EventGroup, LabeledDataset


def _ip(rng) -> str:
    return f"10.{rng.integers(250, 252)}.{rng.integers(1, 255)}.{rng.integers(1, 255)}"


def _blk(rng) -> str:
    sign = "-" if rng.random() < 0.5 else ""
    return f"blk_{sign}{rng.integers(10**17, 10**19 - 1, dtype=np.uint64)}"


# -- raw-text corpora ------------------------------------------------------

FIVE_TEMPLATES = (
    "Receiving block {blk} src: /{ip}:{port} dest: /{ip2}:50010",
    "PacketResponder {n} for block {blk} terminating",
    "Received block {blk} of size {size} from /{ip}",
    "Verification succeeded for {blk}",
    "Deleting block {blk} file /mnt/hadoop/dfs/data/current/subdir{n}/{blk}",
)

FIVE_TEMPLATE_TEXTS = (
    "Receiving block [*] src: [*] dest: [*]",
    "PacketResponder [*] for block [*] terminating",
    "Received block [*] of size [*] from [*]",
    "Verification succeeded for [*]",
    "Deleting block [*] file [*]",
)


def five_template_corpus(n_per_template: int = 40, seed: int = 0) -> tuple[list[str], list[int]]:
    """Shuffled messages from FIVE_TEMPLATES; returns (lines, template index per line)."""
    rng = np.random.default_rng(seed)
    which = np.repeat(np.arange(len(FIVE_TEMPLATES)), n_per_template)
    rng.shuffle(which)
    lines = []
    for t in which:
        lines.append(FIVE_TEMPLATES[t].format(
            blk=_blk(rng), ip=_ip(rng), ip2=_ip(rng), port=rng.integers(30000, 60000),
            n=rng.integers(0, 64), size=rng.integers(1, 67108865)))
    return lines, which.tolist()


def _hdfs_block(rng, blk, seq, anomalous):
    path = f"/user/root/rand/_temporary/_task_200811092030_0001_m_{seq:06d}_0/part-{seq:05d}."
    nodes = [_ip(rng) for _ in range(3)]
    msgs = [("dfs.FSNamesystem", f"BLOCK* NameSystem.allocateBlock: {path} {blk}")]
    for node in nodes:
        msgs.append(("dfs.DataNode$DataXceiver",
                     f"Receiving block {blk} src: /{node}:{rng.integers(30000, 60000)} dest: /{node}:50010"))
    if anomalous:
        if rng.random() < 0.6:
            msgs.append(("dfs.DataNode$DataXceiver",
                         f"Exception in receiveBlock for block {blk} java.io.IOException: Connection reset by peer"))
            msgs.append(("dfs.DataNode$DataXceiver",
                         f"writeBlock {blk} received exception java.io.IOException: Connection reset by peer"))
        else:
            msgs.append(("dfs.DataNode$PacketResponder",
                         f"PacketResponder {blk} 1 Exception java.io.InterruptedIOException: "
                         f"Interruped while waiting for IO on channel java.nio.channels.SocketChannel"))
            msgs.append(("dfs.DataNode$DataXceiver",
                         f"Exception in receiveBlock for block {blk} java.io.IOException: Connection reset by peer"))
    for i in range(2 if anomalous else 3):
        msgs.append(("dfs.DataNode$PacketResponder", f"PacketResponder {i} for block {blk} terminating"))
        msgs.append(("dfs.DataNode$PacketResponder", f"Received block {blk} of size 67108864 from /{nodes[i]}"))
        msgs.append(("dfs.FSNamesystem",
                     f"BLOCK* NameSystem.addStoredBlock: blockMap updated: {nodes[i]}:50010 is added to {blk} size 67108864"))
    for _ in range(int(rng.integers(1, 3)) if rng.random() < 0.5 else 0):
        msgs.append(("dfs.DataNode$DataXceiver", f"{nodes[0]}:50010 Served block {blk} to /{_ip(rng)}"))
    if rng.random() < 0.3:
        msgs.append(("dfs.DataBlockScanner", f"Verification succeeded for {blk}"))
    if rng.random() < 0.5:
        msgs.append(("dfs.FSNamesystem", f"BLOCK* NameSystem.delete: {blk} is added to invalidSet of {nodes[0]}:50010"))
        msgs.append(("dfs.FSNamesystem", f"BLOCK* ask {nodes[0]}:50010 to delete {blk}"))
        msgs.append(("dfs.FSDataset",
                     f"Deleting block {blk} file /mnt/hadoop/dfs/data/current/subdir{rng.integers(0, 64)}/{blk}"))
    return msgs, nodes


def hdfs_fixture(n_lines: int = 1000, anomaly_rate: float = 0.25, seed: int = 7):
    """HDFS-style session log with per-block labels, exactly *n_lines* long.

    Every block is written (allocate, 3x receiving, 3x responder, 3x received,
    3x stored). About half the blocks are later deleted (three deletion
    messages that always appear together); some are served or verified at
    random, independent of the label. Anomalous blocks carry exception
    messages and lose one replica. Only whole blocks are emitted; the last
    few lines are padding "Served block" messages on random blocks.
    Returns (lines, {block_id: "Anomaly"|"Normal"}).
    """
    rng = np.random.default_rng(seed)
    blocks = []
    total = 0
    while True:
        blk = _blk(rng)
        anomalous = bool(rng.random() < anomaly_rate)
        msgs, nodes = _hdfs_block(rng, blk, len(blocks), anomalous)
        if total + len(msgs) > n_lines:
            break
        blocks.append([blk, anomalous, msgs, nodes])
        total += len(msgs)
    while total < n_lines:
        blk, _, msgs, nodes = blocks[int(rng.integers(len(blocks)))]
        msgs.append(("dfs.DataNode$DataXceiver", f"{nodes[0]}:50010 Served block {blk} to /{_ip(rng)}"))
        total += 1
    timed = []
    t = 0.0
    for blk, _, msgs, _ in blocks:
        when = t
        for comp, msg in msgs:
            when += float(rng.exponential(2.0))
            timed.append((when, len(timed), comp, msg, int(rng.integers(13, 40000))))
        t += float(rng.exponential(6.0))
    timed.sort()
    lines = []
    for when, _, comp, msg, pid in timed:
        sec = int(when)
        stamp = f"081109 {20 + sec // 3600 % 4:02d}{sec // 60 % 60:02d}{sec % 60:02d}"
        lines.append(f"{stamp} {pid} INFO {comp}: {msg}")
    labels = {blk: "Anomaly" if anomalous else "Normal" for blk, anomalous, _, _ in blocks}
    return lines, labels


_BGL_NORMAL = (
    ("KERNEL", "INFO", "instruction cache parity error corrected"),
    ("KERNEL", "INFO", "generating core.{n}"),
    ("KERNEL", "INFO", "CE sym {n}, at 0x{hex}, mask 0x{mask}"),
    ("APP", "INFO", "ciod: generated {n} core files for program /bgl/apps/run{n}"),
    ("KERNEL", "INFO", "total of {n} ddr error(s) detected and corrected"),
)
_BGL_ANOMALY = (
    ("KERNDTLB", "KERNEL", "FATAL", "data TLB error interrupt"),
    ("KERNSTOR", "KERNEL", "FATAL", "data storage interrupt"),
    ("APPREAD", "APP", "FATAL", "ciod: failed to read message prefix on control stream (CioStream socket to 172.16.96.{n}:{port}"),
)


def bgl_fixture(n_lines: int = 1000, anomaly_rate: float = 0.03, seed: int = 11) -> list[str]:
    """BGL-style lines with alert tags ("-" for normal lines)."""
    rng = np.random.default_rng(seed)
    lines = []
    ts = 1117838570
    for _ in range(n_lines):
        ts += int(rng.integers(0, 5))
        node = f"R{rng.integers(0, 80):02d}-M{rng.integers(0, 2)}-N{rng.integers(0, 16)}-C:J{rng.integers(2, 18):02d}-U{rng.integers(0, 2)}1"
        when = f"2005-06-03-15.42.{rng.integers(0, 60):02d}.{rng.integers(0, 999999):06d}"
        fill = dict(n=rng.integers(1, 4000), hex=f"{rng.integers(0, 2**32):08x}",
                    mask=f"{rng.integers(0, 256):02x}", port=rng.integers(30000, 60000))
        if rng.random() < anomaly_rate:
            tag, comp, level, msg = _BGL_ANOMALY[rng.integers(len(_BGL_ANOMALY))]
        else:
            tag = "-"
            comp, level, msg = _BGL_NORMAL[rng.integers(len(_BGL_NORMAL))]
        lines.append(f"{tag} {ts} 2005.06.03 {node} {when} {node} RAS {comp} {level} {msg.format(**fill)}")
    return lines


def write_hdfs_fixture(log_path, label_path, **kwargs) -> None:
    lines, labels = hdfs_fixture(**kwargs)
    with open(log_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(line + "\n" for line in lines)
    with open(label_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["BlockId", "Label"])
        for blk, lab in labels.items():
            w.writerow([blk, lab])


def write_bgl_fixture(log_path, **kwargs) -> None:
    with open(log_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(line + "\n" for line in bgl_fixture(**kwargs))


# -- labeled datasets ------------------------------------------------------

def dataset_from_presence(presence, labels, split_point=None, counts=None) -> LabeledDataset:
    """Build a dataset from a (groups x events) presence or count matrix; events E0..En-1."""
    mat = np.asarray(counts if counts is not None else presence, dtype=np.int64)
    ids = [f"E{j}" for j in range(mat.shape[1])]
    groups = []
    for r, row in enumerate(mat):
        evs = tuple(ids[j] for j in range(mat.shape[1]) for _ in range(int(row[j])))
        groups.append(EventGroup(str(r), evs, int(labels[r])))
    return LabeledDataset(groups, ids, split_point)


def planted_noise_dataset(n_groups: int = 200, n_informative: int = 2, n_noise: int = 3,
                          anomaly_rate: float = 0.3, flip: float = 0.0, seed: int = 0):
    """Informative events mark anomalies; noise events are label-independent coin flips.

    Informative event j appears in an anomalous group with probability 0.9
    and in a normal one with probability *flip*. Returns (dataset,
    informative ids, noise ids).
    """
    rng = np.random.default_rng(seed)
    labels = (rng.random(n_groups) < anomaly_rate).astype(int)
    labels[:2] = [0, 1]
    cols = []
    for _ in range(n_informative):
        p = np.where(labels == 1, 0.9, flip)
        cols.append((rng.random(n_groups) < p).astype(int) * rng.integers(1, 3, n_groups))
    for _ in range(n_noise):
        cols.append((rng.random(n_groups) < 0.5).astype(int) * rng.integers(1, 4, n_groups))
    ds = dataset_from_presence(None, labels, counts=np.column_stack(cols))
    ids = list(ds.event_ids)
    return ds, ids[:n_informative], ids[n_informative:]


def perfect_marker_dataset(n_groups: int = 200, n_other: int = 5, anomaly_rate: float = 0.25, seed: int = 0):
    """Event E0 is present exactly in the anomalous groups; the rest is noise."""
    rng = np.random.default_rng(seed)
    labels = (rng.random(n_groups) < anomaly_rate).astype(int)
    labels[:2] = [0, 1]
    cols = [labels.copy()]
    for _ in range(n_other):
        cols.append((rng.random(n_groups) < 0.5).astype(int))
    return dataset_from_presence(np.column_stack(cols), labels)


def duplicate_pairs_dataset(k_pairs: int, n_independent: int = 4, n_groups: int = 300, seed: int = 0):
    """k pairs of events with identical presence, plus independent events.

    Pair members share one random presence column. Independent events each
    occupy their own exclusive groups, so they co-occur with nothing.
    Returns (dataset, [(a, b), ...] pairs, independent ids).
    """
    rng = np.random.default_rng(seed)
    n_excl = 8
    total_groups = n_groups + n_independent * n_excl
    labels = (rng.random(total_groups) < 0.3).astype(int)
    cols = []
    for _ in range(k_pairs):
        col = np.zeros(total_groups, dtype=int)
        col[:n_groups] = rng.random(n_groups) < rng.uniform(0.2, 0.7)
        cols.extend([col, col.copy()])
    for i in range(n_independent):
        col = np.zeros(total_groups, dtype=int)
        col[n_groups + i * n_excl: n_groups + (i + 1) * n_excl] = 1
        cols.append(col)
    ds = dataset_from_presence(np.column_stack(cols), labels)
    ids = list(ds.event_ids)
    pairs = [(ids[2 * p], ids[2 * p + 1]) for p in range(k_pairs)]
    return ds, pairs, ids[2 * k_pairs:]


def profiling_plants(n_groups: int = 400, seed: int = 0):
    """Dataset with planted sporadic, anti and duplicative events.

    E0: informative, present in most anomalous groups.
    E1: informative with support disjoint from E0 (the anomalous groups E0
        misses, plus a fifth of the normal groups without E0).
    E2: exact presence copy of E0 (same MI, so the lower ordinal E0 is kept).
    E3: present in every group (MI = 0, anti).
    E4: sporadic, present in 3% of groups.
    Returns (dataset, expected removed-reason map).
    """
    rng = np.random.default_rng(seed)
    labels = (rng.random(n_groups) < 0.3).astype(int)
    e0 = np.where(labels == 1, rng.random(n_groups) < 0.9, rng.random(n_groups) < 0.1).astype(int)
    e1 = ((e0 == 0) & ((labels == 1) | (rng.random(n_groups) < 0.2))).astype(int)
    e2 = e0.copy()
    e3 = np.ones(n_groups, dtype=int)
    e4 = np.zeros(n_groups, dtype=int)
    e4[rng.choice(n_groups, int(0.03 * n_groups), replace=False)] = 1
    counts = np.column_stack([e0 * 2, e1, e2 * 3, e3 * 4, e4])
    ds = dataset_from_presence(None, labels, counts=counts)
    return ds, {"E2": "dup:E0", "E3": "anti", "E4": "sporadic"}


def random_event_stream(rng, n_lines: int, vocabulary: list[str], novel_rate: float = 0.1) -> list[str]:
    """Random messages drawn from *vocabulary* plus novel (unmatchable) lines."""
    out = []
    for _ in range(n_lines):
        if rng.random() < novel_rate:
            out.append(f"novel message {rng.integers(0, 10**6)} zz{rng.integers(0, 9)}")
        else:
            out.append(vocabulary[rng.integers(len(vocabulary))])
    return out
