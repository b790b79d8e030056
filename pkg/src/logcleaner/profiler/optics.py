"""OPTICS ordering and xi-steep cluster extraction.

Follows Ankerst et al. (1999) with an unbounded neighbourhood radius. Core
distances count the point itself among its ``min_samples`` neighbours. The
xi extraction includes the predecessor correction of Schubert & Gertz
(2018), so results line up with scikit-learn's ``cluster_method="xi"``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class OpticsResult:
    ordering: np.ndarray
    reachability: np.ndarray  # indexed by point, inf for the first of each component
    core_distances: np.ndarray
    predecessor: np.ndarray  # -1 where undefined
    labels: np.ndarray  # cluster id per point, -1 = noise
    clusters: list[tuple[int, int]]  # (start, end) positions in the ordering


def cosine_distances(X) -> np.ndarray:
    """Pairwise cosine distance; all-zero rows are at distance 1 from everything else."""
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    U = X / safe[:, None]
    D = 1.0 - U @ U.T
    zero = norms == 0
    D[zero, :] = 1.0
    D[:, zero] = 1.0
    # 12 decimals: exact duplicates must land on exactly 0
    # adding 0.0 turns -0.0 into +0.0; a signed zero would flip inf/0 to -inf
    # in the xi steepness ratio and hide the first cluster of the ordering
    D = np.clip(np.round(D, 12), 0.0, 2.0) + 0.0
    np.fill_diagonal(D, 0.0)
    return D


def optics_order(D, min_samples: int):
    """Return (ordering, reachability, core_distances, predecessor) for distance matrix D."""
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if n >= min_samples:
        core = np.sort(D, axis=1)[:, min_samples - 1]
    else:
        core = np.full(n, np.inf)
    reach = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    processed = np.zeros(n, dtype=bool)
    ordering = np.empty(n, dtype=np.int64)
    for pos in range(n):
        candidates = np.flatnonzero(~processed)
        # smallest reachability first, lowest index on ties (inf included)
        point = candidates[np.argmin(reach[candidates])]
        processed[point] = True
        ordering[pos] = point
        if np.isinf(core[point]):
            continue
        unproc = np.flatnonzero(~processed)
        rd = np.maximum(D[point, unproc], core[point])
        better = rd < reach[unproc]
        reach[unproc[better]] = rd[better]
        pred[unproc[better]] = point
    return ordering, reach, core, pred


def _extend_region(steep, opposite, start, min_samples):
    n = len(steep)
    non_steep = 0
    index = start
    end = start
    while index < n:
        if steep[index]:
            non_steep = 0
            end = index
        elif not opposite[index]:
            # flat or same-direction but not steep
            non_steep += 1
            if non_steep > min_samples:
                break
        else:
            return end
        index += 1
    return end


def _filter_sdas(sdas, mib, xi_c, plot):
    if np.isinf(mib):
        return []
    kept = [d for d in sdas if mib <= plot[d["start"]] * xi_c]
    for d in kept:
        d["mib"] = max(d["mib"], mib)
    return kept


def _correct_predecessor(plot, pred_plot, ordering, s, e):
    while s < e:
        if plot[s] > plot[e]:
            return s, e
        p_e = pred_plot[e]
        for i in range(s, e):
            if p_e == ordering[i]:
                return s, e
        e -= 1
    return None, None


def xi_clusters(reachability, predecessor, ordering, xi: float, min_samples: int,
                min_cluster_size: int | None = None) -> list[tuple[int, int]]:
    """Steep-area cluster detection on the reachability plot.

    Returns (start, end) index pairs into *ordering*, smaller nested clusters
    before the clusters that contain them.
    """
    if min_cluster_size is None:
        min_cluster_size = min_samples
    plot = np.hstack((reachability[ordering], np.inf))
    pred_plot = predecessor[ordering]
    xi_c = 1.0 - xi
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = plot[:-1] / plot[1:]
        steep_up = ratio <= xi_c
        steep_down = ratio >= 1.0 / xi_c
        down = ratio > 1
        up = ratio < 1
    sdas: list[dict] = []
    clusters: list[tuple[int, int]] = []
    index = 0
    mib = 0.0
    for steep_index in np.flatnonzero(steep_up | steep_down):
        if steep_index < index:
            continue
        mib = max(mib, np.max(plot[index: steep_index + 1]))
        if steep_down[steep_index]:
            sdas = _filter_sdas(sdas, mib, xi_c, plot)
            d_start = int(steep_index)
            d_end = _extend_region(steep_down, up, d_start, min_samples)
            sdas.append({"start": d_start, "end": d_end, "mib": 0.0})
            index = d_end + 1
            mib = plot[index]
        else:
            sdas = _filter_sdas(sdas, mib, xi_c, plot)
            u_start = int(steep_index)
            u_end = _extend_region(steep_up, down, u_start, min_samples)
            index = u_end + 1
            mib = plot[index]
            found = []
            for d in sdas:
                c_start, c_end = d["start"], u_end
                if plot[c_end + 1] * xi_c < d["mib"]:
                    continue
                d_max = plot[d["start"]]
                if d_max * xi_c >= plot[c_end + 1]:
                    while plot[c_start + 1] > plot[c_end + 1] and c_start < d["end"]:
                        c_start += 1
                elif plot[c_end + 1] * xi_c >= d_max:
                    while plot[c_end - 1] > d_max and c_end > u_start:
                        c_end -= 1
                c_start, c_end = _correct_predecessor(plot, pred_plot, ordering, c_start, c_end)
                if c_start is None:
                    continue
                if c_end - c_start + 1 < min_cluster_size:
                    continue
                if c_start > d["end"] or c_end < u_start:
                    continue
                found.append((int(c_start), int(c_end)))
            found.reverse()
            clusters.extend(found)
    return clusters


def xi_labels(ordering, clusters) -> np.ndarray:
    """Flat labels: innermost clusters first, a cluster overlapping a labeled one is skipped."""
    labels = np.full(len(ordering), -1, dtype=np.int64)
    label = 0
    for start, end in clusters:
        if not np.any(labels[start: end + 1] != -1):
            labels[start: end + 1] = label
            label += 1
    out = np.empty_like(labels)
    out[ordering] = labels
    return out


def optics(D, min_samples: int = 2, xi: float = 0.05) -> OpticsResult:
    """Run OPTICS on a precomputed distance matrix and extract xi clusters."""
    if min_samples < 2:
        raise ValueError("min_samples must be >= 2")
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if n == 0:
        empty = np.empty(0, dtype=np.int64)
        return OpticsResult(empty, np.empty(0), np.empty(0), empty, empty, [])
    ordering, reach, core, pred = optics_order(D, min_samples)
    clusters = xi_clusters(reach, pred, ordering, xi, min_samples) if n >= min_samples else []
    return OpticsResult(ordering, reach, core, pred, xi_labels(ordering, clusters), clusters)
