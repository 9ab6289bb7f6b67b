"""Compiled inner loops. All of them release the GIL so that worker threads
computing gains for different attributes or nodes run in parallel."""

import math

import numpy as np
from numba import njit

# Gains within this distance of the maximum count as ties.
TIE_EPS = 1e-10

_jit = njit(nogil=True, cache=True)


@_jit
def info(freq, total):
    if total <= 0.0:
        return 0.0
    s = 0.0
    for f in freq:
        if f > 0.0:
            p = f / total
            s -= p * math.log2(p)
    return s


@_jit
def class_freq(case_ids, weights, classes, n_classes):
    freq = np.zeros(n_classes)
    for k in range(len(case_ids)):
        freq[classes[case_ids[k]]] += weights[k]
    return freq


@_jit
def discrete_gain(case_ids, weights, column, classes, n_values, n_classes):
    table = np.zeros((n_values, n_classes))
    for k in range(len(case_ids)):
        v = column[case_ids[k]]
        if v >= 0:
            table[v, classes[case_ids[k]]] += weights[k]
    known = np.zeros(n_classes)
    for v in range(n_values):
        for c in range(n_classes):
            known[c] += table[v, c]
    w_known = known.sum()
    if w_known <= 0.0:
        return 0.0
    split_info = 0.0
    for v in range(n_values):
        w_v = table[v].sum()
        if w_v > 0.0:
            split_info += (w_v / w_known) * info(table[v], w_v)
    return info(known, w_known) - split_info


_POS_MASK = (1 << 32) - 1


@_jit
def gather_keys(case_ids, weights, column, classes):
    """Known-valued cases as ``rank << 32 | position`` keys plus their class and weight.

    Keys are unique, so any sort puts them in the same order: by rank, then
    by position (a stable sort by rank).
    """
    n = len(case_ids)
    keys = np.empty(n, dtype=np.int64)
    cls = np.empty(n, dtype=np.int32)
    w = np.empty(n)
    m = 0
    for k in range(n):
        r = column[case_ids[k]]
        if r >= 0:
            keys[m] = (np.int64(r) << 32) | m
            cls[m] = classes[case_ids[k]]
            w[m] = weights[k]
            m += 1
    return keys[:m], cls[:m], w[:m]


@_jit
def counting_sort_keys(keys):
    m = len(keys)
    out = np.empty(m, dtype=np.int64)
    if m == 0:
        return out
    lo = keys.min() >> 32
    hi = keys.max() >> 32
    counts = np.zeros(hi - lo + 2, dtype=np.int64)
    for key in keys:
        counts[(key >> 32) - lo + 1] += 1
    for i in range(1, len(counts)):
        counts[i] += counts[i - 1]
    for key in keys:
        slot = (key >> 32) - lo
        out[counts[slot]] = key
        counts[slot] += 1
    return out


@_jit
def best_threshold(sorted_keys, cls, w, n_classes, table, boundary):
    """Sweep the sorted keys and return ``(gain, local_threshold)`` of the best midpoint.

    The threshold is NaN when fewer than two distinct values are present.
    With ``boundary`` set, candidates lying between two value groups that
    are pure in the same class are skipped.
    """
    m = len(sorted_keys)
    if m < 2:
        return 0.0, np.nan
    # value groups in ascending order: end position and pure class (-1 = mixed)
    group_end = np.empty(m, dtype=np.int64)
    group_class = np.empty(m, dtype=np.int32)
    group_rank = np.empty(m, dtype=np.int64)
    total = np.zeros(n_classes)
    n_groups = 0
    prev = -1
    for i in range(m):
        rank = sorted_keys[i] >> 32
        k = sorted_keys[i] & _POS_MASK
        total[cls[k]] += w[k]
        if rank != prev:
            group_class[n_groups] = cls[k]
            group_rank[n_groups] = rank
            n_groups += 1
            prev = rank
        elif group_class[n_groups - 1] != cls[k]:
            group_class[n_groups - 1] = -1
        group_end[n_groups - 1] = i + 1
    if n_groups < 2:
        return 0.0, np.nan

    w_total = total.sum()
    base = info(total, w_total)
    gains = np.full(n_groups - 1, -np.inf)
    left = np.zeros(n_classes)
    right = np.empty(n_classes)
    i = 0
    for g in range(n_groups - 1):
        while i < group_end[g]:
            k = sorted_keys[i] & _POS_MASK
            left[cls[k]] += w[k]
            i += 1
        if boundary and group_class[g] >= 0 and group_class[g] == group_class[g + 1]:
            continue
        w_left = left.sum()
        for c in range(n_classes):
            right[c] = total[c] - left[c]
        w_right = right.sum()
        gains[g] = base - (w_left / w_total) * info(left, w_left) - (w_right / w_total) * info(right, w_right)

    best_gain = gains.max()
    if best_gain == -np.inf:
        # a single class throughout: every midpoint has zero gain
        return 0.0, (table[group_rank[0]] + table[group_rank[1]]) / 2.0
    for g in range(n_groups - 1):
        if gains[g] >= best_gain - TIE_EPS:
            return gains[g], (table[group_rank[g]] + table[group_rank[g + 1]]) / 2.0
    return 0.0, np.nan
