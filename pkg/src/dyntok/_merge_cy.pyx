# cython: boundscheck=False, wraparound=False, initializedcheck=False
# distutils: language = c++
"""Compiled merge kernel; mirrors _merge_py exactly, just faster.

Count and apply passes run as typed C loops with C++ hash maps for the
pair statistics; only the once-per-iteration text handling touches Python
objects.  Selection is by (count desc, first occurrence asc), the same
order the pure kernel gets from dict insertion order.
"""

import numpy as np

cimport numpy as cnp
from cython.operator cimport dereference as deref, preincrement as inc
from libcpp.unordered_map cimport unordered_map

KERNEL_NAME = "cython"


def run_merges(ids, starts, max_steps, texts):
    """See dyntok._merge_py.run_merges; identical contract and output."""
    cdef cnp.int64_t[::1] cids = np.asarray(ids, dtype=np.int64)
    cdef cnp.int64_t[::1] cstarts = np.asarray(starts, dtype=np.int64)
    cdef Py_ssize_t n = cids.shape[0]
    cdef Py_ssize_t i, w
    cdef long long key, left, right, merged_id
    cdef long long n_tokens = 0
    cdef long long merged, c
    cdef long long best_key, best_count, best_first, f
    cdef long long limit = -1 if max_steps is None else max_steps
    cdef long long steps = 0
    cdef unordered_map[long long, long long] counts
    cdef unordered_map[long long, long long] first_pos
    cdef unordered_map[long long, long long].iterator it

    for i in range(n):
        if cids[i] != -1:
            n_tokens += 1

    text_ids = {t: j for j, t in enumerate(texts)}
    rules = []
    lengths = [n_tokens]

    while limit < 0 or steps < limit:
        counts.clear()
        first_pos.clear()
        for i in range(n - 1):
            if cstarts[i + 1] == 0:
                key = (cids[i] << 32) | cids[i + 1]
                c = counts[key]  # default-constructs 0 on first touch
                counts[key] = c + 1
                if c == 0:
                    first_pos[key] = i
        if counts.empty():
            break
        best_key = -1
        best_count = 0
        best_first = 0
        it = counts.begin()
        while it != counts.end():
            key = deref(it).first
            c = deref(it).second
            f = first_pos[key]
            if c > best_count or (c == best_count and f < best_first):
                best_key = key
                best_count = c
                best_first = f
            inc(it)
        left = best_key >> 32
        right = best_key & 0xFFFFFFFF

        merged_text = texts[left] + texts[right]
        cached = text_ids.get(merged_text)
        if cached is None:
            merged_id = len(texts)
            texts.append(merged_text)
            text_ids[merged_text] = merged_id
        else:
            merged_id = cached

        w = 0
        i = 0
        merged = 0
        while i < n:
            if (
                i + 1 < n
                and cids[i] == left
                and cids[i + 1] == right
                and cstarts[i + 1] == 0
            ):
                cids[w] = merged_id
                cstarts[w] = cstarts[i]
                w += 1
                i += 2
                merged += 1
            else:
                cids[w] = cids[i]
                cstarts[w] = cstarts[i]
                w += 1
                i += 1
        n = w
        n_tokens -= merged
        rules.append((int(left), int(right), int(merged_id)))
        lengths.append(int(n_tokens))
        steps += 1

    out_ids = [int(cids[i]) for i in range(n)]
    out_starts = [int(cstarts[i]) for i in range(n)]
    return out_ids, out_starts, rules, lengths
