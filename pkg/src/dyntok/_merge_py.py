"""Pure-Python merge kernel; fallback when the compiled one is unavailable.

Operates on a flattened batch: token ids with ``-1`` sentinels between
sequences and a parallel 0/1 word-start array (1 at sentinels).  Ids are
keyed by token text: a merge producing a text that already has an id reuses
it, so equal-text tokens always count as the same token.  Both kernels must
produce identical output for identical input.
"""

from __future__ import annotations

KERNEL_NAME = "python"


def run_merges(ids, starts, max_steps, texts):
    """Iteratively merge the most frequent adjacent intra-word pair.

    Each iteration recounts every adjacent position whose right token does
    not start a word, picks the pair with the highest count (ties: earliest
    first occurrence in batch order) and replaces its occurrences
    left-to-right, resuming after each replacement.  Runs until ``max_steps``
    merges are done or no pair is left (``max_steps=None`` means
    run-to-convergence).  ``texts`` maps id to token text and is extended in
    place when a merge creates a new text.

    Returns ``(ids, starts, rules, lengths)`` with rules as
    ``(left_id, right_id, merged_id)`` triples and one length entry per
    state (sentinels excluded), i.e. ``len(rules) + 1`` entries.
    """
    ids = list(ids)
    starts = list(starts)
    text_ids = {t: i for i, t in enumerate(texts)}
    n = len(ids)
    n_tokens = sum(1 for i in ids if i != -1)
    rules: list[tuple[int, int, int]] = []
    lengths = [n_tokens]

    steps = 0
    while max_steps is None or steps < max_steps:
        # Count pass.  Dict insertion order is first-occurrence order, so on
        # equal counts the first-seen pair wins without extra bookkeeping.
        counts: dict[int, int] = {}
        for i in range(n - 1):
            if starts[i + 1] == 0:
                key = (ids[i] << 32) | ids[i + 1]
                counts[key] = counts.get(key, 0) + 1
        if not counts:
            break
        best_key = -1
        best_count = 0
        for key, c in counts.items():
            if c > best_count:
                best_count = c
                best_key = key
        left = best_key >> 32
        right = best_key & 0xFFFFFFFF

        merged_text = texts[left] + texts[right]
        merged_id = text_ids.get(merged_text, -1)
        if merged_id < 0:
            merged_id = len(texts)
            texts.append(merged_text)
            text_ids[merged_text] = merged_id

        # Apply pass: left-to-right, non-overlapping, compact in place.
        w = 0
        i = 0
        merged = 0
        while i < n:
            if (
                i + 1 < n
                and ids[i] == left
                and ids[i + 1] == right
                and starts[i + 1] == 0
            ):
                ids[w] = merged_id
                starts[w] = starts[i]
                w += 1
                i += 2
                merged += 1
            else:
                ids[w] = ids[i]
                starts[w] = starts[i]
                w += 1
                i += 1
        del ids[w:]
        del starts[w:]
        n = w
        n_tokens -= merged
        rules.append((left, right, merged_id))
        lengths.append(n_tokens)
        steps += 1

    return ids, starts, rules, lengths
