"""Benchmark the compiled merge kernel against the pure-Python fallback.

Generates synthetic token-stream batches with a Zipf-like token
distribution, runs the merge loop to convergence with both kernels on
identical inputs, checks the outputs agree, and prints throughput.

Usage: python benchmarks/bench_merge.py [--sequences N] [--tokens N] [--repeats N]
"""

from __future__ import annotations

import argparse
import random
import time

from dyntok import _merge_py
from dyntok.corpus import Batch, Token, TokenSequence
from dyntok.merger import _flatten

try:
    from dyntok import _merge_cy
except ImportError:
    _merge_cy = None


def synthetic_batch(n_sequences: int, n_tokens: int, seed: int) -> Batch:
    rng = random.Random(seed)
    # Zipf-ish pool: low ranks occur much more often, like subword streams
    pool = [f"t{i}" for i in range(200)]
    weights = [1.0 / (i + 1) for i in range(len(pool))]
    sequences = []
    for s in range(n_sequences):
        tokens = []
        remaining = n_tokens
        while remaining > 0:
            word_len = min(rng.randint(1, 6), remaining)
            for j in range(word_len):
                text = rng.choices(pool, weights)[0]
                tokens.append(Token(text, word_start=(j == 0)))
            remaining -= word_len
        sequences.append(TokenSequence(f"s{s}", tuple(tokens)))
    return Batch(tuple(sequences))


def bench(kernel, ids, starts, texts, repeats: int) -> tuple[float, int]:
    best = float("inf")
    merges = 0
    for _ in range(repeats):
        t0 = time.perf_counter()
        _, _, rules, _ = kernel.run_merges(list(ids), list(starts), None, list(texts))
        best = min(best, time.perf_counter() - t0)
        merges = len(rules)
    return best, merges


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sequences", type=int, default=64)
    parser.add_argument("--tokens", type=int, default=512, help="tokens per sequence")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    batch = synthetic_batch(args.sequences, args.tokens, args.seed)
    ids, starts, texts = _flatten(batch)
    total = batch.total_tokens()
    print(f"batch: {len(batch)} sequences, {total} tokens, convergence run x{args.repeats}")

    py_time, py_merges = bench(_merge_py, ids, starts, texts, args.repeats)
    print(f"python kernel: {py_time:.3f}s  ({total / py_time:,.0f} tokens/s, {py_merges} merges)")

    if _merge_cy is None:
        print("cython kernel: not built (pip install -e . with a compiler)")
        return
    cy_time, cy_merges = bench(_merge_cy, ids, starts, texts, args.repeats)
    print(f"cython kernel: {cy_time:.3f}s  ({total / cy_time:,.0f} tokens/s, {cy_merges} merges)")

    if cy_merges != py_merges:
        raise SystemExit("kernel outputs disagree; run the parity tests")
    print(f"speedup: {py_time / cy_time:.1f}x")


if __name__ == "__main__":
    main()
