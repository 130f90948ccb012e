"""Batch-level dynamic tokenization: pair counting, bounded merging,
merge-count solvers, uniform sampling and scoring-plan construction.

Merging never crosses a pre-token boundary, so the process bottoms out at
one token per word.  Merge rules live and die with their batch; the trace
they leave behind is for reporting, not a reusable tokenizer.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ._merge import run_merges
from .corpus import Batch, Token, TokenSequence
from .errors import DomainError, NoMergeablePair


@dataclass(frozen=True)
class MergeRule:
    left: str
    right: str

    def __post_init__(self):
        if not self.left or not self.right:
            raise ValueError("merge rule sides must be non-empty")

    @property
    def product(self) -> str:
        return self.left + self.right


@dataclass(frozen=True)
class MergeTrace:
    """Rules applied to a batch plus the total token count after 0..m merges."""

    rules: tuple[MergeRule, ...]
    lengths: tuple[int, ...]
    truncated: bool = False

    def __post_init__(self):
        if len(self.lengths) != len(self.rules) + 1:
            raise ValueError("trace needs exactly one length per state")
        if any(a < b for a, b in zip(self.lengths, self.lengths[1:])):
            raise ValueError("trace lengths must be non-increasing")

    def to_json_obj(self) -> dict:
        return {
            "rules": [[r.left, r.right] for r in self.rules],
            "lengths": list(self.lengths),
            "truncated": self.truncated,
        }


@dataclass(frozen=True)
class ScoringPlan:
    """Dynamically tokenized prefix followed by the untouched original suffix."""

    prefix_tokens: TokenSequence
    suffix_tokens: TokenSequence
    boundary_index: int

    def __post_init__(self):
        if self.boundary_index != len(self.prefix_tokens):
            raise ValueError("boundary_index must equal prefix length")


def _flatten(batch: Batch) -> tuple[list[int], list[int], list[str]]:
    """Encode a batch as id/start arrays with -1 sentinels between sequences."""
    texts: list[str] = []
    text_ids: dict[str, int] = {}
    ids: list[int] = []
    starts: list[int] = []
    for k, seq in enumerate(batch.sequences):
        if k:
            ids.append(-1)
            starts.append(1)
        for tok in seq.tokens:
            i = text_ids.setdefault(tok.text, len(texts))
            if i == len(texts):
                texts.append(tok.text)
            ids.append(i)
            starts.append(1 if tok.word_start else 0)
    return ids, starts, texts


def _unflatten(batch: Batch, ids: list[int], starts: list[int], texts: list[str]) -> Batch:
    if not batch.sequences:
        return batch
    segments: list[list[Token]] = [[]]
    for i, s in zip(ids, starts):
        if i == -1:
            segments.append([])
        else:
            segments[-1].append(Token(texts[i], bool(s)))
    if len(segments) != len(batch.sequences):  # pragma: no cover - kernel bug guard
        raise AssertionError("kernel dropped a sequence boundary")
    return Batch(
        tuple(
            TokenSequence(seq.sample_id, tuple(toks))
            for seq, toks in zip(batch.sequences, segments)
        )
    )


def compute_pair_freqs(batch: Batch) -> dict[tuple[str, str], int]:
    """Count adjacent intra-word token pairs over the whole batch.

    Position pairs (i, i+1) where token i+1 continues a word; overlapping
    occurrences all count.
    """
    freqs: dict[tuple[str, str], int] = {}
    for seq in batch.sequences:
        toks = seq.tokens
        for i in range(len(toks) - 1):
            if not toks[i + 1].word_start:
                pair = (toks[i].text, toks[i + 1].text)
                freqs[pair] = freqs.get(pair, 0) + 1
    return freqs


def most_frequent_pair(freqs: dict[tuple[str, str], int], batch: Batch) -> MergeRule:
    """Maximal-count pair; ties broken by earliest first occurrence in batch order."""
    if not freqs:
        raise NoMergeablePair("no adjacent intra-word pair in batch")
    best_count = max(freqs.values())
    for seq in batch.sequences:
        toks = seq.tokens
        for i in range(len(toks) - 1):
            if not toks[i + 1].word_start:
                pair = (toks[i].text, toks[i + 1].text)
                if freqs.get(pair) == best_count:
                    return MergeRule(*pair)
    raise NoMergeablePair("pair counts do not match batch")


def apply_dynamic_tokenization(batch: Batch, m: int) -> tuple[Batch, MergeTrace]:
    """Perform up to ``m`` best-pair merges on the batch.

    Each iteration recomputes frequencies from scratch, merges every
    qualifying occurrence of the best pair left-to-right (resuming after the
    new token), and records the resulting total length.  A merged token gets
    text left+right and inherits the left token's word_start.  ``m`` past
    convergence is truncated and flagged in the trace, not an error.
    """
    if m < 0:
        raise DomainError(f"merge count must be non-negative, got {m}")
    ids, starts, texts = _flatten(batch)
    ids, starts, raw_rules, lengths = run_merges(ids, starts, m, texts)
    rules = tuple(MergeRule(texts[left], texts[right]) for left, right, _ in raw_rules)
    trace = MergeTrace(rules, tuple(lengths), truncated=len(rules) < m)
    return _unflatten(batch, ids, starts, texts), trace


def compute_max_merges(batch: Batch) -> int:
    """Number of merges until no intra-word pair remains (word level)."""
    ids, starts, texts = _flatten(batch)
    _, _, rules, _ = run_merges(ids, starts, None, texts)
    return len(rules)


def reduction_percentage(len_init: int, len_m: int, len_word: int) -> float:
    """Sequence-length reduction relative to the word-level upper bound.

    100 * (len_init - len_m) / (len_init - len_word); by convention 100 when
    the batch is already at word level (len_init == len_word).
    """
    if not len_word <= len_m <= len_init:
        raise DomainError(
            f"expected len_word <= len_m <= len_init, got {len_word}, {len_m}, {len_init}"
        )
    if len_init == len_word:
        return 100.0
    return 100.0 * (len_init - len_m) / (len_init - len_word)


def merge_length_profile(batch: Batch) -> list[int]:
    """Total batch length after 0..m_max merges (one convergence run)."""
    ids, starts, texts = _flatten(batch)
    _, _, _, lengths = run_merges(ids, starts, None, texts)
    return list(lengths)


def solve_merges_for_reduction(batch: Batch, p: float) -> int:
    """Minimal m whose reduction percentage reaches ``p``.

    Lengths are non-increasing in m, so the reduction percentage is
    non-decreasing and the first m to reach the target is minimal.
    """
    if not 0 <= p <= 100:
        raise DomainError(f"target reduction must be in [0, 100], got {p}")
    lengths = merge_length_profile(batch)
    len_init, len_word = lengths[0], lengths[-1]
    for m, len_m in enumerate(lengths):
        if reduction_percentage(len_init, len_m, len_word) >= p:
            return m
    return len(lengths) - 1  # pragma: no cover - last entry is always 100%


def sample_merge_count(m_max: int, seed: int) -> int:
    """Uniform draw from {0, ..., m_max}; same seed, same draw."""
    if m_max < 0:
        raise DomainError(f"m_max must be non-negative, got {m_max}")
    return random.Random(seed).randint(0, m_max)


def build_scoring_plan(prefix: TokenSequence, suffix: TokenSequence, m: int) -> ScoringPlan:
    """Compress the prefix with ``m`` merges; keep the suffix tokenization as is."""
    compressed, _ = apply_dynamic_tokenization(Batch((prefix,)), m)
    new_prefix = compressed.sequences[0]
    return ScoringPlan(new_prefix, suffix, len(new_prefix))
