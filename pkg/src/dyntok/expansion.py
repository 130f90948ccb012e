"""Vocabulary expansion: BPE training, merge-table concatenation and
longest-prefix tokenization over large vocabularies.

Concatenating two independently trained merge tables leaves some declared
tokens unreachable by merge application; longest-prefix tokenization over
the combined token set sidesteps that, emitting the longest vocabulary
token that prefixes the remaining text.  Tokens continuing a word carry no
marker glyph: the word_start flag alone encodes the boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Token, TokenSequence, Vocabulary, base_tokenize, pre_tokenize, _iter_pre_tokens_with_offsets
from .errors import DomainError, EmptyCorpus, UncoveredCharacter


@dataclass(frozen=True)
class BpeModel:
    """Character alphabet plus an ordered merge table; tokens are derived."""

    alphabet: tuple[str, ...]
    merges: tuple[tuple[str, str], ...]
    tokens: tuple[str, ...] = field(init=False, compare=False)
    _token_set: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "merges", tuple((l, r) for l, r in self.merges))
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet contains duplicates")
        for ch in self.alphabet:
            if len(ch) != 1:
                raise ValueError(f"alphabet entries must be single characters, got {ch!r}")
        tokens: list[str] = list(self.alphabet)
        known = set(tokens)
        for l, r in self.merges:
            if l not in known or r not in known:
                raise ValueError(f"merge ({l!r}, {r!r}) uses a symbol not yet producible")
            product = l + r
            if product not in known:
                tokens.append(product)
                known.add(product)
        object.__setattr__(self, "tokens", tuple(tokens))
        object.__setattr__(self, "_token_set", frozenset(known))

    def __contains__(self, token: str) -> bool:
        return token in self._token_set


def train_bpe(corpus: Iterable[str], target_size: int, min_pair_freq: int = 2) -> BpeModel:
    """Train a BPE model over pre-tokenized words.

    Pair frequencies are counted per unique word weighted by word count, all
    adjacent positions counting (overlaps included).  The most frequent pair
    is merged until the vocabulary reaches ``target_size`` or no pair reaches
    ``min_pair_freq``; ties break by earliest first occurrence in corpus
    order, the same rule the batch-level merger uses.
    """
    word_counts: dict[str, int] = {}
    for text in corpus:
        for word in pre_tokenize(text):
            word_counts[word] = word_counts.get(word, 0) + 1
    if not word_counts:
        raise EmptyCorpus("corpus contains no pre-tokens")
    alphabet = tuple(sorted({ch for word in word_counts for ch in word}))
    if target_size < len(alphabet):
        raise DomainError(
            f"target_size {target_size} is below the alphabet size {len(alphabet)}"
        )
    if min_pair_freq < 1:
        raise DomainError(f"min_pair_freq must be positive, got {min_pair_freq}")

    words: list[list[str]] = [list(w) for w in word_counts]
    counts = list(word_counts.values())
    merges: list[tuple[str, str]] = []
    vocab = set(alphabet)

    while len(vocab) < target_size:
        pair_freqs: dict[tuple[str, str], int] = {}
        for parts, count in zip(words, counts):
            for i in range(len(parts) - 1):
                pair = (parts[i], parts[i + 1])
                pair_freqs[pair] = pair_freqs.get(pair, 0) + count
        if not pair_freqs:
            break
        best_pair, best_count = None, 0
        for pair, c in pair_freqs.items():  # insertion order = first occurrence
            if c > best_count:
                best_pair, best_count = pair, c
        if best_count < min_pair_freq:
            break
        left, right = best_pair
        product = left + right
        merges.append(best_pair)
        vocab.add(product)  # may already exist via a different split; set dedups
        for k, parts in enumerate(words):
            i = 0
            out: list[str] = []
            n = len(parts)
            while i < n:
                if i + 1 < n and parts[i] == left and parts[i + 1] == right:
                    out.append(product)
                    i += 2
                else:
                    out.append(parts[i])
                    i += 1
            words[k] = out

    return BpeModel(alphabet, tuple(merges))


def union_vocab(v_init: Vocabulary, v_new: BpeModel) -> Vocabulary:
    """Set union keeping v_init order first, then novel v_new tokens in order.

    No merges are attached: the union feeds longest-prefix tokenization, not
    merge application.
    """
    seen = set(v_init.tokens)
    extra = []
    for t in v_new.tokens:
        if t not in seen:
            extra.append(t)
            seen.add(t)
    return Vocabulary(tuple(v_init.tokens) + tuple(extra))


def concat_merge_tables(t1: BpeModel, t2: BpeModel) -> BpeModel:
    """Append t2's merge rules after t1's, dropping duplicates (first kept)."""
    if set(t1.alphabet) != set(t2.alphabet):
        raise DomainError("merge tables must share the same alphabet")
    merges = list(t1.merges)
    seen = set(t1.merges)
    for m in t2.merges:
        if m not in seen:
            merges.append(m)
            seen.add(m)
    return BpeModel(t1.alphabet, tuple(merges))


def find_unreachable_tokens(model: BpeModel) -> list[str]:
    """Declared tokens the model's own merge table can never produce."""
    out = []
    for token in model.tokens:
        produced = [t.text for t in base_tokenize(token, model).tokens]
        if produced != [token]:
            out.append(token)
    return out


class PrefixTrie:
    """Character trie over a vocabulary with terminal marks on token ends."""

    __slots__ = ("_children", "_terminal", "size")

    def __init__(self, tokens: Iterable[str]):
        # Flat representation: node 0 is the root.
        self._children: list[dict[str, int]] = [{}]
        self._terminal: list[bool] = [False]
        self.size = 0
        for token in tokens:
            node = 0
            for ch in token:
                nxt = self._children[node].get(ch)
                if nxt is None:
                    nxt = len(self._children)
                    self._children[node][ch] = nxt
                    self._children.append({})
                    self._terminal.append(False)
                node = nxt
            if not self._terminal[node]:
                self._terminal[node] = True
                self.size += 1

    def longest_prefix(self, text: str, start: int = 0) -> int:
        """Length of the longest vocabulary token prefixing text[start:]."""
        node = 0
        best = 0
        children = self._children
        terminal = self._terminal
        for i in range(start, len(text)):
            node = children[node].get(text[i], -1)
            if node < 0:
                break
            if terminal[node]:
                best = i - start + 1
        return best


def lp_tokenize(
    text: str, vocab: Vocabulary | Sequence[str], trie: PrefixTrie | None = None,
    sample_id: str = "",
) -> TokenSequence:
    """Greedy longest-prefix segmentation, never crossing pre-token bounds."""
    if trie is None:
        tokens = vocab.tokens if isinstance(vocab, Vocabulary) else vocab
        trie = PrefixTrie(tokens)
    out: list[Token] = []
    for word, offset in _iter_pre_tokens_with_offsets(text):
        i = 0
        while i < len(word):
            length = trie.longest_prefix(word, i)
            if length == 0:
                raise UncoveredCharacter(word[i], offset + i)
            out.append(Token(word[i : i + length], word_start=(i == 0)))
            i += length
    return TokenSequence(sample_id, tuple(out))


def load_bpe_model(source: str | Path | dict) -> BpeModel:
    """Read a model JSON object: {"alphabet": [...], "merges": [[l, r], ...]}."""
    obj = source if isinstance(source, dict) else json.loads(Path(source).read_text(encoding="utf-8"))
    return BpeModel(tuple(obj["alphabet"]), tuple((l, r) for l, r in obj.get("merges", [])))


def dump_bpe_model(model: BpeModel) -> str:
    obj = {"alphabet": list(model.alphabet), "merges": [list(m) for m in model.merges]}
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"
