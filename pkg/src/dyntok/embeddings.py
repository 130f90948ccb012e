"""Embeddings for arbitrary token strings via pluggable providers.

A provider is a per-token black box: a precomputed table, mean-of-subwords
composition over a base model, or an externally produced table ingested
from files (the stand-in for an embedding-prediction network, which is not
implemented here).  An LRU cache in front of a provider amortizes repeated
tokens across batches.  Vectors are float32 throughout.
"""

from __future__ import annotations

import io
import itertools
import json
import struct
import threading
from collections import OrderedDict
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .corpus import Vocabulary, base_tokenize
from .errors import (
    BatchEmbeddingError,
    DimensionMismatch,
    DynTokError,
    FormatError,
    MissingEmbedding,
)

MAGIC = b"DTEMB1"
_HEADER = struct.Struct("<II")  # vocab_size, dim

_provider_counter = itertools.count()


class EmbeddingTable:
    """Dense float32 vector per token, with a token -> row number index."""

    def __init__(self, rows: np.ndarray, token_index: dict[str, int]):
        rows = np.ascontiguousarray(rows, dtype=np.float32)
        if rows.ndim != 2 or rows.shape[1] < 1:
            raise ValueError("rows must be a 2-D array with at least one column")
        if not np.all(np.isfinite(rows)):
            raise ValueError("embedding values must be finite")
        if len(token_index) != rows.shape[0] or sorted(token_index.values()) != list(
            range(rows.shape[0])
        ):
            raise ValueError("token_index must map tokens bijectively onto row numbers")
        self.rows = rows
        self.token_index = dict(token_index)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str], rows: np.ndarray) -> "EmbeddingTable":
        tokens = list(tokens)
        return cls(rows, {t: i for i, t in enumerate(tokens)})

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]

    def __contains__(self, token: str) -> bool:
        return token in self.token_index

    def tokens(self) -> list[str]:
        out = [""] * len(self)
        for t, i in self.token_index.items():
            out[i] = t
        return out

    def vector(self, token: str) -> np.ndarray:
        try:
            return self.rows[self.token_index[token]]
        except KeyError:
            raise MissingEmbedding(token) from None


class Provider:
    """Embedding source for token strings; subclasses fill in the kind."""

    kind = "abstract"

    def __init__(self):
        self.identity = f"{self.kind}#{next(_provider_counter)}"
        self.calls = 0

    def covers(self, token: str) -> bool:
        raise NotImplementedError

    def embed(self, token: str) -> np.ndarray:
        raise NotImplementedError


class TableLookupProvider(Provider):
    """Looks tokens up in a precomputed table."""

    kind = "table-lookup"

    def __init__(self, table: EmbeddingTable):
        super().__init__()
        self.table = table

    def covers(self, token: str) -> bool:
        return token in self.table

    def embed(self, token: str) -> np.ndarray:
        self.calls += 1
        return np.array(self.table.vector(token), dtype=np.float32)


class ExternalTableProvider(TableLookupProvider):
    """Table produced offline by an external embedding predictor.

    Identical lookup mechanics, but the covered token strings are an
    explicit, declared set.
    """

    kind = "external-table"

    @classmethod
    def from_files(cls, data_path, vocab_path=None) -> "ExternalTableProvider":
        return cls(load_table(data_path, vocab_path))

    @property
    def covered_tokens(self) -> frozenset[str]:
        return frozenset(self.table.token_index)


class FvtProvider(Provider):
    """Composes a new token's embedding as the mean of its base subwords."""

    kind = "fvt"

    def __init__(self, base_model: Vocabulary, base_table: EmbeddingTable):
        super().__init__()
        self.base_model = base_model
        self.base_table = base_table

    def covers(self, token: str) -> bool:
        return all(ch in self.base_model for ch in token)

    def embed(self, token: str) -> np.ndarray:
        self.calls += 1
        return fvt_compose(token, self.base_model, self.base_table)


def fvt_compose(token: str, base_model: Vocabulary, base_table: EmbeddingTable) -> np.ndarray:
    """Mean of the base-table embeddings of the token's base decomposition.

    The token is decomposed as a single pre-token; its word_start flag plays
    no role here.
    """
    subwords = base_tokenize(token, base_model).tokens
    vecs = [base_table.vector(t.text) for t in subwords]
    return np.mean(np.stack(vecs).astype(np.float64), axis=0).astype(np.float32)


class LruCache:
    """Bounded token -> vector cache evicting the least-recently-used entry.

    Safe under concurrent get_or_compute; a racing miss may compute twice,
    but entries and recency order always stay consistent.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._entries: "OrderedDict[object, np.ndarray]" = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        self.evictions = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key) -> bool:
        return key in self._entries

    def keys(self) -> list:
        """Keys from least to most recently used."""
        return list(self._entries)

    def get_or_compute(self, key, compute: Callable[[], np.ndarray]) -> np.ndarray:
        with self._lock:
            if key in self._entries:
                self._entries.move_to_end(key)
                self.hits += 1
                return self._entries[key]
            self.misses += 1
        value = compute()  # outside the lock; failures are not cached
        with self._lock:
            self._entries[key] = value
            self._entries.move_to_end(key)
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)
                self.evictions += 1
        return value


def cache_get_or_compute(
    cache: LruCache, token: str, compute: Callable[[str], np.ndarray]
) -> np.ndarray:
    """Cached lookup of one token's vector, computing on miss."""
    return cache.get_or_compute(token, lambda: compute(token))


def embed_batch_vocab(
    vocab: Iterable[str], provider: Provider, cache: LruCache | None = None
) -> EmbeddingTable:
    """Embed every token of a batch vocabulary into one table.

    Rows are ordered by sorted token string for determinism.  The cache is
    consulted first; keys include the provider identity so switching
    providers can never serve stale vectors.  Per-token provider failures
    are aggregated and raised together.
    """
    tokens = sorted(set(vocab))
    failures: dict[str, Exception] = {}
    vectors: list[np.ndarray] = []
    for token in tokens:
        try:
            if cache is not None:
                vec = cache.get_or_compute(
                    (provider.identity, token), lambda t=token: provider.embed(t)
                )
            else:
                vec = provider.embed(token)
            vectors.append(np.asarray(vec, dtype=np.float32))
        except DynTokError as exc:
            failures[token] = exc
    if failures:
        raise BatchEmbeddingError(failures)
    if not tokens:
        raise DynTokError("batch vocabulary is empty")
    dims = {v.shape for v in vectors}
    if len(dims) != 1:
        raise DimensionMismatch(f"provider returned mixed vector shapes: {sorted(dims)}")
    return EmbeddingTable.from_tokens(tokens, np.stack(vectors))


def _default_vocab_path(data_path) -> Path:
    return Path(str(data_path) + ".vocab.json")


def save_table(table: EmbeddingTable, sink, vocab_sink=None) -> None:
    """Write the table binary plus its companion vocabulary JSON.

    Layout: magic "DTEMB1", little-endian uint32 vocab_size and dim, then
    vocab_size * dim little-endian float32 values row-major.  The companion
    JSON supplies the row order.
    """
    payload = (
        MAGIC
        + _HEADER.pack(len(table), table.dim)
        + table.rows.astype("<f4").tobytes()
    )
    if isinstance(sink, (str, Path)):
        if vocab_sink is None:
            vocab_sink = _default_vocab_path(sink)
        Path(sink).write_bytes(payload)
    else:
        sink.write(payload)
    if vocab_sink is not None:
        vocab_obj = json.dumps({"tokens": table.tokens()}, ensure_ascii=False)
        if isinstance(vocab_sink, (str, Path)):
            Path(vocab_sink).write_text(vocab_obj + "\n", encoding="utf-8")
        else:
            vocab_sink.write(vocab_obj + "\n")


def load_table(source, vocab_source=None) -> EmbeddingTable:
    """Read a table binary and its companion vocabulary JSON back."""
    if isinstance(source, (str, Path)):
        if vocab_source is None:
            vocab_source = _default_vocab_path(source)
        blob = Path(source).read_bytes()
    else:
        blob = source.read()
    if blob[: len(MAGIC)] != MAGIC:
        raise FormatError(0, f"bad magic {blob[:len(MAGIC)]!r}, expected {MAGIC!r}")
    header_end = len(MAGIC) + _HEADER.size
    if len(blob) < header_end:
        raise FormatError(len(blob), "truncated header")
    vocab_size, dim = _HEADER.unpack(blob[len(MAGIC):header_end])
    if dim < 1:
        raise FormatError(len(MAGIC) + 4, f"dim must be positive, got {dim}")
    expected = header_end + vocab_size * dim * 4
    if len(blob) != expected:
        raise FormatError(
            min(len(blob), expected),
            f"expected {expected} bytes for {vocab_size}x{dim} payload, got {len(blob)}",
        )
    rows = np.frombuffer(blob, dtype="<f4", offset=header_end).reshape(vocab_size, dim)
    if vocab_source is None:
        raise FormatError(len(blob), "vocabulary JSON required to order rows")
    if isinstance(vocab_source, (str, Path)):
        vocab_obj = json.loads(Path(vocab_source).read_text(encoding="utf-8"))
    elif isinstance(vocab_source, io.IOBase):
        vocab_obj = json.load(vocab_source)
    else:
        vocab_obj = vocab_source
    tokens = vocab_obj["tokens"] if isinstance(vocab_obj, dict) else list(vocab_obj)
    if len(tokens) != vocab_size:
        raise DimensionMismatch(
            f"header declares {vocab_size} rows but vocabulary lists {len(tokens)} tokens"
        )
    return EmbeddingTable.from_tokens(tokens, rows.copy())
