"""Inverted-file approximate nearest-neighbor retrieval over embedding tables.

Rows are clustered by seeded k-means++ (a fixed 20 Lloyd iterations) and
stored in the posting lists of their ``spill`` nearest centroids; queries
scan the highest-scoring partitions and rank distinct candidates by dot
product, optionally rescoring the best before truncating.  Spilling trades
index size for recall: isotropic data needs it because the top neighbors
of a query spread across partitions whose centroid scores barely stand out
(spill=1 restores classic single-assignment IVF).  Vectors are stored at
full precision: the anisotropic-quantization knob is accepted for config
compatibility but not implemented.  An exhaustive scan is kept alongside
as the recall oracle.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingTable
from .errors import DimensionMismatch, DomainError, EmptyInput, FormatError, TooFewRows

MAGIC = b"DTIVF1"
_HEADER = struct.Struct("<III")  # dim, num_leaves, row_count
_PARAMS = struct.Struct("<IIIqdI")  # leaves_to_search, reorder, sample size, seed, aniso, spill
_LEAF = struct.Struct("<II")  # leaf_id, count

KMEANS_ITERATIONS = 20
DEFAULT_SPILL = 4


@dataclass(frozen=True)
class IndexParams:
    num_leaves: int
    leaves_to_search: int
    reorder: int = 0
    training_sample_size: int = 100_000
    seed: int = 0
    anisotropic_quantization: float = 0.0  # parsed for config parity; unused
    spill: int = DEFAULT_SPILL  # posting lists per row; 1 = classic IVF

    def __post_init__(self):
        if self.num_leaves < 1:
            raise ValueError("num_leaves must be positive")
        if not 1 <= self.leaves_to_search <= self.num_leaves:
            raise ValueError("leaves_to_search must be in [1, num_leaves]")
        if self.reorder < 0:
            raise ValueError("reorder must be non-negative")
        if self.training_sample_size < 1:
            raise ValueError("training_sample_size must be positive")
        if self.spill < 1:
            raise ValueError("spill must be positive")


@dataclass
class IvfIndex:
    centroids: np.ndarray  # (num_leaves, dim) float32
    posting_ids: list[np.ndarray]  # per leaf, ascending row ids, uint32
    posting_vecs: list[np.ndarray]  # per leaf, (count, dim) float32
    params: IndexParams
    num_rows: int = field(init=False)  # distinct rows; spill stores each in several leaves

    def __post_init__(self):
        if self.posting_ids and any(len(ids) for ids in self.posting_ids):
            self.num_rows = int(
                np.unique(np.concatenate([ids for ids in self.posting_ids])).shape[0]
            )
        else:
            self.num_rows = 0

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    @property
    def num_leaves(self) -> int:
        return self.centroids.shape[0]


def _as_query(h, dim: int) -> np.ndarray:
    h = np.asarray(h, dtype=np.float32).reshape(-1)
    if h.shape[0] != dim:
        raise DimensionMismatch(f"query has dim {h.shape[0]}, index/table has {dim}")
    if not np.all(np.isfinite(h)):
        raise DomainError("query vector must be finite")
    return h


def _top_order(scores: np.ndarray, row_ids: np.ndarray, k: int) -> np.ndarray:
    """Positions of the top-k: descending score, ties by ascending row id."""
    n = scores.shape[0]
    if k < n:
        part = np.argpartition(-scores, k - 1)[:k]
        thresh = scores[part].min()
        cand = np.nonzero(scores >= thresh)[0]  # keep boundary ties
    else:
        cand = np.arange(n)
    order = np.lexsort((row_ids[cand], -scores[cand]))
    return cand[order[:k]]


def _as_results(scores: np.ndarray, row_ids: np.ndarray, top: np.ndarray) -> list[tuple[int, float]]:
    return [(int(row_ids[i]), float(scores[i])) for i in top]


def _dot_scores(mat: np.ndarray, h: np.ndarray) -> np.ndarray:
    # einsum keeps each row's accumulation independent of the matrix height,
    # so partial scans score bit-identically to the exhaustive scan
    return np.einsum("ij,j->i", mat, h)


def _assign(data: np.ndarray, centroids: np.ndarray, chunk: int = 8192) -> np.ndarray:
    """Nearest centroid by Euclidean distance, first index winning ties."""
    return _assign_top(data, centroids, 1, chunk)[:, 0]


def _assign_top(data: np.ndarray, centroids: np.ndarray, top: int, chunk: int = 8192) -> np.ndarray:
    """Per row, the ``top`` nearest centroids by Euclidean distance."""
    c_sq = np.einsum("ij,ij->i", centroids, centroids)
    k = centroids.shape[0]
    labels = np.empty((data.shape[0], min(top, k)), dtype=np.int64)
    for s in range(0, data.shape[0], chunk):
        block = data[s : s + chunk]
        dists = block @ centroids.T
        dists *= -2.0
        dists += c_sq[None, :]
        if top >= k:
            order = np.argsort(dists, axis=1, kind="stable")[:, :top]
        else:
            part = np.argpartition(dists, top - 1, axis=1)[:, :top]
            sub = np.take_along_axis(dists, part, axis=1)
            order = np.take_along_axis(part, np.argsort(sub, axis=1, kind="stable"), axis=1)
        labels[s : s + chunk] = order
    return labels


def _kmeans(data: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Seeded k-means++ init followed by a fixed number of Lloyd iterations."""
    rng = np.random.default_rng(seed)
    n, dim = data.shape
    data_sq = np.einsum("ij,ij->i", data, data).astype(np.float64)
    centroids = np.empty((k, dim), dtype=np.float32)
    centroids[0] = data[rng.integers(n)]

    def dist_sq_to(c: np.ndarray) -> np.ndarray:
        d = data_sq - 2.0 * (data @ c).astype(np.float64) + float(c @ c)
        return np.maximum(d, 0.0)

    d2 = dist_sq_to(centroids[0])
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            pick = rng.choice(n, p=d2 / total)
        else:  # all remaining points coincide with chosen centroids
            pick = rng.integers(n)
        centroids[j] = data[pick]
        np.minimum(d2, dist_sq_to(centroids[j]), out=d2)

    for _ in range(KMEANS_ITERATIONS):
        labels = _assign(data, centroids)
        counts = np.bincount(labels, minlength=k)
        sums = np.stack(
            [np.bincount(labels, weights=data[:, d], minlength=k) for d in range(dim)],
            axis=1,
        )
        occupied = counts > 0
        centroids[occupied] = (sums[occupied] / counts[occupied, None]).astype(np.float32)
        # empty clusters keep their previous centroid
    return centroids


def build_index(table: EmbeddingTable, params: IndexParams) -> IvfIndex:
    """Cluster the table into posting lists; deterministic for a fixed seed.

    Each row lands in the posting lists of its ``params.spill`` nearest
    centroids (clipped to num_leaves).
    """
    rows = table.rows
    if rows.shape[0] < params.num_leaves:
        raise TooFewRows(
            f"{rows.shape[0]} rows cannot fill {params.num_leaves} leaves"
        )
    rng = np.random.default_rng(params.seed)
    sample_size = min(params.training_sample_size, rows.shape[0])
    sample_idx = rng.choice(rows.shape[0], size=sample_size, replace=False)
    centroids = _kmeans(rows[np.sort(sample_idx)], params.num_leaves, params.seed)
    labels = _assign_top(rows, centroids, min(params.spill, params.num_leaves))
    posting_ids = []
    posting_vecs = []
    for leaf in range(params.num_leaves):
        ids = np.nonzero((labels == leaf).any(axis=1))[0].astype(np.uint32)
        posting_ids.append(ids)
        posting_vecs.append(np.ascontiguousarray(rows[ids]))
    return IvfIndex(centroids.copy(), posting_ids, posting_vecs, params)


def query_top_k(
    index: IvfIndex,
    h,
    k: int,
    leaves_to_search: int | None = None,
    reorder: int | None = None,
) -> list[tuple[int, float]]:
    """Top-k rows by dot product among the leaves nearest to the query.

    Leaf selection follows the index metric: the ``leaves_to_search``
    centroids scoring highest by dot product with h are scanned.  Their
    candidates are ranked by dot product, the top ``reorder`` rescored when
    reorder > 0, then truncated to k.  Fewer than k results are possible for
    tiny indexes.
    """
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    n_probe = index.params.leaves_to_search if leaves_to_search is None else leaves_to_search
    n_reorder = index.params.reorder if reorder is None else reorder
    if not 1 <= n_probe <= index.num_leaves:
        raise DomainError(f"leaves_to_search must be in [1, {index.num_leaves}]")
    h = _as_query(h, index.dim)

    centroid_scores = _dot_scores(index.centroids, h)
    probe = np.lexsort((np.arange(index.num_leaves), -centroid_scores))[:n_probe]

    id_blocks = [index.posting_ids[p] for p in probe if len(index.posting_ids[p])]
    if not id_blocks:
        return []
    row_ids = np.concatenate(id_blocks)
    vecs = np.concatenate([index.posting_vecs[p] for p in probe if len(index.posting_ids[p])])
    # spilled rows can surface from several probed leaves; keep one copy each
    row_ids, first = np.unique(row_ids, return_index=True)
    vecs = np.ascontiguousarray(vecs[first])
    scores = _dot_scores(vecs, h)

    if n_reorder > 0 and n_reorder < scores.shape[0]:
        sel = _top_order(scores, row_ids, n_reorder)
        rescored = _dot_scores(np.ascontiguousarray(vecs[sel]), h)  # full-precision store: exact
        top = _top_order(rescored, row_ids[sel], k)
        return _as_results(rescored, row_ids[sel], top)
    top = _top_order(scores, row_ids, k)
    return _as_results(scores, row_ids, top)


def exhaustive_top_k(table: EmbeddingTable, h, k: int) -> list[tuple[int, float]]:
    """Full dot-product scan; the oracle the index is measured against."""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    h = _as_query(h, table.dim)
    scores = _dot_scores(table.rows, h)
    row_ids = np.arange(table.rows.shape[0], dtype=np.uint32)
    top = _top_order(scores, row_ids, k)
    return _as_results(scores, row_ids, top)


def softmax_over_candidates(scores) -> np.ndarray:
    """Numerically stable softmax over candidate scores (max-shifted)."""
    x = np.asarray(scores, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise EmptyInput("softmax needs at least one score")
    if not np.all(np.isfinite(x)):
        raise DomainError("scores must be finite")
    e = np.exp(x - x.max())
    return e / e.sum()


def recall_at_k(index: IvfIndex, table: EmbeddingTable, queries, k: int) -> float:
    """Mean fraction of exact top-k rows recovered by the index."""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    queries = np.asarray(queries, dtype=np.float32)
    if queries.ndim == 1:
        queries = queries[None, :]
    if queries.shape[0] == 0:
        raise EmptyInput("need at least one query")
    total = 0.0
    for q in queries:
        approx = {row for row, _ in query_top_k(index, q, k)}
        exact = {row for row, _ in exhaustive_top_k(table, q, k)}
        total += len(approx & exact) / k
    return total / queries.shape[0]


def save_index(index: IvfIndex, sink) -> None:
    """Write the index binary: header, params, centroid block, posting blocks."""
    parts = [
        MAGIC,
        _HEADER.pack(index.dim, index.num_leaves, index.num_rows),
        _PARAMS.pack(
            index.params.leaves_to_search,
            index.params.reorder,
            index.params.training_sample_size,
            index.params.seed,
            index.params.anisotropic_quantization,
            index.params.spill,
        ),
        index.centroids.astype("<f4").tobytes(),
    ]
    for leaf in range(index.num_leaves):
        ids = index.posting_ids[leaf]
        parts.append(_LEAF.pack(leaf, len(ids)))
        parts.append(ids.astype("<u4").tobytes())
        parts.append(index.posting_vecs[leaf].astype("<f4").tobytes())
    blob = b"".join(parts)
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(blob)
    else:
        sink.write(blob)


def load_index(source) -> IvfIndex:
    if isinstance(source, (str, Path)):
        blob = Path(source).read_bytes()
    else:
        blob = source.read()
    off = 0

    def take(n: int, what: str) -> bytes:
        nonlocal off
        if off + n > len(blob):
            raise FormatError(len(blob), f"truncated while reading {what}")
        chunk = blob[off : off + n]
        off += n
        return chunk

    if take(len(MAGIC), "magic") != MAGIC:
        raise FormatError(0, f"bad magic, expected {MAGIC!r}")
    dim, num_leaves, row_count = _HEADER.unpack(take(_HEADER.size, "header"))
    lts, reorder, tss, seed, aniso, spill = _PARAMS.unpack(take(_PARAMS.size, "params"))
    params = IndexParams(
        num_leaves=num_leaves,
        leaves_to_search=lts,
        reorder=reorder,
        training_sample_size=tss,
        seed=seed,
        anisotropic_quantization=aniso,
        spill=spill,
    )
    centroids = np.frombuffer(
        take(num_leaves * dim * 4, "centroids"), dtype="<f4"
    ).reshape(num_leaves, dim).copy()
    posting_ids = []
    posting_vecs = []
    for expect in range(num_leaves):
        leaf, count = _LEAF.unpack(take(_LEAF.size, f"leaf {expect} header"))
        if leaf != expect:
            raise FormatError(off - _LEAF.size, f"posting block {leaf} out of order")
        ids = np.frombuffer(take(count * 4, f"leaf {expect} ids"), dtype="<u4").copy()
        vecs = np.frombuffer(
            take(count * dim * 4, f"leaf {expect} vectors"), dtype="<f4"
        ).reshape(count, dim).copy()
        posting_ids.append(ids)
        posting_vecs.append(vecs)
    if off != len(blob):
        raise FormatError(off, f"{len(blob) - off} trailing bytes")
    idx = IvfIndex(centroids, posting_ids, posting_vecs, params)
    if idx.num_rows != row_count:
        raise FormatError(len(MAGIC), f"header declares {row_count} rows, postings hold {idx.num_rows}")
    return idx
