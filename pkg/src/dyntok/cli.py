"""Command-line entry point wiring the modules into reproducible pipelines.

Subcommands: compress, solve-merges, train-bpe, merge-vocabs, lp-tokenize,
compose-embeddings, index (build|query|eval), stats, flops, plan.

Conventions: machine-readable JSON goes to --output (stdout when omitted),
human summaries go to stderr, randomized paths take --seed (environment
variable DYNTOK_SEED is the fallback).  File outputs are written to a
temporary name and atomically renamed, so partial outputs are never left
behind.  Exit codes: 0 ok, 2 usage, 3 data error, 4 internal.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import analytics, embeddings, expansion, index as ann, merger
from .corpus import (
    Batch,
    Vocabulary,
    dump_token_stream,
    load_token_stream,
    load_vocabulary,
)
from .errors import DynTokError

DEFAULT_BATCH_SIZE = 32
DEFAULT_CACHE_CAPACITY = 4096


class _UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers


def _sig6(obj):
    """Round every float to 6 significant digits for diffable JSON."""
    if isinstance(obj, float):
        return float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {k: _sig6(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sig6(v) for v in obj]
    return obj


def _atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _atomic_write_bytes(path: str | Path, blob: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(blob)
    os.replace(tmp, path)


def _emit_json(obj, output: str | None) -> None:
    text = json.dumps(_sig6(obj), ensure_ascii=False, indent=2) + "\n"
    if output:
        _atomic_write_text(output, text)
    else:
        sys.stdout.write(text)


def _summary(msg: str) -> None:
    print(msg, file=sys.stderr)


def _resolve_seed(args, required: bool) -> int | None:
    seed = getattr(args, "seed", None)
    if seed is None:
        env = os.environ.get("DYNTOK_SEED")
        if env is not None:
            try:
                seed = int(env)
            except ValueError:
                raise _UsageError(f"DYNTOK_SEED must be an integer, got {env!r}") from None
    if seed is None and required:
        raise _UsageError("a seed is required (--seed or DYNTOK_SEED)")
    return seed


def _batches(batch: Batch, size: int) -> list[Batch]:
    seqs = batch.sequences
    return [Batch(seqs[i : i + size]) for i in range(0, len(seqs), size)] or [Batch(())]


def _load_tokenizer_vocab(path: str) -> Vocabulary:
    """Accept either a vocabulary JSON or a BPE model JSON."""
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if "tokens" in obj:
        return load_vocabulary(obj)
    model = expansion.load_bpe_model(obj)
    return Vocabulary(model.tokens, model.merges)


def _map_ordered(fn, items, workers: int):
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- compress


def _solve_from_profile(profile: list[int], target: float) -> int:
    len_init, len_word = profile[0], profile[-1]
    for m, len_m in enumerate(profile):
        if merger.reduction_percentage(len_init, len_m, len_word) >= target:
            return m
    return len(profile) - 1


def cmd_compress(args) -> int:
    modes = [args.merges is not None, args.target_reduction is not None, args.sample]
    if sum(modes) != 1:
        raise _UsageError("exactly one of --merges, --target-reduction, --sample is required")
    if args.target_reduction is not None and not 0 <= args.target_reduction <= 100:
        raise _UsageError("--target-reduction must be in [0, 100]")
    seed = _resolve_seed(args, required=args.sample)
    stream = load_token_stream(args.input, marker=args.marker)
    batches = _batches(stream, args.batch_size)
    want_profile = args.sample or args.target_reduction is not None or args.stats

    def work(item):
        idx, batch = item
        profile = merger.merge_length_profile(batch) if want_profile else None
        if args.merges is not None:
            m = args.merges
        elif args.target_reduction is not None:
            m = _solve_from_profile(profile, args.target_reduction)
        else:
            m = merger.sample_merge_count(len(profile) - 1, seed + idx)
        out, trace = merger.apply_dynamic_tokenization(batch, m)
        return out, trace, profile, m

    results = _map_ordered(work, list(enumerate(batches)), args.workers)

    out_text = "".join(dump_token_stream(out) for out, _, _, _ in results)
    _atomic_write_text(args.output, out_text)

    if args.trace:
        traces = [
            {"batch": i, "m": m, **trace.to_json_obj()}
            for i, (_, trace, _, m) in enumerate(results)
        ]
        _atomic_write_text(
            args.trace, json.dumps(_sig6({"batches": traces}), ensure_ascii=False, indent=2) + "\n"
        )

    len_init = sum(t.lengths[0] for _, t, _, _ in results)
    len_m = sum(t.lengths[-1] for _, t, _, _ in results)
    summary = {
        "batches": len(results),
        "sequences": len(stream.sequences),
        "len_init": len_init,
        "len_m": len_m,
        "merges_per_batch": [m for _, _, _, m in results],
    }
    if want_profile and all(p is not None for _, _, p, _ in results):
        len_word = sum(p[-1] for _, _, p, _ in results)
        summary["len_word"] = len_word
        summary["reduction_pct"] = merger.reduction_percentage(len_init, len_m, len_word)
        if args.stats:
            stats = analytics.LengthStats.from_totals(
                args.language, len_init, len_m, len_word, len(stream.sequences) or 1
            )
            _atomic_write_text(
                args.stats,
                json.dumps(_sig6(stats.to_json_obj()), ensure_ascii=False, indent=2) + "\n",
            )
    _emit_json(summary, None)
    _summary(
        f"compressed {len(stream.sequences)} sequence(s) in {len(results)} batch(es): "
        f"{len_init} -> {len_m} tokens"
    )
    return 0


def cmd_solve_merges(args) -> int:
    if not 0 <= args.target_reduction <= 100:
        raise _UsageError("--target-reduction must be in [0, 100]")
    stream = load_token_stream(args.input, marker=args.marker)
    batches = _batches(stream, args.batch_size)

    def work(item):
        idx, batch = item
        profile = merger.merge_length_profile(batch)
        m = _solve_from_profile(profile, args.target_reduction)
        return {
            "batch": idx,
            "m": m,
            "m_max": len(profile) - 1,
            "len_init": profile[0],
            "len_m": profile[m],
            "len_word": profile[-1],
            "reduction_pct": merger.reduction_percentage(profile[0], profile[m], profile[-1]),
        }

    rows = _map_ordered(work, list(enumerate(batches)), args.workers)
    _emit_json({"target_reduction": args.target_reduction, "batches": rows}, args.output)
    _summary(f"solved merges for {len(rows)} batch(es) at target {args.target_reduction}%")
    return 0


# ------------------------------------------------------------- vocabularies


def cmd_train_bpe(args) -> int:
    corpus = Path(args.corpus).read_text(encoding="utf-8").splitlines()
    model = expansion.train_bpe(corpus, args.target_size, args.min_pair_freq)
    _atomic_write_text(args.output, expansion.dump_bpe_model(model))
    _emit_json(
        {
            "alphabet_size": len(model.alphabet),
            "merges": len(model.merges),
            "tokens": len(model.tokens),
        },
        None,
    )
    _summary(f"trained {len(model.merges)} merges over alphabet of {len(model.alphabet)}")
    return 0


def cmd_merge_vocabs(args) -> int:
    left = expansion.load_bpe_model(args.left)
    right = expansion.load_bpe_model(args.right)
    merged = expansion.concat_merge_tables(left, right)
    unreachable = expansion.find_unreachable_tokens(merged)
    _atomic_write_text(args.output, expansion.dump_bpe_model(merged))
    report = {
        "tokens": len(merged.tokens),
        "merges": len(merged.merges),
        "unreachable": unreachable,
    }
    if args.report:
        _atomic_write_text(
            args.report, json.dumps(_sig6(report), ensure_ascii=False, indent=2) + "\n"
        )
    _emit_json(report, None)
    _summary(
        f"concatenated merge tables: {len(merged.merges)} rules, "
        f"{len(unreachable)} unreachable token(s)"
    )
    return 0


def cmd_lp_tokenize(args) -> int:
    if (args.text is None) == (args.input is None):
        raise _UsageError("exactly one of --text, --input is required")
    vocab = _load_tokenizer_vocab(args.vocab)
    trie = expansion.PrefixTrie(vocab.tokens)
    if args.text is not None:
        texts = [("text", args.text)]
    else:
        lines = Path(args.input).read_text(encoding="utf-8").splitlines()
        texts = [(str(i), line) for i, line in enumerate(lines)]
    seqs = [expansion.lp_tokenize(t, vocab, trie, sample_id=sid) for sid, t in texts]
    batch = Batch(tuple(seqs))
    out_text = dump_token_stream(batch)
    if args.output:
        _atomic_write_text(args.output, out_text)
    else:
        sys.stdout.write(out_text)
    _summary(f"tokenized {len(seqs)} sequence(s) into {batch.total_tokens()} token(s)")
    return 0


# --------------------------------------------------------------- embeddings


def _build_provider(args) -> embeddings.Provider:
    if args.provider == "fvt":
        if not args.base_vocab or not args.base_table:
            raise _UsageError("--provider fvt needs --base-vocab and --base-table")
        base_model = _load_tokenizer_vocab(args.base_vocab)
        if base_model.merges is None:
            raise _UsageError("fvt base vocabulary must carry merges")
        base_table = embeddings.load_table(args.base_table)
        return embeddings.FvtProvider(base_model, base_table)
    if not args.table:
        raise _UsageError(f"--provider {args.provider} needs --table")
    table = embeddings.load_table(args.table)
    if args.provider == "external":
        return embeddings.ExternalTableProvider(table)
    return embeddings.TableLookupProvider(table)


def cmd_compose_embeddings(args) -> int:
    if (args.tokens is None) == (args.input is None):
        raise _UsageError("exactly one of --tokens, --input is required")
    if args.tokens is not None:
        vocab = json.loads(Path(args.tokens).read_text(encoding="utf-8"))
        if not isinstance(vocab, list):
            raise _UsageError("--tokens file must hold a JSON array of strings")
    else:
        stream = load_token_stream(args.input, marker=args.marker)
        vocab = {t.text for seq in stream.sequences for t in seq.tokens}
    provider = _build_provider(args)
    cache = embeddings.LruCache(args.cache_capacity) if args.cache_capacity > 0 else None
    table = embeddings.embed_batch_vocab(vocab, provider, cache)
    buf = io.BytesIO()
    embeddings.save_table(table, buf)
    _atomic_write_bytes(args.output, buf.getvalue())
    _atomic_write_text(
        str(args.output) + ".vocab.json",
        json.dumps({"tokens": table.tokens()}, ensure_ascii=False) + "\n",
    )
    _emit_json(
        {
            "tokens": len(table),
            "dim": table.dim,
            "provider": provider.kind,
            "provider_calls": provider.calls,
            "cache_hits": cache.hits if cache else 0,
        },
        None,
    )
    _summary(f"embedded {len(table)} token(s) at dim {table.dim} via {provider.kind}")
    return 0


# -------------------------------------------------------------------- index


def _load_queries(args, dim: int) -> np.ndarray:
    if args.queries:
        data = json.loads(Path(args.queries).read_text(encoding="utf-8"))
        q = np.asarray(data, dtype=np.float32)
        if q.ndim == 1:
            q = q[None, :]
        return q
    if args.random_queries:
        seed = _resolve_seed(args, required=True)
        rng = np.random.default_rng(seed)
        q = rng.standard_normal((args.random_queries, dim), dtype=np.float32)
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        return q
    raise _UsageError("provide --queries or --random-queries")


def cmd_index_build(args) -> int:
    seed = _resolve_seed(args, required=True)
    table = embeddings.load_table(args.table)
    params = ann.IndexParams(
        num_leaves=args.num_leaves,
        leaves_to_search=args.leaves_to_search,
        reorder=args.reorder,
        training_sample_size=args.training_sample_size,
        seed=seed,
        anisotropic_quantization=args.anisotropic_quantization,
        spill=args.spill,
    )
    idx = ann.build_index(table, params)
    buf = io.BytesIO()
    ann.save_index(idx, buf)
    _atomic_write_bytes(args.output, buf.getvalue())
    occupancy = [len(ids) for ids in idx.posting_ids]
    _emit_json(
        {
            "rows": idx.num_rows,
            "dim": idx.dim,
            "num_leaves": idx.num_leaves,
            "empty_leaves": sum(1 for c in occupancy if c == 0),
            "max_leaf": max(occupancy),
        },
        None,
    )
    _summary(f"indexed {idx.num_rows} rows into {idx.num_leaves} leaves")
    return 0


def cmd_index_query(args) -> int:
    idx = ann.load_index(args.index)
    queries = _load_queries(args, idx.dim)
    rows = []
    for i, q in enumerate(queries):
        hits = ann.query_top_k(
            idx, q, args.k, leaves_to_search=args.leaves_to_search, reorder=args.reorder
        )
        entry = {"query": i, "hits": [{"row": r, "score": s} for r, s in hits]}
        if args.probs and hits:
            probs = ann.softmax_over_candidates([s for _, s in hits])
            for hit, p in zip(entry["hits"], probs):
                hit["p"] = float(p)
        rows.append(entry)
    _emit_json({"k": args.k, "results": rows}, args.output)
    _summary(f"ran {len(queries)} query(ies), k={args.k}")
    return 0


def cmd_index_eval(args) -> int:
    idx = ann.load_index(args.index)
    table = embeddings.load_table(args.table)
    queries = _load_queries(args, idx.dim)
    if args.leaves_to_search is not None or args.reorder is not None:
        idx.params = ann.IndexParams(
            num_leaves=idx.params.num_leaves,
            leaves_to_search=idx.params.leaves_to_search
            if args.leaves_to_search is None
            else args.leaves_to_search,
            reorder=idx.params.reorder if args.reorder is None else args.reorder,
            training_sample_size=idx.params.training_sample_size,
            seed=idx.params.seed,
            anisotropic_quantization=idx.params.anisotropic_quantization,
            spill=idx.params.spill,
        )
    recall = ann.recall_at_k(idx, table, queries, args.k)
    _emit_json({"k": args.k, "queries": len(queries), "recall_at_k": recall}, args.output)
    _summary(f"recall@{args.k} = {recall:.4f} over {len(queries)} queries")
    return 0


# ---------------------------------------------------------- stats and flops


def cmd_stats(args) -> int:
    before = load_token_stream(args.before, marker=args.marker)
    after = load_token_stream(args.after, marker=args.marker)
    word = load_token_stream(args.word_level, marker=args.marker)
    stats = analytics.sequence_stats(before, after, word, args.language)
    _emit_json(stats.to_json_obj(), args.output)
    _summary(
        f"{args.language}: {stats.len_init} -> {stats.len_m} tokens "
        f"({stats.reduction_pct:.1f}% of the word-level reduction)"
    )
    return 0


def _model_config(args) -> analytics.ModelConfig:
    if args.preset:
        try:
            return analytics.MODEL_PRESETS[args.preset]
        except KeyError:
            raise _UsageError(
                f"unknown preset {args.preset!r}; available: {sorted(analytics.MODEL_PRESETS)}"
            ) from None
    if args.n_params and args.d_model and args.n_layers:
        return analytics.ModelConfig(args.n_params, args.d_model, args.n_layers)
    raise _UsageError("provide --preset or all of --n-params, --d-model, --n-layers")


def cmd_flops(args) -> int:
    cfg = _model_config(args)
    cost = analytics.HypernetCostConfig(args.hn_cost)
    if args.stats:
        rows_in = json.loads(Path(args.stats).read_text(encoding="utf-8"))
        if isinstance(rows_in, dict):
            rows_in = [rows_in]
        stats = [
            analytics.LengthStats(
                language=r["language"],
                len_init=r["len_init"],
                len_word=r["len_word"],
                len_m=r["len_m"],
                samples=r["samples"],
                reduction_pct=r["reduction_pct"],
                avg_tokens_per_sample=r["avg_tokens_per_sample"],
            )
            for r in rows_in
        ]
        hn = None
    elif args.seq_len is not None:
        naive = int(round(args.seq_len))
        stats = [
            analytics.LengthStats(
                language=args.language,
                len_init=max(naive, 1),
                len_word=0,
                len_m=max(naive, 1),
                samples=1,
                reduction_pct=args.reduction,
                avg_tokens_per_sample=args.seq_len,
            )
        ]
        hn = [(args.hn_unique, args.hn_decomp_len)] if args.hn_unique else None
    else:
        raise _UsageError("provide --stats or --seq-len")
    report = analytics.flops_report(stats, cfg, cost, hn)
    _emit_json({"rows": list(report.rows)}, args.output)
    _summary(report.to_text().rstrip())
    return 0


def cmd_plan(args) -> int:
    prefixes = load_token_stream(args.prefix, marker=args.marker)
    suffixes = load_token_stream(args.suffix, marker=args.marker)
    if len(prefixes.sequences) != len(suffixes.sequences):
        raise _UsageError("prefix and suffix streams must pair line by line")
    lines = []
    for pre, suf in zip(prefixes.sequences, suffixes.sequences):
        plan = merger.build_scoring_plan(pre, suf, args.merges)
        lines.append(
            json.dumps(
                {
                    "id": pre.sample_id,
                    "prefix": [{"t": t.text, "w": t.word_start} for t in plan.prefix_tokens.tokens],
                    "suffix": [{"t": t.text, "w": t.word_start} for t in plan.suffix_tokens.tokens],
                    "boundary_index": plan.boundary_index,
                },
                ensure_ascii=False,
            )
        )
    text = "".join(line + "\n" for line in lines)
    if args.output:
        _atomic_write_text(args.output, text)
    else:
        sys.stdout.write(text)
    _summary(f"planned {len(lines)} sequence(s) at m={args.merges}")
    return 0


# ------------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyntok",
        description="Batch-adaptive token stream compression and retrieval toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_marker(p):
        p.add_argument(
            "--marker",
            default=None,
            help="strip this word-start marker glyph while parsing token streams",
        )

    p = sub.add_parser("compress", help="dynamically merge a token stream batch by batch")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--merges", type=int, default=None, help="fixed merge count per batch")
    p.add_argument("--target-reduction", type=float, default=None, help="solve m per batch, percent")
    p.add_argument("--sample", action="store_true", help="draw m per batch uniformly (seed + batch index)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--trace", default=None, help="write per-batch merge trace JSON here")
    p.add_argument("--stats", default=None, help="write aggregated length stats JSON here")
    p.add_argument("--language", default="und")
    add_marker(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("solve-merges", help="minimal m per batch for a target reduction")
    p.add_argument("--input", required=True)
    p.add_argument("--target-reduction", type=float, required=True)
    p.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", default=None)
    add_marker(p)
    p.set_defaults(func=cmd_solve_merges)

    p = sub.add_parser("train-bpe", help="train a BPE model on a text corpus")
    p.add_argument("--corpus", required=True, help="text file, one document per line")
    p.add_argument("--target-size", type=int, required=True)
    p.add_argument("--min-pair-freq", type=int, default=2)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_train_bpe)

    p = sub.add_parser("merge-vocabs", help="concatenate two merge tables and report conflicts")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_merge_vocabs)

    p = sub.add_parser("lp-tokenize", help="longest-prefix tokenize text over a vocabulary")
    p.add_argument("--vocab", required=True, help="vocabulary or BPE model JSON")
    p.add_argument("--text", default=None)
    p.add_argument("--input", default=None, help="text file, one sequence per line")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_lp_tokenize)

    p = sub.add_parser("compose-embeddings", help="embed a batch vocabulary via a provider")
    p.add_argument("--tokens", default=None, help="JSON array of token strings")
    p.add_argument("--input", default=None, help="token-stream JSONL; vocabulary = unique tokens")
    p.add_argument("--provider", choices=["fvt", "table", "external"], required=True)
    p.add_argument("--base-vocab", default=None, help="base tokenizer JSON (fvt)")
    p.add_argument("--base-table", default=None, help="base embedding table binary (fvt)")
    p.add_argument("--table", default=None, help="embedding table binary (table/external)")
    p.add_argument("--cache-capacity", type=int, default=DEFAULT_CACHE_CAPACITY)
    p.add_argument("--output", required=True, help="embedding table binary output")
    add_marker(p)
    p.set_defaults(func=cmd_compose_embeddings)

    p = sub.add_parser("index", help="IVF index operations")
    isub = p.add_subparsers(dest="index_command", required=True)

    b = isub.add_parser("build", help="cluster an embedding table into an IVF index")
    b.add_argument("--table", required=True)
    b.add_argument("--output", required=True)
    b.add_argument("--num-leaves", type=int, required=True)
    b.add_argument("--leaves-to-search", type=int, required=True)
    b.add_argument("--reorder", type=int, default=0)
    b.add_argument("--training-sample-size", type=int, default=100_000)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--spill", type=int, default=ann.DEFAULT_SPILL,
                   help="posting lists per row; 1 = classic single-assignment IVF")
    b.add_argument("--anisotropic-quantization", type=float, default=0.0,
                   help="accepted for config parity; not implemented")
    b.set_defaults(func=cmd_index_build)

    q = isub.add_parser("query", help="top-k token retrieval by dot product")
    q.add_argument("--index", required=True)
    q.add_argument("--queries", default=None, help="JSON list of query vectors")
    q.add_argument("--random-queries", type=int, default=None)
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--k", type=int, default=10)
    q.add_argument("--leaves-to-search", type=int, default=None)
    q.add_argument("--reorder", type=int, default=None)
    q.add_argument("--probs", action="store_true",
                   help="attach a softmax distribution over the k candidate scores")
    q.add_argument("--output", default=None)
    q.set_defaults(func=cmd_index_query)

    e = isub.add_parser("eval", help="recall@k of the index against the exhaustive oracle")
    e.add_argument("--index", required=True)
    e.add_argument("--table", required=True)
    e.add_argument("--queries", default=None)
    e.add_argument("--random-queries", type=int, default=None)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--k", type=int, default=10)
    e.add_argument("--leaves-to-search", type=int, default=None)
    e.add_argument("--reorder", type=int, default=None)
    e.add_argument("--output", default=None)
    e.set_defaults(func=cmd_index_eval)

    p = sub.add_parser("stats", help="length statistics of aligned token streams")
    p.add_argument("--before", required=True)
    p.add_argument("--after", required=True)
    p.add_argument("--word-level", required=True)
    p.add_argument("--language", default="und")
    p.add_argument("--output", default=None)
    add_marker(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("flops", help="per-sample FLOPs estimates")
    p.add_argument("--preset", default=None)
    p.add_argument("--n-params", type=float, default=None)
    p.add_argument("--d-model", type=int, default=None)
    p.add_argument("--n-layers", type=int, default=None)
    p.add_argument("--stats", default=None, help="length stats JSON (object or list)")
    p.add_argument("--seq-len", type=float, default=None)
    p.add_argument("--language", default="und")
    p.add_argument("--reduction", type=float, default=0.0)
    p.add_argument("--hn-cost", type=float, default=0.0,
                   help="embedding-predictor FLOPs per processed token")
    p.add_argument("--hn-unique", type=float, default=None)
    p.add_argument("--hn-decomp-len", type=float, default=1.0)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_flops)

    p = sub.add_parser("plan", help="compress a prefix, keep the suffix tokenization")
    p.add_argument("--prefix", required=True, help="token-stream JSONL")
    p.add_argument("--suffix", required=True, help="token-stream JSONL, paired by line")
    p.add_argument("--merges", type=int, required=True)
    p.add_argument("--output", default=None)
    add_marker(p)
    p.set_defaults(func=cmd_plan)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except DynTokError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - kept for operational safety
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
