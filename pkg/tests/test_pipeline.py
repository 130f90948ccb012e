"""One end-to-end flow through every CLI stage, checking file interop.

Train two BPE models, concatenate them, longest-prefix tokenize raw text,
compress the stream, compose embeddings for the compressed tokens, index
them and retrieve, and report stats and FLOPs, all through the CLI with
real files.
"""

import json

import numpy as np
import pytest

from dyntok.cli import main
from dyntok.corpus import parse_token_stream
from dyntok.embeddings import EmbeddingTable, load_table, save_table
from dyntok.expansion import load_bpe_model


def run(argv):
    code = main([str(a) for a in argv])
    assert code == 0, f"command failed: {argv}"


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "corpus_a.txt").write_text(
        "abba abba cabba\nabba dada cabba\ndada abba\n", encoding="utf-8"
    )
    (tmp_path / "corpus_b.txt").write_text(
        "badcab badcab\ncabd badcab dada\n", encoding="utf-8"
    )
    (tmp_path / "text.txt").write_text(
        "abba cabba dada\nbadcab abba dada dada\n", encoding="utf-8"
    )
    return tmp_path


def test_full_pipeline(workdir, capsys):
    # two independently trained models over the same alphabet
    run(["train-bpe", "--corpus", workdir / "corpus_a.txt", "--target-size", 9,
         "--output", workdir / "model_a.json"])
    run(["train-bpe", "--corpus", workdir / "corpus_b.txt", "--target-size", 9,
         "--output", workdir / "model_b.json"])
    run(["merge-vocabs", "--left", workdir / "model_a.json",
         "--right", workdir / "model_b.json",
         "--output", workdir / "merged.json", "--report", workdir / "conflicts.json"])
    merged = load_bpe_model(workdir / "merged.json")
    report = json.loads((workdir / "conflicts.json").read_text())
    assert set(report["unreachable"]) <= set(merged.tokens)

    # longest-prefix tokenization of raw text over the concatenated vocabulary
    run(["lp-tokenize", "--vocab", workdir / "merged.json",
         "--input", workdir / "text.txt", "--output", workdir / "stream.jsonl"])
    stream = parse_token_stream((workdir / "stream.jsonl").read_bytes())
    assert [seq.words() for seq in stream.sequences] == [
        ["abba", "cabba", "dada"],
        ["badcab", "abba", "dada", "dada"],
    ]
    capsys.readouterr()

    # compress to half of the word-level reduction, with trace and stats
    run(["compress", "--input", workdir / "stream.jsonl",
         "--output", workdir / "compressed.jsonl",
         "--target-reduction", 50, "--batch-size", 8,
         "--trace", workdir / "trace.json", "--stats", workdir / "stats.json",
         "--language", "xx"])
    summary = json.loads(capsys.readouterr().out)
    stats = json.loads((workdir / "stats.json").read_text())
    assert stats["reduction_pct"] >= 50
    assert summary["len_m"] == stats["len_m"]
    compressed = parse_token_stream((workdir / "compressed.jsonl").read_bytes())
    assert [seq.words() for seq in compressed.sequences] == [
        seq.words() for seq in stream.sequences
    ]  # lossless per word

    # word-level reference via a second compress run
    run(["compress", "--input", workdir / "stream.jsonl",
         "--output", workdir / "word.jsonl", "--merges", 999])
    capsys.readouterr()
    run(["stats", "--before", workdir / "stream.jsonl",
         "--after", workdir / "compressed.jsonl",
         "--word-level", workdir / "word.jsonl", "--language", "xx"])
    stats2 = json.loads(capsys.readouterr().out)
    assert stats2["len_m"] == stats["len_m"]
    assert stats2["reduction_pct"] == pytest.approx(stats["reduction_pct"], abs=1e-4)

    # base table covering the whole merged vocabulary, then composed
    # embeddings for the compressed stream's (partly novel) tokens
    rng = np.random.default_rng(1)
    base = EmbeddingTable.from_tokens(
        list(merged.tokens), rng.standard_normal((len(merged.tokens), 8)).astype(np.float32)
    )
    save_table(base, workdir / "base.bin")
    run(["compose-embeddings", "--input", workdir / "compressed.jsonl",
         "--provider", "fvt", "--base-vocab", workdir / "merged.json",
         "--base-table", workdir / "base.bin", "--output", workdir / "composed.bin"])
    capsys.readouterr()
    composed = load_table(workdir / "composed.bin")
    stream_tokens = {t.text for seq in compressed.sequences for t in seq.tokens}
    assert set(composed.token_index) == stream_tokens

    # retrieval over the composed table
    run(["index", "build", "--table", workdir / "composed.bin",
         "--output", workdir / "idx.ivf", "--num-leaves", 2,
         "--leaves-to-search", 2, "--reorder", 8, "--training-sample-size", 64,
         "--seed", 5])
    capsys.readouterr()
    queries = workdir / "queries.json"
    queries.write_text(json.dumps([composed.rows[0].tolist()]))
    run(["index", "query", "--index", workdir / "idx.ivf",
         "--queries", queries, "--k", 3, "--probs"])
    hits = json.loads(capsys.readouterr().out)["results"][0]["hits"]
    assert hits[0]["row"] == 0  # the query vector is row 0 itself
    assert sum(h["p"] for h in hits) == pytest.approx(1.0, abs=1e-6)

    run(["index", "eval", "--index", workdir / "idx.ivf",
         "--table", workdir / "composed.bin", "--random-queries", 8,
         "--seed", 11, "--k", 3])
    assert json.loads(capsys.readouterr().out)["recall_at_k"] == 1.0

    # scoring plan and FLOPs report from the produced stats
    run(["plan", "--prefix", workdir / "stream.jsonl",
         "--suffix", workdir / "word.jsonl", "--merges", 2,
         "--output", workdir / "plans.jsonl"])
    plans = [json.loads(l) for l in (workdir / "plans.jsonl").read_text().splitlines()]
    assert len(plans) == 2
    assert all(p["boundary_index"] == len(p["prefix"]) for p in plans)
    capsys.readouterr()

    run(["flops", "--preset", "mistral-7b", "--stats", workdir / "stats.json"])
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert rows[0]["language"] == "xx"
    assert rows[0]["model_flops"] > 0
