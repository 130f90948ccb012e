"""Tests for the token stream data model and base tokenization."""

import random
import re

import pytest

from dyntok.corpus import (
    Batch,
    Token,
    TokenSequence,
    Vocabulary,
    base_tokenize,
    dump_token_stream,
    dump_vocabulary,
    load_vocabulary,
    parse_token_stream,
    pre_tokenize,
)
from dyntok.errors import InvariantViolation, MalformedLine, UncoveredCharacter


class TestPreTokenize:
    def test_empty(self):
        assert pre_tokenize("") == []

    def test_whitespace_split(self):
        assert pre_tokenize("A substantial improvement") == ["A", "substantial", "improvement"]

    def test_whitespace_runs(self):
        # oracle: regex split on whitespace runs
        text = "Uboreshaji  mkubwa"
        assert pre_tokenize(text) == ["Uboreshaji", "mkubwa"]
        assert pre_tokenize(text) == [w for w in re.split(r"\s+", text) if w]

    def test_idempotent_on_joined_form(self):
        rng = random.Random(0)
        for _ in range(50):
            words = ["".join(rng.choice("abcXYZ") for _ in range(rng.randint(1, 6)))
                     for _ in range(rng.randint(0, 8))]
            joined = " ".join(words)
            assert pre_tokenize(joined) == words
            assert pre_tokenize(" ".join(pre_tokenize(joined))) == words

    def test_mixed_whitespace(self):
        assert pre_tokenize("a\tb\n c d") == ["a", "b", "c", "d"]


class TestBaseTokenize:
    def test_merge_chain(self):
        model = Vocabulary(("a", "b", "c", "ab", "abc"), (("a", "b"), ("ab", "c")))
        assert [t.text for t in base_tokenize("abc", model).tokens] == ["abc"]

    def test_single_char(self):
        model = Vocabulary(("e",), ())
        seq = base_tokenize("e", model)
        assert [t.text for t in seq.tokens] == ["e"]
        assert seq.tokens[0].word_start

    def test_concatenated_merge_conflict(self, bpe_abc, bpe_ade):
        from dyntok.expansion import concat_merge_tables

        merged = concat_merge_tables(bpe_abc, bpe_ade)
        assert [t.text for t in base_tokenize("ade", merged).tokens] == ["a", "de"]

    def test_uncovered_character(self):
        model = Vocabulary(("a", "b"), ())
        with pytest.raises(UncoveredCharacter) as exc:
            base_tokenize("ab axb", model)
        assert exc.value.char == "x"
        assert exc.value.position == 4

    def test_word_start_flags(self):
        model = Vocabulary(("a", "b", "ab"), (("a", "b"),))
        seq = base_tokenize("ab aab", model)
        assert [(t.text, t.word_start) for t in seq.tokens] == [
            ("ab", True),
            ("a", True),
            ("ab", False),
        ]

    def test_losslessness_random(self):
        rng = random.Random(1)
        alphabet = "abcd"
        for _ in range(100):
            # random model over the alphabet with a few random valid merges
            tokens = list(alphabet)
            merges = []
            for _ in range(rng.randint(0, 6)):
                l, r = rng.choice(tokens), rng.choice(tokens)
                merges.append((l, r))
                if l + r not in tokens:
                    tokens.append(l + r)
            model = Vocabulary(tuple(tokens), tuple(merges))
            words = ["".join(rng.choice(alphabet) for _ in range(rng.randint(1, 8)))
                     for _ in range(rng.randint(0, 6))]
            text = "  ".join(words)
            seq = base_tokenize(text, model)
            assert seq.words() == words  # per-word concatenation reconstructs input
            for tok in seq.tokens:
                assert " " not in tok.text

    def test_empty_text(self):
        model = Vocabulary(("a",), ())
        assert base_tokenize("", model).tokens == ()


class TestTypes:
    def test_token_nonempty(self):
        with pytest.raises(ValueError):
            Token("", True)

    def test_sequence_first_token_word_start(self):
        with pytest.raises(ValueError):
            TokenSequence("x", (Token("a", False),))

    def test_batch_unique_ids(self):
        seq = TokenSequence("x", (Token("a", True),))
        with pytest.raises(ValueError):
            Batch((seq, seq))

    def test_vocabulary_duplicate(self):
        with pytest.raises(ValueError):
            Vocabulary(("a", "a"))

    def test_vocabulary_merge_product_missing(self):
        with pytest.raises(ValueError):
            Vocabulary(("a", "b"), (("a", "b"),))

    def test_empty_sequence_legal(self):
        seq = TokenSequence("empty", ())
        assert len(seq) == 0
        assert seq.words() == []


class TestParseTokenStream:
    def test_one_valid_line(self):
        data = '{"id": "s1", "tokens": [{"t": "ab", "w": true}, {"t": "c", "w": false}]}\n'
        batch = parse_token_stream(data.encode())
        assert len(batch) == 1
        assert batch.sequences[0].words() == ["abc"]

    def test_first_token_not_word_start(self):
        data = '{"id": "s1", "tokens": [{"t": "a", "w": false}]}\n'
        with pytest.raises(InvariantViolation):
            parse_token_stream(data)

    def test_empty_file(self):
        assert len(parse_token_stream(b"")) == 0

    def test_malformed_json(self):
        with pytest.raises(MalformedLine) as exc:
            parse_token_stream('{"id": "a", "tokens": []}\nnot json\n')
        assert exc.value.line_no == 2

    def test_missing_keys(self):
        with pytest.raises(MalformedLine):
            parse_token_stream('{"id": "a"}\n')

    def test_duplicate_ids(self):
        line = '{"id": "a", "tokens": []}\n'
        with pytest.raises(InvariantViolation):
            parse_token_stream(line + line)

    def test_whitespace_in_token(self):
        data = '{"id": "a", "tokens": [{"t": "a b", "w": true}]}\n'
        with pytest.raises(InvariantViolation):
            parse_token_stream(data)

    def test_marker_conversion(self):
        data = (
            '{"id": "a", "tokens": [{"t": "▁Ubo", "w": false}, {"t": "resh", "w": false}]}\n'
        )
        batch = parse_token_stream(data, marker="▁")
        toks = batch.sequences[0].tokens
        assert [(t.text, t.word_start) for t in toks] == [("Ubo", True), ("resh", False)]

    def test_round_trip(self, english_batch):
        assert parse_token_stream(dump_token_stream(english_batch)) == english_batch

    def test_round_trip_fuzz(self):
        from conftest import random_batch

        rng = random.Random(77)
        for _ in range(50):
            batch = random_batch(rng, alphabet="abé中")  # non-ASCII included
            assert parse_token_stream(dump_token_stream(batch)) == batch


class TestVocabularyIO:
    def test_round_trip(self):
        vocab = Vocabulary(("a", "b", "ab"), (("a", "b"),))
        assert load_vocabulary({"tokens": ["a", "b", "ab"], "merges": [["a", "b"]]}) == vocab
        import json

        assert load_vocabulary(json.loads(dump_vocabulary(vocab))) == vocab

    def test_merges_optional(self):
        vocab = load_vocabulary({"tokens": ["x", "y"]})
        assert vocab.merges is None
