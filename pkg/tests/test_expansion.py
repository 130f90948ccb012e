"""Tests for BPE training, table concatenation and longest-prefix tokenization."""

import random

import pytest

from dyntok.corpus import Vocabulary, base_tokenize
from dyntok.errors import DomainError, EmptyCorpus, UncoveredCharacter
from dyntok.expansion import (
    BpeModel,
    PrefixTrie,
    concat_merge_tables,
    dump_bpe_model,
    find_unreachable_tokens,
    lp_tokenize,
    load_bpe_model,
    train_bpe,
    union_vocab,
)

CONFLICT_VOCAB = ("a", "b", "c", "d", "e", "ab", "abc", "de", "ad", "ade", "bc")


class TestTrainBpe:
    def test_tiny_corpus_stops_early(self):
        # oracle: hand-run BPE on "ab ab ab"
        model = train_bpe(["ab ab ab"], target_size=4)
        assert model.alphabet == ("a", "b")
        assert model.merges == (("a", "b"),)
        assert model.tokens == ("a", "b", "ab")

    def test_target_equals_alphabet(self):
        model = train_bpe(["abc cba"], target_size=3)
        assert model.merges == ()

    def test_overlap_counting_first_merge(self):
        # oracle: (a,a) counts 6 with overlap counting, (a,b) counts 3
        model = train_bpe(["aaab"] * 3, target_size=5, min_pair_freq=2)
        assert model.merges[0] == ("a", "a")
        assert model.tokens == ("a", "b", "aa", "aaa", "aaab")

    def test_min_pair_freq_stops(self):
        model = train_bpe(["ab cd"], target_size=10, min_pair_freq=2)
        assert model.merges == ()  # every pair occurs once

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            train_bpe([], target_size=5)
        with pytest.raises(EmptyCorpus):
            train_bpe(["", "   "], target_size=5)

    def test_target_below_alphabet(self):
        with pytest.raises(DomainError):
            train_bpe(["abc"], target_size=2)

    def test_determinism(self):
        rng = random.Random(4)
        corpus = [
            " ".join("".join(rng.choice("abcd") for _ in range(rng.randint(1, 6)))
                     for _ in range(rng.randint(1, 10)))
            for _ in range(20)
        ]
        m1 = train_bpe(corpus, target_size=20, min_pair_freq=2)
        m2 = train_bpe(list(corpus), target_size=20, min_pair_freq=2)
        assert m1.merges == m2.merges

    def test_word_weighting(self):
        # "xy" appears 3 times as one word type; pair (x,y) weight is 3
        model = train_bpe(["xy xy", "xy z"], target_size=4, min_pair_freq=3)
        assert model.merges == (("x", "y"),)


class TestUnionVocab:
    def test_disjoint(self):
        v = union_vocab(Vocabulary(("a", "b", "c")), BpeModel(("x", "y"), ()))
        assert v.tokens == ("a", "b", "c", "x", "y")
        assert v.merges is None

    def test_idempotent_on_identical(self):
        base = Vocabulary(("a", "b"))
        out = union_vocab(base, BpeModel(("a", "b"), ()))
        assert out.tokens == ("a", "b")

    def test_million_scale_counts(self):
        # oracle: set arithmetic at the advertised expansion scale
        v_init = Vocabulary(tuple(f"i{n}" for n in range(32_000)))
        shared = [f"i{n}" for n in range(7_000)]
        novel = [f"n{n}" for n in range(968_000)]
        alphabet = tuple({c for t in shared + novel for c in t})
        model = BpeModel.__new__(BpeModel)  # bypass merge derivation for scale
        object.__setattr__(model, "alphabet", alphabet)
        object.__setattr__(model, "merges", ())
        object.__setattr__(model, "tokens", tuple(shared + novel))
        object.__setattr__(model, "_token_set", frozenset(shared + novel))
        out = union_vocab(v_init, model)
        assert len(out.tokens) == 32_000 + 968_000
        assert len(set(out.tokens)) == 1_000_000

    def test_order_preserved(self):
        v = union_vocab(Vocabulary(("b", "a")), BpeModel(("a", "c"), ()))
        assert v.tokens == ("b", "a", "c")


class TestConcatMergeTables:
    def test_concatenated_rule_order(self, bpe_abc, bpe_ade):
        merged = concat_merge_tables(bpe_abc, bpe_ade)
        assert merged.merges == (
            ("a", "b"), ("ab", "c"), ("d", "e"), ("a", "d"), ("ad", "e"), ("b", "c"),
        )
        assert merged.tokens == CONFLICT_VOCAB

    def test_right_empty(self, bpe_abc):
        empty = BpeModel(bpe_abc.alphabet, ())
        assert concat_merge_tables(bpe_abc, empty).merges == bpe_abc.merges

    def test_self_concat_dedups(self, bpe_abc):
        merged = concat_merge_tables(bpe_abc, bpe_abc)
        assert merged.merges == bpe_abc.merges

    def test_alphabet_mismatch(self, bpe_abc):
        other = BpeModel(("a", "b"), ())
        with pytest.raises(DomainError):
            concat_merge_tables(bpe_abc, other)

    def test_refinement_property(self):
        # concatenation can only shorten merge tokenization output
        rng = random.Random(9)
        for _ in range(30):
            alphabet = tuple("abc")
            models = []
            for _ in range(2):
                tokens = list(alphabet)
                merges = []
                for _ in range(rng.randint(0, 5)):
                    l, r = rng.choice(tokens), rng.choice(tokens)
                    merges.append((l, r))
                    if l + r not in tokens:
                        tokens.append(l + r)
                models.append(BpeModel(alphabet, tuple(merges)))
            merged = concat_merge_tables(models[0], models[1])
            for _ in range(10):
                s = "".join(rng.choice("abc") for _ in range(rng.randint(1, 12)))
                n_merged = len(base_tokenize(s, merged).tokens)
                n_t1 = len(base_tokenize(s, models[0]).tokens)
                assert n_merged <= n_t1


class TestFindUnreachable:
    def test_concatenated_tables_conflict(self, bpe_abc, bpe_ade):
        merged = concat_merge_tables(bpe_abc, bpe_ade)
        assert find_unreachable_tokens(merged) == ["ade"]

    def test_tokenizer2_alone(self, bpe_ade):
        assert find_unreachable_tokens(bpe_ade) == []

    def test_zero_merges(self):
        assert find_unreachable_tokens(BpeModel(("a", "b"), ())) == []

    def test_unreachable_never_produced(self, bpe_abc, bpe_ade):
        merged = concat_merge_tables(bpe_abc, bpe_ade)
        unreachable = set(find_unreachable_tokens(merged))
        for token in merged.tokens:
            produced = {t.text for t in base_tokenize(token, merged).tokens}
            assert not (produced & unreachable)


class TestLpTokenize:
    def test_ade_full_token(self):
        vocab = Vocabulary(CONFLICT_VOCAB)
        assert [t.text for t in lp_tokenize("ade", vocab).tokens] == ["ade"]

    def test_single_char(self):
        vocab = Vocabulary(("e",))
        assert [t.text for t in lp_tokenize("e", vocab).tokens] == ["e"]

    def test_greedy_split(self):
        vocab = Vocabulary(CONFLICT_VOCAB)
        assert [t.text for t in lp_tokenize("adebc", vocab).tokens] == ["ade", "bc"]

    def test_uncovered(self):
        vocab = Vocabulary(("a",))
        with pytest.raises(UncoveredCharacter) as exc:
            lp_tokenize("aZa", vocab)
        assert exc.value.char == "Z"
        assert exc.value.position == 1

    def test_word_start_flags(self):
        vocab = Vocabulary(("ad", "e", "a"))
        seq = lp_tokenize("ade ad", vocab)
        assert [(t.text, t.word_start) for t in seq.tokens] == [
            ("ad", True), ("e", False), ("ad", True),
        ]

    def test_reusable_trie(self):
        vocab = Vocabulary(CONFLICT_VOCAB)
        trie = PrefixTrie(vocab.tokens)
        out1 = lp_tokenize("abc", vocab, trie)
        out2 = lp_tokenize("abc", vocab)
        assert out1.tokens == out2.tokens

    def test_losslessness_and_greediness(self):
        rng = random.Random(10)
        for _ in range(40):
            tokens = {"a", "b", "c"}
            for _ in range(rng.randint(0, 10)):
                tokens.add("".join(rng.choice("abc") for _ in range(rng.randint(2, 5))))
            vocab = Vocabulary(tuple(sorted(tokens)))
            trie = PrefixTrie(vocab.tokens)
            words = ["".join(rng.choice("abc") for _ in range(rng.randint(1, 12)))
                     for _ in range(rng.randint(1, 5))]
            text = " ".join(words)
            seq = lp_tokenize(text, vocab, trie)
            assert seq.words() == words  # lossless per word
            # greediness oracle: brute-force scan of the whole vocabulary
            for word in words:
                i = 0
                for tok in lp_tokenize(word, vocab, trie).tokens:
                    remaining = word[i:]
                    assert remaining.startswith(tok.text)
                    longer = [
                        v for v in vocab.tokens
                        if len(v) > len(tok.text) and remaining.startswith(v)
                    ]
                    assert not longer
                    i += len(tok.text)
                assert i == len(word)

    def test_never_crosses_whitespace(self):
        vocab = Vocabulary(("a", "b", "ab"))
        seq = lp_tokenize("a b", vocab)
        assert [t.text for t in seq.tokens] == ["a", "b"]
        assert all(t.word_start for t in seq.tokens)


class TestTrieShape:
    def test_terminal_count_matches_vocab(self):
        tokens = ("a", "ab", "abc", "b")
        trie = PrefixTrie(tokens)
        assert trie.size == len(tokens)

    def test_duplicate_tokens_counted_once(self):
        assert PrefixTrie(("a", "a")).size == 1

    def test_longest_prefix_none(self):
        trie = PrefixTrie(("xyz",))
        assert trie.longest_prefix("xy", 0) == 0


class TestBpeModelIO:
    def test_round_trip(self, bpe_abc):
        obj = dump_bpe_model(bpe_abc)
        import json

        loaded = load_bpe_model(json.loads(obj))
        assert loaded == bpe_abc

    def test_validation(self):
        with pytest.raises(ValueError):
            BpeModel(("a",), (("a", "b"),))  # b not producible
        with pytest.raises(ValueError):
            BpeModel(("ab",), ())  # multi-char alphabet entry
