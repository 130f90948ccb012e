"""Shared fixtures: worked compression examples and random batch makers."""

import random

import pytest

from dyntok.corpus import Batch, Token, TokenSequence
from dyntok.expansion import BpeModel


def make_sequence(sample_id, words):
    """Build a sequence from a list of words, each a list of token texts."""
    tokens = []
    for word in words:
        for i, text in enumerate(word):
            tokens.append(Token(text, word_start=(i == 0)))
    return TokenSequence(sample_id, tuple(tokens))


ENGLISH_WORDS = [
    ["A"],
    ["sub", "stantial"],
    ["im", "prove", "ment"],
    ["fosters"],
    ["further"],
    ["im", "prove", "ment", "s"],
]

SWAHILI_WORDS = [
    ["U", "bor", "esh", "aj", "i"],
    ["mk", "ub", "wa"],
    ["una", "ku", "za"],
    ["u", "bor", "esh", "aj", "i"],
    ["za", "idi"],
]


@pytest.fixture
def english_batch():
    return Batch((make_sequence("en-0", ENGLISH_WORDS),))


@pytest.fixture
def swahili_batch():
    return Batch((make_sequence("sw-0", SWAHILI_WORDS),))


@pytest.fixture
def bpe_abc():
    return BpeModel(tuple("abcde"), (("a", "b"), ("ab", "c"), ("d", "e")))


@pytest.fixture
def bpe_ade():
    return BpeModel(tuple("abcde"), (("a", "d"), ("ad", "e"), ("b", "c")))


def random_batch(rng: random.Random, max_sequences=8, max_tokens=30, alphabet="abcdefg"):
    """Random batch of word-structured sequences for property tests."""
    sequences = []
    for s in range(rng.randint(1, max_sequences)):
        budget = rng.randint(0, max_tokens)
        words = []
        while budget > 0:
            n = min(rng.randint(1, 5), budget)
            word = [
                "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 3)))
                for _ in range(n)
            ]
            words.append(word)
            budget -= n
        sequences.append(make_sequence(f"s{s}", words))
    return Batch(tuple(sequences))
