"""Token stream data model, pre-tokenization and base BPE application.

Tokens carry an explicit ``word_start`` flag instead of a marker glyph;
ingested streams that use marker conventions (e.g. a leading "▁")
can be converted while parsing.  All types are immutable after
construction and safe to share between workers.
"""

from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import InvariantViolation, MalformedLine, UncoveredCharacter

_WS_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class Token:
    """A surface string plus a flag marking the first token of a pre-token."""

    text: str
    word_start: bool

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text must be non-empty")


@dataclass(frozen=True)
class TokenSequence:
    """Ordered tokens of one sample."""

    sample_id: str
    tokens: tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.tokens and not self.tokens[0].word_start:
            raise ValueError(f"sample {self.sample_id!r}: first token must start a word")

    def __len__(self) -> int:
        return len(self.tokens)

    def words(self) -> list[str]:
        """Concatenated token texts of each word_start-delimited run."""
        out: list[str] = []
        for tok in self.tokens:
            if tok.word_start:
                out.append(tok.text)
            else:
                out[-1] += tok.text
        return out


@dataclass(frozen=True)
class Batch:
    """Ordered sequences; the unit the batch-level merge update operates on."""

    sequences: tuple[TokenSequence, ...]

    def __post_init__(self):
        object.__setattr__(self, "sequences", tuple(self.sequences))
        seen = set()
        for seq in self.sequences:
            if seq.sample_id in seen:
                raise ValueError(f"duplicate sample_id {seq.sample_id!r} in batch")
            seen.add(seq.sample_id)

    def __len__(self) -> int:
        return len(self.sequences)

    def total_tokens(self) -> int:
        return sum(len(s) for s in self.sequences)


@dataclass(frozen=True)
class Vocabulary:
    """Ordered set of token strings, optionally with ordered merge rules."""

    tokens: tuple[str, ...]
    merges: tuple[tuple[str, str], ...] | None = None
    _token_set: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        token_set = frozenset(self.tokens)
        if len(token_set) != len(self.tokens):
            raise ValueError("vocabulary contains duplicate tokens")
        if self.merges is not None:
            merges = tuple((l, r) for l, r in self.merges)
            object.__setattr__(self, "merges", merges)
            for l, r in merges:
                if l + r not in token_set:
                    raise ValueError(f"merge product {l + r!r} missing from tokens")
        object.__setattr__(self, "_token_set", token_set)

    def __contains__(self, token: str) -> bool:
        return token in self._token_set

    def __len__(self) -> int:
        return len(self.tokens)


def pre_tokenize(text: str) -> list[str]:
    """Split text into pre-tokens: maximal runs of non-whitespace characters."""
    return text.split()


def _iter_pre_tokens_with_offsets(text: str) -> Iterator[tuple[str, int]]:
    for m in _WS_RE.finditer(text):
        yield m.group(), m.start()


def _apply_merges(parts: list[str], merges: Iterable[tuple[str, str]]) -> list[str]:
    # One left-to-right pass per rule is exhaustive: a merged token can never
    # equal either side of the rule that produced it.
    for left, right in merges:
        i = 0
        out: list[str] = []
        n = len(parts)
        while i < n:
            if i + 1 < n and parts[i] == left and parts[i + 1] == right:
                out.append(left + right)
                i += 2
            else:
                out.append(parts[i])
                i += 1
        parts = out
    return parts


def base_tokenize(text: str, model: Vocabulary, sample_id: str = "") -> TokenSequence:
    """Tokenize under the initial scheme: chars, then merge rules in table order.

    Every character must be covered by ``model.tokens``; merge rules are
    applied rule by rule, each left-to-right over the word.  ``model`` may be
    any object with ``tokens`` membership and an ordered ``merges`` attribute.
    """
    merges = model.merges or ()
    tokens: list[Token] = []
    for word, offset in _iter_pre_tokens_with_offsets(text):
        for i, ch in enumerate(word):
            if ch not in model:
                raise UncoveredCharacter(ch, offset + i)
        parts = _apply_merges(list(word), merges)
        for j, part in enumerate(parts):
            tokens.append(Token(part, word_start=(j == 0)))
    return TokenSequence(sample_id, tuple(tokens))


def parse_token_stream(data: bytes | str, marker: str | None = None) -> Batch:
    """Parse the JSONL token-stream format into a validated batch.

    One object per line: ``{"id": ..., "tokens": [{"t": ..., "w": ...}, ...]}``.
    When ``marker`` is given, a token text starting with it is converted to
    the flag form: marker stripped, word_start forced true.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    sequences: list[TokenSequence] = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLine(line_no, str(exc)) from None
        if not isinstance(obj, dict) or "id" not in obj or "tokens" not in obj:
            raise MalformedLine(line_no, "expected object with 'id' and 'tokens'")
        sample_id = obj["id"]
        if not isinstance(sample_id, str):
            raise MalformedLine(line_no, "'id' must be a string")
        if sample_id in seen_ids:
            raise InvariantViolation(sample_id, f"duplicate sample_id (line {line_no})")
        seen_ids.add(sample_id)
        tokens: list[Token] = []
        for k, t in enumerate(obj["tokens"]):
            if not isinstance(t, dict) or "t" not in t or "w" not in t:
                raise MalformedLine(line_no, f"token {k} must be an object with 't' and 'w'")
            text, word_start = t["t"], t["w"]
            if not isinstance(text, str) or not isinstance(word_start, bool):
                raise MalformedLine(line_no, f"token {k} has wrong field types")
            if marker and text.startswith(marker):
                text = text[len(marker):]
                word_start = True
            if not text:
                raise InvariantViolation(sample_id, f"empty token text at index {k} (line {line_no})")
            if any(c.isspace() for c in text):
                raise InvariantViolation(
                    sample_id, f"token {text!r} at index {k} spans a pre-token boundary (line {line_no})"
                )
            if k == 0 and not word_start:
                raise InvariantViolation(sample_id, f"first token must have word_start=true (line {line_no})")
            tokens.append(Token(text, word_start))
        sequences.append(TokenSequence(sample_id, tuple(tokens)))
    try:
        return Batch(tuple(sequences))
    except ValueError as exc:  # pragma: no cover - duplicate ids caught above
        raise InvariantViolation("<batch>", str(exc)) from None


def dump_token_stream(batch: Batch) -> str:
    """Serialize a batch back to the JSONL token-stream format."""
    lines = []
    for seq in batch.sequences:
        obj = {
            "id": seq.sample_id,
            "tokens": [{"t": t.text, "w": t.word_start} for t in seq.tokens],
        }
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


def load_token_stream(path: str | Path, marker: str | None = None) -> Batch:
    return parse_token_stream(Path(path).read_bytes(), marker=marker)


def load_vocabulary(source: str | Path | io.IOBase | dict) -> Vocabulary:
    """Read a vocabulary JSON object: {"tokens": [...], "merges": [[l, r], ...]}."""
    if isinstance(source, dict):
        obj = source
    elif isinstance(source, io.IOBase):
        obj = json.load(source)
    else:
        obj = json.loads(Path(source).read_text(encoding="utf-8"))
    tokens = obj["tokens"]
    merges = obj.get("merges")
    return Vocabulary(
        tuple(tokens),
        tuple((l, r) for l, r in merges) if merges is not None else None,
    )


def dump_vocabulary(vocab: Vocabulary) -> str:
    obj: dict = {"tokens": list(vocab.tokens)}
    if vocab.merges is not None:
        obj["merges"] = [list(m) for m in vocab.merges]
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"
