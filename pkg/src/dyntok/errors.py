"""Exception types shared across the package.

Every error raised on bad data derives from :class:`DynTokError`, so the
CLI can separate data problems (exit code 3) from genuine bugs (exit 4).
"""

from __future__ import annotations


class DynTokError(Exception):
    """Base class for all data and domain errors."""


class UncoveredCharacter(DynTokError):
    """A character of the input is not part of the model's token set."""

    def __init__(self, char: str, position: int):
        super().__init__(f"character {char!r} at position {position} is not covered")
        self.char = char
        self.position = position


class MalformedLine(DynTokError):
    """A token-stream line is not valid JSON or misses required keys."""

    def __init__(self, line_no: int, reason: str = ""):
        msg = f"malformed token-stream line {line_no}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.line_no = line_no


class InvariantViolation(DynTokError):
    """A parsed object violates one of its declared invariants."""

    def __init__(self, sample_id: str, description: str):
        super().__init__(f"sample {sample_id!r}: {description}")
        self.sample_id = sample_id
        self.description = description


class NoMergeablePair(DynTokError):
    """No adjacent intra-word token pair exists to merge."""


class DomainError(DynTokError):
    """Numeric arguments outside the documented domain."""


class MissingEmbedding(DynTokError):
    """A subword has no row in the backing embedding table."""

    def __init__(self, subword: str):
        super().__init__(f"no embedding for token {subword!r}")
        self.subword = subword


class BatchEmbeddingError(DynTokError):
    """One or more tokens of a batch vocabulary failed to embed."""

    def __init__(self, failures: dict[str, Exception]):
        toks = ", ".join(repr(t) for t in sorted(failures))
        super().__init__(f"failed to embed {len(failures)} token(s): {toks}")
        self.failures = failures


class FormatError(DynTokError):
    """A binary blob does not follow the expected layout."""

    def __init__(self, offset: int, reason: str):
        super().__init__(f"format error at byte {offset}: {reason}")
        self.offset = offset
        self.reason = reason


class DimensionMismatch(DynTokError):
    """Declared and actual sizes disagree."""


class TooFewRows(DynTokError):
    """Index construction needs at least one row per leaf."""


class EmptyCorpus(DynTokError):
    """Training corpus contains no pre-tokens."""


class EmptyInput(DynTokError):
    """An operation that needs at least one element got none."""


class SampleMismatch(DynTokError):
    """Batches that must cover the same samples do not."""
