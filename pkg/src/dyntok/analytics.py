"""Sequence-length statistics and FLOPs-per-sample estimates.

The model cost is a two-term estimate: a dense term linear in sequence
length (2 * params * len) plus an attention term quadratic in it
(4 * len^2 * width * layers).  The embedding-predictor overhead is a
calibrated linear model over the unique new tokens it has to process, not
a reimplementation of any particular network.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .corpus import Batch
from .errors import DomainError, SampleMismatch
from .merger import reduction_percentage


@dataclass(frozen=True)
class LengthStats:
    language: str
    len_init: int
    len_word: int
    len_m: int
    samples: int
    reduction_pct: float
    avg_tokens_per_sample: float

    def __post_init__(self):
        if not self.len_word <= self.len_m <= self.len_init:
            raise DomainError(
                f"expected len_word <= len_m <= len_init, got "
                f"{self.len_word}, {self.len_m}, {self.len_init}"
            )
        if not 0 <= self.reduction_pct <= 100:
            raise DomainError(f"reduction_pct out of range: {self.reduction_pct}")

    @classmethod
    def from_totals(
        cls, language: str, len_init: int, len_m: int, len_word: int, samples: int
    ) -> "LengthStats":
        return cls(
            language=language,
            len_init=len_init,
            len_word=len_word,
            len_m=len_m,
            samples=samples,
            reduction_pct=reduction_percentage(len_init, len_m, len_word),
            avg_tokens_per_sample=len_m / samples if samples else 0.0,
        )

    def to_json_obj(self) -> dict:
        return {
            "language": self.language,
            "len_init": self.len_init,
            "len_word": self.len_word,
            "len_m": self.len_m,
            "samples": self.samples,
            "reduction_pct": self.reduction_pct,
            "avg_tokens_per_sample": self.avg_tokens_per_sample,
        }


@dataclass(frozen=True)
class ModelConfig:
    n_params: float
    d_model: int
    n_layers: int

    def __post_init__(self):
        if self.n_params <= 0 or self.d_model <= 0 or self.n_layers <= 0:
            raise ValueError("model configuration values must be positive")


MODEL_PRESETS: dict[str, ModelConfig] = {
    "mistral-7b": ModelConfig(n_params=7.24e9, d_model=4096, n_layers=32),
}


@dataclass(frozen=True)
class HypernetCostConfig:
    flops_per_processed_token: float

    def __post_init__(self):
        if self.flops_per_processed_token < 0:
            raise ValueError("flops_per_processed_token must be non-negative")


def sequence_stats(
    before: Batch, after: Batch, word_level: Batch, language: str
) -> LengthStats:
    """Aggregate token totals of the same samples at m=0, m and m_max."""
    ids = [s.sample_id for s in before.sequences]
    if ids != [s.sample_id for s in after.sequences] or ids != [
        s.sample_id for s in word_level.sequences
    ]:
        raise SampleMismatch("before/after/word-level batches must cover the same samples")
    return LengthStats.from_totals(
        language,
        len_init=before.total_tokens(),
        len_m=after.total_tokens(),
        len_word=word_level.total_tokens(),
        samples=len(before.sequences),
    )


def estimate_model_flops(seq_len: float, cfg: ModelConfig) -> float:
    """Per-sample forward cost: dense matmuls plus attention score/value term."""
    if seq_len < 0:
        raise DomainError(f"sequence length must be non-negative, got {seq_len}")
    return 2.0 * cfg.n_params * seq_len + 4.0 * seq_len * seq_len * cfg.d_model * cfg.n_layers


def estimate_hypernet_flops(
    n_unique_new_tokens: float,
    avg_decomposition_len: float,
    cost_cfg: HypernetCostConfig,
) -> float:
    """Cost of embedding the unique new tokens of a batch, linear model."""
    if n_unique_new_tokens < 0 or avg_decomposition_len < 0:
        raise DomainError("hypernet inputs must be non-negative")
    return n_unique_new_tokens * avg_decomposition_len * cost_cfg.flops_per_processed_token


def format_flops(value: float) -> str:
    """Human form matching the reporting convention (e.g. 10.1T, 169.3B)."""
    for cut, suffix in ((1e12, "T"), (1e9, "B"), (1e6, "M"), (1e3, "K")):
        if value >= cut:
            return f"{value / cut:.1f}{suffix}"
    return f"{value:.1f}"


@dataclass(frozen=True)
class FlopsReport:
    rows: tuple[dict, ...]

    def to_json(self) -> str:
        return json.dumps({"rows": list(self.rows)}, ensure_ascii=False, indent=2) + "\n"

    def to_text(self) -> str:
        header = ("Lng", "Red.%", "Seq.Len", "Model", "Hypernet", "HN/total")
        body = [
            (
                r["language"],
                f"{r['reduction_pct']:.1f}",
                f"{r['avg_seq_len']:.1f}",
                format_flops(r["model_flops"]),
                format_flops(r["hn_flops"]),
                f"{r['hn_fraction_pct']:.1f}%",
            )
            for r in self.rows
        ]
        widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h)
                  for i, h in enumerate(header)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
        for row in body:
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
        return "\n".join(lines) + "\n"


def flops_report(
    stats: list[LengthStats],
    cfg: ModelConfig,
    cost_cfg: HypernetCostConfig,
    hn_tokens: list[tuple[float, float]] | None = None,
) -> FlopsReport:
    """Model/hypernet FLOPs and their ratio, one row per stats entry.

    ``hn_tokens`` supplies per-row (unique new tokens, average base
    decomposition length); without it the hypernet side is zero.
    """
    if hn_tokens is not None and len(hn_tokens) != len(stats):
        raise DomainError("hn_tokens must align with stats rows")
    rows = []
    for i, st in enumerate(stats):
        model = estimate_model_flops(st.avg_tokens_per_sample, cfg)
        if hn_tokens is None:
            hn = 0.0
        else:
            n_unique, avg_len = hn_tokens[i]
            hn = estimate_hypernet_flops(n_unique, avg_len, cost_cfg)
        total = hn + model
        rows.append(
            {
                "language": st.language,
                "reduction_pct": st.reduction_pct,
                "model_flops": model,
                "hn_flops": hn,
                "hn_fraction_pct": 100.0 * hn / total if total else 0.0,
                "avg_seq_len": st.avg_tokens_per_sample,
            }
        )
    return FlopsReport(tuple(rows))
