"""Substitute ranking by prediction score, word frequency, and similarity.

Each feature column is min-max normalized over the candidate set before the
weighted sum: raw prediction scores (log-probabilities), Zipf frequencies
(~0-8), and cosine similarities (-1..1) live on incompatible scales, so
weights of order 0.04 are only meaningful after normalization. A constant
column normalizes to 0. Lookups into the lexical resources use one fold:
``str.casefold()``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import errors
from .generator import CandidateWord


@dataclass(frozen=True)
class FeatureVector:
    prediction: float   # CandidateWord.total_score
    frequency: float    # Zipf value, 0 when out of vocabulary
    similarity: float   # cosine to the complex word, 0 when either side is OOV

    def __post_init__(self) -> None:
        if self.frequency < 0:
            raise ValueError("frequency must be >= 0")
        if not -1.0 <= self.similarity <= 1.0:
            raise ValueError("similarity must lie in [-1, 1]")


@dataclass(frozen=True)
class RankingWeights:
    prediction: float
    frequency: float
    similarity: float

    def __post_init__(self) -> None:
        if min(self.prediction, self.frequency, self.similarity) < 0:
            raise ValueError("weights must be non-negative")


# Per-language presets; tuned on the shared-task validation splits.
PRESET_WEIGHTS: dict[str, RankingWeights] = {
    "en": RankingWeights(0.04, 0.04, 0.1),
    "es": RankingWeights(0.04, 0.02, 0.4),
    "pt": RankingWeights(0.04, 0.04, 0.4),
}

_LANG_ALIASES = {"eng_latn": "en", "spa_latn": "es", "por_latn": "pt"}


def weights_for_language(lang: str) -> RankingWeights | None:
    """Preset weights for a language code, or None when no preset exists."""
    key = lang.casefold()
    key = _LANG_ALIASES.get(key, key)
    return PRESET_WEIGHTS.get(key)


class LexicalResources:
    """Immutable per-language embedding store plus Zipf frequency table."""

    def __init__(
        self,
        vectors: Mapping[str, np.ndarray] | None = None,
        zipf: Mapping[str, float] | None = None,
    ):
        self.vectors = {k.casefold(): np.asarray(v, dtype=np.float64) for k, v in (vectors or {}).items()}
        self.zipf = {k.casefold(): float(v) for k, v in (zipf or {}).items()}
        dims = {v.shape for v in self.vectors.values()}
        if len(dims) > 1:
            raise ValueError(f"embedding vectors disagree on dimension: {sorted(dims)}")

    def frequency(self, word: str) -> float:
        return self.zipf.get(word.casefold(), 0.0)

    def similarity(self, a: str, b: str) -> float:
        va = self.vectors.get(a.casefold())
        vb = self.vectors.get(b.casefold())
        if va is None or vb is None:
            return 0.0
        na = float(np.linalg.norm(va))
        nb = float(np.linalg.norm(vb))
        if na == 0.0 or nb == 0.0:
            return 0.0
        cos = float(np.dot(va, vb) / (na * nb))
        return max(-1.0, min(1.0, cos))


def load_embeddings(path: str) -> dict[str, np.ndarray]:
    """Parse a text embedding file: header "count dim", then word + floats per line.

    Keys are casefolded; the first occurrence of a folded word wins.
    """
    vectors: dict[str, np.ndarray] = {}
    parsed = 0
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected 'count dimension' header")
        count, dim = int(header[0]), int(header[1])
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ")
            word, values = parts[0], [v for v in parts[1:] if v]
            if len(values) != dim:
                raise ValueError(f"{path}:{line_no}: expected {dim} floats, got {len(values)}")
            vectors.setdefault(word.casefold(), np.array(values, dtype=np.float64))
            parsed += 1
    if parsed != count:
        raise ValueError(f"{path}: header promised {count} vectors, found {parsed}")
    return vectors


def load_frequency_table(path: str) -> dict[str, float]:
    """Parse a two-column TSV "word<TAB>zipf"; casefolded keys, first wins."""
    table: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{line_no}: expected 'word<TAB>zipf'")
            table.setdefault(parts[0].casefold(), float(parts[1]))
    return table


def load_resources(embeddings_path: str | None, frequency_path: str | None) -> LexicalResources:
    return LexicalResources(
        vectors=load_embeddings(embeddings_path) if embeddings_path else None,
        zipf=load_frequency_table(frequency_path) if frequency_path else None,
    )


def compute_features(
    candidates: Sequence[CandidateWord],
    complex_word: str,
    resources: LexicalResources | None,
) -> list[FeatureVector]:
    """One feature vector per candidate, order-aligned with the input."""
    if not candidates:
        raise ValueError("candidate list is empty")
    if resources is None:
        raise errors.MissingResources("no lexical resources loaded")
    out = []
    for cand in candidates:
        assert cand.surface.casefold() != complex_word.casefold()
        out.append(
            FeatureVector(
                prediction=cand.total_score,
                frequency=resources.frequency(cand.surface),
                similarity=resources.similarity(cand.surface, complex_word),
            )
        )
    return out


def _minmax(column: Iterable[float]) -> list[float]:
    values = list(column)
    finite = [v for v in values if not math.isinf(v)]
    lo = min(finite) if finite else 0.0
    hi = max(finite) if finite else 0.0
    if hi == lo:
        return [0.0 for _ in values]
    # -inf predictions (zero-probability lookaheads) pin to the column floor
    return [(max(v, lo) - lo) / (hi - lo) if not math.isinf(v) else 0.0 for v in values]


def rank(
    candidates: Sequence[CandidateWord],
    features: Sequence[FeatureVector],
    weights: RankingWeights,
    top_n: int = 10,
) -> list[CandidateWord]:
    """Top-n candidates by the weighted sum of min-max normalized features.

    Ties break by raw prediction score, then surface lexicographic order;
    the result is a reordered truncation of the input, never inventing or
    duplicating candidates.
    """
    if len(candidates) != len(features):
        raise ValueError("features must be order-aligned with candidates")
    if weights.prediction == weights.frequency == weights.similarity == 0:
        raise ValueError("at least one ranking weight must be positive")
    pred = _minmax(f.prediction for f in features)
    freq = _minmax(f.frequency for f in features)
    sim = _minmax(f.similarity for f in features)
    scored = [
        (
            weights.prediction * pred[i] + weights.frequency * freq[i] + weights.similarity * sim[i],
            cand,
        )
        for i, cand in enumerate(candidates)
    ]
    scored.sort(key=lambda item: (-item[0], -item[1].total_score, item[1].surface))
    return [cand for _, cand in scored[:top_n]]


def rank_passthrough(candidates: Sequence[CandidateWord], top_n: int = 10) -> list[CandidateWord]:
    """Candidates in generator order, truncated to top_n (no-ranking mode)."""
    return list(candidates[:top_n])
