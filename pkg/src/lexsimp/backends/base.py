"""Model-scoring contract shared by every backend.

A backend wraps an autoregressive encoder-decoder model: encode a source
sentence once, then query next-token distributions and continuation scores
against that encoding any number of times. All queries are read-only and
deterministic, so encodings may be shared freely across worker threads.
"""

from __future__ import annotations

import abc
import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .. import errors

TokenId = int
Span = tuple[int, int]


class BoundaryConvention(str, enum.Enum):
    """How the vocabulary marks pieces that begin a new word."""

    MARKER_PREFIX = "marker-prefix"  # marker at piece start, sentencepiece-style
    MARKER_SUFFIX = "marker-suffix"  # marker at piece end means the word continues
    NONE = "none"                    # word-level vocabulary, every piece is a word


@dataclass(frozen=True)
class SpecialTokens:
    """Role-based special token ids.

    ``bos`` is the token the decoder must start with (for NLLB-style
    checkpoints this is the checkpoint's decoder-start token, whatever its
    surface form). ``lang_tags`` maps target-language codes to the tag token
    that follows it, when the model uses language tags.
    """

    bos: TokenId | None
    eos: TokenId
    lang_tags: Mapping[str, TokenId] = field(default_factory=dict)

    def all_ids(self) -> frozenset[TokenId]:
        ids = {self.eos, *self.lang_tags.values()}
        if self.bos is not None:
            ids.add(self.bos)
        return frozenset(ids)


@dataclass(frozen=True)
class ModelInfo:
    vocab_size: int
    boundary: BoundaryConvention
    boundary_marker: str
    special_tokens: SpecialTokens
    languages: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.languages:
            raise ValueError("supported language list must be non-empty")
        bad = [i for i in self.special_tokens.all_ids() if not 0 <= i < self.vocab_size]
        if bad:
            raise ValueError(f"special token ids out of range: {bad}")

    def decoder_start_ids(self, tgt_lang: str) -> tuple[TokenId, ...]:
        """Tokens every decoder prefix must begin with for this target language.

        The caller prepends these explicitly; backends never add them.
        """
        start: list[TokenId] = []
        if self.special_tokens.bos is not None:
            start.append(self.special_tokens.bos)
        if self.special_tokens.lang_tags:
            try:
                start.append(self.special_tokens.lang_tags[tgt_lang])
            except KeyError:
                raise ValueError(f"no language tag for {tgt_lang!r}") from None
        return tuple(start)


@dataclass(frozen=True)
class TokenDistribution:
    """Next-token log-probabilities for one decoder position.

    Entries are sorted by (logprob descending, token id ascending) and hold
    only tokens with non-zero probability. ``truncated`` is set when the
    query asked for fewer than ``vocab_size`` tokens.
    """

    entries: tuple[tuple[TokenId, float], ...]
    truncated: bool

    def ids(self) -> list[TokenId]:
        return [tid for tid, _ in self.entries]


@dataclass(frozen=True)
class SourceEncoding:
    """Opaque handle for repeated decoder queries against one encoded source."""

    source_ids: tuple[TokenId, ...]
    src_lang: str
    tgt_lang: str
    handle: object


class Backend(abc.ABC):
    """Stateless-per-query scoring interface over an immutable encoding."""

    @abc.abstractmethod
    def model_info(self) -> ModelInfo:
        """Static model metadata; stable across the backend's lifetime."""

    @abc.abstractmethod
    def tokenize(self, text: str, lang: str) -> tuple[list[TokenId], list[Span]]:
        """Token ids plus per-token character spans into ``text``.

        Spans are non-overlapping, ascending, and cover every
        non-whitespace character.
        """

    @abc.abstractmethod
    def detokenize(self, ids: Sequence[TokenId]) -> str:
        """Text for ``ids``; round-trips tokenize up to whitespace normalization."""

    @abc.abstractmethod
    def encode_source(self, text: str, src_lang: str, tgt_lang: str) -> SourceEncoding:
        """Encode ``text`` once for any number of subsequent decoder queries."""

    @abc.abstractmethod
    def next_token_logprobs(
        self, enc: SourceEncoding, decoder_prefix: Sequence[TokenId], top_n: int
    ) -> TokenDistribution:
        """Top ``top_n`` next tokens with exact conditional log-probabilities."""

    @abc.abstractmethod
    def score_continuation(
        self,
        enc: SourceEncoding,
        decoder_prefix: Sequence[TokenId],
        continuation: Sequence[TokenId],
    ) -> float:
        """Sum of conditional token log-probabilities along ``continuation``."""

    @abc.abstractmethod
    def token_text(self, token_id: TokenId) -> str:
        """Marker-stripped surface of one vocabulary piece."""

    @abc.abstractmethod
    def token_starts_word(self, token_id: TokenId) -> bool:
        """Whether the piece may begin a new word; False for special tokens."""


def check_decoder_start(
    info: ModelInfo, tgt_lang: str, decoder_prefix: Sequence[TokenId]
) -> tuple[TokenId, ...]:
    """Validate the required start tokens and return them.

    Raises InvalidPrefix when the prefix does not begin with them.
    """
    start = info.decoder_start_ids(tgt_lang)
    if tuple(decoder_prefix[: len(start)]) != start:
        raise errors.InvalidPrefix(
            f"decoder prefix must begin with start tokens {list(start)}, "
            f"got {list(decoder_prefix[: len(start)])}"
        )
    return start
