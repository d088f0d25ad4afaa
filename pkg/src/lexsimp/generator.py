"""Substitute generation by prefix-forced decoding with suffix lookahead.

The decoder is forced through the tokens preceding the complex word, the
top candidates at the complex word's position are completed into whole
words, and each candidate is re-scored by the log-probability of the
original suffix following it. The lookahead term demotes candidates that
fit the prefix but break the rest of the sentence.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import errors
from .backends.base import (
    Backend,
    BoundaryConvention,
    ModelInfo,
    SourceEncoding,
    TokenDistribution,
    TokenId,
)

_SCORE_EPS = 1e-9


@dataclass(frozen=True)
class SimplificationTask:
    """One sentence, the complex-word character span, and a language code."""

    text: str
    complex_span: tuple[int, int]
    lang: str

    def __post_init__(self) -> None:
        start, end = self.complex_span
        if not (0 <= start < end <= len(self.text)):
            raise ValueError(f"complex_span {self.complex_span} out of bounds")
        word = self.text[start:end]
        if any(ch.isspace() for ch in word):
            raise ValueError(f"complex span {word!r} contains whitespace")
        if start > 0 and self.text[start - 1].isalnum():
            raise ValueError("complex span starts mid-word")
        if end < len(self.text) and self.text[end].isalnum():
            raise ValueError("complex span ends mid-word")

    @property
    def complex_word(self) -> str:
        return self.text[self.complex_span[0]:self.complex_span[1]]


@dataclass(frozen=True)
class DecoderPrefix:
    """Backend start tokens followed by the tokens strictly before the complex word."""

    ids: tuple[TokenId, ...]
    prefix_word_count: int


@dataclass(frozen=True)
class CandidateWord:
    """A generated substitute with its score components.

    ``total_score`` is the sum of the first-token log-probability, the
    word's own continuation pieces (0 for single-token words), and the
    suffix lookahead term.
    """

    surface: str
    token_path: tuple[TokenId, ...]
    first_token_logprob: float
    own_continuation_logprob: float
    lookahead_logprob: float
    total_score: float

    def __post_init__(self) -> None:
        parts = (
            self.first_token_logprob
            + self.own_continuation_logprob
            + self.lookahead_logprob
        )
        if abs(parts - self.total_score) > _SCORE_EPS:
            raise ValueError("total_score does not equal the sum of its components")


@dataclass(frozen=True)
class GeneratorConfig:
    k: int = 50                  # candidate words to return
    lookahead_words: int = 3     # suffix words scored per candidate
    first_token_pool: int = 200  # next-token pool before boundary filtering
    max_word_subtokens: int = 4

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.first_token_pool:
            raise ValueError("need first_token_pool >= k >= 1")
        if not 0 <= self.lookahead_words <= 5:
            raise ValueError("lookahead_words supported range is 0..5")
        if self.max_word_subtokens < 1:
            raise ValueError("max_word_subtokens must be >= 1")


def _is_pure_punctuation(text: str) -> bool:
    return bool(text) and not any(ch.isalnum() for ch in text)


def match_casing(candidate: str, complex_word: str) -> str:
    """Capitalize the candidate's first letter iff the complex word is capitalized."""
    if not candidate:
        return candidate
    if complex_word[:1].isupper():
        return candidate[:1].upper() + candidate[1:]
    return candidate[:1].lower() + candidate[1:]


def build_decoder_prefix(
    task: SimplificationTask, backend: Backend
) -> tuple[DecoderPrefix, list[str]]:
    """Force-decode prefix for the task plus the whitespace-split suffix words.

    Raises MisalignedSpan when the complex span starts mid-token; the
    caller skips such instances instead of re-tokenizing.
    """
    ids, spans = backend.tokenize(task.text, task.lang)
    start, end = task.complex_span
    if not any(s == start for s, _ in spans) or any(s < start < e for s, e in spans):
        raise errors.MisalignedSpan(
            f"no token starts at offset {start} in {task.text!r}"
        )
    prefix_ids = [tid for tid, (_, e) in zip(ids, spans) if e <= start]
    start_ids = backend.model_info().decoder_start_ids(task.lang)
    prefix = DecoderPrefix(
        ids=start_ids + tuple(prefix_ids),
        prefix_word_count=len(task.text[:start].split()),
    )
    suffix_words = task.text[end:].split()
    return prefix, suffix_words


def _is_candidate_first_token(backend: Backend, info: ModelInfo, token_id: TokenId) -> bool:
    if token_id in info.special_tokens.all_ids():
        return False
    if not backend.token_starts_word(token_id):
        return False
    text = backend.token_text(token_id)
    return bool(text.strip()) and not _is_pure_punctuation(text)


def filter_word_initial(dist: TokenDistribution, backend: Backend) -> TokenDistribution:
    """Drop non-word-initial, pure-punctuation, and special tokens."""
    info = backend.model_info()
    entries = tuple(
        (tid, lp) for tid, lp in dist.entries if _is_candidate_first_token(backend, info, tid)
    )
    return TokenDistribution(entries=entries, truncated=dist.truncated)


def first_token_candidates(
    enc: SourceEncoding, prefix: DecoderPrefix, m: int, backend: Backend
) -> TokenDistribution:
    """Top-m next tokens at the complex word's position, boundary-filtered."""
    dist = backend.next_token_logprobs(enc, prefix.ids, m)
    return filter_word_initial(dist, backend)


def complete_word(
    enc: SourceEncoding,
    prefix: DecoderPrefix,
    first_token: TokenId,
    backend: Backend,
    max_word_subtokens: int = 4,
) -> tuple[tuple[TokenId, ...], str, float]:
    """Greedily extend ``first_token`` to a whole word.

    Appends the argmax next token while it is word-internal under the
    backend's boundary convention, stopping at a word boundary,
    punctuation, or end-of-sequence. Returns (token path, surface,
    continuation log-probability). Raises WordTooLong when the budget is
    exhausted before a boundary.
    """
    info = backend.model_info()
    if info.boundary is BoundaryConvention.MARKER_SUFFIX:
        raise NotImplementedError(
            "word completion for marker-suffix vocabularies is not wired up; "
            "no bundled backend declares one"
        )
    specials = info.special_tokens.all_ids()
    path = [first_token]
    own_logprob = 0.0

    while info.boundary is BoundaryConvention.MARKER_PREFIX:
        entries = backend.next_token_logprobs(
            enc, tuple(prefix.ids) + tuple(path), 1
        ).entries
        if not entries:
            break
        next_id, next_lp = entries[0]
        if (
            next_id in specials
            or backend.token_starts_word(next_id)
            or _is_pure_punctuation(backend.token_text(next_id))
        ):
            break
        if len(path) >= max_word_subtokens:
            raise errors.WordTooLong(
                f"no word boundary within {max_word_subtokens} subtokens"
            )
        path.append(next_id)
        own_logprob += next_lp

    surface = backend.detokenize(path).strip()
    return tuple(path), surface, own_logprob


def generate_candidates(
    task: SimplificationTask,
    backend: Backend,
    cfg: GeneratorConfig = GeneratorConfig(),
) -> list[CandidateWord]:
    """Top-k substitute words for the task, sorted by total score descending.

    Deterministic given (task, cfg, backend): ties in total score break by
    surface lexicographic order, and duplicate surfaces keep the
    highest-scoring token path. The original complex word is never
    returned. Raises NoCandidates when everything is filtered out.
    """
    prefix, suffix_words = build_decoder_prefix(task, backend)
    enc = backend.encode_source(task.text, task.lang, task.lang)
    pool = first_token_candidates(enc, prefix, cfg.first_token_pool, backend)

    complex_folded = task.complex_word.casefold()
    completed: dict[str, tuple[float, tuple[TokenId, ...], str, float, float]] = {}
    for tid, first_lp in pool.entries:
        try:
            path, raw_surface, own_lp = complete_word(
                enc, prefix, tid, backend, cfg.max_word_subtokens
            )
        except errors.WordTooLong:
            continue
        surface = match_casing(raw_surface, task.complex_word)
        folded = surface.casefold()
        if not folded or folded == complex_folded:
            continue
        eq1_score = first_lp + own_lp
        key = folded
        best = completed.get(key)
        # keep the max-score path per surface; stable for equal scores
        if best is None or eq1_score > best[0] + _SCORE_EPS:
            completed[key] = (eq1_score, path, surface, first_lp, own_lp)
    if not completed:
        raise errors.NoCandidates(f"no substitutes survive filtering for {task.complex_word!r}")

    look_words = suffix_words[: cfg.lookahead_words]
    suffix_ids: list[TokenId] = []
    if look_words:
        suffix_ids, _ = backend.tokenize(" ".join(look_words), task.lang)

    candidates = []
    for _, path, surface, first_lp, own_lp in completed.values():
        if suffix_ids:
            look_lp = backend.score_continuation(
                enc, tuple(prefix.ids) + path, suffix_ids
            )
        else:
            look_lp = 0.0
        candidates.append(
            CandidateWord(
                surface=surface,
                token_path=path,
                first_token_logprob=first_lp,
                own_continuation_logprob=own_lp,
                lookahead_logprob=look_lp,
                total_score=first_lp + own_lp + look_lp,
            )
        )
    candidates.sort(key=lambda c: (-c.total_score, c.surface))
    return candidates[: cfg.k]
