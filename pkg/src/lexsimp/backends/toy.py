"""Exactly computable toy paraphrase backend for oracle testing.

Decoding is position-aligned with the source: decoder position ``t`` is
conditioned on source word ``s_t`` and the previous output word, via

    p(w | w_prev, s_t) = lex(s_t, w) * big(w_prev, w) / Z

where ``lex`` is a per-source-word substitution table, ``big`` a bigram
weight (1.0 unless listed), and ``Z`` normalizes over the lexicon row.
Past the last source position the model emits end-of-sequence with
probability 1, so total sequence probabilities are well-defined and every
generator behavior can be enumerated by hand.

In subword-split mode any word longer than 6 characters becomes two
pieces (split after the 6th character, first piece boundary-marked); the
first piece carries the word's probability, the continuation piece has
probability 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .. import errors
from .base import (
    Backend,
    BoundaryConvention,
    ModelInfo,
    SourceEncoding,
    Span,
    SpecialTokens,
    TokenDistribution,
    TokenId,
    check_decoder_start,
)

MARKER = "▁"  # sentencepiece-style word-initial marker
SPLIT_AT = 6       # words longer than this are split into two pieces

BOS_PIECE = "<s>"
EOS_PIECE = "</s>"
LANG_PIECE = "<toy>"


@dataclass(frozen=True)
class ToyLexicon:
    """Substitution rows plus bigram exceptions.

    ``rows`` maps each source word to its candidate words with positive
    weights (not necessarily normalized). ``bigram`` maps
    (previous word, word) pairs to a weight; unlisted pairs weigh 1.0.
    """

    rows: Mapping[str, Mapping[str, float]]
    bigram: Mapping[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for src, row in self.rows.items():
            if not row:
                raise ValueError(f"empty lexicon row for {src!r}")
            for w, p in row.items():
                if p <= 0:
                    raise ValueError(f"non-positive weight for {src!r} -> {w!r}")
        for pair, p in self.bigram.items():
            if p <= 0:
                raise ValueError(f"non-positive bigram weight for {pair!r}")

    def vocabulary(self) -> list[str]:
        words = set(self.rows)
        for row in self.rows.values():
            words.update(row)
        return sorted(words)

    def bigram_weight(self, prev: str | None, word: str) -> float:
        if prev is None:
            return 1.0
        return self.bigram.get((prev, word), 1.0)

    def step_probs(self, prev: str | None, src_word: str) -> dict[str, float]:
        """Exact p(w | prev, src_word) over the lexicon row."""
        row = self.rows[src_word]
        unnorm = {w: p * self.bigram_weight(prev, w) for w, p in row.items()}
        z = sum(unnorm.values())
        return {w: p / z for w, p in unnorm.items()}


def demo_lexicon() -> ToyLexicon:
    """The bundled demo fixture for "he attempted to evade the issue"."""
    return ToyLexicon(
        rows={
            "he": {"he": 1.0},
            "attempted": {"attempted": 0.5, "tried": 0.3, "sought": 0.2},
            "to": {"to": 1.0},
            "evade": {"evade": 0.4, "avoid": 0.3, "get": 0.2, "dodge": 0.1},
            "the": {"the": 0.9, "this": 0.1},
            "issue": {"issue": 0.6, "question": 0.25, "matter": 0.15},
        },
        bigram={("get", "the"): 0.05, ("get", "this"): 1.0},
    )


def split_word(word: str) -> list[str]:
    """Subword pieces of one word under the length-6 split rule."""
    if len(word) > SPLIT_AT:
        return [MARKER + word[:SPLIT_AT], word[SPLIT_AT:]]
    return [MARKER + word]


class ToyBackend(Backend):
    """Deterministic backend over a :class:`ToyLexicon`.

    ``subword=True`` switches to the split-piece vocabulary with a
    marker-prefix boundary convention; otherwise the vocabulary is
    word-level (boundary convention "none").
    """

    def __init__(self, lexicon: ToyLexicon, subword: bool = False):
        self.lexicon = lexicon
        self.subword = subword
        words = lexicon.vocabulary()

        # piece -> ("word" | "first" | "cont", full word); collisions would
        # make prefix parsing ambiguous, so they are construction errors.
        meanings: dict[str, tuple[str, str]] = {}
        if subword:
            for w in words:
                pieces = split_word(w)
                if len(pieces) == 1:
                    claims = [(pieces[0], ("word", w))]
                else:
                    claims = [(pieces[0], ("first", w)), (pieces[1], ("cont", w))]
                for piece, meaning in claims:
                    other = meanings.get(piece)
                    if other is not None and other != meaning:
                        raise ValueError(
                            f"ambiguous piece {piece!r}: {other} vs {meaning}"
                        )
                    meanings[piece] = meaning
        else:
            meanings = {w: ("word", w) for w in words}

        self._pieces: list[str] = [BOS_PIECE, EOS_PIECE, LANG_PIECE]
        self._pieces += sorted(meanings)
        self._piece_id = {p: i for i, p in enumerate(self._pieces)}
        self._meanings = meanings
        self._word_set = set(words)
        self._folded = {w.casefold(): w for w in sorted(words)}

        self._info = ModelInfo(
            vocab_size=len(self._pieces),
            boundary=BoundaryConvention.MARKER_PREFIX if subword else BoundaryConvention.NONE,
            boundary_marker=MARKER if subword else "",
            special_tokens=SpecialTokens(
                bos=self._piece_id[BOS_PIECE],
                eos=self._piece_id[EOS_PIECE],
                lang_tags={"toy": self._piece_id[LANG_PIECE]},
            ),
            languages=("toy",),
        )

    # -- vocabulary helpers -------------------------------------------------

    def _resolve_word(self, surface: str) -> str:
        if surface in self._word_set:
            return surface
        folded = surface.casefold()
        if folded in self._folded:
            return self._folded[folded]
        raise ValueError(f"word {surface!r} not in toy vocabulary")

    def word_ids(self, word: str) -> list[TokenId]:
        """Token ids spelling one vocabulary word."""
        word = self._resolve_word(word)
        if self.subword:
            return [self._piece_id[p] for p in split_word(word)]
        return [self._piece_id[word]]

    def piece(self, token_id: TokenId) -> str:
        return self._pieces[token_id]

    def token_text(self, token_id: TokenId) -> str:
        p = self._pieces[token_id]
        return p[len(MARKER):] if self.subword and p.startswith(MARKER) else p

    def token_starts_word(self, token_id: TokenId) -> bool:
        if token_id in self._info.special_tokens.all_ids():
            return False
        if not self.subword:
            return True
        return self._pieces[token_id].startswith(MARKER)

    # -- Backend interface --------------------------------------------------

    def model_info(self) -> ModelInfo:
        return self._info

    def tokenize(self, text: str, lang: str) -> tuple[list[TokenId], list[Span]]:
        if lang not in self._info.languages:
            raise errors.UnsupportedLanguage(f"toy backend does not support {lang!r}")
        if not text.strip():
            raise errors.EmptyInput("text is empty after trimming")
        ids: list[TokenId] = []
        spans: list[Span] = []
        cursor = 0
        for surface in text.split():
            start = text.index(surface, cursor)
            end = start + len(surface)
            cursor = end
            word = self._resolve_word(surface)
            pieces = split_word(word) if self.subword else [word]
            if len(pieces) == 2:
                spans.extend([(start, start + SPLIT_AT), (start + SPLIT_AT, end)])
            else:
                spans.append((start, end))
            ids.extend(self._piece_id[p] for p in pieces)
        return ids, spans

    def detokenize(self, ids: Sequence[TokenId]) -> str:
        specials = self._info.special_tokens.all_ids()
        words: list[str] = []
        for tid in ids:
            if tid in specials:
                continue
            piece = self._pieces[tid]
            if self.subword and not piece.startswith(MARKER):
                if not words:
                    words.append("")
                words[-1] += piece
            else:
                words.append(piece[len(MARKER):] if self.subword else piece)
        return " ".join(words)

    def encode_source(self, text: str, src_lang: str, tgt_lang: str) -> SourceEncoding:
        for lang in (src_lang, tgt_lang):
            if lang not in self._info.languages:
                raise errors.UnsupportedLanguage(f"toy backend does not support {lang!r}")
        ids, _ = self.tokenize(text, src_lang)
        source_words = tuple(self._resolve_word(w) for w in text.split())
        for w in source_words:
            if w not in self.lexicon.rows:
                raise ValueError(f"no lexicon row for source word {w!r}")
        return SourceEncoding(
            source_ids=tuple(ids), src_lang=src_lang, tgt_lang=tgt_lang, handle=source_words
        )

    def _parse_body(self, body: Sequence[TokenId]) -> tuple[list[str], str | None]:
        """Decoder tokens after the start tokens -> (complete words, pending word)."""
        eos = self._info.special_tokens.eos
        specials = self._info.special_tokens.all_ids()
        words: list[str] = []
        pending: str | None = None
        for tid in body:
            if tid == eos:
                if pending is not None:
                    raise ValueError("end-of-sequence inside a split word")
                words.append("")  # past-source position; never consulted as w_prev
                continue
            if tid in specials:
                raise ValueError(f"special token {tid} inside decoder body")
            kind, word = self._meanings[self._pieces[tid]]
            if kind == "cont":
                if pending != word:
                    raise ValueError(f"continuation piece {self._pieces[tid]!r} without its first piece")
                words.append(word)
                pending = None
            else:
                if pending is not None:
                    raise ValueError("new word begun before completing a split word")
                if kind == "first":
                    pending = word
                else:
                    words.append(word)
        return words, pending

    def _step_probs_ids(
        self, enc: SourceEncoding, words: list[str], pending: str | None
    ) -> dict[TokenId, float]:
        """Exact next-token distribution as {token id: probability}."""
        if pending is not None:
            cont = split_word(pending)[1]
            return {self._piece_id[cont]: 1.0}
        source_words: tuple[str, ...] = enc.handle  # type: ignore[assignment]
        t = len(words)
        if t >= len(source_words):
            return {self._info.special_tokens.eos: 1.0}
        prev = words[-1] if words else None
        probs = self.lexicon.step_probs(prev, source_words[t])
        if self.subword:
            return {self._piece_id[split_word(w)[0]]: p for w, p in probs.items()}
        return {self._piece_id[w]: p for w, p in probs.items()}

    def next_token_logprobs(
        self, enc: SourceEncoding, decoder_prefix: Sequence[TokenId], top_n: int
    ) -> TokenDistribution:
        if top_n < 1:
            raise ValueError("top_n must be >= 1")
        start = check_decoder_start(self._info, enc.tgt_lang, decoder_prefix)
        words, pending = self._parse_body(decoder_prefix[len(start):])
        probs = self._step_probs_ids(enc, words, pending)
        ranked = sorted(probs.items(), key=lambda kv: (-kv[1], kv[0]))
        entries = tuple((tid, math.log(p)) for tid, p in ranked[:top_n])
        return TokenDistribution(entries=entries, truncated=top_n < self._info.vocab_size)

    def score_continuation(
        self,
        enc: SourceEncoding,
        decoder_prefix: Sequence[TokenId],
        continuation: Sequence[TokenId],
    ) -> float:
        if not continuation:
            raise ValueError("continuation must be non-empty")
        start = check_decoder_start(self._info, enc.tgt_lang, decoder_prefix)
        words, pending = self._parse_body(decoder_prefix[len(start):])
        total = 0.0
        for tid in continuation:
            probs = self._step_probs_ids(enc, words, pending)
            p = probs.get(tid, 0.0)
            if p == 0.0:
                return -math.inf
            total += math.log(p)
            words, pending = self._advance(words, pending, tid)
        return total

    def _advance(
        self, words: list[str], pending: str | None, tid: TokenId
    ) -> tuple[list[str], str | None]:
        """Parsed decoder state after emitting one more token."""
        if pending is not None:
            kind, word = self._meanings[self._pieces[tid]]
            if kind != "cont" or word != pending:
                raise ValueError("invalid continuation of a split word")
            return words + [word], None
        new_words, new_pending = self._parse_body([tid])
        return words + new_words, new_pending
