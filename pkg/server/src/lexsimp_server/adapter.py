"""Model adapters: shared step-decoding inference over encoder-decoder checkpoints.

Two concrete adapters exist. ``NllbAdapter`` wraps any NLLB-class
checkpoint from the transformers hub (sentencepiece vocabulary,
marker-prefix word boundaries, 200 language tags). ``TinyAdapter`` builds
a small randomly initialized seq2seq model with a word-level vocabulary;
it exists so the wire protocol can be exercised end to end without
downloading a checkpoint.

Log-probabilities are always computed in float32 at the output layer,
whatever precision the model body runs in, and inference is serialized
behind a lock so identical requests return identical numbers within one
process lifetime.
"""

from __future__ import annotations

import abc
import re
import threading
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F


class AdapterError(Exception):
    pass


class UnsupportedLanguage(AdapterError):
    pass


class EmptyInput(AdapterError):
    pass


class InvalidPrefix(AdapterError):
    pass


@dataclass
class EncoderState:
    """Cached encoder outputs for one source sentence."""

    encoder_outputs: object
    attention_mask: torch.Tensor
    src_lang: str
    tgt_lang: str


class Seq2SeqAdapter(abc.ABC):
    """Deterministic step-decoding around a torch encoder-decoder model."""

    def __init__(self, model, device: str = "cpu"):
        self.model = model.to(device).eval()
        self.device = device
        self._lock = threading.Lock()

    # -- vocabulary hooks -----------------------------------------------------

    @abc.abstractmethod
    def info(self) -> dict:
        """The /v1/model_info payload."""

    @abc.abstractmethod
    def canonical_lang(self, lang: str) -> str:
        """Map a request language code to the checkpoint's tag scheme."""

    @abc.abstractmethod
    def tokenize(self, text: str, lang: str) -> tuple[list[int], list[tuple[int, int]]]:
        """Raw subword ids (no specials) plus character offsets."""

    @abc.abstractmethod
    def detokenize_wire(self, ids: list[int]) -> str:
        """Wire-rule text: a word-initial piece contributes a leading space."""

    @abc.abstractmethod
    def source_ids(self, text: str, src_lang: str) -> list[int]:
        """Encoder input ids including the checkpoint's special tokens."""

    @abc.abstractmethod
    def decoder_start_ids(self, tgt_lang: str) -> list[int]:
        """Tokens every decoder prefix must begin with."""

    # -- inference ------------------------------------------------------------

    def encode(self, text: str, src_lang: str, tgt_lang: str) -> EncoderState:
        if not text.strip():
            raise EmptyInput("text is empty after trimming")
        src = self.canonical_lang(src_lang)
        tgt = self.canonical_lang(tgt_lang)
        ids = torch.tensor([self.source_ids(text, src)], device=self.device)
        mask = torch.ones_like(ids)
        with self._lock, torch.no_grad():
            outputs = self.model.get_encoder()(input_ids=ids, attention_mask=mask)
        return EncoderState(
            encoder_outputs=outputs, attention_mask=mask, src_lang=src, tgt_lang=tgt
        )

    def _check_prefix(self, enc: EncoderState, prefix_ids: list[int]) -> None:
        start = self.decoder_start_ids(enc.tgt_lang)
        if list(prefix_ids[: len(start)]) != start:
            raise InvalidPrefix(
                f"decoder prefix must begin with start tokens {start}, "
                f"got {list(prefix_ids[: len(start)])}"
            )

    def _decoder_logprobs(self, enc: EncoderState, decoder_ids: list[int]) -> torch.Tensor:
        """Float32 log-softmax rows for every decoder position, [T, vocab]."""
        ids = torch.tensor([decoder_ids], device=self.device)
        with self._lock, torch.no_grad():
            out = self.model(
                encoder_outputs=enc.encoder_outputs,
                attention_mask=enc.attention_mask,
                decoder_input_ids=ids,
            )
        return F.log_softmax(out.logits[0].float(), dim=-1)

    def next_logprobs(self, enc: EncoderState, prefix_ids: list[int], top_n: int) -> list[tuple[int, float]]:
        """Top-n next tokens sorted by (logprob desc, id asc)."""
        self._check_prefix(enc, prefix_ids)
        row = self._decoder_logprobs(enc, list(prefix_ids))[-1].numpy().astype(np.float64)
        n = min(top_n, row.shape[0])
        order = np.lexsort((np.arange(row.shape[0]), -row))[:n]
        return [(int(i), float(row[i])) for i in order]

    def score_continuation(
        self, enc: EncoderState, prefix_ids: list[int], continuation_ids: list[int]
    ) -> float:
        """Exact sum of conditional token log-probabilities along the path."""
        self._check_prefix(enc, prefix_ids)
        if not continuation_ids:
            raise AdapterError("continuation must be non-empty")
        full = list(prefix_ids) + list(continuation_ids)
        rows = self._decoder_logprobs(enc, full)
        total = 0.0
        for offset, token in enumerate(continuation_ids):
            total += float(rows[len(prefix_ids) - 1 + offset, token])
        return total


# -- tiny word-level adapter ---------------------------------------------------

TINY_WORDS = (
    "the a cat dog bird sat ran flew on under over mat roof tree and then "
    "quickly slowly red blue small big happy tired old young house garden "
    "river stone cloud rain sun moon walked jumped slept spoke found lost"
).split()
TINY_LANGS = ("aa", "bb")


class TinyAdapter(Seq2SeqAdapter):
    """Randomly initialized small model over a word-level vocabulary.

    Exists for protocol and contract testing only; the weights are
    meaningless but fully deterministic for a given seed.
    """

    def __init__(self, seed: int = 7, device: str = "cpu"):
        from transformers import M2M100Config, M2M100ForConditionalGeneration

        specials = ["<pad>", "<s>", "</s>", "<unk>"]
        tags = [f"<{lang}>" for lang in TINY_LANGS]
        self._pieces = specials + tags + sorted(TINY_WORDS)
        self._ids = {p: i for i, p in enumerate(self._pieces)}
        self.pad_id, self.start_id, self.eos_id, self.unk_id = (
            self._ids[p] for p in specials
        )
        self._lang_tags = {lang: self._ids[f"<{lang}>"] for lang in TINY_LANGS}

        torch.manual_seed(seed)
        config = M2M100Config(
            vocab_size=len(self._pieces),
            d_model=32,
            encoder_layers=2,
            decoder_layers=2,
            encoder_attention_heads=2,
            decoder_attention_heads=2,
            encoder_ffn_dim=64,
            decoder_ffn_dim=64,
            max_position_embeddings=256,
            pad_token_id=self.pad_id,
            bos_token_id=self.start_id,
            eos_token_id=self.eos_id,
            decoder_start_token_id=self.start_id,
        )
        super().__init__(M2M100ForConditionalGeneration(config), device=device)
        self.model_id = f"tiny:{seed}"

    def info(self) -> dict:
        return {
            "vocab_size": len(self._pieces),
            "boundary": {"convention": "none", "marker": ""},
            "special_tokens": {
                "bos": self.start_id,
                "eos": self.eos_id,
                "lang_tags": dict(self._lang_tags),
            },
            "languages": list(TINY_LANGS),
        }

    def canonical_lang(self, lang: str) -> str:
        if lang not in self._lang_tags:
            raise UnsupportedLanguage(f"tiny model does not support {lang!r}")
        return lang

    def tokenize(self, text: str, lang: str) -> tuple[list[int], list[tuple[int, int]]]:
        self.canonical_lang(lang)
        if not text.strip():
            raise EmptyInput("text is empty after trimming")
        ids, offsets = [], []
        cursor = 0
        for word in text.split():
            start = text.index(word, cursor)
            cursor = start + len(word)
            ids.append(self._ids.get(word, self.unk_id))
            offsets.append((start, cursor))
        return ids, offsets

    def detokenize_wire(self, ids: list[int]) -> str:
        special = {self.pad_id, self.start_id, self.eos_id, *self._lang_tags.values()}
        return " ".join(self._pieces[i] for i in ids if i not in special)

    def source_ids(self, text: str, src_lang: str) -> list[int]:
        ids, _ = self.tokenize(text, src_lang)
        return [self._lang_tags[src_lang], *ids, self.eos_id]

    def decoder_start_ids(self, tgt_lang: str) -> list[int]:
        return [self.start_id, self._lang_tags[self.canonical_lang(tgt_lang)]]


# -- pretrained multilingual checkpoint adapter ---------------------------------

_LANG_ALIASES = {
    "en": "eng_Latn",
    "es": "spa_Latn",
    "pt": "por_Latn",
    "fr": "fra_Latn",
    "de": "deu_Latn",
    "it": "ita_Latn",
    "zh": "zho_Hans",
}
_TAG_PATTERN = re.compile(r"[a-z]{3}_[A-Za-z]{4}")


class NllbAdapter(Seq2SeqAdapter):
    """Any NLLB-class translation checkpoint behind the scoring protocol."""

    def __init__(self, model_id: str, device: str = "cpu"):
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModelForSeq2SeqLM.from_pretrained(model_id)
        super().__init__(model, device=device)
        self.model_id = model_id

        tags = [
            t
            for t in self.tokenizer.additional_special_tokens
            if _TAG_PATTERN.fullmatch(t)
        ]
        self._lang_tags = {t: self.tokenizer.convert_tokens_to_ids(t) for t in tags}
        self._decoder_start = self.model.config.decoder_start_token_id
        self._eos = self.model.config.eos_token_id
        self._marker = "▁"
        self._specials = set(self.tokenizer.all_special_ids) | set(self._lang_tags.values())

    def info(self) -> dict:
        return {
            "vocab_size": int(self.model.config.vocab_size),
            "boundary": {"convention": "marker-prefix", "marker": self._marker},
            "special_tokens": {
                "bos": int(self._decoder_start),
                "eos": int(self._eos),
                "lang_tags": {k: int(v) for k, v in self._lang_tags.items()},
            },
            "languages": sorted(self._lang_tags),
        }

    def canonical_lang(self, lang: str) -> str:
        canonical = _LANG_ALIASES.get(lang.lower(), lang)
        if canonical not in self._lang_tags:
            raise UnsupportedLanguage(f"{lang!r} is not a language tag of {self.model_id}")
        return canonical

    def tokenize(self, text: str, lang: str) -> tuple[list[int], list[tuple[int, int]]]:
        self.canonical_lang(lang)
        if not text.strip():
            raise EmptyInput("text is empty after trimming")
        encoded = self.tokenizer(
            text, add_special_tokens=False, return_offsets_mapping=True
        )
        offsets = [tuple(span) for span in encoded["offset_mapping"]]
        return list(encoded["input_ids"]), offsets

    def detokenize_wire(self, ids: list[int]) -> str:
        parts = []
        for piece in self.tokenizer.convert_ids_to_tokens([i for i in ids if i not in self._specials]):
            if piece.startswith(self._marker):
                parts.append(" " + piece[len(self._marker):])
            else:
                parts.append(piece)
        return "".join(parts)

    def source_ids(self, text: str, src_lang: str) -> list[int]:
        self.tokenizer.src_lang = src_lang
        return list(self.tokenizer(text).input_ids)

    def decoder_start_ids(self, tgt_lang: str) -> list[int]:
        return [int(self._decoder_start), int(self._lang_tags[self.canonical_lang(tgt_lang)])]


def load_adapter(model_id: str, device: str = "cpu") -> Seq2SeqAdapter:
    """"tiny" or "tiny:<seed>" builds the test model; anything else loads a checkpoint."""
    if model_id == "tiny" or model_id.startswith("tiny:"):
        seed = int(model_id.split(":", 1)[1]) if ":" in model_id else 7
        return TinyAdapter(seed=seed, device=device)
    return NllbAdapter(model_id, device=device)
