"""HTTP client for the model-server wire protocol.

Endpoints (JSON bodies, POST unless noted):

    GET  /v1/model_info          -> {vocab_size, boundary:{convention, marker},
                                     special_tokens:{bos, eos, lang_tags}, languages}
    POST /v1/tokenize            {text, lang} -> {ids, offsets}
    POST /v1/detokenize          {ids} -> {text}
    POST /v1/encode              {text, src_lang, tgt_lang} -> {encoding_id}
    POST /v1/next_token_logprobs {encoding_id, prefix_ids, top_n} -> {entries, truncated}
    POST /v1/score_continuation  {encoding_id, prefix_ids, continuation_ids} -> {logprob}

Server-side encodings expire after a TTL; the client transparently
re-encodes and retries once on a 404. Detokenized text is returned raw by
the server (a word-initial piece contributes its leading boundary as a
space), which is how the client recovers per-piece boundary flags; public
``detokenize`` strips the outer whitespace.
"""

from __future__ import annotations

import threading
from typing import Sequence

import requests

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
)

_ERROR_CODES = {
    "UNSUPPORTED_LANGUAGE": errors.UnsupportedLanguage,
    "INVALID_PREFIX": errors.InvalidPrefix,
    "EMPTY_INPUT": errors.EmptyInput,
}


class _RemoteEncoding:
    """Mutable server-side encoding id plus what is needed to refresh it."""

    def __init__(self, encoding_id: str, text: str, src_lang: str, tgt_lang: str):
        self.encoding_id = encoding_id
        self.text = text
        self.src_lang = src_lang
        self.tgt_lang = tgt_lang
        self.lock = threading.Lock()


class RemoteBackend(Backend):
    """Client for a server speaking the /v1/* scoring protocol."""

    def __init__(self, base_url: str, timeout: float = 60.0, session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.session = session or requests.Session()
        self._info: ModelInfo | None = None
        self._piece_cache: dict[TokenId, str] = {}
        self._cache_lock = threading.Lock()

    # -- transport ----------------------------------------------------------

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        url = f"{self.base_url}{path}"
        try:
            if method == "GET":
                resp = self.session.get(url, timeout=self.timeout)
            else:
                resp = self.session.post(url, json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise errors.BackendUnavailable(f"cannot reach {url}: {exc}") from exc
        if resp.status_code == 400:
            body = resp.json()
            exc_type = _ERROR_CODES.get(body.get("error_code", ""), errors.BackendError)
            raise exc_type(body.get("message", "bad request"))
        if resp.status_code == 404:
            raise _EncodingExpired()
        if resp.status_code >= 500:
            raise errors.BackendUnavailable(f"{url} -> HTTP {resp.status_code}")
        resp.raise_for_status()
        return resp.json()

    # -- Backend interface --------------------------------------------------

    def model_info(self) -> ModelInfo:
        if self._info is None:
            body = self._request("GET", "/v1/model_info")
            specials = body["special_tokens"]
            self._info = ModelInfo(
                vocab_size=body["vocab_size"],
                boundary=BoundaryConvention(body["boundary"]["convention"]),
                boundary_marker=body["boundary"]["marker"],
                special_tokens=SpecialTokens(
                    bos=specials.get("bos"),
                    eos=specials["eos"],
                    lang_tags=dict(specials.get("lang_tags", {})),
                ),
                languages=tuple(body["languages"]),
            )
        return self._info

    def tokenize(self, text: str, lang: str) -> tuple[list[TokenId], list[Span]]:
        body = self._request("POST", "/v1/tokenize", {"text": text, "lang": lang})
        return list(body["ids"]), [tuple(span) for span in body["offsets"]]

    def detokenize(self, ids: Sequence[TokenId]) -> str:
        return self._detokenize_raw(ids).strip()

    def _detokenize_raw(self, ids: Sequence[TokenId]) -> str:
        return self._request("POST", "/v1/detokenize", {"ids": list(ids)})["text"]

    def encode_source(self, text: str, src_lang: str, tgt_lang: str) -> SourceEncoding:
        ids, _ = self.tokenize(text, src_lang)
        encoding_id = self._encode(text, src_lang, tgt_lang)
        return SourceEncoding(
            source_ids=tuple(ids),
            src_lang=src_lang,
            tgt_lang=tgt_lang,
            handle=_RemoteEncoding(encoding_id, text, src_lang, tgt_lang),
        )

    def _encode(self, text: str, src_lang: str, tgt_lang: str) -> str:
        body = self._request(
            "POST", "/v1/encode", {"text": text, "src_lang": src_lang, "tgt_lang": tgt_lang}
        )
        return body["encoding_id"]

    def _with_encoding(self, enc: SourceEncoding, call):
        """Run a query, refreshing the server-side encoding once if it expired."""
        handle: _RemoteEncoding = enc.handle  # type: ignore[assignment]
        try:
            return call(handle.encoding_id)
        except _EncodingExpired:
            with handle.lock:
                handle.encoding_id = self._encode(
                    handle.text, handle.src_lang, handle.tgt_lang
                )
            try:
                return call(handle.encoding_id)
            except _EncodingExpired as exc:
                raise errors.BackendUnavailable(
                    "server keeps expiring freshly created encodings"
                ) from exc

    def next_token_logprobs(
        self, enc: SourceEncoding, decoder_prefix: Sequence[TokenId], top_n: int
    ) -> TokenDistribution:
        if top_n < 1:
            raise ValueError("top_n must be >= 1")

        def call(encoding_id: str) -> dict:
            return self._request(
                "POST",
                "/v1/next_token_logprobs",
                {"encoding_id": encoding_id, "prefix_ids": list(decoder_prefix), "top_n": top_n},
            )

        body = self._with_encoding(enc, call)
        entries = tuple((tid, lp) for tid, lp in body["entries"])
        return TokenDistribution(entries=entries, truncated=body["truncated"])

    def score_continuation(
        self,
        enc: SourceEncoding,
        decoder_prefix: Sequence[TokenId],
        continuation: Sequence[TokenId],
    ) -> float:
        if not continuation:
            raise ValueError("continuation must be non-empty")

        def call(encoding_id: str) -> dict:
            return self._request(
                "POST",
                "/v1/score_continuation",
                {
                    "encoding_id": encoding_id,
                    "prefix_ids": list(decoder_prefix),
                    "continuation_ids": list(continuation),
                },
            )

        return float(self._with_encoding(enc, call)["logprob"])

    # -- piece helpers ------------------------------------------------------

    def _raw_piece(self, token_id: TokenId) -> str:
        with self._cache_lock:
            cached = self._piece_cache.get(token_id)
        if cached is None:
            cached = self._detokenize_raw([token_id])
            with self._cache_lock:
                self._piece_cache[token_id] = cached
        return cached

    def token_text(self, token_id: TokenId) -> str:
        return self._raw_piece(token_id).strip()

    def token_starts_word(self, token_id: TokenId) -> bool:
        info = self.model_info()
        if token_id in info.special_tokens.all_ids():
            return False
        if info.boundary is BoundaryConvention.NONE:
            return True
        raw = self._raw_piece(token_id)
        if info.boundary is BoundaryConvention.MARKER_PREFIX:
            return raw.startswith(" ") or raw.startswith(info.boundary_marker)
        return True  # marker-suffix pieces are word-initial by position


class _EncodingExpired(Exception):
    """Internal: server returned 404 for an encoding id."""
