"""HTTP layer: the /v1/* scoring protocol plus /healthz.

Encoder outputs are cached by encoding id and evicted after a TTL; the
generator's access pattern (one encode, then a few hundred decoder
queries) hits the cache every time. Requests arriving before the model
finishes loading get a 503.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .adapter import (
    AdapterError,
    EmptyInput,
    EncoderState,
    InvalidPrefix,
    Seq2SeqAdapter,
    UnsupportedLanguage,
)
from .config import ServerConfig

_ERROR_CODES = {
    UnsupportedLanguage: "UNSUPPORTED_LANGUAGE",
    InvalidPrefix: "INVALID_PREFIX",
    EmptyInput: "EMPTY_INPUT",
}


class TokenizeRequest(BaseModel):
    text: str
    lang: str


class DetokenizeRequest(BaseModel):
    ids: list[int]


class EncodeRequest(BaseModel):
    text: str
    src_lang: str
    tgt_lang: str


class NextTokenRequest(BaseModel):
    encoding_id: str
    prefix_ids: list[int]
    top_n: int


class ScoreRequest(BaseModel):
    encoding_id: str
    prefix_ids: list[int]
    continuation_ids: list[int]


@dataclass
class _Cache:
    ttl: float
    entries: dict[str, tuple[EncoderState, float]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def put(self, state: EncoderState) -> str:
        encoding_id = uuid.uuid4().hex
        now = time.monotonic()
        with self.lock:
            self.entries = {
                k: v for k, v in self.entries.items() if v[1] > now
            }
            self.entries[encoding_id] = (state, now + self.ttl)
        return encoding_id

    def get(self, encoding_id: str) -> EncoderState | None:
        with self.lock:
            entry = self.entries.get(encoding_id)
            if entry is None:
                return None
            state, expiry = entry
            if expiry <= time.monotonic():
                del self.entries[encoding_id]
                return None
            return state


class ServerState:
    def __init__(self, config: ServerConfig):
        self.config = config
        self.cache = _Cache(ttl=config.encoding_ttl_seconds)
        self.adapter: Seq2SeqAdapter | None = None
        self.status = "loading"
        self.error: str | None = None

    def attach(self, adapter: Seq2SeqAdapter) -> None:
        self.adapter = adapter
        self.status = "ok"

    def fail(self, message: str) -> None:
        self.status = "error"
        self.error = message

    def load_in_background(self) -> None:
        from .adapter import load_adapter

        def run() -> None:
            try:
                self.attach(load_adapter(self.config.model_id, self.config.device))
            except Exception as exc:  # surface the cause through /healthz
                self.fail(f"{type(exc).__name__}: {exc}")

        threading.Thread(target=run, daemon=True).start()


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error_code": code, "message": message})


def create_app(
    config: ServerConfig | None = None,
    adapter: Seq2SeqAdapter | None = None,
    load: bool = False,
) -> FastAPI:
    """Build the app; pass a ready adapter, or load=True for background loading."""
    state = ServerState(config or ServerConfig())
    if adapter is not None:
        state.attach(adapter)
    elif load:
        state.load_in_background()

    app = FastAPI(title="lexsimp scoring server")
    app.state.server = state

    @app.exception_handler(AdapterError)
    async def adapter_error_handler(request: Request, exc: AdapterError):
        code = _ERROR_CODES.get(type(exc), "BAD_REQUEST")
        return _error(400, code, str(exc))

    def ready() -> Seq2SeqAdapter | None:
        return state.adapter if state.status == "ok" else None

    @app.get("/healthz")
    async def healthz():
        return {
            "status": state.status,
            "model_id": getattr(state.adapter, "model_id", state.config.model_id),
            "loaded": state.status == "ok",
            **({"error": state.error} if state.error else {}),
        }

    @app.get("/v1/model_info")
    async def model_info():
        adapter = ready()
        if adapter is None:
            return _error(503, "MODEL_NOT_LOADED", f"model status: {state.status}")
        return adapter.info()

    @app.post("/v1/tokenize")
    async def tokenize(req: TokenizeRequest):
        adapter = ready()
        if adapter is None:
            return _error(503, "MODEL_NOT_LOADED", f"model status: {state.status}")
        ids, offsets = adapter.tokenize(req.text, req.lang)
        return {"ids": ids, "offsets": [list(span) for span in offsets]}

    @app.post("/v1/detokenize")
    async def detokenize(req: DetokenizeRequest):
        adapter = ready()
        if adapter is None:
            return _error(503, "MODEL_NOT_LOADED", f"model status: {state.status}")
        return {"text": adapter.detokenize_wire(req.ids)}

    @app.post("/v1/encode")
    async def encode(req: EncodeRequest):
        adapter = ready()
        if adapter is None:
            return _error(503, "MODEL_NOT_LOADED", f"model status: {state.status}")
        encoder_state = adapter.encode(req.text, req.src_lang, req.tgt_lang)
        return {"encoding_id": state.cache.put(encoder_state)}

    @app.post("/v1/next_token_logprobs")
    async def next_token_logprobs(req: NextTokenRequest):
        adapter = ready()
        if adapter is None:
            return _error(503, "MODEL_NOT_LOADED", f"model status: {state.status}")
        if req.top_n < 1:
            return _error(400, "BAD_REQUEST", "top_n must be >= 1")
        encoder_state = state.cache.get(req.encoding_id)
        if encoder_state is None:
            return _error(404, "ENCODING_EXPIRED", "unknown or expired encoding_id")
        entries = adapter.next_logprobs(encoder_state, req.prefix_ids, req.top_n)
        vocab = adapter.info()["vocab_size"]
        return {
            "entries": [[tid, lp] for tid, lp in entries],
            "truncated": req.top_n < vocab,
        }

    @app.post("/v1/score_continuation")
    async def score_continuation(req: ScoreRequest):
        adapter = ready()
        if adapter is None:
            return _error(503, "MODEL_NOT_LOADED", f"model status: {state.status}")
        encoder_state = state.cache.get(req.encoding_id)
        if encoder_state is None:
            return _error(404, "ENCODING_EXPIRED", "unknown or expired encoding_id")
        logprob = adapter.score_continuation(
            encoder_state, req.prefix_ids, req.continuation_ids
        )
        return {"logprob": logprob}

    return app
