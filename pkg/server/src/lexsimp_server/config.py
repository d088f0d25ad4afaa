"""Server configuration."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_MODEL = "facebook/nllb-200-distilled-600M"


@dataclass
class ServerConfig:
    model_id: str = DEFAULT_MODEL  # "tiny" serves the built-in random test model
    device: str = "cpu"
    encoding_ttl_seconds: float = 600.0
    max_batch_size: int = 1  # >1 reserved; micro-batching stays off unless provably lossless
    host: str = "127.0.0.1"
    port: int = 8400

    def __post_init__(self) -> None:
        if self.encoding_ttl_seconds <= 0:
            raise ValueError("encoding TTL must be positive")
        if self.max_batch_size < 1:
            raise ValueError("max batch size must be >= 1")
