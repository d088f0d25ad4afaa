"""Model server for the /v1/* encoder-decoder scoring protocol."""

from .adapter import NllbAdapter, Seq2SeqAdapter, TinyAdapter, load_adapter
from .app import create_app
from .config import ServerConfig

__version__ = "0.1.0"

__all__ = [
    "NllbAdapter",
    "Seq2SeqAdapter",
    "ServerConfig",
    "TinyAdapter",
    "create_app",
    "load_adapter",
]
