"""Run the scoring server: python -m lexsimp_server [options]."""

from __future__ import annotations

import argparse

import uvicorn

from .app import create_app
from .config import DEFAULT_MODEL, ServerConfig


def main() -> None:
    parser = argparse.ArgumentParser(description="encoder-decoder token scoring server")
    parser.add_argument(
        "--model",
        default=DEFAULT_MODEL,
        help=f"checkpoint id or path (default {DEFAULT_MODEL}); 'tiny' serves the built-in test model",
    )
    parser.add_argument("--device", default="cpu", help="torch device, e.g. cpu or cuda:0")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8400)
    parser.add_argument("--ttl", type=float, default=600.0, help="encoding cache TTL in seconds")
    parser.add_argument("--batch-size", type=int, default=1,
                        help="reserved; requests are served one at a time for determinism")
    args = parser.parse_args()

    config = ServerConfig(
        model_id=args.model,
        device=args.device,
        encoding_ttl_seconds=args.ttl,
        max_batch_size=args.batch_size,
        host=args.host,
        port=args.port,
    )
    app = create_app(config, load=True)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


if __name__ == "__main__":
    main()
