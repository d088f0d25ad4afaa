"""Shared server test fixtures over the built-in tiny model."""

from __future__ import annotations

import random

import pytest
from fastapi.testclient import TestClient

from lexsimp_server import ServerConfig, TinyAdapter, create_app
from lexsimp_server.adapter import TINY_WORDS


@pytest.fixture(scope="session")
def adapter() -> TinyAdapter:
    return TinyAdapter(seed=7)


@pytest.fixture(scope="session")
def client(adapter) -> TestClient:
    app = create_app(ServerConfig(model_id="tiny:7"), adapter=adapter)
    return TestClient(app)


@pytest.fixture()
def sentences() -> list[str]:
    rng = random.Random(424242)
    return [
        " ".join(rng.choice(TINY_WORDS) for _ in range(rng.randint(1, 8)))
        for _ in range(50)
    ]


def encode(client, text: str, lang: str = "aa") -> str:
    resp = client.post(
        "/v1/encode", json={"text": text, "src_lang": lang, "tgt_lang": lang}
    )
    assert resp.status_code == 200, resp.text
    return resp.json()["encoding_id"]


def start_ids(client, lang: str = "aa") -> list[int]:
    info = client.get("/v1/model_info").json()
    return [info["special_tokens"]["bos"], info["special_tokens"]["lang_tags"][lang]]


def tokenize(client, text: str, lang: str = "aa") -> list[int]:
    resp = client.post("/v1/tokenize", json={"text": text, "lang": lang})
    assert resp.status_code == 200, resp.text
    return resp.json()["ids"]
