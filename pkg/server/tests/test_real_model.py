"""Opt-in checks against a real pretrained checkpoint.

These need the multilingual checkpoint downloaded (gigabytes) and minutes
to hours of compute, so they are excluded from the normal run. Enable
with:

    LEXSIMP_REAL_MODEL=facebook/nllb-200-distilled-600M \
        pytest -m realmodel server/tests/test_real_model.py
"""

from __future__ import annotations

import os

import pytest

MODEL_ENV = "LEXSIMP_REAL_MODEL"

pytestmark = [
    pytest.mark.realmodel,
    pytest.mark.skipif(
        not os.environ.get(MODEL_ENV),
        reason=f"set {MODEL_ENV} to a checkpoint id to run real-model checks",
    ),
]


@pytest.fixture(scope="module")
def real_adapter():
    from lexsimp_server.adapter import NllbAdapter

    return NllbAdapter(os.environ[MODEL_ENV], device=os.environ.get("LEXSIMP_DEVICE", "cpu"))


def test_model_info_exposes_language_tags(real_adapter):
    info = real_adapter.info()
    assert info["vocab_size"] > 10000
    assert "eng_Latn" in info["languages"]
    assert info["boundary"]["convention"] == "marker-prefix"


def test_round_trip_multilingual(real_adapter):
    samples = {
        "eng_Latn": "He attempted to evade the issue",
        "spa_Latn": "El clima es agradable hoy",
        "por_Latn": "Ela terminou o relatório antes do meio-dia",
    }
    for lang, sentence in samples.items():
        ids, _ = real_adapter.tokenize(sentence, lang)
        text = real_adapter.detokenize_wire(ids)
        assert " ".join(text.split()) == " ".join(sentence.split())


def test_substitutes_for_demo_sentence_include_avoid(real_adapter):
    """Top-5 substitutes for "evade" should contain "avoid" (soft sanity check)."""
    sentence = "He attempted to evade the issue"
    enc = real_adapter.encode(sentence, "eng_Latn", "eng_Latn")
    prefix_ids, _ = real_adapter.tokenize("He attempted to", "eng_Latn")
    prefix = real_adapter.decoder_start_ids("eng_Latn") + prefix_ids
    entries = real_adapter.next_logprobs(enc, prefix, 50)

    surfaces = []
    for tid, _ in entries:
        piece = real_adapter.detokenize_wire([tid])
        if piece.startswith(" ") and piece.strip().isalpha():
            surfaces.append(piece.strip().lower())
        if len(surfaces) >= 5:
            break
    assert "avoid" in surfaces, surfaces
